import os
import subprocess
import sys

import numpy as np

from bogospec import _accel
from bogospec.scattering import _geometry, _shoot, _shoot_python


def test_shoot_backends_agree():
    r = np.linspace(0.0025, 5, 2000)
    hm, hp, w, _ = _geometry(r)
    q = np.where(r < 1, 4.0, 0.0)
    a = _shoot(hm, hp, w, q, 0.01)
    b = _shoot_python(hm, hp, w, q, 0.01)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_no_numba_flag_selects_fallback():
    code = "from bogospec import _accel; print(_accel.backend())"
    env = dict(os.environ, BOGOSPEC_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_fallback_reproduces_a0():
    code = "from bogospec.scattering import *; print(repr(solve_zero_energy(square_barrier(4.0, 1.0)).a0))"
    env = dict(os.environ, BOGOSPEC_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    from bogospec.scattering import solve_zero_energy, square_barrier

    assert abs(float(out.stdout) - solve_zero_energy(square_barrier(4.0, 1.0)).a0) <= 1e-12


def test_set_threads_is_safe():
    _accel.set_threads(None)
    _accel.set_threads(1)
