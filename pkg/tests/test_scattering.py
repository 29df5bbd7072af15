import time

import numpy as np
import pytest

from bogospec import desk
from bogospec.errors import ValidationError
from bogospec.scattering import (
    RadialGrid,
    check_asymptotics,
    fourier_w,
    load_potential,
    solution_record,
    solve_neumann,
    solve_zero_energy,
    square_barrier,
    zero_potential,
)


def test_square_barrier_a0_matches_matching_condition(a0_exact):
    t0 = time.perf_counter()
    s = solve_zero_energy(square_barrier(4.0, 1.0))
    assert time.perf_counter() - t0 < 1.0
    assert abs(s.a0 - a0_exact) <= 1e-6 * a0_exact
    assert s.a0_mismatch <= 1e-6
    assert s.a0 == pytest.approx(0.37182, abs=5e-6)


def test_zero_potential_is_trivial():
    s = solve_zero_energy(zero_potential())
    assert s.a0 == 0.0
    np.testing.assert_array_equal(s.f, 1.0)
    n = solve_neumann(zero_potential(), 0.5, 200)
    assert n.neumann.lam == 0.0
    np.testing.assert_array_equal(n.neumann.f_ell, 1.0)
    np.testing.assert_array_equal(n.neumann.w_ell, 0.0)


def test_hard_sphere_limit():
    assert abs(solve_zero_energy(square_barrier(1e6, 1.0)).a0 - 1.0) <= 1e-2


def test_a0_increases_with_barrier_height():
    a = [solve_zero_energy(square_barrier(v, 1.0)).a0 for v in (1.0, 4.0, 16.0)]
    assert a[0] < a[1] < a[2] < 1.0


def test_neumann_eigenvalue_at_ell_N_100():
    s = desk.neumann(500.0, 0.2)
    assert s.neumann.ell_N == pytest.approx(100.0)
    # 3 a0 / (N ell)**3 (1 + 9/5 a0 / (N ell)), a0 = 0.37182
    assert s.neumann.lam == pytest.approx(1.123e-6, rel=1e-3)
    nb = s.neumann
    assert nb.f_ell.min() >= 0 and nb.f_ell.max() <= 1
    assert nb.w_ell.min() >= 0 and nb.w_ell.max() <= 1
    target = 8 * np.pi * s.a0 * (1 + 1.5 * s.a0 / 100.0)
    assert abs(nb.integral_Vf - target) <= 20.0 / 100.0**2


def test_neumann_asymptotics_family():
    rep = check_asymptotics([desk.neumann(L / 0.5, 0.5) for L in (100, 300, 1000, 3000)])
    assert 1.7 <= rep.c1 <= 1.9
    assert rep.Vf_exponent <= -1.7
    assert abs(rep.w_scaled[-1] / rep.w_target - 1) <= 0.02
    assert np.isfinite(rep.C_w)


def test_asymptotics_flags_free_family():
    fam = [solve_neumann(zero_potential(), 0.5, L / 0.5) for L in (100, 300, 1000, 3000)]
    rep = check_asymptotics(fam)
    assert rep.trivial
    assert np.all(rep.lambda_scaled == 0)


def test_asymptotics_needs_a_decade():
    with pytest.raises(ValidationError):
        check_asymptotics([desk.neumann(L / 0.5, 0.5) for L in (100, 120, 150, 200)])


def test_fourier_w_zero_momentum_and_decay():
    s = desk.neumann(200.0, 0.5)
    out = fourier_w(s, np.geomspace(5, 50, 30))
    assert fourier_w(s, [1e-9])["w_hat"][0] == pytest.approx(s.neumann.integral_w, rel=1e-6)
    assert np.isfinite(out["C"])
    free = fourier_w(solve_neumann(zero_potential(), 0.5, 200), [1.0, 10.0])
    np.testing.assert_array_equal(free["w_hat"], 0.0)


def test_potential_file_roundtrip(tmp_path):
    r = np.linspace(0, 2, 401)
    p = tmp_path / "pot.txt"
    np.savetxt(p, np.column_stack([r, np.where(r < 1, 4.0, 0.0)]), header="r V")
    s = solve_zero_energy(load_potential(p))
    assert s.a0 == pytest.approx(float(desk.A0_EXACT), rel=2e-2)


def test_bad_potential_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1 2 3\n4 5 6\n")
    with pytest.raises(ValidationError):
        load_potential(p)


def test_solution_record_keys():
    rec = solution_record(desk.neumann(500.0, 0.2))
    assert {"a0", "lambda_ell", "ell_N", "integral_Vf", "profile"} <= set(rec)
    assert rec["profile"][0][1] <= rec["profile"][-1][1]


def test_grid_validation():
    with pytest.raises(ValidationError):
        RadialGrid(-1.0, 100)
