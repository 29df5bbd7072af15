"""Compiled vs fallback timings for the two hot loops.

* scattering: the shooting recurrence, ``_shoot`` (numba) vs ``_shoot_python``
* Fock oracle: sparse assembly, ``_assemble_loops`` (numba) vs ``_assemble_numpy``

Usage::

    python benchmarks/bench_accel.py [--repeat 5] [--n-max 80]

Each pair is checked for agreement before timing.  The first compiled call
is excluded (it may trigger JIT compilation or a cache load).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bogospec.fock_oracle import FockBasis, _assemble_loops, _assemble_numpy, random_admissible_form
from bogospec.scattering import _geometry, _shoot, _shoot_python, default_grid, square_barrier


def best_of(f, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_shoot(repeat):
    pot = square_barrier(4.0, 1.0)
    r = default_grid(pot, 40.0).nodes()
    hm, hp, w, _ = _geometry(r)
    q = np.where(r < 1.0, 2.0, 0.0)
    _shoot(hm, hp, w, q, 1e-3)
    t_nb, a = best_of(lambda: _shoot(hm, hp, w, q, 1e-3), repeat)
    t_py, b = best_of(lambda: _shoot_python(hm, hp, w, q, 1e-3), repeat)
    err = float(np.abs(a - b).max() / np.abs(b).max())
    return "scattering shoot", r.size, t_nb, t_py, err


def bench_fock(repeat, n_max):
    form = random_admissible_form(3, np.random.default_rng(0))
    basis = FockBasis(3, n_max)
    st = basis.states()
    table = basis.index_table(st)
    args = (st, table, n_max + 1, np.ascontiguousarray(form.Phi), np.ascontiguousarray(form.Gamma))
    _assemble_loops(*args)
    t_nb, a = best_of(lambda: _assemble_loops(*args), repeat)
    t_np, b = best_of(lambda: _assemble_numpy(*args), repeat)
    import scipy.sparse as sp

    Ha = sp.csr_matrix((a[2], (a[0], a[1])), shape=(basis.dim,) * 2)
    Hb = sp.csr_matrix((b[2], (b[0], b[1])), shape=(basis.dim,) * 2)
    err = float(abs(Ha - Hb).max())
    return "fock assembly", basis.dim, t_nb, t_np, err


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n-max", type=int, default=80)
    args = ap.parse_args(argv)
    print(f"{'kernel':<18} {'size':>8} {'numba [s]':>11} {'fallback [s]':>13} {'speedup':>8} {'max diff':>9}")
    for name, size, t1, t2, err in (bench_shoot(args.repeat), bench_fock(args.repeat, args.n_max)):
        print(f"{name:<18} {size:>8} {t1:>11.4f} {t2:>13.4f} {t2 / t1:>8.1f} {err:>9.1e}")


if __name__ == "__main__":
    main()
