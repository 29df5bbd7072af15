import numpy as np
import pytest

from bogospec import desk
from bogospec.errors import ValidationError
from bogospec.gp_solver import PeriodicBasis, uniform_state
from bogospec.operators import (
    assemble_E,
    assemble_hgp,
    excitation_levels,
    expand_multiplicity,
    matrix_sqrt,
    matrix_sqrt_integral,
)


def test_free_spectrum_is_oscillator():
    sp = desk.spectrum(a0=0.0)
    np.testing.assert_allclose(sp.eigenvalues[:9], [2, 2, 2, 4, 4, 4, 4, 4, 4], atol=1e-3)
    np.testing.assert_allclose(sp.eigenvalues, sp.hgp_eigenvalues, atol=1e-10)


def test_hgp_annihilates_condensate():
    bu = desk.bundle()
    assert bu.hgp_phi0_norm <= 1e-7
    assert bu.min_perp_eig > 0
    assert np.abs(bu.Q @ bu.Q - bu.Q).max() <= 1e-12
    assert np.abs(bu.Q @ bu.phi0).max() <= 1e-12


def test_spectrum_properties():
    sp = desk.spectrum()
    assert sp.min_eig > 0
    assert sp.monotone
    assert np.all(sp.eigenvalues[:10] > sp.hgp_eigenvalues[:10])
    # dipole (Kohn) mode stays at the trap frequency
    assert sp.by_channel[1][0] == pytest.approx(2.0, abs=1e-3)


def test_spectrum_grid_refinement():
    e = desk.spectrum().eigenvalues[:10]
    f = desk.spectrum(n=143).eigenvalues[:10]
    assert np.abs(f / e - 1).max() <= 1e-4


def test_E_squared_matches_product(rng):
    bu = desk.bundle()
    ch = bu.channels[0]
    Hp = ch.H_perp
    K = ch.restrict(np.diag(bu.c * ch.phi**2))
    Hh = matrix_sqrt(Hp)
    e = np.sqrt(np.linalg.eigvalsh(Hh @ (Hp + 2 * K) @ Hh))
    np.testing.assert_allclose(e, desk.spectrum().by_channel[0], rtol=1e-10)


def test_periodic_dispersion(a0_exact):
    b = PeriodicBasis(8, 1.0)
    sp = assemble_E(assemble_hgp(uniform_state(b, a0_exact)))
    k = b.momenta
    p2 = np.sort((k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2).ravel())[1:21]
    exact = np.sqrt(p2**2 + 16 * np.pi * a0_exact * p2)
    assert np.abs(sp.eigenvalues[:20] / exact - 1).max() <= 1e-6


def test_matrix_sqrt_basics(rng):
    np.testing.assert_allclose(matrix_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(matrix_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    X = rng.normal(size=(20, 20))
    S = X @ X.T + np.eye(20)
    assert np.abs(matrix_sqrt(S) - matrix_sqrt_integral(S)).max() <= 1e-6
    with pytest.raises(ValidationError):
        matrix_sqrt(-np.eye(2))


def test_excitation_levels_examples():
    np.testing.assert_allclose(excitation_levels([1.0, 2.5], 3.1).levels, [0, 1, 2, 2.5, 3])
    np.testing.assert_allclose(excitation_levels([2.0], 5).levels, [0, 2, 4])


def test_excitation_levels_brute_force():
    eigs = [2.0, 2.0, 2.0, 4.0, 4.0]
    got = excitation_levels(eigs, 4.0)
    np.testing.assert_allclose(got.levels, [0, 2, 4])
    counts = {}
    for occ in np.ndindex(*(3,) * 5):
        e = float(np.dot(occ, eigs))
        if e <= 4.0:
            counts[e] = counts.get(e, 0) + 1
    assert tuple(got.multiplicities) == tuple(counts[k] for k in sorted(counts)) == (1, 3, 8)


def test_expand_multiplicity():
    np.testing.assert_allclose(expand_multiplicity([[1.0, 3.0], [2.0]], [1, 3]), [1, 2, 2, 2, 3])
