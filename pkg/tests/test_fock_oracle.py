import numpy as np
import pytest

from bogospec.bogo_diag import QuadraticForm, diagonalize_quadratic
from bogospec.errors import ConvergenceError, ResourceError, ValidationError
from bogospec.fock_oracle import (
    FockBasis,
    build_fock_hamiltonian,
    certified_spectrum,
    compare_spectrum,
    default_fixtures,
    load_fixtures,
    oracle_spectrum,
    random_admissible_form,
    run_fixture,
    save_fixtures,
)


def test_number_operator():
    h = build_fock_hamiltonian(QuadraticForm([[5.0]], [[0.0]]), 3)
    np.testing.assert_array_equal(h.H.toarray(), np.diag([0.0, 5.0, 10.0, 15.0]))


def test_pair_creation_matrix_element():
    H = build_fock_hamiltonian(QuadraticForm([[5.0]], [[3.0]]), 4).H.toarray()
    assert H[2, 0] == pytest.approx(1.5 * np.sqrt(2))
    assert H[0, 2] == pytest.approx(1.5 * np.sqrt(2))


def test_swap_symmetry():
    f = QuadraticForm([[2.0, 0.3], [0.3, 2.0]], [[0.5, 0.2], [0.2, 0.5]])
    h = build_fock_hamiltonian(f, 8)
    st = h.basis.states()
    table = h.basis.index_table(st)
    perm = table[st[:, 1] * 9 + st[:, 0]]
    H = h.H.toarray()
    np.testing.assert_allclose(H[np.ix_(perm, perm)], H, atol=1e-14)


def test_single_mode_spectrum():
    sp = oracle_spectrum(build_fock_hamiltonian(QuadraticForm([[5.0]], [[3.0]]), 60), 2)
    assert sp.ground == pytest.approx(-0.5, abs=1e-6)
    assert sp.gaps[0] == pytest.approx(4.0, abs=1e-6)


def test_free_spectrum_is_number_sums():
    sp = oracle_spectrum(build_fock_hamiltonian(QuadraticForm(np.diag([2.0, 3.0]), np.zeros((2, 2))), 6), 4, certify=False)
    np.testing.assert_allclose(sp.eigenvalues, [0, 2, 3, 4])


def test_two_mode_offdiagonal_against_bogoliubov():
    f = QuadraticForm(np.diag([2.0, 3.0]), [[0.0, 0.5], [0.5, 0.0]])
    r = compare_spectrum(certified_spectrum(f, 6, N_start=20), diagonalize_quadratic(f), 5)
    assert r.max_residual <= 1e-6


def test_random_three_mode_fixture():
    fx = default_fixtures(3)[2]
    assert len(fx["phi"]) == 3
    assert run_fixture(fx).max_residual <= 1e-5


def test_backends_agree(rng):
    f = random_admissible_form(3, rng)
    a = build_fock_hamiltonian(f, 10, backend="numba").H
    b = build_fock_hamiltonian(f, 10, backend="numpy").H
    assert abs(a - b).max() <= 1e-13


def test_variational_in_truncation(rng):
    f = random_admissible_form(2, rng)
    g = [oracle_spectrum(build_fock_hamiltonian(f, n), 1, certify=False).ground for n in (4, 8, 16)]
    assert g[0] >= g[1] >= g[2]
    assert build_fock_hamiltonian(f, 10).parity_leak == 0.0


def test_certification_failure_and_limits():
    f = QuadraticForm([[1.0]], [[0.9]])
    with pytest.raises(ConvergenceError):
        oracle_spectrum(build_fock_hamiltonian(f, 4), 2)
    with pytest.raises(ValidationError):
        FockBasis(4, 3)
    with pytest.raises(ResourceError):
        FockBasis(3, 200)


def test_fixture_file_roundtrip(tmp_path):
    fx = default_fixtures(4)
    p = tmp_path / "fx.json"
    save_fixtures(fx, p)
    assert load_fixtures(p) == fx
    p.write_text("{}")
    with pytest.raises(ValidationError):
        load_fixtures(p)
