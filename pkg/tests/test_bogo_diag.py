import json

import numpy as np
import pytest

from bogospec.bogo_diag import (
    QuadraticForm,
    bogoliubov_spectrum,
    check_alpha_properties,
    diagonalize_quadratic,
    form_to_dict,
    load_form,
)
from bogospec.errors import ValidationError
from bogospec.fock_oracle import random_admissible_form


def test_single_mode_closed_form():
    f = QuadraticForm([[5.0]], [[3.0]])
    d = diagonalize_quadratic(f)
    assert d.eigenvalues[0] == pytest.approx(4.0, abs=1e-12)
    assert d.ground_shift == pytest.approx(-0.5, abs=1e-12)
    assert d.ground_shift_literal == pytest.approx(-0.5, abs=1e-12)
    # A = D^{1/2} E~^{-1/2} = sqrt(2)/2, alpha = log A
    assert d.A[0, 0] == pytest.approx(np.sqrt(0.5))
    assert d.alpha[0, 0] == pytest.approx(0.5 * np.log(0.5))
    pr = check_alpha_properties(d, f)
    assert pr.A_minus_I_hs == pytest.approx(1 - np.sqrt(0.5), abs=1e-12)


def test_free_form_is_identity(rng):
    X = rng.normal(size=(4, 4))
    f = QuadraticForm(X @ X.T + np.eye(4), np.zeros((4, 4)))
    d = diagonalize_quadratic(f)
    np.testing.assert_allclose(np.sort(d.eigenvalues), np.linalg.eigvalsh(f.Phi), atol=1e-12)
    assert abs(d.ground_shift) <= 1e-12
    pr = check_alpha_properties(d, f)
    assert pr.A_minus_I_hs <= 1e-12 and pr.B_minus_I_hs <= 1e-12
    assert np.abs(d.alpha).max() <= 1e-12


def test_two_mode_E_squared(rng):
    f = random_admissible_form(2, rng)
    d = diagonalize_quadratic(f)
    Dh = np.real(np.linalg.eigh(f.D)[1] @ np.diag(np.sqrt(np.linalg.eigvalsh(f.D))) @ np.linalg.eigh(f.D)[1].T)
    M = Dh @ (f.D + 2 * f.Gamma) @ Dh
    np.testing.assert_allclose(np.sort(d.eigenvalues) ** 2, np.linalg.eigvalsh(M), atol=1e-10)
    for v in d.residuals.values():
        assert v <= 1e-10


def test_shift_is_nonpositive_and_scales(rng):
    for n in (1, 2, 3, 5):
        f = random_admissible_form(n, rng)
        d = diagonalize_quadratic(f)
        assert d.ground_shift <= 1e-14
        assert d.ground_shift == pytest.approx(d.ground_shift_literal, abs=1e-10)
        d2 = diagonalize_quadratic(f.scaled(2.5))
        np.testing.assert_allclose(d2.eigenvalues, 2.5 * d.eigenvalues, rtol=1e-12)


def test_properties_on_random_forms(rng):
    f = random_admissible_form(4, rng)
    pr = check_alpha_properties(diagonalize_quadratic(f), f)
    assert pr.passed
    assert pr.C / pr.c <= 10


def test_rejects_inadmissible():
    with pytest.raises(ValidationError):
        diagonalize_quadratic(QuadraticForm([[1.0]], [[2.0]]))
    with pytest.raises(ValidationError):
        QuadraticForm([[1.0, 2.0], [0.0, 1.0]], np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        QuadraticForm(np.eye(2), np.eye(3))


def test_form_json_roundtrip(tmp_path, rng):
    f = random_admissible_form(3, rng)
    p = tmp_path / "f.json"
    p.write_text(json.dumps(form_to_dict(f)))
    g = load_form(p)
    np.testing.assert_array_equal(g.Phi, f.Phi)
    np.testing.assert_array_equal(bogoliubov_spectrum(diagonalize_quadratic(g)), np.sort(diagonalize_quadratic(f).eigenvalues))
    with pytest.raises(ValidationError):
        load_form({"phi": [[1.0]]})
