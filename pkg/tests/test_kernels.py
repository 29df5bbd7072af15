import numpy as np
import pytest

from bogospec import desk
from bogospec.bogo_diag import QuadraticForm, check_alpha_properties, diagonalize_quadratic
from bogospec.errors import ValidationError
from bogospec.kernels import assemble_tilde_forms, build_kernels, compare_Etilde_E, fit_ratio_decay
from bogospec.scattering import solve_neumann, zero_potential


def _forms(N, ell=desk.ELL, n=desk.N_POINTS):
    bu = desk.bundle(n=n)
    kern = build_kernels(desk.state(n=n), desk.neumann(N, ell), N, bundle=bu)
    return kern, assemble_tilde_forms(kern, bu)


def test_free_case_kernels_vanish():
    st, bu = desk.state(a0=0.0), desk.bundle(a0=0.0)
    kern = build_kernels(st, solve_neumann(zero_potential(), 0.2, 50), 50, bundle=bu, continuum=False)
    assert all(np.abs(c.eta).max() == 0 and np.abs(c.K_N).max() == 0 for c in kern.channels)
    forms = assemble_tilde_forms(kern, bu)
    for tc, ch in zip(forms.channels, bu.channels):
        np.testing.assert_allclose(tc.D, ch.H_perp, atol=1e-12)
    cmp = compare_Etilde_E(forms, desk.spectrum(a0=0.0), 50)
    assert cmp.max_deviation <= 1e-10


def test_desk_kernel_structure():
    kern, forms = _forms(50)
    assert kern.symmetry_residual <= 1e-12
    assert kern.hyperbolic_residual <= 1e-10
    assert kern.eta_phi0_norm <= 1e-10
    assert forms.identity_residual_D <= 1e-8
    assert forms.identity_residual_sum <= 1e-8
    Q = desk.bundle().Q
    assert np.abs(Q @ kern.eta - kern.eta).max() <= 1e-10


def test_eta_hs_scales_like_sqrt_ell():
    vals = [_forms(50, ell)[0].continuum.eta_hs / np.sqrt(ell) for ell in (0.1, 0.2, 0.4)]
    assert max(vals) / min(vals) - 1 <= 0.25


def test_continuum_values_frozen():
    # reference from a brute-force 3D quadrature of the kernel (agreement 6e-6)
    c = _forms(50)[0].continuum
    assert c.eta_hs == pytest.approx(0.0612104, rel=1e-4)
    assert np.isfinite(c.sup_eta_ratio) and np.isfinite(c.pointwise_C)


def test_sup_ratio_grid_stable():
    a = _forms(50)[0].continuum.sup_mu_ratio
    b = _forms(50, n=143)[0].continuum.sup_mu_ratio
    assert abs(b / a - 1) <= 0.05


def test_gamma_tilde_uniformly_bounded():
    hs = [_forms(N)[1].gamma_hs for N in (25, 50, 100)]
    assert max(hs) / min(hs) - 1 <= 0.3


def test_ratio_decay_and_first_level():
    reps = [compare_Etilde_E(_forms(N)[1], desk.spectrum(), N) for N in desk.N_LIST]
    dev = [r.max_deviation for r in reps]
    assert all(a > b for a, b in zip(dev, dev[1:]))
    p, C = fit_ratio_decay(reps)
    assert p <= -0.8
    first = reps[2].first_ratio
    assert abs(first - 1) <= 5 / 100


def test_alpha_properties_on_tilde_forms():
    _, forms = _forms(50)
    f = QuadraticForm(forms.Phi_tilde, forms.Gamma_tilde)
    pr = check_alpha_properties(diagonalize_quadratic(f), f)
    assert pr.passed
    assert pr.C / pr.c <= 10


def test_mismatched_inputs_rejected():
    with pytest.raises(ValidationError):
        build_kernels(desk.state(), desk.neumann(50.0), 100.0)
    with pytest.raises(ValidationError):
        build_kernels(desk.state(a0=0.0), desk.neumann(50.0), 50.0)
