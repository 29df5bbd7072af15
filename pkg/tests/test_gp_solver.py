import numpy as np
import pytest

from bogospec import desk
from bogospec.errors import ValidationError
from bogospec.gp_solver import (
    PeriodicBasis,
    RadialBasis,
    SolverOptions,
    check_decay,
    gp_energy,
    harmonic_trap,
    minimize_gp,
    uniform_state,
)


def test_free_oscillator():
    st = desk.state(a0=0.0)
    assert st.E_GP == pytest.approx(3.0, abs=1e-6)
    assert st.eps_GP == pytest.approx(3.0, abs=1e-6)
    b = st.basis
    gauss = np.pi**-0.75 * np.exp(-0.5 * b.r**2)
    assert np.abs(st.phi_values - gauss).max() <= 1e-6


def test_desk_state_invariants():
    st = desk.state()
    assert st.residual <= 1e-8
    assert abs(st.multiplier_gap) <= 1e-10
    assert st.phi0.min() > 0
    assert np.linalg.norm(st.phi0) == pytest.approx(1.0, abs=1e-12)
    hist = st.energy_history
    assert np.all(np.diff(hist) <= 1e-14 * np.maximum(1.0, np.abs(hist[:-1])))


def test_random_initializations_agree():
    r1 = desk.state(init="random", seed=1)
    r2 = desk.state(init="random", seed=2)
    assert np.linalg.norm(r1.phi0 - r2.phi0) <= 1e-6


def test_thomas_fermi_regime():
    st = minimize_gp(harmonic_trap(), 10.0, RadialBasis(120, 12.0))
    assert abs(st.eps_GP / 150.0**0.4 - 1) <= 0.10
    assert abs(st.multiplier_gap) <= 1e-10


def test_gaussian_energy_closed_form(a0_exact):
    b = RadialBasis(160, 10.0)
    v = np.pi**-0.75 * np.exp(-0.5 * b.r**2) / b.scale
    v /= np.linalg.norm(v)
    e = gp_energy(v, harmonic_trap(), a0_exact, b)
    assert e == pytest.approx(3 + 4 * np.pi * a0_exact * (2 * np.pi) ** -1.5, abs=1e-7)
    assert gp_energy(v, harmonic_trap(), 0.0, b) == pytest.approx(3.0, abs=1e-7)


def test_energy_grid_refinement():
    e1 = desk.state().E_GP
    e2 = desk.state(n=143).E_GP
    assert abs(e1 - e2) <= 1e-7


def test_eps_monotone_in_a0():
    eps = [minimize_gp(harmonic_trap(), a, RadialBasis(96, 8.0)).eps_GP for a in (0.0, 0.2, 0.5)]
    assert eps[0] < eps[1] < eps[2]


def test_tolerance_is_met():
    st = minimize_gp(harmonic_trap(), 0.3, RadialBasis(96, 8.0), SolverOptions(tol_residual=1e-6))
    assert st.residual <= 1e-6


def test_decay_constants_finite_and_increasing():
    rep = check_decay(desk.state(), [1.0, 2.0, 5.0])
    assert np.all(np.isfinite(rep.C_phi))
    assert np.all(np.diff(rep.C_phi) > 0)
    assert np.isfinite(rep.fourier_C)


def test_periodic_uniform_state(a0_exact):
    st = uniform_state(PeriodicBasis(6, 1.0), a0_exact)
    assert st.eps_GP == pytest.approx(8 * np.pi * a0_exact)
    assert abs(st.multiplier_gap) <= 1e-12


def test_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        minimize_gp(harmonic_trap(), -1.0, RadialBasis(96, 8.0))
    with pytest.raises(ValidationError):
        minimize_gp(harmonic_trap(), 0.1, RadialBasis(20, 8.0))
    with pytest.raises(ValidationError):
        gp_energy(np.ones(96), harmonic_trap(), 0.1, RadialBasis(96, 8.0))
