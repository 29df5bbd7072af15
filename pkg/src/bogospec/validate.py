"""Cross-module property suite.

A :class:`Fixture` names a registered check, its parameters and the expected
values.  Each expected value carries a tolerance, a comparison mode and a
provenance label.  :func:`run_suite` executes every fixture and records one
:class:`Entry` per expectation.  Failures and exceptions are recorded as
entries and never raised.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import desk
from .errors import ValidationError

__all__ = ["Expect", "Fixture", "Entry", "SuiteReport", "CHECKS", "register", "default_fixtures", "run_suite"]

PROVENANCE = ("analytic", "oracle", "self-convergence", "paper-asymptotic")
MODES = ("abs", "rel", "le", "ge", "true")


@dataclass(frozen=True)
class Expect:
    """One expected value.

    ``mode`` is ``"abs"`` (``|m - v| <= tol``), ``"rel"``
    (``|m - v| <= tol |v|``), ``"le"`` (``m <= v + tol``), ``"ge"``
    (``m >= v - tol``) or ``"true"`` (``bool(m)``).
    """

    key: str
    value: float | bool
    tol: float = 0.0
    mode: str = "abs"
    provenance: str = "analytic"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown comparison mode {self.mode!r}")
        if self.provenance not in PROVENANCE:
            raise ValidationError(f"unknown provenance {self.provenance!r}")

    def passes(self, m) -> bool:
        if self.mode == "true":
            return bool(m)
        m = float(m)
        if not np.isfinite(m):
            return False
        v = float(self.value)
        if self.mode == "abs":
            return abs(m - v) <= self.tol
        if self.mode == "rel":
            return abs(m - v) <= self.tol * abs(v)
        if self.mode == "le":
            return m <= v + self.tol
        return m >= v - self.tol


@dataclass(frozen=True)
class Fixture:
    name: str
    check: str
    expect: tuple
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Entry:
    fixture: str
    check: str
    measured: object
    expected: object
    tolerance: float
    mode: str
    provenance: str
    passed: bool
    seconds: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class SuiteReport:
    entries: tuple

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.entries),
            "n_failed": len(self.failures),
            "entries": [asdict(e) for e in self.entries],
        }

    def table(self) -> str:
        rows = [("fixture", "check", "measured", "expected", "tol", "provenance", "result")]
        for e in self.entries:
            meas = e.error if e.error else _fmt(e.measured)
            rows.append((e.fixture, e.check, meas, f"{e.mode} {_fmt(e.expected)}", f"{e.tolerance:.1e}",
                         e.provenance, "PASS" if e.passed else "FAIL"))
        widths = [min(max(len(r[i]) for r in rows), 48) for i in range(len(rows[0]))]
        lines = ["  ".join(c[:48].ljust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        lines.append(f"{len(self.entries) - len(self.failures)}/{len(self.entries)} checks passed")
        return "\n".join(lines)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, float, np.floating, np.integer)):
        return f"{float(x):.6g}"
    return str(x)


# ---------------------------------------------------------------------------
# registry

CHECKS: dict = {}


def register(name):
    def wrap(f):
        CHECKS[name] = f
        return f

    return wrap


@register("scatter_square_barrier")
def _c_scatter(p):
    from .scattering import solve_zero_energy, square_barrier

    s = solve_zero_energy(square_barrier(p.get("V0", 4.0), p.get("R", 1.0)))
    return {"a0": s.a0, "a0_mismatch": s.a0_mismatch, "tail_residual": s.tail_residual}


@register("scatter_hard_sphere")
def _c_hard(p):
    from .scattering import solve_zero_energy, square_barrier

    return {"a0": solve_zero_energy(square_barrier(1e6, 1.0)).a0}


@register("scatter_refinement")
def _c_refine(p):
    from .scattering import default_grid, solve_zero_energy

    pot = desk.potential()
    a = solve_zero_energy(pot, default_grid(pot, 40.0, h=5e-4)).a0
    b = solve_zero_energy(pot, default_grid(pot, 40.0, h=2.5e-4)).a0
    return {"a0_change": abs(a - b) / b}


@register("neumann_properties")
def _c_neu(p):
    s = desk.neumann(p.get("N", 200.0), p.get("ell", 0.5))
    nb = s.neumann
    tail = s.r >= desk.R
    w = nb.w_ell[tail]
    s4 = desk.neumann(2e4, 0.5)
    return {
        "f_range": bool(nb.f_ell.min() >= -1e-12 and nb.f_ell.max() <= 1 + 1e-12),
        "w_monotone": bool(np.all(np.diff(w) <= 1e-14)),
        "lambda_positive": bool(nb.lam > 0),
        "lambda_scaled_1e4": s4.neumann.lam * s4.neumann.ell_N**3 / (3 * s4.a0),
    }


@register("neumann_asymptotics")
def _c_asym(p):
    from .scattering import check_asymptotics

    rep = check_asymptotics([desk.neumann(L / 0.5, 0.5) for L in (100, 300, 1000, 3000)])
    return {"c1": rep.c1, "Vf_exponent": rep.Vf_exponent, "w_ratio": rep.w_scaled[-1] / rep.w_target, "C_w": rep.C_w}


@register("fourier_w")
def _c_fw(p):
    from .scattering import fourier_w

    s = desk.neumann(100.0, 0.5)
    out = fourier_w(s, np.geomspace(5, 50, 40))
    zero = fourier_w(s, [1e-9])["w_hat"][0] / s.neumann.integral_w - 1
    return {"C_spread": out["C_spread"], "C_finite": bool(np.isfinite(out["C"])), "p0_error": abs(zero)}


@register("free_case_zeros")
def _c_free(p):
    from .ebog import ebog_kappa, ebog_mollified
    from .kernels import assemble_tilde_forms, build_kernels, compare_Etilde_E
    from .scattering import solve_neumann, zero_potential

    st = desk.state(a0=0.0)
    bu = desk.bundle(a0=0.0)
    sp = desk.spectrum(a0=0.0)
    hp = np.sort(np.concatenate([np.repeat(np.linalg.eigvalsh(ch.H_perp), ch.weight) for ch in bu.channels]))
    scat = solve_neumann(zero_potential(), 0.2, 50)
    kern = build_kernels(st, scat, 50, bundle=bu, continuum=False)
    forms = assemble_tilde_forms(kern, bu)
    cmp = compare_Etilde_E(forms, sp, 50)
    return {
        "E_GP_minus_3": st.E_GP - 3.0,
        "a0": scat.a0,
        "E_equals_H": float(np.abs(sp.eigenvalues - hp).max()),
        "eta_max": float(max(np.abs(c.eta).max() for c in kern.channels)),
        "Etilde_vs_E": cmp.max_deviation,
        "ebog_kappa": abs(ebog_kappa(bu, desk.KAPPA).total),
        "ebog_mollified": abs(ebog_mollified(bu).extrapolated),
    }


@register("gp_desk")
def _c_gp(p):
    st = desk.state()
    hist = st.energy_history
    inc = np.diff(hist) - 1e-14 * np.maximum(1.0, np.abs(hist[:-1]))
    r1 = desk.state(init="random", seed=1)
    r2 = desk.state(init="random", seed=2)
    return {
        "residual": st.residual,
        "multiplier_gap": st.multiplier_gap,
        "norm": float(np.linalg.norm(st.phi0)),
        "positive": bool(st.phi0.min() > 0),
        "energy_descent": bool(np.all(inc <= 0)),
        "uniqueness": float(np.linalg.norm(r1.phi0 - r2.phi0)),
    }


@register("gp_tolerance_tracking")
def _c_gptol(p):
    from .gp_solver import RadialBasis, SolverOptions, harmonic_trap, minimize_gp

    out = {}
    for tol in (1e-6, 1e-9):
        st = minimize_gp(harmonic_trap(), desk.A0_EXACT, RadialBasis(96, 8.0), SolverOptions(tol_residual=tol))
        out[f"residual_over_tol_{tol:g}"] = st.residual / tol
    return out


@register("gp_monotone_a0")
def _c_gpmono(p):
    from .gp_solver import RadialBasis, harmonic_trap, minimize_gp

    eps = [minimize_gp(harmonic_trap(), a, RadialBasis(96, 8.0)).eps_GP for a in (0.1, 0.3, 0.6)]
    return {"eps_nondecreasing": bool(np.all(np.diff(eps) >= 0))}


@register("gp_thomas_fermi")
def _c_tf(p):
    from .gp_solver import RadialBasis, harmonic_trap, minimize_gp

    st = minimize_gp(harmonic_trap(), 10.0, RadialBasis(120, 12.0))
    return {"eps_GP": st.eps_GP}


@register("operators_desk")
def _c_ops(p):
    from .operators import matrix_sqrt

    bu = desk.bundle()
    sp = desk.spectrum()
    ch = bu.channels[0]
    Q = bu.Q
    Hh = matrix_sqrt(ch.H)
    M = Hh @ (ch.H + 2 * bu.c * np.diag(ch.phi**2)) @ Hh
    fine = desk.spectrum(n=143)
    e, h = sp.eigenvalues[:10], sp.hgp_eigenvalues[:10]
    return {
        "hgp_symmetric": float(np.abs(ch.H - ch.H.T).max()),
        "hgp_phi0": bu.hgp_phi0_norm,
        "Q_idempotent": float(np.abs(Q @ Q - Q).max()),
        "min_perp_eig_positive": bool(bu.min_perp_eig > 0),
        # H^{1/2} phi0 is of order sqrt(||H phi0||); compare on that scale
        "M_phi0_scaled": float(np.linalg.norm(M @ bu.phi0)) / np.sqrt(max(bu.hgp_phi0_norm, 1e-300)),
        "refinement_change": float(np.abs(fine.eigenvalues[:10] / e - 1).max()),
        "E_exceeds_H": bool(np.all(e > h)),
        "kohn_mode": float(sp.by_channel[1][0]),
    }


@register("operators_free_spectrum")
def _c_free_spec(p):
    sp = desk.spectrum(a0=0.0)
    expect = np.array([2, 2, 2, 4, 4, 4, 4, 4, 4], float)
    return {"oscillator_levels": float(np.abs(sp.eigenvalues[:9] - expect).max())}


@register("periodic_dispersion")
def _c_periodic(p):
    from .gp_solver import PeriodicBasis, uniform_state
    from .operators import assemble_E, assemble_hgp

    a0 = p.get("a0", desk.A0_EXACT)
    b = PeriodicBasis(8, 1.0)
    sp = assemble_E(assemble_hgp(uniform_state(b, a0)))
    k = b.momenta
    p2 = np.sort((k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2).ravel())[1:21]
    exact = np.sqrt(p2**2 + 16 * np.pi * a0 * p2)
    return {"dispersion_rel_error": float(np.abs(sp.eigenvalues[:20] / exact - 1).max())}


@register("levels")
def _c_levels(p):
    from .operators import excitation_levels

    a = excitation_levels([1.0, 2.5], 3.1).levels
    b = excitation_levels([2.0, 2.0, 2.0, 4.0, 4.0], 4.0)
    e = desk.spectrum().eigenvalues[:6]
    z = 3.0 * e[0] + 0.5
    lv = excitation_levels(e, z).levels
    closed = all(np.min(np.abs(lv - (u + v))) <= 1e-9 for u in lv for v in lv if u + v <= z - 1e-9)
    return {
        "example_1": float(np.abs(a - [0, 1, 2, 2.5, 3]).max()) if a.size == 5 else np.inf,
        "oscillator_multiplicities": tuple(int(x) for x in b.multiplicities) == (1, 3, 8),
        "closed_under_addition": closed,
    }


@register("matrix_sqrt_oracle")
def _c_sqrt(p):
    from .operators import matrix_sqrt, matrix_sqrt_integral

    rng = np.random.default_rng(p.get("seed", 7))
    X = rng.normal(size=(20, 20))
    S = X @ X.T + np.eye(20)
    R = matrix_sqrt(S)
    return {
        "square": float(np.abs(R @ R - S).max() / np.linalg.norm(S, 2)),
        "integral_route": float(np.abs(R - matrix_sqrt_integral(S)).max()),
    }


def _desk_kernels(N, ell=desk.ELL, n=desk.N_POINTS):
    from .kernels import assemble_tilde_forms, build_kernels

    bu = desk.bundle(n=n)
    kern = build_kernels(desk.state(n=n), desk.neumann(N, ell), N, bundle=bu)
    return kern, assemble_tilde_forms(kern, bu)


@register("kernels_desk")
def _c_kern(p):
    from .bogo_diag import QuadraticForm, check_alpha_properties, diagonalize_quadratic

    kern, forms = _desk_kernels(p.get("N", 50))
    ch = kern.channels[0]
    eta = kern.eta
    Q = desk.bundle().Q
    fine, _ = _desk_kernels(p.get("N", 50), n=143)
    ok_pos, ratios, props = [], [], []
    for N in (25, 50, 100):
        _, f = _desk_kernels(N)
        ok_pos += [np.linalg.eigvalsh(tc.D)[0] > 0 and np.linalg.eigvalsh(tc.Phi + tc.Gamma)[0] > 0 for tc in f.channels]
        pr = check_alpha_properties(diagonalize_quadratic(QuadraticForm(f.Phi_tilde, f.Gamma_tilde)))
        ratios.append(pr.C / pr.c)
        props.append(pr.passed)
    return {
        "symmetry": max(kern.symmetry_residual, float(np.abs(eta - eta.T).max())),
        "eta_phi0": kern.eta_phi0_norm,
        "Q_eta": float(np.abs(Q @ eta - eta).max()),
        "Q_K": float(np.abs(Q @ kern.K_N @ Q - kern.K_N).max()),
        "hyperbolic": kern.hyperbolic_residual,
        "identity_D": forms.identity_residual_D,
        "identity_sum": forms.identity_residual_sum,
        "mu_ratio_stable": abs(fine.continuum.sup_mu_ratio / kern.continuum.sup_mu_ratio - 1),
        "pointwise_C_finite": bool(np.isfinite(kern.continuum.pointwise_C)),
        "positivity": bool(all(ok_pos)),
        "alpha_ratio": max(ratios),
        "alpha_properties": all(props),
        "gamma_hs_finite": bool(np.isfinite(forms.gamma_hs)),
        "eta_dim": ch.eta.shape[0],
    }


@register("kernels_gamma_hs")
def _c_ghs(p):
    hs = [_desk_kernels(N)[1].gamma_hs for N in (25, 50, 100)]
    return {"gamma_hs_spread": max(hs) / min(hs) - 1}


@register("bogo_single_mode")
def _c_single(p):
    from .bogo_diag import QuadraticForm, check_alpha_properties, diagonalize_quadratic

    f = QuadraticForm([[5.0]], [[3.0]])
    d = diagonalize_quadratic(f)
    pr = check_alpha_properties(d, f)
    return {
        "E_tilde": float(d.eigenvalues[0]),
        "ground_shift": d.ground_shift,
        "alpha": float(d.alpha[0, 0]),
        "A_minus_I": pr.A_minus_I_hs,
    }


@register("bogo_properties")
def _c_bogo(p):
    from .bogo_diag import QuadraticForm, diagonalize_quadratic
    from .fock_oracle import random_admissible_form

    rng = np.random.default_rng(p.get("seed", 11))
    worst = {"E_squared": 0.0, "symplectic": 0.0, "scale": 0.0, "commuting_shift": -np.inf}
    for _ in range(10):
        f = random_admissible_form(int(rng.integers(1, 6)), rng)
        d = diagonalize_quadratic(f)
        worst["E_squared"] = max(worst["E_squared"], d.residuals["E_squared"])
        worst["symplectic"] = max(worst["symplectic"], d.residuals["symplectic"])
        d3 = diagonalize_quadratic(f.scaled(3.0))
        worst["scale"] = max(worst["scale"], float(np.abs(d3.eigenvalues - 3 * d.eigenvalues).max()),
                             abs(d3.ground_shift - 3 * d.ground_shift))
        # commuting family: Gamma a polynomial of Phi
        w, U = np.linalg.eigh(f.Phi)
        G = (U * (0.4 * w * rng.uniform(-1, 1, w.size))) @ U.T
        dc = diagonalize_quadratic(QuadraticForm(f.Phi, G))
        worst["commuting_shift"] = max(worst["commuting_shift"], dc.ground_shift)
    d0 = diagonalize_quadratic(QuadraticForm(np.diag([2.0, 3.0]), np.zeros((2, 2))))
    worst["identity_when_free"] = float(max(np.abs(d0.A - np.eye(2)).max(), np.abs(d0.alpha).max(), abs(d0.ground_shift)))
    return worst


@register("fock_oracle")
def _c_fock(p):
    from .fock_oracle import default_fixtures, run_fixture

    res = [run_fixture(fx) for fx in default_fixtures(p.get("count", 10))]
    return {"max_ground": max(r.ground_residual for r in res), "max_gap": max(r.gap_residual for r in res)}


@register("fock_single_mode")
def _c_fock1(p):
    from .bogo_diag import QuadraticForm
    from .fock_oracle import build_fock_hamiltonian, oracle_spectrum

    sp = oracle_spectrum(build_fock_hamiltonian(QuadraticForm([[5.0]], [[3.0]]), 60), 2)
    return {"ground": sp.ground, "gap": float(sp.gaps[0])}


@register("fock_structure")
def _c_fock_s(p):
    from .fock_oracle import build_fock_hamiltonian, oracle_spectrum, random_admissible_form

    f = random_admissible_form(2, np.random.default_rng(p.get("seed", 5)))
    grounds = [oracle_spectrum(build_fock_hamiltonian(f, n), 1, certify=False).ground for n in (4, 8, 12, 16, 20)]
    h = build_fock_hamiltonian(f, 20)
    return {"variational": bool(np.all(np.diff(grounds) <= 1e-12)), "parity_leak": h.parity_leak}


@register("fock_vs_bogo_2mode")
def _c_fock2(p):
    from .fock_oracle import random_admissible_form, run_fixture

    f = random_admissible_form(2, np.random.default_rng(p.get("seed", 2)))
    r = run_fixture({"phi": f.Phi.tolist(), "gamma": f.Gamma.tolist(), "n_max": 20})
    return {"max_residual": r.max_residual}


@register("etilde_vs_e")
def _c_ete(p):
    from .kernels import compare_Etilde_E, fit_ratio_decay

    reps = [compare_Etilde_E(_desk_kernels(N)[1], desk.spectrum(), N) for N in desk.N_LIST]
    slope, _ = fit_ratio_decay(reps)
    first = [r for r in reps if r.N == 100][0].first_ratio
    return {"decay_exponent": slope, "first_ratio_dev_N100": abs(first - 1) * 100 / 5}


@register("eta_bounds")
def _c_eta(p):
    vals = [_desk_kernels(50, ell)[0].continuum.eta_hs / np.sqrt(ell) for ell in (0.1, 0.2, 0.4)]
    return {"eta_hs_spread": max(vals) / min(vals) - 1}


@register("ebog_desk")
def _c_ebog(p):
    from .ebog import QuadratureSpec, ebog_kappa, ebog_mollified

    bu = desk.bundle()
    a = ebog_kappa(bu, desk.KAPPA)
    b = ebog_kappa(bu, 1.5 * desk.KAPPA)
    q64 = ebog_kappa(bu, desk.KAPPA, QuadratureSpec(64))
    m = ebog_mollified(bu)
    t = a.terms
    return {
        "finite": bool(all(np.isfinite(v) for v in t.values())),
        "kappa_independence": abs(a.total - b.total) / abs(a.total),
        "route_agreement": abs(m.extrapolated - a.total) / abs(a.total),
        "quadrature_self_convergence": max(abs(q64.terms[k] / t[k] - 1) for k in ("Tcomm", "Tcubic")),
        "T1": t["T1"],
        "T2": t["T2"],
        "T3": t["T3"],
        "T5": t["T5"],
        "mollified_order": m.order,
    }


@register("ground_energy")
def _c_ge(p):
    from .ebog import ground_energy

    st0 = desk.state(a0=0.0)
    st = desk.state()
    e1 = ground_energy(100, st, 0.07).total
    e2 = ground_energy(200, st, 0.07).total
    return {"free_N100": ground_energy(100, st0, 0.0).total, "linearity": (e2 - e1) / 100 - st.E_GP}


@register("cli_determinism")
def _c_cli(p):
    import tempfile
    from pathlib import Path

    from .cli import RunConfig, run_pipeline

    cfg = RunConfig()
    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            d = Path(tmp) / f"r{k}"
            m = run_pipeline(cfg.replace(out=str(d)), ["scatter"])
            outs.append((m.config_hash, (d / "scatter.json").read_bytes(), sorted(m.files)))
    return {"identical": outs[0][:2] == outs[1][:2], "files_listed": outs[0][2] == ["scatter.json"]}


# ---------------------------------------------------------------------------
# default fixtures

E = Expect


def default_fixtures() -> list[Fixture]:
    a0 = float(desk.A0_EXACT)
    return [
        Fixture("square-barrier-a0", "scatter_square_barrier",
                (E("a0", a0, 1e-6, "rel", "analytic"), E("a0_mismatch", 0.0, 1e-6, "abs", "analytic"),
                 E("tail_residual", 1e-8, 0.0, "le", "analytic"))),
        Fixture("hard-sphere-limit", "scatter_hard_sphere", (E("a0", 1.0, 1e-2, "abs", "analytic"),)),
        Fixture("scatter-grid-refinement", "scatter_refinement", (E("a0_change", 1e-6, 0.0, "le", "self-convergence"),)),
        Fixture("neumann-properties", "neumann_properties",
                (E("f_range", True, mode="true"), E("w_monotone", True, mode="true"),
                 E("lambda_positive", True, mode="true"),
                 E("lambda_scaled_1e4", 1.0, 0.01, "rel", "paper-asymptotic"))),
        Fixture("neumann-asymptotics", "neumann_asymptotics",
                (E("c1", 1.8, 0.1, "abs", "paper-asymptotic"), E("Vf_exponent", -1.7, 0.0, "le", "paper-asymptotic"),
                 E("w_ratio", 1.0, 0.02, "rel", "paper-asymptotic"), E("C_w", 1e6, 0.0, "le", "paper-asymptotic"))),
        Fixture("fourier-w", "fourier_w",
                (E("C_finite", True, mode="true", provenance="paper-asymptotic"),
                 E("p0_error", 1e-6, 0.0, "le", "analytic"))),
        Fixture("free-case-zeros", "free_case_zeros",
                (E("E_GP_minus_3", 0.0, 1e-6, "abs"), E("a0", 0.0, 0.0), E("E_equals_H", 0.0, 1e-10),
                 E("eta_max", 0.0, 0.0), E("Etilde_vs_E", 0.0, 1e-10), E("ebog_kappa", 0.0, 0.0),
                 E("ebog_mollified", 0.0, 0.0))),
        Fixture("gp-desk", "gp_desk",
                (E("residual", 1e-8, 0.0, "le"), E("multiplier_gap", 0.0, 1e-10), E("norm", 1.0, 1e-12),
                 E("positive", True, mode="true"), E("energy_descent", True, mode="true"),
                 E("uniqueness", 1e-6, 0.0, "le", "self-convergence"))),
        Fixture("gp-tolerance-tracking", "gp_tolerance_tracking",
                (E("residual_over_tol_1e-06", 1.0, 0.0, "le", "self-convergence"),
                 E("residual_over_tol_1e-09", 1.0, 0.0, "le", "self-convergence"))),
        Fixture("gp-monotone-a0", "gp_monotone_a0", (E("eps_nondecreasing", True, mode="true", provenance="self-convergence"),)),
        Fixture("gp-thomas-fermi", "gp_thomas_fermi", (E("eps_GP", 150.0**0.4, 0.1, "rel", "analytic"),)),
        Fixture("operators-desk", "operators_desk",
                (E("hgp_symmetric", 0.0, 1e-12), E("hgp_phi0", 0.0, 1e-7), E("Q_idempotent", 0.0, 1e-12),
                 E("min_perp_eig_positive", True, mode="true"), E("M_phi0_scaled", 0.0, 1.0),
                 E("refinement_change", 1e-4, 0.0, "le", "self-convergence"), E("E_exceeds_H", True, mode="true"),
                 E("kohn_mode", 2.0, 1e-3, "abs", "analytic"))),
        Fixture("operators-free-spectrum", "operators_free_spectrum", (E("oscillator_levels", 0.0, 1e-3),)),
        Fixture("periodic-dispersion", "periodic_dispersion", (E("dispersion_rel_error", 0.0, 1e-6, "abs", "paper-asymptotic"),)),
        Fixture("excitation-levels", "levels",
                (E("example_1", 0.0, 1e-12), E("oscillator_multiplicities", True, mode="true", provenance="oracle"),
                 E("closed_under_addition", True, mode="true"))),
        Fixture("matrix-sqrt", "matrix_sqrt_oracle",
                (E("square", 0.0, 1e-10), E("integral_route", 0.0, 1e-6, "abs", "oracle"))),
        Fixture("kernels-desk", "kernels_desk",
                (E("symmetry", 0.0, 1e-12), E("eta_phi0", 0.0, 1e-10), E("Q_eta", 0.0, 1e-10), E("Q_K", 0.0, 1e-10),
                 E("hyperbolic", 0.0, 1e-10), E("identity_D", 0.0, 1e-8, "abs", "paper-asymptotic"),
                 E("identity_sum", 0.0, 1e-8, "abs", "paper-asymptotic"),
                 E("mu_ratio_stable", 0.0, 0.05, "abs", "self-convergence"),
                 E("pointwise_C_finite", True, mode="true", provenance="paper-asymptotic"),
                 E("positivity", True, mode="true", provenance="paper-asymptotic"),
                 E("alpha_ratio", 10.0, 0.0, "le", "oracle"),
                 E("alpha_properties", True, mode="true", provenance="paper-asymptotic"), E("gamma_hs_finite", True, mode="true"))),
        Fixture("kernels-gamma-hs", "kernels_gamma_hs", (E("gamma_hs_spread", 0.3, 0.0, "le", "paper-asymptotic"),)),
        Fixture("bogo-single-mode", "bogo_single_mode",
                (E("E_tilde", 4.0, 1e-12, "abs", "oracle"), E("ground_shift", -0.5, 1e-12, "abs", "oracle"),
                 E("alpha", 0.5 * np.log(0.5), 1e-12, "abs", "analytic"),
                 E("A_minus_I", 1 - np.sqrt(0.5), 1e-12, "abs", "analytic"))),
        Fixture("bogo-properties", "bogo_properties",
                (E("E_squared", 0.0, 1e-10), E("symplectic", 0.0, 1e-10), E("scale", 0.0, 1e-10),
                 E("commuting_shift", 0.0, 0.0, "le"), E("identity_when_free", 0.0, 1e-12))),
        Fixture("fock-single-mode", "fock_single_mode",
                (E("ground", -0.5, 1e-6, "abs", "oracle"), E("gap", 4.0, 1e-6, "abs", "oracle"))),
        Fixture("fock-structure", "fock_structure",
                (E("variational", True, mode="true"), E("parity_leak", 0.0, 0.0))),
        Fixture("fock-vs-bogo-2mode", "fock_vs_bogo_2mode", (E("max_residual", 0.0, 1e-5, "abs", "oracle"),)),
        Fixture("fock-oracle-suite", "fock_oracle",
                (E("max_ground", 0.0, 1e-5, "abs", "oracle"), E("max_gap", 0.0, 1e-5, "abs", "oracle"))),
        Fixture("etilde-vs-e", "etilde_vs_e",
                (E("decay_exponent", -0.8, 0.0, "le", "self-convergence"),
                 E("first_ratio_dev_N100", 1.0, 0.0, "le", "paper-asymptotic"))),
        Fixture("eta-bounds", "eta_bounds", (E("eta_hs_spread", 0.25, 0.0, "le", "paper-asymptotic"),)),
        Fixture("ebog-desk", "ebog_desk",
                (E("finite", True, mode="true"), E("kappa_independence", 1e-3, 0.0, "le", "self-convergence"),
                 E("route_agreement", 1e-3, 0.0, "le", "self-convergence"),
                 E("quadrature_self_convergence", 1e-6, 0.0, "le", "self-convergence"),
                 E("T1", 0.0, 0.0, "ge"), E("T2", 0.0, 0.0, "le"), E("T3", 0.0, 0.0, "ge"), E("T5", 0.0, 0.0, "ge"),
                 E("mollified_order", 1.0, 0.0, "ge", "self-convergence"))),
        Fixture("ground-energy", "ground_energy", (E("free_N100", 300.0, 1e-6), E("linearity", 0.0, 1e-12))),
        Fixture("cli-determinism", "cli_determinism",
                (E("identical", True, mode="true"), E("files_listed", True, mode="true"))),
    ]


def _run_one(fx: Fixture) -> list[Entry]:
    t0 = time.perf_counter()
    try:
        measured = CHECKS[fx.check](fx.params)
        err = None
    except Exception as exc:  # failures are report entries
        measured, err = {}, f"{type(exc).__name__}: {exc}"
        err = err[:300]
    dt = time.perf_counter() - t0
    out = []
    for ex in fx.expect:
        m = measured.get(ex.key) if err is None else None
        ok = err is None and ex.key in measured and ex.passes(m)
        if isinstance(m, (np.floating, np.integer)):
            m = m.item()
        if isinstance(m, np.bool_):
            m = bool(m)
        out.append(Entry(fx.name, ex.key, m, ex.value, ex.tol, ex.mode, ex.provenance, bool(ok), dt,
                         err or (None if ex.key in measured else "not measured")))
    return out


def run_suite(fixtures=None, workers: int = 1, only=None) -> SuiteReport:
    """Run every fixture; entries are ordered by fixture name.

    Parameters
    ----------
    fixtures : list of Fixture, optional
        Defaults to :func:`default_fixtures`.
    workers : int
        Threads used to run fixtures concurrently.
    only : iterable of str, optional
        Restrict to these fixture names.
    """
    fixtures = list(fixtures or default_fixtures())
    if only:
        only = set(only)
        fixtures = [f for f in fixtures if f.name in only]
    for f in fixtures:
        if f.check not in CHECKS:
            raise ValidationError(f"fixture {f.name!r} names unknown check {f.check!r}")
    fixtures.sort(key=lambda f: f.name)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(_run_one, fixtures))
    else:
        results = [_run_one(f) for f in fixtures]
    return SuiteReport(tuple(e for r in results for e in r))


def report_json(report: SuiteReport) -> str:
    return json.dumps(report.to_dict(), indent=1, default=str)
