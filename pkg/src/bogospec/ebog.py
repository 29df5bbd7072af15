"""The Bogoliubov ground-state correction E_Bog by two routes.

*kappa route*: six resolvent traces ``T1 .. T6`` plus two ``sqrt(s)``-weighted
integrals (``Tcomm`` and ``Tcubic``) that remain after expanding the square
root ``E - H`` to third order in ``K = 8 pi a0 phi0**2``.

*mollified route*: the regularized trace

    S(delta) = 1/2 tr_perp[(H^{1/2}(H + 2K_delta)H^{1/2})^{1/2} - H - K_delta]
               + 1/4 tr[K~_delta F (-Delta)^{-1} G_delta F]

with ``G_delta = 8 pi a0 exp(-delta**2 (-Delta) / 2)`` (a Gaussian of width
``delta``), ``K~_delta = F G_delta F`` and ``F = diag(phi0)``, extrapolated
to ``delta -> 0``.

For radial bases both routes are evaluated channel by channel in the
angular momentum ``l <= l_max``; each channel's contribution counts
``2l + 1`` times.  Within a channel the two routes are exactly equal in the
limit, so the ``l`` truncation affects both alike.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .operators import OperatorBundle

__all__ = [
    "QuadratureSpec",
    "EBogResult",
    "MollifiedResult",
    "GroundEnergy",
    "TERM_NAMES",
    "ebog_kappa",
    "ebog_mollified",
    "ebog_reference",
    "channel_tail",
    "ground_energy",
]

TERM_NAMES = ("T1", "T2", "T3", "T4", "T5", "T6", "Tcomm", "Tcubic")


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre rule on ``t in (0, 1)`` with ``s = sigma t**2 / (1 - t)**2``.

    ``sigma=None`` centres the map on ``h_min * h_max`` of the channel's
    ``H_GP`` eigenvalues, which balances the ``s -> 0`` and ``s -> inf`` ends.
    """

    nodes: int = 128
    sigma: float | None = None
    check: bool = True

    def __post_init__(self):
        if self.nodes < 8:
            raise ValidationError("quadrature needs at least 8 nodes")
        if self.sigma is not None and self.sigma <= 0:
            raise ValidationError("quadrature sigma must be positive")

    def rule(self, sigma: float, nodes: int | None = None):
        x, w = np.polynomial.legendre.leggauss(nodes or self.nodes)
        t = 0.5 * (x + 1.0)
        s = sigma * t**2 / (1.0 - t) ** 2
        ds = sigma * 2.0 * t / (1.0 - t) ** 3 * 0.5 * w
        return s, ds


@dataclass(frozen=True)
class EBogResult:
    kappa: float
    terms: dict
    total: float
    per_channel: dict = field(default_factory=dict)
    closed_form: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MollifiedResult:
    delta_list: np.ndarray
    values: np.ndarray
    extrapolated: float
    order: float
    fit_orders: tuple = (2, 3, 4)
    monotone: bool = True
    per_channel: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GroundEnergy:
    """``N E_GP - 4 pi a0 ||phi0||_4^4 + E_Bog`` with its addends."""

    N: float
    leading: float
    subleading: float
    ebog: float

    @property
    def total(self) -> float:
        return self.leading + self.subleading + self.ebog

    def __float__(self) -> float:
        return self.total


# ---------------------------------------------------------------------------
# kappa route


def _eig_perp(ch):
    Hp = ch.H_perp
    hw, hU = np.linalg.eigh(Hp)
    if hw[0] <= 0:
        raise NumericalError(f"H_GP is not positive on range(Q) in channel l={ch.l}")
    return Hp, hw, hU


def _s_integrals(hw, Ke, quad: QuadratureSpec, nodes=None):
    """``Tcomm`` and ``Tcubic`` by quadrature in the H eigenbasis."""
    sigma = quad.sigma or float(hw[0] * hw[-1])
    s, ds = quad.rule(sigma, nodes)
    sq = np.sqrt(hw)
    M = sq[:, None] * Ke * sq[None, :]
    bw, bV = np.linalg.eigh(np.diag(hw**2) + 2.0 * M)
    K2 = Ke * Ke
    comm = cub = 0.0
    tail = 0.0
    s_tail = 1e4 * hw[-1] ** 2
    for si, dsi in zip(s, ds):
        rr = 1.0 / (si + hw**2)
        hr = hw * rr
        vc = np.sum(K2 * (hw * rr * rr)[:, None] * (hr[None, :] - hr[:, None]))
        RM = rr[:, None] * M
        X = RM @ RM @ RM
        inv = (bV / (si + bw)) @ bV.T
        vq = np.sum(X * inv.T)
        dc = -(2.0 / np.pi) * np.sqrt(si) * vc * dsi
        dq = (4.0 / np.pi) * np.sqrt(si) * vq * dsi
        comm += dc
        cub += dq
        if si > s_tail:
            tail += abs(dc) + abs(dq)
    return comm, cub, tail


def _closed_form(hw, Ke, Hp, Kp):
    sec = 0.5 * np.sum(Ke**2 / (hw[:, None] + hw[None, :]))
    comm = -sec + 0.25 * np.trace(Ke @ (Ke / hw[:, None]))
    sq = np.sqrt(hw)
    Bm = np.diag(hw**2) + 2.0 * sq[:, None] * Ke * sq[None, :]
    bw = np.linalg.eigvalsh(Bm)
    half = 0.5 * (np.sum(np.sqrt(np.clip(bw, 0, None))) - np.trace(Hp) - np.trace(Kp))
    return float(comm), float(half + sec), float(half)


def _check_kappa(bundle, kappa):
    ch0 = bundle.channels[0]
    pot = np.diag(ch0.H - ch0.lap)  # V_ext + c phi0^2 - eps_GP
    need = -float(pot.min())
    if kappa**2 < need:
        raise NumericalError(
            f"kappa={kappa:g} is below the stable range: need kappa**2 >= {need:.4g} "
            f"so that (-Delta + kappa**2)^-1 - (H_GP + kappa**2)^-1 stays positive; use a larger kappa"
        )
    hmax = max(np.linalg.eigvalsh(ch.H_perp)[-1] for ch in bundle.channels)
    hmin = min(np.linalg.eigvalsh(ch.H_perp)[0] for ch in bundle.channels)
    cond = (hmax + kappa**2) / (hmin + kappa**2)
    if cond > 1e6:
        raise NumericalError(f"H_GP + kappa**2 has condition number {cond:.2e} > 1e6")
    return cond


def _channel_terms(ch, bundle, kappa, quad):
    c = bundle.c
    n = ch.H.shape[0]
    I = np.eye(n)
    P = ch.lap
    F = ch.phi
    H = ch.H
    R = np.linalg.inv(P + kappa**2 * I)
    Pi = np.linalg.inv(P)
    Hk = np.linalg.inv(H + kappa**2 * I)
    F2 = F * F
    c2 = c * c / 4.0
    t = {}
    t["T1"] = kappa**2 * c2 * float(np.sum((F2 * F2)[:, None] * R * Pi.T))  # tr[F^4 R P^-1]
    FR = F[:, None] * R
    Cm = F[:, None] * P - P * F[None, :]  # [F, P]
    RF = R * F[None, :]
    t["T2"] = c2 * float(np.trace(FR @ Cm @ R @ Cm @ RF))
    D = P * F[None, :] - F[:, None] * P  # [P, F]
    X = 0.5 * (F[:, None] * D - D * F[None, :])
    t["T3"] = c2 * float(np.trace(FR @ X @ RF))
    t["T4"] = c2 * float(np.sum(F2 * F2 * np.diag(R - Hk)))
    if ch.has_condensate:
        v = bundle.phi0
        p3 = F2 * v
        q3 = ch.perp @ (ch.perp.T @ p3)
        t["T5"] = c2 / kappa**2 * float(p3 @ p3) + c2 * float(q3 @ Hk @ q3)
    else:
        t["T5"] = 0.0
    Hp, hw, hU = _eig_perp(ch)
    Kp = ch.restrict(np.diag(c * F2))
    Fp = Kp / c if c else ch.restrict(np.diag(F2))
    # -kappa^2 c^2/4 tr[Fp H^-1 (H + kappa^2)^-1 Fp] in the H eigenbasis
    Fe = hU.T @ Fp @ hU
    t["T6"] = -kappa**2 * c2 * float(np.sum((Fe * Fe) / (hw * (hw + kappa**2))[None, :]))
    Ke = hU.T @ Kp @ hU
    comm_cf, cub_cf, half = _closed_form(hw, Ke, Hp, Kp)
    diag = {}
    if quad is None:
        t["Tcomm"], t["Tcubic"] = comm_cf, cub_cf
    else:
        comm, cub, tail = _s_integrals(hw, Ke, quad)
        t["Tcomm"], t["Tcubic"] = float(comm), float(cub)
        diag["tail"] = float(tail)
        if quad.check:
            c_half, q_half, _ = _s_integrals(hw, Ke, quad, nodes=quad.nodes // 2)
            diag["node_error"] = float(max(abs(c_half - comm), abs(q_half - cub)))
    S0 = half + c2 * float(np.sum(F2 * F2 * np.diag(Pi)))
    return t, {"Tcomm": comm_cf, "Tcubic": cub_cf}, S0, diag


def ebog_kappa(bundle: OperatorBundle, kappa: float = 5.0, quad: QuadratureSpec | None = None) -> EBogResult:
    """E_Bog from the explicit resolvent formula at resolvent parameter ``kappa``.

    Parameters
    ----------
    bundle : OperatorBundle
    kappa : float
        Must satisfy ``kappa**2 >= max(eps_GP - V_ext - 8 pi a0 phi0**2)``.
    quad : QuadratureSpec, optional
        Rule for the two ``s``-integrals; the closed forms in the ``H``
        eigenbasis are always reported alongside.

    Returns
    -------
    EBogResult
        ``terms`` maps ``T1 .. T6, Tcomm, Tcubic`` to channel-weighted
        values; ``per_channel`` gives each channel's total; ``diagnostics``
        holds the condition number, the quadrature tail and the difference
        to a half-size rule, and the closed-form total ``S0``.
    """
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    quad = quad or QuadratureSpec()
    if bundle.a0 == 0:
        zero = {k: 0.0 for k in TERM_NAMES}
        return EBogResult(float(kappa), zero, 0.0, {ch.l: 0.0 for ch in bundle.channels}, {"Tcomm": 0.0, "Tcubic": 0.0},
                          {"nodes": quad.nodes, "tail": 0.0, "node_error": 0.0, "S0": 0.0, "l_max": _lmax(bundle)})
    cond = _check_kappa(bundle, kappa)
    terms = dict.fromkeys(TERM_NAMES, 0.0)
    closed = {"Tcomm": 0.0, "Tcubic": 0.0}
    per = {}
    S0 = tail = node_err = 0.0
    for ch in bundle.channels:
        t, cf, s0, dg = _channel_terms(ch, bundle, kappa, quad)
        for k in TERM_NAMES:
            terms[k] += ch.weight * t[k]
        for k in closed:
            closed[k] += ch.weight * cf[k]
        per[ch.l] = ch.weight * sum(t.values())
        S0 += ch.weight * s0
        tail += ch.weight * dg.get("tail", 0.0)
        node_err += ch.weight * dg.get("node_error", 0.0)
    total = float(sum(terms[k] for k in TERM_NAMES))
    for k in TERM_NAMES:
        if not np.isfinite(terms[k]):
            raise NumericalError(f"term {k} is not finite")
    diag = {
        "nodes": quad.nodes,
        "tail": tail,
        "node_error": node_err,
        "condition": cond,
        "S0": S0,
        "l_max": _lmax(bundle),
        "l_tail_estimate": channel_tail(per),
    }
    return EBogResult(float(kappa), terms, total, per, closed, diag)


def channel_tail(per_channel: dict) -> float:
    """Estimate of the channels ``l > l_max`` from a power-law fit of the
    last two channel totals (``nan`` when the fit is not decaying)."""
    ls = sorted(l for l in per_channel if l is not None)
    if len(ls) < 3:
        return float("nan")
    L1, L = ls[-2], ls[-1]
    a, b = per_channel[L1] / (2 * L1 + 1), per_channel[L] / (2 * L + 1)
    if a == 0 or b == 0 or np.sign(a) != np.sign(b) or abs(b) >= abs(a):
        return float("nan")
    p = np.log(a / b) / np.log(L / L1)
    if p <= 2.05:
        return float("nan")
    l = np.arange(L + 1, L + 20001, dtype=float)
    head = np.sum((2 * l + 1) * b * (L / l) ** p)
    end = l[-1] + 0.5
    rest = b * L**p * (2 * end ** (2 - p) / (p - 2) + end ** (1 - p) / (p - 1))
    return float(head + rest)


def _lmax(bundle):
    ls = [ch.l for ch in bundle.channels if ch.l is not None]
    return max(ls) if ls else None


def ebog_reference(bundle: OperatorBundle) -> float:
    """Closed-form limit ``S(0)``: the mollified trace at ``delta = 0`` with
    the counterterm ``c**2/4 tr[F**4 (-Delta)^-1]``."""
    if bundle.a0 == 0:
        return 0.0
    return sum(ch.weight * _mollified_channel(ch, bundle, 0.0)[0] for ch in bundle.channels)


# ---------------------------------------------------------------------------
# mollified route


def _mollified_channel(ch, bundle, delta, cache=None):
    c = bundle.c
    P = ch.lap
    F = ch.phi
    if cache is None:
        Hp = ch.H_perp
        hw, hU = np.linalg.eigh(Hp)
        Hh = (hU * np.sqrt(np.clip(hw, 0, None))) @ hU.T
        pw, pU = np.linalg.eigh(P)
        cache = (Hp, Hh, pw, pU)
    Hp, Hh, pw, pU = cache
    G = c * (pU * np.exp(-0.5 * delta**2 * pw)) @ pU.T
    Kt = F[:, None] * G * F[None, :]
    Kp = ch.restrict(Kt)
    Bm = Hh @ (Hp + 2.0 * Kp) @ Hh
    bw = np.linalg.eigvalsh(0.5 * (Bm + Bm.T))
    if bw[0] < -1e-10 * abs(bw[-1]):
        raise NumericalError(f"mollified E**2 is indefinite (min eig {bw[0]:.3e})")
    half = 0.5 * (np.sum(np.sqrt(np.clip(bw, 0, None))) - np.trace(Hp) - np.trace(Kp))
    Pinv = (pU / pw) @ pU.T
    # 1/4 tr[K~ F P^-1 G F]
    ct = 0.25 * float(np.sum((Kt * F[None, :]) * (Pinv @ (G * F[None, :])).T))
    return float(half + ct), cache


def ebog_mollified(
    bundle: OperatorBundle, delta_list=None, fit_orders=(2, 3, 4)
) -> MollifiedResult:
    """Mollified trace at each ``delta`` and its polynomial extrapolation to 0.

    The values are fitted by ``S0 + sum_p a_p delta**p`` over ``fit_orders``
    (least squares); the reported ``order`` is the log-log slope of
    ``|S(delta) - S0|``.  ``delta_list`` defaults to ``(4, 3, 2.5, 2)`` basis
    spacings.

    Raises
    ------
    ValidationError
        ``delta`` below two grid spacings, or too few values for the fit.
    """
    h = bundle.basis.spacing()
    if delta_list is None:
        delta_list = h * np.array([4.0, 3.0, 2.5, 2.0])
    d = np.asarray(delta_list, float)
    if np.any(d <= 0):
        raise ValidationError("delta values must be positive")
    if d.min() < 2.0 * h * (1 - 1e-12):
        raise ValidationError(f"delta={d.min():.4g} is below two grid spacings ({2 * h:.4g})")
    if d.size < len(fit_orders) + 1:
        raise ValidationError(f"need at least {len(fit_orders) + 1} delta values for orders {fit_orders}")
    d = np.sort(d)[::-1]
    if bundle.a0 == 0:
        z = np.zeros(d.size)
        return MollifiedResult(d, z, 0.0, float("nan"), tuple(fit_orders), True, {})
    vals = np.zeros(d.size)
    per = {}
    for ch in bundle.channels:
        cache = None
        cv = np.empty(d.size)
        for i, dl in enumerate(d):
            cv[i], cache = _mollified_channel(ch, bundle, dl, cache)
        per[ch.l] = ch.weight * cv
        vals += ch.weight * cv
    A = np.column_stack([np.ones(d.size)] + [d**p for p in fit_orders])
    coef = np.linalg.lstsq(A, vals, rcond=None)[0]
    S0 = float(coef[0])
    dev = np.abs(vals - S0)
    order = float(np.polyfit(np.log(d), np.log(dev), 1)[0]) if np.all(dev > 0) else float("inf")
    diffs = np.diff(vals)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    if not monotone:
        warnings.warn("mollified values are not monotone in delta; the extrapolation is unreliable",
                      RuntimeWarning, stacklevel=2)
    return MollifiedResult(d, vals, S0, order, tuple(fit_orders), monotone, per)


def ground_energy(N: float, state, ebog_total: float) -> GroundEnergy:
    """``N E_GP - 4 pi a0 ||phi0||_4^4 + E_Bog``."""
    vals = (float(N), float(state.E_GP), float(state.norm4), float(ebog_total))
    if not all(np.isfinite(vals)):
        raise ValidationError("ground_energy needs finite inputs")
    return GroundEnergy(float(N), N * state.E_GP, -4.0 * np.pi * state.a0 * state.norm4, float(ebog_total))
