"""Diagonalization of finite quadratic bosonic Hamiltonians.

A real symmetric pair ``(Phi, Gamma)`` defines

    sum_ij Phi_ij a*_i a_j + 1/2 sum_ij Gamma_ij (a*_i a*_j + a_i a_j).

With ``D = Phi - Gamma`` and ``D + 2 Gamma = Phi + Gamma`` both positive
definite, a Bogoliubov transformation brings it to
``dGamma(E~) + ground_shift`` with

    E~ = (D^{1/2} (D + 2 Gamma) D^{1/2})^{1/2},
    ground_shift = 1/2 tr(E~ - Phi).

Everything is real, so the polar factor ``W`` is orthogonal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ValidationError

__all__ = [
    "QuadraticForm",
    "BogoliubovDiagonalization",
    "PropertyReport",
    "diagonalize_quadratic",
    "check_alpha_properties",
    "bogoliubov_spectrum",
    "load_form",
    "form_to_dict",
]


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric ``(Phi, Gamma)`` pair."""

    Phi: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.Phi, float))
        G = np.atleast_2d(np.asarray(self.Gamma, float))
        if P.shape != G.shape or P.shape[0] != P.shape[1]:
            raise ValidationError(f"Phi and Gamma must be square of equal shape, got {P.shape} and {G.shape}")
        scale = max(1.0, np.abs(P).max(), np.abs(G).max())
        for name, X in (("Phi", P), ("Gamma", G)):
            if np.abs(X - X.T).max() > 1e-12 * scale:
                raise ValidationError(f"{name} is not symmetric")
        object.__setattr__(self, "Phi", 0.5 * (P + P.T))
        object.__setattr__(self, "Gamma", 0.5 * (G + G.T))

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def D(self) -> np.ndarray:
        return self.Phi - self.Gamma

    def scaled(self, t: float) -> "QuadraticForm":
        return QuadraticForm(t * self.Phi, t * self.Gamma)


def form_to_dict(form: QuadraticForm) -> dict:
    return {"phi": form.Phi.tolist(), "gamma": form.Gamma.tolist()}


def load_form(path_or_dict) -> QuadraticForm:
    """Read ``{"phi": [[...]], "gamma": [[...]]}`` from a JSON file or dict."""
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as fh:
            data = json.load(fh)
    try:
        return QuadraticForm(np.array(data["phi"], float), np.array(data["gamma"], float))
    except KeyError as exc:
        raise ValidationError(f"form is missing key {exc}") from None


def _eig_fn(w, U, f):
    return (U * f(w)) @ U.T


@dataclass(frozen=True)
class BogoliubovDiagonalization:
    """``E~`` and the transformation data ``A, B, alpha, W``.

    ``residuals`` holds the checked identities: ``B - inv(A).T``,
    ``W.T W - I``, ``A A.T - exp(2 alpha)``, ``E~**2 - D^{1/2}(D+2Gamma)D^{1/2}``
    and ``A.T B - I`` (max-abs, relative to the natural scale).
    """

    D: np.ndarray = field(repr=False)
    E_tilde: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    ground_shift: float
    ground_shift_literal: float
    residuals: dict = field(default_factory=dict)
    _D_eig: tuple = field(default=None, repr=False)


def _check_pd(X, name):
    w, U = np.linalg.eigh(X)
    if w[0] <= 0:
        raise ValidationError(f"{name} is not positive definite (smallest eigenvalue {w[0]:.6e})")
    return w, U


def diagonalize_quadratic(form: QuadraticForm) -> BogoliubovDiagonalization:
    """Compute ``E~, A, B, alpha, W`` and the ground-state shift.

    Examples
    --------
    >>> d = diagonalize_quadratic(QuadraticForm([[5.0]], [[3.0]]))
    >>> float(d.eigenvalues[0]), float(d.ground_shift)
    (4.0, -0.5)
    """
    D = form.D
    dw, dU = _check_pd(D, "Phi - Gamma")
    _check_pd(form.Phi + form.Gamma, "Phi + Gamma")
    Dh = _eig_fn(dw, dU, np.sqrt)
    Dmh = _eig_fn(dw, dU, lambda x: 1.0 / np.sqrt(x))
    M = Dh @ (D + 2.0 * form.Gamma) @ Dh
    M = 0.5 * (M + M.T)
    mw, mU = np.linalg.eigh(M)
    if mw[0] <= 0:
        raise ValidationError(f"E~**2 is not positive definite (smallest eigenvalue {mw[0]:.6e})")
    e = np.sqrt(mw)
    Et = _eig_fn(e, mU, lambda x: x)
    A = Dh @ _eig_fn(e, mU, lambda x: x**-0.5)
    B = Dmh @ _eig_fn(e, mU, np.sqrt)
    aw, aU = np.linalg.eigh(A @ A.T)
    alpha = _eig_fn(np.maximum(aw, 1e-14), aU, lambda x: 0.5 * np.log(x))
    W, _ = sla.polar(A)
    n = form.n
    eye = np.eye(n)
    shift = 0.5 * (float(e.sum()) - float(np.trace(form.Phi)))
    # literal trace of the symmetrized conjugates, evaluated in the E~ eigenbasis
    X = mU.T @ Dh @ mU
    Y = mU.T @ Dmh @ mU
    lit = 0.5 * np.trace(X * e[None, :] @ Y + Y * e[None, :] @ X)
    literal = 0.5 * (float(lit) - float(np.trace(D)) - float(np.trace(form.Gamma)))
    scale = max(1.0, float(np.abs(Et).max()))
    res = {
        "B_inverse_transpose": float(np.abs(B - np.linalg.inv(A).T).max()),
        "W_orthogonal": float(np.abs(W.T @ W - eye).max()),
        "AAT_exp_2alpha": float(np.abs(A @ A.T - _eig_fn(aw, aU, lambda x: x)).max()),
        "E_squared": float(np.abs(Et @ Et - M).max()) / scale**2,
        "symplectic": float(np.abs(A.T @ B - eye).max()),
    }
    return BogoliubovDiagonalization(D, Et, A, B, alpha, W, e, shift, literal, res, (dw, dU))


def bogoliubov_spectrum(diag: BogoliubovDiagonalization) -> np.ndarray:
    """Ascending eigenvalues of ``E~``."""
    return np.sort(diag.eigenvalues)


@dataclass(frozen=True)
class PropertyReport:
    """Numerical form of the structural properties of ``A, B, alpha``.

    ``c`` and ``C`` are the extreme eigenvalues of ``D^{-1} E~**2 D^{-1}``;
    ``alpha_beta`` maps ``beta`` to ``||D^{beta/2} alpha D^{beta/2}||_HS``.
    """

    min_E: float
    min_D: float
    c: float
    C: float
    A_minus_I_hs: float
    B_minus_I_hs: float
    alpha_beta: dict
    D_half_alpha_hs: float
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def check_alpha_properties(
    diag: BogoliubovDiagonalization, form: QuadraticForm | None = None, betas=(0.0, 0.5, 0.9, 0.99), ratio_bound: float = 10.0
) -> PropertyReport:
    """Positivity, ``c D**2 <= E~**2 <= C D**2`` and the HS norms of ``A - I``,
    ``B - I`` and ``D^{beta/2} alpha D^{beta/2}``.

    ``beta = 0.99`` is reported but carries no check.
    """
    dw, dU = diag._D_eig
    Dm1 = _eig_fn(dw, dU, lambda x: 1.0 / x)
    G = Dm1 @ (diag.E_tilde @ diag.E_tilde) @ Dm1
    g = np.linalg.eigvalsh(0.5 * (G + G.T))
    n = dw.size
    eye = np.eye(n)
    ab = {}
    for b in betas:
        Db = _eig_fn(dw, dU, lambda x: x ** (0.5 * b))
        ab[float(b)] = float(np.linalg.norm(Db @ diag.alpha @ Db))
    Dh = _eig_fn(dw, dU, np.sqrt)
    dha = float(np.linalg.norm(Dh @ diag.alpha))
    a_hs = float(np.linalg.norm(diag.A - eye))
    b_hs = float(np.linalg.norm(diag.B - eye))
    c, C = float(g[0]), float(g[-1])
    checks = {
        "positive_E": bool(diag.eigenvalues.min() > 0),
        "positive_D": bool(dw[0] > 0),
        "comparable": bool(c > 0 and np.isfinite(C) and C / c <= ratio_bound),
        "A_minus_I_finite": bool(np.isfinite(a_hs)),
        "B_minus_I_finite": bool(np.isfinite(b_hs)),
        "alpha_beta_finite": all(np.isfinite(v) for b, v in ab.items() if b <= 0.9),
        "D_half_alpha_finite": bool(np.isfinite(dha)),
    }
    if form is not None:
        checks["positive_D_plus_2Gamma"] = bool(np.linalg.eigvalsh(form.Phi + form.Gamma)[0] > 0)
    return PropertyReport(
        float(diag.eigenvalues.min()), float(dw[0]), c, C, a_hs, b_hs, ab, dha, checks
    )
