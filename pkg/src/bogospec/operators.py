"""Discrete H_GP, the projection Q, the excitation operator E and its levels.

For radial bases the operators are block diagonal in the angular momentum
``l``; each :class:`Channel` holds one radial block, and a channel's
eigenvalues count ``2l + 1`` times.  The condensate lives in ``l = 0``, so Q
acts nontrivially only there.  Restriction to the orthogonal complement of
``phi0`` is done with an explicit orthonormal basis ``perp`` of range(Q):
for an operator ``A`` the restricted matrix is ``perp.T @ A @ perp``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import NumericalError, ResourceError, ValidationError
from .gp_solver import GPState, TrapPotential

__all__ = [
    "Channel",
    "OperatorBundle",
    "SpectrumResult",
    "LevelSet",
    "assemble_hgp",
    "assemble_E",
    "matrix_sqrt",
    "matrix_sqrt_integral",
    "matrix_function",
    "excitation_levels",
    "expand_multiplicity",
]

DENSE_LIMIT = 3000


def matrix_function(S, f) -> np.ndarray:
    """``f(S)`` for symmetric ``S`` through its eigendecomposition."""
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    return (U * f(w)) @ U.T


def matrix_sqrt(S) -> np.ndarray:
    """Symmetric PSD square root.

    Eigenvalues down to ``-1e-10 * ||S||`` are clamped to zero; anything more
    negative is rejected.

    Examples
    --------
    >>> matrix_sqrt(np.diag([4.0, 9.0]))
    array([[2., 0.],
           [0., 3.]])
    """
    S = np.asarray(S, float)
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    scale = max(np.abs(w).max(), 1e-300) if w.size else 1.0
    if w.size and w.min() < -1e-10 * scale:
        raise ValidationError(f"matrix_sqrt: indefinite input, smallest eigenvalue {w.min():.3e}")
    return (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T


def matrix_sqrt_integral(S, nodes: int = 200) -> np.ndarray:
    """Square root from ``x**0.5 = (1/pi) int ds s**-0.5 x / (s + x)``.

    Independent of any eigendecomposition (linear solves only); kept as a
    cross-check for :func:`matrix_sqrt`.  The substitution
    ``s = sigma t**2 / (1 - t)**2`` is centred on the geometric mean of the
    extreme eigenvalues, estimated from the 2-norm and the inverse 2-norm.
    """
    S = np.asarray(S, float)
    n = S.shape[0]
    hi = np.linalg.norm(S, 2)
    lo = 1.0 / np.linalg.norm(np.linalg.inv(S), 2)
    sigma = np.sqrt(hi * lo)
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    s = sigma * t**2 / (1.0 - t) ** 2
    jac = 2.0 * np.sqrt(sigma) / (1.0 - t) ** 2  # ds / sqrt(s) per dt
    out = np.zeros_like(S)
    eye = np.eye(n)
    for sk, wk in zip(s, wt * jac):
        out += wk * np.linalg.solve(S + sk * eye, S)
    out /= np.pi
    return 0.5 * (out + out.T)


# ---------------------------------------------------------------------------
# bundle


@dataclass(frozen=True)
class Channel:
    """One block of the operators.

    ``l`` is the angular momentum (``None`` for tensor and periodic bases) and
    ``weight`` the multiplicity ``2l + 1``.  ``phi`` holds the point values of
    the condensate (the diagonal of the multiplication operator).
    """

    l: int | None
    weight: int
    lap: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    perp: np.ndarray = field(repr=False)

    @property
    def has_condensate(self) -> bool:
        return self.perp.shape[1] < self.perp.shape[0]

    def restrict(self, A) -> np.ndarray:
        P = self.perp
        return P.T @ A @ P

    @property
    def H_perp(self) -> np.ndarray:
        Hp = self.restrict(self.H)
        return 0.5 * (Hp + Hp.T)


@dataclass(frozen=True)
class OperatorBundle:
    """Assembled operators for a converged GP state.

    The spec-level fields (``lap``, ``Vext_diag``, ``H_GP``, ``Q``, ``M2``) refer
    to the channel that contains the condensate; ``channels`` lists all blocks.
    """

    basis: object
    n: int
    lap: np.ndarray = field(repr=False)
    Vext_diag: np.ndarray = field(repr=False)
    H_GP: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    M2: np.ndarray = field(repr=False)
    a0: float
    eps_GP: float
    phi0: np.ndarray = field(repr=False)
    channels: tuple = field(repr=False)
    hgp_phi0_norm: float = 0.0
    min_perp_eig: float = 0.0

    @property
    def c(self) -> float:
        """The coupling ``8 pi a0``."""
        return 8.0 * np.pi * self.a0


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def assemble_hgp(state: GPState, trap: TrapPotential | None = None, l_max: int = 2) -> OperatorBundle:
    """Assemble ``H_GP = -Delta + V_ext + 8 pi a0 phi0**2 - eps_GP`` and Q.

    Parameters
    ----------
    state : GPState
        Converged condensate.
    trap : TrapPotential, optional
        Must match ``state.trap`` if given.
    l_max : int
        Highest angular momentum channel for radial bases.
    """
    if trap is not None and trap != state.trap:
        raise ValidationError("trap does not match the one used for the GP state")
    basis = state.basis
    if basis.dim > DENSE_LIMIT:
        raise ResourceError(f"dense operators limited to dimension {DENSE_LIMIT}, got {basis.dim}")
    c = 8.0 * np.pi * state.a0
    phi = state.phi_values
    V = basis.trap_values(state.trap)
    v = state.phi0
    n = basis.dim
    eye = np.eye(n)
    perp0 = sla.null_space(v[None, :])
    ls = list(range(l_max + 1)) if basis.kind == "radial" else [None]
    channels = []
    for l in ls:
        lap = _dense(basis.laplacian(l) if l is not None else basis.laplacian())
        H = lap + np.diag(V + c * phi**2) - state.eps_GP * eye
        H = 0.5 * (H + H.T)
        perp = perp0 if (l is None or l == 0) else eye
        channels.append(Channel(l, 1 if l is None else 2 * l + 1, lap, H, phi, perp))
    ch0 = channels[0]
    Q = eye - np.outer(v, v)
    hphi = float(np.linalg.norm(ch0.H @ v))
    mins = min(np.linalg.eigvalsh(ch.H_perp)[0] for ch in channels)
    if mins <= 0:
        raise NumericalError(f"H_GP restricted to range(Q) is not positive definite (min eig {mins:.3e})")
    return OperatorBundle(
        basis, n, ch0.lap, V, ch0.H, Q, phi**2, state.a0, state.eps_GP, v, tuple(channels), hphi, float(mins)
    )


# ---------------------------------------------------------------------------
# spectrum


def expand_multiplicity(values, weights) -> np.ndarray:
    """Repeat each channel's values ``weight`` times and sort."""
    out = [np.repeat(np.asarray(vals), w) for vals, w in zip(values, weights)]
    return np.sort(np.concatenate(out)) if out else np.empty(0)


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues of E on the Q-subspace, with multiplicity, ascending."""

    eigenvalues: np.ndarray
    hgp_eigenvalues: np.ndarray
    by_channel: dict = field(repr=False)
    weights: dict = field(repr=False)
    monotone: bool = True
    min_eig: float = 0.0
    eigenvectors: dict | None = field(default=None, repr=False)


def _sqrt_psd_eig(M):
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    return w, U


def channel_E_squared(ch: Channel, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H_perp, H^{1/2}(H + 2c phi^2)H^{1/2})`` on the channel's range(Q)."""
    Hp = ch.H_perp
    K = ch.restrict(np.diag(c * ch.phi**2))
    Hh = matrix_sqrt(Hp)
    M = Hh @ (Hp + 2.0 * K) @ Hh
    return Hp, 0.5 * (M + M.T)


def assemble_E(bundle: OperatorBundle, vectors: bool = False) -> SpectrumResult:
    """Spectrum of ``E = (H^{1/2}(H + 16 pi a0 phi0^2)H^{1/2})^{1/2}`` on range(Q).

    Raises
    ------
    NumericalError
        If ``E**2`` loses positive definiteness.
    """
    by, wts, hg, vecs = {}, {}, {}, {}
    min_eig = np.inf
    monotone = True
    for ch in bundle.channels:
        Hp, M = channel_E_squared(ch, bundle.c)
        w, U = _sqrt_psd_eig(M)
        if w[0] <= 0:
            raise NumericalError(f"E^2 is not positive definite in channel l={ch.l} (min eig {w[0]:.3e})")
        e = np.sqrt(w)
        h = np.linalg.eigvalsh(Hp)
        tol = 1e-9 * max(1.0, e.max())
        monotone &= bool(np.all(e >= h - tol))
        by[ch.l], wts[ch.l], hg[ch.l] = e, ch.weight, h
        if vectors:
            vecs[ch.l] = ch.perp @ U
        min_eig = min(min_eig, e[0])
    keys = list(by)
    eig = expand_multiplicity([by[k] for k in keys], [wts[k] for k in keys])
    heig = expand_multiplicity([hg[k] for k in keys], [wts[k] for k in keys])
    return SpectrumResult(eig, heig, by, wts, monotone, float(min_eig), vecs if vectors else None)


# ---------------------------------------------------------------------------
# excitation levels


@dataclass(frozen=True)
class LevelSet:
    levels: np.ndarray
    multiplicities: np.ndarray

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return self.levels.size

    def expanded(self) -> np.ndarray:
        """Levels repeated by multiplicity."""
        return np.repeat(self.levels, self.multiplicities)


def _merge(values, counts, tol):
    order = np.argsort(values, kind="stable")
    values, counts = values[order], counts[order]
    out_v, out_c = [], []
    for x, m in zip(values, counts):
        if out_v and abs(x - out_v[-1]) <= tol * max(1.0, abs(x)):
            out_c[-1] += m
        else:
            out_v.append(x)
            out_c.append(m)
    return np.asarray(out_v, float), np.asarray(out_c, dtype=np.int64)


def excitation_levels(eigs, zeta: float, tol: float = 1e-9, max_levels: int = 10**6) -> LevelSet:
    """All sums ``sum_i n_i e_i <= zeta`` with their multiplicities.

    Multiplicities count occupation vectors, so degenerate one-particle
    energies contribute separately.

    Examples
    --------
    >>> excitation_levels([1.0, 2.5], 3.1).levels.tolist()
    [0.0, 1.0, 2.0, 2.5, 3.0]
    """
    e = np.asarray(eigs, float)
    if np.any(e <= 0):
        raise ValidationError("excitation energies must be positive")
    if zeta <= 0:
        raise ValidationError("zeta must be positive")
    values = np.array([0.0])
    counts = np.array([1], dtype=np.int64)
    slack = tol * max(1.0, zeta)
    for ei in np.sort(e):
        if ei > zeta + slack:
            break
        nmax = int(np.floor((zeta + slack) / ei))
        new_v = [values + k * ei for k in range(nmax + 1)]
        new_c = [counts for _ in range(nmax + 1)]
        v = np.concatenate(new_v)
        c = np.concatenate(new_c)
        keep = v <= zeta + slack
        values, counts = _merge(v[keep], c[keep], tol)
        if values.size > max_levels:
            raise NumericalError(f"more than {max_levels} levels below zeta={zeta}")
    return LevelSet(values, counts)
