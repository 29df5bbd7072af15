"""Gross-Pitaevskii minimization.

Three discretizations share one interface:

* :class:`RadialBasis` -- sine discrete-variable representation of
  ``u = sqrt(4 pi) r phi`` on ``(0, r_max)`` with Dirichlet ends.  Spectrally
  accurate for smooth radial states and the default for isotropic traps.
* :class:`TensorBasis` -- 3-D grid with the 7-point Laplacian for general
  traps (at most 48 points per axis).
* :class:`PeriodicBasis` -- Fourier collocation on a periodic cube, used for
  translation-invariant checks.

In each basis the state is a coefficient vector ``v`` with ``sum(v**2) = 1``
and point values ``phi(x_i) = v_i * scale_i``; multiplication operators are
diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, NumericalError, ValidationError

__all__ = [
    "TrapPotential",
    "RadialBasis",
    "TensorBasis",
    "PeriodicBasis",
    "SolverOptions",
    "GPState",
    "DecayReport",
    "harmonic_trap",
    "minimize_gp",
    "gp_energy",
    "check_decay",
    "uniform_state",
]


# ---------------------------------------------------------------------------
# traps


@dataclass(frozen=True)
class TrapPotential:
    """External potential ``V_ext``.

    ``kind="harmonic"`` takes one coefficient (isotropic ``c |x|**2``) or three
    (``c_x x**2 + c_y y**2 + c_z z**2``); ``"anharmonic-polynomial"`` takes
    ``(power, coefficient)`` pairs of ``|x|**power``; ``"tabulated"`` a radial
    table ``((r...), (V...))``; ``"none"`` is zero.  ``half_width`` is the
    default box half-width and ``floor`` the value ``V_ext`` must reach at
    the box boundary for trapping kinds.
    """

    kind: str = "harmonic"
    coefficients: tuple = (1.0,)
    half_width: float = 8.0
    floor: float = 10.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "anharmonic-polynomial", "tabulated", "none"):
            raise ValidationError(f"unknown trap kind {self.kind!r}")
        if self.kind == "harmonic":
            c = tuple(float(x) for x in self.coefficients)
            if len(c) not in (1, 3) or min(c) < 0:
                raise ValidationError("harmonic trap needs 1 or 3 nonnegative coefficients")
            object.__setattr__(self, "coefficients", c)
        elif self.kind == "anharmonic-polynomial":
            c = tuple((float(p), float(a)) for p, a in self.coefficients)
            if any(a < 0 or p < 0 for p, a in c):
                raise ValidationError("polynomial trap needs nonnegative powers and coefficients")
            object.__setattr__(self, "coefficients", c)
        elif self.kind == "tabulated":
            r, v = (tuple(float(x) for x in col) for col in self.coefficients)
            if len(r) != len(v) or len(r) < 2 or min(v) < 0:
                raise ValidationError("tabulated trap needs matching nonnegative tables")
            object.__setattr__(self, "coefficients", (r, v))

    @property
    def isotropic(self) -> bool:
        return not (self.kind == "harmonic" and len(self.coefficients) == 3)

    @property
    def length_scale(self) -> float:
        """Harmonic-oscillator length, or 1 when no quadratic term exists."""
        if self.kind == "harmonic":
            return float(max(self.coefficients)) ** -0.25 if max(self.coefficients) > 0 else 1.0
        if self.kind == "anharmonic-polynomial":
            c2 = sum(a for p, a in self.coefficients if p == 2)
            return c2**-0.25 if c2 > 0 else 1.0
        return 1.0

    def radial(self, r):
        r = np.asarray(r, float)
        if self.kind == "none":
            return np.zeros_like(r)
        if self.kind == "harmonic":
            if not self.isotropic:
                raise ValidationError("anisotropic trap has no radial form")
            return self.coefficients[0] * r * r
        if self.kind == "anharmonic-polynomial":
            return sum(a * r**p for p, a in self.coefficients)
        rt, vt = self.coefficients
        return np.interp(r, rt, vt)

    def cartesian(self, x):
        """``V_ext`` at points ``x`` of shape ``(..., 3)``."""
        x = np.asarray(x, float)
        if self.kind == "harmonic" and not self.isotropic:
            return np.tensordot(x * x, np.asarray(self.coefficients), axes=([-1], [0]))
        return self.radial(np.linalg.norm(x, axis=-1))


def harmonic_trap(c: float = 1.0, half_width: float = 8.0) -> TrapPotential:
    return TrapPotential("harmonic", (c,), half_width)


# ---------------------------------------------------------------------------
# bases


@dataclass(frozen=True)
class RadialBasis:
    """Sine-DVR for s-wave states; ``n`` interior nodes on ``(0, r_max)``."""

    n: int
    r_max: float

    def __post_init__(self):
        if self.n < 8 or self.r_max <= 0:
            raise ValidationError("RadialBasis needs n >= 8 and r_max > 0")

    kind = "radial"

    @property
    def dim(self) -> int:
        return self.n

    @cached_property
    def h(self) -> float:
        return self.r_max / (self.n + 1)

    @cached_property
    def r(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    @cached_property
    def _dst(self):
        j = np.arange(1, self.n + 1)
        S = np.sqrt(2.0 / (self.n + 1)) * np.sin(np.outer(j, j) * np.pi / (self.n + 1))
        k = j * np.pi / self.r_max
        return S, k

    @cached_property
    def scale(self) -> np.ndarray:
        """``phi(r_i) = v_i * scale_i``."""
        return 1.0 / (np.sqrt(4.0 * np.pi * self.h) * self.r)

    def laplacian(self, l: int = 0) -> np.ndarray:
        """Dense ``-d^2/dr^2 + l(l+1)/r^2`` for angular momentum ``l``."""
        S, k = self._dst
        T = (S * k**2) @ S
        if l:
            T = T + np.diag(l * (l + 1) / self.r**2)
        return 0.5 * (T + T.T)

    def trap_values(self, trap: TrapPotential) -> np.ndarray:
        return trap.radial(self.r)

    def spacing(self) -> float:
        return self.h

    def boundary_value(self, v) -> float:
        return float(abs(v[-1] * self.scale[-1]))

    def interpolate(self, v, r_new) -> np.ndarray:
        """Band-limited interpolation of ``phi`` at radii ``r_new``."""
        S, k = self._dst
        b = np.sqrt(2.0 / (self.n + 1)) * (S @ (np.asarray(v) / np.sqrt(self.h)))
        r_new = np.asarray(r_new, float)
        u = np.sin(np.outer(r_new, k)) @ b
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = u / (np.sqrt(4.0 * np.pi) * r_new)
        zero = r_new == 0
        if np.any(zero):
            phi[zero] = (k * b).sum() / np.sqrt(4.0 * np.pi)
        return phi

    def refined(self, factor: float) -> "RadialBasis":
        return RadialBasis(int(round((self.n + 1) * factor)) - 1, self.r_max)


@dataclass(frozen=True)
class TensorBasis:
    """Cartesian grid with ``n`` interior points per axis on ``(-L, L)**3``."""

    n: int
    half_width: float

    kind = "tensor"

    def __post_init__(self):
        if not (4 <= self.n <= 48):
            raise ValidationError("TensorBasis supports 4 <= n <= 48 points per axis")

    @property
    def dim(self) -> int:
        return self.n**3

    @cached_property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n + 1)

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(1, self.n + 1)

    @cached_property
    def points(self) -> np.ndarray:
        X, Y, Z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack([X, Y, Z], axis=-1).reshape(-1, 3)

    @cached_property
    def scale(self) -> np.ndarray:
        return np.full(self.dim, self.h**-1.5)

    def laplacian(self, l=None):
        d = sp.diags([-np.ones(self.n - 1), 2 * np.ones(self.n), -np.ones(self.n - 1)], [-1, 0, 1]) / self.h**2
        eye = sp.identity(self.n)
        return (sp.kron(sp.kron(d, eye), eye) + sp.kron(sp.kron(eye, d), eye) + sp.kron(sp.kron(eye, eye), d)).tocsr()

    def trap_values(self, trap: TrapPotential) -> np.ndarray:
        return trap.cartesian(self.points)

    def spacing(self) -> float:
        return self.h

    def boundary_value(self, v) -> float:
        cube = np.abs(np.asarray(v).reshape(self.n, self.n, self.n)) * self.h**-1.5
        faces = [cube[0], cube[-1], cube[:, 0], cube[:, -1], cube[:, :, 0], cube[:, :, -1]]
        return float(max(f.max() for f in faces))


@dataclass(frozen=True)
class PeriodicBasis:
    """Fourier collocation on the periodic cube ``[0, length)**3``."""

    n: int
    length: float = 1.0

    kind = "periodic"

    @property
    def dim(self) -> int:
        return self.n**3

    @cached_property
    def h(self) -> float:
        return self.length / self.n

    @cached_property
    def scale(self) -> np.ndarray:
        return np.full(self.dim, self.h**-1.5)

    @cached_property
    def momenta(self) -> np.ndarray:
        """Angular lattice momenta ``2 pi m / length`` for each axis index."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=1.0 / self.n) / self.length

    def laplacian(self, l=None) -> np.ndarray:
        """Dense spectral ``-Delta`` (real symmetric, circulant per axis)."""
        m = self.n
        F = np.fft.fft(np.eye(m), axis=0) / np.sqrt(m)
        k2 = self.momenta**2
        d1 = (F.conj().T * k2) @ F
        d1 = np.real(d1)
        d1 = 0.5 * (d1 + d1.T)
        eye = np.eye(m)
        return np.kron(np.kron(d1, eye), eye) + np.kron(np.kron(eye, d1), eye) + np.kron(np.kron(eye, eye), d1)

    def trap_values(self, trap: TrapPotential) -> np.ndarray:
        if trap.kind != "none":
            raise ValidationError("periodic basis supports only the zero trap")
        return np.zeros(self.dim)

    def spacing(self) -> float:
        return self.h

    def boundary_value(self, v) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class SolverOptions:
    """Controls for the imaginary-time minimizer."""

    tol_residual: float = 1e-9
    tol_energy: float = 1e-12
    max_iter: int = 20000
    tau: float = 1.0
    tau_max: float = 1e3
    init: str = "gaussian"
    seed: int | None = None
    auto_expand: bool = True
    boundary_tol: float = 1e-10


@dataclass(frozen=True)
class GPState:
    """Converged condensate in a declared basis."""

    basis: object
    trap: TrapPotential
    a0: float
    phi0: np.ndarray = field(repr=False)
    E_GP: float
    eps_GP: float
    norm4: float
    residual: float
    iterations: int = 0
    energy_history: np.ndarray = field(default=None, repr=False)

    @property
    def phi_values(self) -> np.ndarray:
        """Point values ``phi0(x_i)``."""
        return self.phi0 * self.basis.scale

    @property
    def multiplier_gap(self) -> float:
        """``eps_GP - E_GP - 4 pi a0 ||phi0||_4^4`` (zero up to rounding)."""
        return self.eps_GP - self.E_GP - 4.0 * np.pi * self.a0 * self.norm4


def _one_body(basis, trap):
    lap = basis.laplacian()
    V = basis.trap_values(trap)
    if sp.issparse(lap):
        return (lap + sp.diags(V)).tocsr(), V
    return lap + np.diag(V), V


def _norm4(v, basis):
    return float(np.sum(v**4 * basis.scale**2))


def _energy(A, v, basis, a0):
    return float(v @ (A @ v) + 4.0 * np.pi * a0 * _norm4(v, basis))


def _energy_change(A, v, w, s2, a0):
    # E(w) - E(v) without the cancellation of subtracting two energies
    d, p = w - v, w + v
    return float(d @ (A @ p) + 4.0 * np.pi * a0 * np.sum(d * p * (w * w + v * v) * s2))


def gp_energy(phi, trap: TrapPotential, a0: float, basis) -> float:
    """Discrete GP functional ``int |grad phi|^2 + V_ext phi^2 + 4 pi a0 phi^4``.

    ``phi`` is the coefficient vector in ``basis``; it must be normalized.
    """
    v = np.asarray(phi, float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValidationError(f"gp_energy needs a normalized state, got norm {np.linalg.norm(v):.3e}")
    A, _ = _one_body(basis, trap)
    return _energy(A, v, basis, a0)


def _initial(basis, trap, opts):
    if opts.init == "random":
        rng = np.random.default_rng(opts.seed)
        v = rng.uniform(0.1, 1.0, basis.dim)
        if basis.kind == "radial":
            v *= basis.r * np.exp(-0.1 * basis.r**2)
    elif basis.kind == "radial":
        lh = trap.length_scale
        v = basis.r * np.exp(-0.5 * (basis.r / lh) ** 2)
    elif basis.kind == "tensor":
        lh = trap.length_scale
        v = np.exp(-0.5 * np.sum(basis.points**2, axis=1) / lh**2)
    else:
        v = np.ones(basis.dim)
    return v / np.linalg.norm(v)


def _step_solver(A, basis):
    if sp.issparse(A):
        def solve(tau, rho_c, v, x0):
            M = (A + sp.diags(rho_c + 1.0 / tau)).tocsr()
            x, info = spla.cg(M, v / tau, x0=x0, rtol=1e-13, maxiter=5000)
            if info != 0:
                raise NumericalError("inner CG solve did not converge")
            return x
    else:
        def solve(tau, rho_c, v, x0):
            M = A + np.diag(rho_c + 1.0 / tau)
            return sla.solve(M, v / tau, assume_a="pos")
    return solve


def _check_resolution(basis, trap):
    if basis.kind == "periodic":
        return
    lh = trap.length_scale
    if basis.spacing() > lh / 8.0 + 1e-12:
        raise ValidationError(
            f"basis spacing {basis.spacing():.3g} does not resolve the trap length {lh:.3g} with 8 nodes"
        )


def minimize_gp(trap: TrapPotential, a0: float, basis=None, opts: SolverOptions | None = None) -> GPState:
    """Minimize the GP functional under ``||phi|| = 1``.

    Backward-Euler imaginary-time steps ``(1/tau + H[phi_k]) phi = phi_k / tau``
    followed by renormalization; ``tau`` grows while the energy decreases
    and is halved on any increase, so accepted energies are monotone.

    Parameters
    ----------
    trap : TrapPotential
    a0 : float
        Scattering length, ``>= 0``.
    basis : RadialBasis, TensorBasis or PeriodicBasis, optional
        Defaults to a radial basis with 12 nodes per oscillator length over
        the trap's half-width.
    opts : SolverOptions, optional

    Raises
    ------
    ValidationError
        ``a0 < 0`` or an under-resolved basis.
    ConvergenceError
        Tolerances not met within ``opts.max_iter`` steps.
    """
    if a0 < 0:
        raise ValidationError("a0 must be nonnegative")
    opts = opts or SolverOptions()
    if basis is None:
        if not trap.isotropic:
            raise ValidationError("anisotropic traps need an explicit TensorBasis")
        lh = trap.length_scale
        basis = RadialBasis(int(np.ceil(12 * trap.half_width / lh)), trap.half_width)
    _check_resolution(basis, trap)
    if basis.kind == "radial" and not trap.isotropic:
        raise ValidationError("radial basis needs an isotropic trap")

    state = _minimize(trap, a0, basis, opts)
    if basis.kind != "periodic" and basis.boundary_value(state.phi0) > opts.boundary_tol:
        if not opts.auto_expand:
            raise NumericalError(f"box too small: boundary value {basis.boundary_value(state.phi0):.2e}")
        bigger = _expanded(basis)
        state = _minimize(trap, a0, bigger, opts)
        if bigger.boundary_value(state.phi0) > opts.boundary_tol:
            raise NumericalError(f"box too small after expansion: {bigger.boundary_value(state.phi0):.2e}")
    return state


def _expanded(basis, factor=1.25):
    if basis.kind == "radial":
        return RadialBasis(int(np.ceil((basis.n + 1) * factor)) - 1, basis.r_max * factor)
    n = min(48, int(np.ceil(basis.n * factor)))
    return TensorBasis(n, basis.half_width * factor)


def _minimize(trap, a0, basis, opts):
    A, _ = _one_body(basis, trap)
    c = 8.0 * np.pi * a0
    s2 = basis.scale**2
    solve = _step_solver(A, basis)
    v = _initial(basis, trap, opts)
    E = _energy(A, v, basis, a0)
    tau = opts.tau
    history = [E]
    x0 = v.copy()
    resid = np.inf
    for it in range(1, opts.max_iter + 1):
        rho_c = c * v * v * s2
        while True:
            w = solve(tau, rho_c, v, x0)
            w = np.abs(w)  # positive ground state; the flow preserves the sign
            w /= np.linalg.norm(w)
            dE = _energy_change(A, v, w, s2, a0)
            if dE <= 1e-14 * max(1.0, abs(E)):
                break
            tau *= 0.5
            if tau < 1e-12:
                raise ConvergenceError("step size underflow in GP descent", resid)
        x0 = w * tau
        v, E = w, E + dE
        history.append(E)
        tau = min(tau * 1.5, opts.tau_max)
        Hv = A @ v + c * v**3 * s2
        mu = float(v @ Hv)
        resid = float(np.linalg.norm(Hv - mu * v))
        if resid <= opts.tol_residual and len(history) > 10 and abs(history[-11] - E) <= opts.tol_energy * max(1.0, abs(E)):
            break
    else:
        raise ConvergenceError(f"GP minimization did not converge (residual {resid:.3e})", resid)
    v = np.abs(v)
    norm4 = _norm4(v, basis)
    E = _energy(A, v, basis, a0)
    Hv = A @ v + c * v**3 * s2
    eps = float(v @ Hv)
    resid = float(np.linalg.norm(Hv - eps * v))
    return GPState(basis, trap, float(a0), v, E, eps, norm4, resid, it, np.asarray(history))


def uniform_state(basis: PeriodicBasis, a0: float) -> GPState:
    """The constant condensate on a periodic cube (``V_ext = 0``)."""
    v = np.full(basis.dim, 1.0 / np.sqrt(basis.dim))
    trap = TrapPotential("none", ())
    norm4 = _norm4(v, basis)
    E = 4.0 * np.pi * a0 * norm4
    return GPState(basis, trap, float(a0), v, E, 2.0 * E, norm4, 0.0)


# ---------------------------------------------------------------------------
# decay diagnostics


@dataclass(frozen=True)
class DecayReport:
    nu: np.ndarray
    C_phi: np.ndarray
    C_grad: np.ndarray
    C_lap: np.ndarray
    fourier_C: float
    boundary_value: float


def check_decay(state: GPState, nu_list) -> DecayReport:
    """Exponential-decay constants ``C_nu = sup phi0(x) exp(nu |x|)``.

    The supremum runs over the region where ``phi0 >= 1e-13``; the same fit
    is reported for ``|grad phi0|`` and ``|Delta phi0|`` and, on the Fourier
    side, ``sup_p |phi0_hat(p)| (1 + |p|)**3`` over resolvable momenta.
    """
    basis = state.basis
    nu = np.atleast_1d(np.asarray(nu_list, float))
    if np.any(nu <= 0):
        raise ValidationError("nu values must be positive")
    bval = basis.boundary_value(state.phi0) if basis.kind != "periodic" else 0.0
    if bval > 1e-10:
        raise NumericalError(f"box too small: boundary value of phi0 is {bval:.2e}")
    phi = state.phi_values
    if basis.kind == "radial":
        S, k = basis._dst
        u = state.phi0 / np.sqrt(basis.h)
        c = S @ u
        r = basis.r
        du = (np.cos(np.outer(r, k)) * k) @ c * np.sqrt(2.0 / (basis.n + 1))
        u_r = u
        grad = np.abs((du * r - u_r) / (np.sqrt(4 * np.pi) * r**2))
        lap = np.abs(-(basis.laplacian() @ u_r) / (np.sqrt(4 * np.pi) * r))
        radius = r
        p = np.linspace(0.0, 0.5 / basis.h, 400)[1:]
        # phi_hat(p) = (2 / p) int r phi sin(2 pi p r) dr
        phat = 2.0 / p * (np.sin(2 * np.pi * np.outer(p, r)) @ (u_r / np.sqrt(4 * np.pi))) * basis.h
        fourier_C = float(np.max(np.abs(phat) * (1 + p) ** 3))
    elif basis.kind == "tensor":
        n = basis.n
        cube = phi.reshape(n, n, n)
        g = np.gradient(cube, basis.h)
        grad = np.sqrt(sum(x**2 for x in g)).ravel()
        lap = np.abs(basis.laplacian() @ phi)
        radius = np.linalg.norm(basis.points, axis=1)
        fh = np.abs(np.fft.fftn(cube)) * basis.h**3
        pp = np.fft.fftfreq(n, d=basis.h)
        P = np.sqrt(sum(x**2 for x in np.meshgrid(pp, pp, pp, indexing="ij")))
        fourier_C = float(np.max(fh * (1 + P) ** 3))
    else:
        raise ValidationError("decay check needs a radial or tensor basis")
    live = phi >= 1e-13
    C_phi = np.array([np.max(phi[live] * np.exp(x * radius[live])) for x in nu])
    C_grad = np.array([np.max(grad[live] * np.exp(x * radius[live])) for x in nu])
    C_lap = np.array([np.max(lap[live] * np.exp(x * radius[live])) for x in nu])
    return DecayReport(nu, C_phi, C_grad, C_lap, fourier_C, bval)
