"""Brute-force Fock-space oracle for quadratic bosonic Hamiltonians.

The Fock space of ``n_modes <= 3`` bosonic modes is truncated to total
occupation ``<= N_max``; the Hamiltonian is built from ladder-operator
matrix elements and diagonalized exactly.  Truncation is a compression, so
each truncated eigenvalue bounds the true one from above and decreases as
``N_max`` grows; a spectrum is certified by repeating the solve at
``N_max + 10``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _accel
from .bogo_diag import BogoliubovDiagonalization, QuadraticForm, diagonalize_quadratic
from .errors import ConvergenceError, ResourceError, ValidationError
from .operators import excitation_levels

__all__ = [
    "FockBasis",
    "FockHamiltonian",
    "OracleSpectrum",
    "OracleComparison",
    "build_fock_hamiltonian",
    "oracle_spectrum",
    "certified_spectrum",
    "compare_spectrum",
    "random_admissible_form",
    "default_fixtures",
    "load_fixtures",
    "save_fixtures",
    "run_fixture",
]

MAX_DIM = 200_000
DENSE_DIM = 4000


@dataclass(frozen=True)
class FockBasis:
    """Occupation vectors with total ``<= N_max``, in lexicographic order."""

    n_modes: int
    N_max: int

    def __post_init__(self):
        if not 1 <= self.n_modes <= 3:
            raise ValidationError("the Fock oracle supports 1 to 3 modes")
        if self.N_max < 0:
            raise ValidationError("N_max must be nonnegative")
        if self.dim > MAX_DIM:
            raise ResourceError(f"Fock dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def dim(self) -> int:
        return comb(self.N_max + self.n_modes, self.n_modes)

    def states(self) -> np.ndarray:
        """``(dim, n_modes)`` array of occupations."""
        n, m = self.N_max, self.n_modes
        grids = np.indices((n + 1,) * m).reshape(m, -1).T
        return np.ascontiguousarray(grids[grids.sum(1) <= n], dtype=np.int64)

    def index_table(self, states=None) -> np.ndarray:
        """Dense lookup ``occupation -> index`` (``-1`` outside the space);
        flattened with strides ``(N_max + 1) ** j``."""
        states = self.states() if states is None else states
        n1 = self.N_max + 1
        table = -np.ones(n1**self.n_modes, dtype=np.int64)
        table[_flat(states, n1)] = np.arange(states.shape[0])
        return table


def _flat(states, n1):
    m = states.shape[1]
    strides = n1 ** np.arange(m - 1, -1, -1)
    return states @ strides


@dataclass(frozen=True)
class FockHamiltonian:
    form: QuadraticForm
    basis: FockBasis
    H: sp.csr_matrix = field(repr=False)

    @property
    def parity_leak(self) -> float:
        """Largest matrix element between even and odd total occupation."""
        par = self.basis.states().sum(1) % 2
        C = self.H.tocoo()
        mix = par[C.row] != par[C.col]
        return float(np.abs(C.data[mix]).max()) if np.any(mix) else 0.0


# ---------------------------------------------------------------------------
# assembly


@_accel.njit
def _assemble_loops(states, table, n1, Phi, Gamma):
    dim, m = states.shape
    cap = dim * (2 * m * m + 1)  # diagonal, m(m-1) hops, m(m+1) pair entries
    rows = np.empty(cap, np.int64)
    cols = np.empty(cap, np.int64)
    vals = np.empty(cap, np.float64)
    strides = np.empty(m, np.int64)
    s = 1
    for j in range(m - 1, -1, -1):
        strides[j] = s
        s *= n1
    nmax = n1 - 1
    p = 0
    for a in range(dim):
        occ = states[a]
        tot = 0
        key = 0
        diag = 0.0
        for j in range(m):
            tot += occ[j]
            key += occ[j] * strides[j]
            diag += Phi[j, j] * occ[j]
        rows[p] = a
        cols[p] = a
        vals[p] = diag
        p += 1
        # hopping a*_i a_j, i != j: both directions come out of the loop
        for i in range(m):
            for j in range(m):
                if i == j or occ[j] == 0 or Phi[i, j] == 0.0:
                    continue
                b = table[key + strides[i] - strides[j]]
                rows[p] = b
                cols[p] = a
                vals[p] = Phi[i, j] * np.sqrt(occ[j] * (occ[i] + 1.0))
                p += 1
        # pair creation; the annihilation part is the transpose
        if tot + 2 <= nmax:
            for i in range(m):
                for j in range(i, m):
                    g = Gamma[i, j]
                    if g == 0.0:
                        continue
                    if i == j:
                        amp = 0.5 * g * np.sqrt((occ[i] + 1.0) * (occ[i] + 2.0))
                        b = table[key + 2 * strides[i]]
                    else:
                        amp = g * np.sqrt((occ[i] + 1.0) * (occ[j] + 1.0))
                        b = table[key + strides[i] + strides[j]]
                    rows[p] = b
                    cols[p] = a
                    vals[p] = amp
                    p += 1
                    rows[p] = a
                    cols[p] = b
                    vals[p] = amp
                    p += 1
    return rows[:p], cols[:p], vals[:p]


def _assemble_numpy(states, table, n1, Phi, Gamma):
    dim, m = states.shape
    strides = n1 ** np.arange(m - 1, -1, -1)
    key = states @ strides
    tot = states.sum(1)
    idx = np.arange(dim)
    rows = [idx]
    cols = [idx]
    vals = [states @ np.diag(Phi)]
    occ = states.astype(float)
    for i in range(m):
        for j in range(m):
            if i == j or Phi[i, j] == 0.0:
                continue
            ok = states[:, j] > 0
            rows.append(table[key[ok] + strides[i] - strides[j]])
            cols.append(idx[ok])
            vals.append(Phi[i, j] * np.sqrt(occ[ok, j] * (occ[ok, i] + 1.0)))
    ok = tot + 2 <= n1 - 1
    for i in range(m):
        for j in range(i, m):
            g = Gamma[i, j]
            if g == 0.0:
                continue
            if i == j:
                amp = 0.5 * g * np.sqrt((occ[ok, i] + 1.0) * (occ[ok, i] + 2.0))
                b = table[key[ok] + 2 * strides[i]]
            else:
                amp = g * np.sqrt((occ[ok, i] + 1.0) * (occ[ok, j] + 1.0))
                b = table[key[ok] + strides[i] + strides[j]]
            rows += [b, idx[ok]]
            cols += [idx[ok], b]
            vals += [amp, amp]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build_fock_hamiltonian(form: QuadraticForm, N_max: int, backend: str | None = None) -> FockHamiltonian:
    """Sparse matrix of ``sum Phi_ij a*_i a_j + 1/2 sum Gamma_ij (a*_i a*_j + a_i a_j)``.

    ``backend`` is ``"numba"`` or ``"numpy"``; by default the active
    backend of :mod:`bogospec._accel`.

    Examples
    --------
    >>> h = build_fock_hamiltonian(QuadraticForm([[5.0]], [[0.0]]), 3)
    >>> h.H.diagonal().tolist()
    [0.0, 5.0, 10.0, 15.0]
    """
    basis = FockBasis(form.n, int(N_max))
    states = basis.states()
    n1 = basis.N_max + 1
    table = basis.index_table(states)
    Phi = np.ascontiguousarray(form.Phi)
    Gamma = np.ascontiguousarray(form.Gamma)
    backend = backend or _accel.backend()
    if backend == "numba":
        rows, cols, vals = _assemble_loops(states, table, n1, Phi, Gamma)
    elif backend == "numpy":
        rows, cols, vals = _assemble_numpy(states, table, n1, Phi, Gamma)
    else:
        raise ValidationError(f"unknown backend {backend!r}")
    H = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))
    H.sum_duplicates()
    return FockHamiltonian(form, basis, H)


# ---------------------------------------------------------------------------
# spectra


def _lowest(ham: FockHamiltonian, k: int):
    dim = ham.basis.dim
    if dim <= DENSE_DIM:
        w, V = np.linalg.eigh(ham.H.toarray())
        return w[:k], V[:, :k]
    # shift below the spectrum: every eigenvalue is >= -tr|Phi|/2 - 1
    sigma = -0.5 * float(np.abs(np.linalg.eigvalsh(ham.form.Phi)).sum()) - 1.0
    w, V = spla.eigsh(ham.H.tocsc(), k=k, sigma=sigma, which="LM", tol=1e-13)
    order = np.argsort(w)
    return w[order], V[:, order]


@dataclass(frozen=True)
class OracleSpectrum:
    eigenvalues: np.ndarray
    N_max: int
    shift: float
    certified: bool

    @property
    def ground(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def gaps(self) -> np.ndarray:
        return self.eigenvalues[1:] - self.eigenvalues[0]


def oracle_spectrum(ham: FockHamiltonian, k: int, certify: bool = True, tol: float = 1e-8) -> OracleSpectrum:
    """``k`` lowest eigenvalues, ascending, certified against ``N_max + 10``.

    Raises
    ------
    ConvergenceError
        If any reported level moves by more than ``tol`` between ``N_max``
        and ``N_max + 10``.
    """
    if k > ham.basis.dim:
        raise ValidationError(f"k={k} exceeds the Fock dimension {ham.basis.dim}")
    w, _ = _lowest(ham, k)
    shift = 0.0
    if certify:
        bigger = build_fock_hamiltonian(ham.form, ham.basis.N_max + 10)
        w2, _ = _lowest(bigger, k)
        shift = float(np.abs(w - w2).max())
        if shift > tol:
            raise ConvergenceError(
                f"Fock truncation N_max={ham.basis.N_max} not converged (levels move by {shift:.2e})", shift
            )
    return OracleSpectrum(w, ham.basis.N_max, shift, certify)


def certified_spectrum(form: QuadraticForm, k: int, N_start: int = 10, tol: float = 1e-8, N_limit: int | None = None):
    """Raise ``N_max`` in steps of 10 until :func:`oracle_spectrum` certifies."""
    n = N_start
    while True:
        try:
            FockBasis(form.n, n + 10)
        except ResourceError:
            raise ConvergenceError(f"no certified truncation within the dimension limit (last N_max={n - 10})")
        if N_limit is not None and n > N_limit:
            raise ConvergenceError(f"no certified truncation up to N_max={N_limit}")
        try:
            return oracle_spectrum(build_fock_hamiltonian(form, n), k, tol=tol)
        except ConvergenceError:
            n += 10


@dataclass(frozen=True)
class OracleComparison:
    ground_residual: float
    gap_residual: float
    oracle_gaps: np.ndarray
    predicted_gaps: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.ground_residual, self.gap_residual)


def compare_spectrum(oracle, diag: BogoliubovDiagonalization, k: int | None = None) -> OracleComparison:
    """Ground-shift residual and multiset distance of the excitation gaps.

    ``oracle`` is an :class:`OracleSpectrum` or a plain ascending list; the
    first ``k`` gaps are compared with the sorted multiset of
    ``sum_j n_j e~_j`` up to the largest oracle gap.
    """
    ev = np.asarray(oracle.eigenvalues if isinstance(oracle, OracleSpectrum) else oracle, float)
    gaps = ev[1:] - ev[0]
    k = gaps.size if k is None else min(k, gaps.size)
    gaps = gaps[:k]
    ground = abs(float(ev[0]) - diag.ground_shift)
    if k == 0:
        return OracleComparison(ground, 0.0, gaps, np.empty(0))
    zeta = float(gaps[-1]) * (1 + 1e-6) + 1e-9
    levels = excitation_levels(diag.eigenvalues, zeta).expanded()[1:]
    pred = levels[:k]
    if pred.size < k:
        return OracleComparison(ground, float("inf"), gaps, pred)
    return OracleComparison(ground, float(np.abs(pred - gaps).max()), gaps, pred)


# ---------------------------------------------------------------------------
# fixtures


def random_admissible_form(n_modes: int, rng, margin: float = 0.2, max_tries: int = 1000) -> QuadraticForm:
    """Random form with ``min eig(Phi -+ Gamma) >= margin * ||Phi||``."""
    for _ in range(max_tries):
        X = rng.normal(size=(n_modes, n_modes))
        Phi = X @ X.T / n_modes + np.diag(rng.uniform(1.0, 3.0, n_modes))
        G = rng.normal(size=(n_modes, n_modes))
        Gamma = 0.5 * (G + G.T) * rng.uniform(0.2, 0.8)
        nrm = np.linalg.norm(Phi, 2)
        lo = min(np.linalg.eigvalsh(Phi - Gamma)[0], np.linalg.eigvalsh(Phi + Gamma)[0])
        if lo >= margin * nrm:
            return QuadraticForm(Phi, Gamma)
    raise ValidationError("could not draw an admissible form")


def default_fixtures(count: int = 10, seed: int = 20240607) -> list[dict]:
    """``count`` seeded admissible forms cycling through 1, 2 and 3 modes."""
    out = []
    for i in range(count):
        s = seed + i
        form = random_admissible_form(1 + i % 3, np.random.default_rng(s))
        out.append({"phi": form.Phi.tolist(), "gamma": form.Gamma.tolist(), "n_max": 20, "seed": s})
    return out


def save_fixtures(fixtures, path) -> None:
    with open(path, "w") as fh:
        json.dump(fixtures, fh, indent=1)


def load_fixtures(path) -> list[dict]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValidationError("fixture file must hold a JSON array")
    for d in data:
        if not {"phi", "gamma"} <= set(d):
            raise ValidationError("each fixture needs 'phi' and 'gamma'")
    return data


def run_fixture(fixture: dict, gaps: int = 5, tol: float = 1e-8) -> OracleComparison:
    """Certified oracle vs :func:`diagonalize_quadratic` for one fixture."""
    form = QuadraticForm(np.array(fixture["phi"], float), np.array(fixture["gamma"], float))
    spec = certified_spectrum(form, gaps + 1, N_start=int(fixture.get("n_max", 20)), tol=tol)
    return compare_spectrum(spec, diagonalize_quadratic(form), gaps)
