"""Configuration, pipeline orchestration and result emission.

The pipeline has seven stages.  Each writes one JSON file into the output
directory, and ``manifest.json`` records what ran::

    scatter   zero-energy and Neumann scattering solutions
    gp        GP minimizer (needs scatter unless a0 is configured)
    spectrum  H_GP, E and excitation levels (needs gp)
    kernels   eta, K_N, tilde forms and their checks (needs gp, scatter)
    ebog      E_Bog by the kappa and mollified routes (needs spectrum)
    oracle    Fock-space oracle fixture suite
    validate  cross-module property suite

Stage JSON files depend only on the configuration and seed.  Timings live
in the manifest alone.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import hashlib
import math
import os
import platform
import struct
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .errors import BogospecError, NumericalError, UsageError, ValidationError

__all__ = [
    "RunConfig",
    "RunManifest",
    "STAGES",
    "DEPENDENCIES",
    "load_config",
    "run_pipeline",
    "emit_plot_data",
    "load_manifest",
    "dumps",
    "main",
]

STAGES = ("scatter", "gp", "spectrum", "kernels", "ebog", "oracle", "validate")
DEPENDENCIES = {
    "scatter": (),
    "gp": ("scatter",),
    "spectrum": ("gp",),
    "kernels": ("gp", "scatter"),
    "ebog": ("spectrum",),
    "oracle": (),
    "validate": (),
}
PLOT_KINDS = ("dispersion", "phi0", "neumann-asymptotics", "ebog-terms")
ASYMPTOTIC_ELL_N = (100.0, 300.0, 1000.0, 3000.0)


# ---------------------------------------------------------------------------
# JSON emission


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _plain(o):
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    if isinstance(o, np.ndarray):
        return _plain(o.tolist())
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    if isinstance(o, (int, np.integer)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        return float(o)
    if o is None or isinstance(o, str):
        return o
    if dataclasses.is_dataclass(o):
        return _plain(dataclasses.asdict(o))
    return str(o)


def _write(o, out, depth):
    pad = "\n" + " " * depth
    if isinstance(o, dict):
        if not o:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(o.items()):
            out.append(("," if i else "") + pad + " " + _quote(k) + ": ")
            _write(v, out, depth + 1)
        out.append(pad + "}")
    elif isinstance(o, list):
        if all(not isinstance(v, (dict, list)) for v in o):
            out.append("[" + ", ".join(_scalar(v) for v in o) + "]")
            return
        out.append("[")
        for i, v in enumerate(o):
            out.append(("," if i else "") + pad + " ")
            _write(v, out, depth + 1)
        out.append(pad + "]")
    else:
        out.append(_scalar(o))


def _quote(s: str) -> str:
    import json

    return json.dumps(s)


def _scalar(v) -> str:
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    return _quote(v)


def dumps(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits.

    Non-finite floats become ``null``.

    Examples
    --------
    >>> dumps({"x": 0.1, "n": [1, 2.0]})
    '{\\n "x": 0.10000000000000001,\\n "n": [1, 2.0]\\n}\\n'
    """
    out: list[str] = []
    _write(_plain(obj), out, 0)
    return "".join(out) + "\n"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on.

    ``potential`` is ``("square-barrier", V0, R)``, ``("zero",)`` or
    ``("file", path)``; ``trap`` is ``("harmonic", c)``.  ``a0`` overrides the
    scattering length passed to the GP stage.  ``delta_list`` holds absolute
    mollifier widths; empty means the module default.
    """

    potential: tuple = ("square-barrier", 4.0, 1.0)
    trap: tuple = ("harmonic", 1.0)
    a0: float | None = None
    N_list: tuple = (25.0, 50.0, 100.0, 200.0)
    ell: float = 0.2
    points: int = 96
    r_max: float = 8.0
    l_max: int = 3
    kappa: float = 5.0
    delta_list: tuple = ()
    quad_nodes: int = 128
    zeta: float = 6.0
    levels: int = 10
    oracle_fixtures: str | None = None
    oracle_count: int = 10
    oracle_seed: int = 20240607
    binary: bool = False
    out: str = "bogospec-out"
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        kind = self.potential[0] if self.potential else None
        if kind == "square-barrier":
            if len(self.potential) != 3 or self.potential[1] < 0 or self.potential[2] <= 0:
                raise ValidationError("square-barrier potential needs V0 >= 0 and R > 0")
        elif kind == "file":
            if len(self.potential) != 2 or not Path(self.potential[1]).is_file():
                raise ValidationError(f"potential file not found: {self.potential[1:]}")
        elif kind != "zero":
            raise ValidationError(f"unknown potential kind {kind!r}")
        if self.trap[0] != "harmonic" or len(self.trap) != 2 or self.trap[1] <= 0:
            raise ValidationError("trap must be ('harmonic', c) with c > 0")
        if self.a0 is not None and not (self.a0 >= 0 and math.isfinite(self.a0)):
            raise ValidationError("a0 must be finite and nonnegative")
        if not self.N_list or any(not (n > 0) for n in self.N_list):
            raise ValidationError("N_list must hold positive values")
        if not (0 < self.ell <= 1.0):
            raise ValidationError("ell must lie in (0, 1]")
        if self.points < 8 or self.r_max <= 0 or self.l_max < 0:
            raise ValidationError("basis needs points >= 8, r_max > 0, l_max >= 0")
        if not (self.kappa > 0) or not (self.zeta > 0) or self.levels < 1:
            raise ValidationError("kappa and zeta must be positive, levels >= 1")
        if any(not (d > 0) for d in self.delta_list):
            raise ValidationError("delta_list must hold positive widths")
        if self.quad_nodes < 8:
            raise ValidationError("quad_nodes must be >= 8")
        if self.oracle_fixtures is not None and not Path(self.oracle_fixtures).is_file():
            raise ValidationError(f"oracle fixture file not found: {self.oracle_fixtures}")
        if self.oracle_count < 1 or self.seed < 0:
            raise ValidationError("oracle_count must be >= 1 and seed >= 0")

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    def canonical(self) -> dict:
        """Fields that determine the outputs (everything but ``out``)."""
        d = dataclasses.asdict(self)
        d.pop("out")
        return _plain(d)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(dumps(self.canonical()).encode()).hexdigest()


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.replace(",", " ").split())


def load_config(path) -> RunConfig:
    """Read an INI file (schema in the README).  Relative paths inside it
    resolve against the file's directory."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None
    known = {"potential", "trap", "physics", "basis", "ebog", "spectrum", "oracle", "run"}
    extra = set(cp.sections()) - known
    if extra:
        raise UsageError(f"unknown config sections: {sorted(extra)}")
    base = path.parent
    kw = {}
    try:
        if cp.has_section("potential"):
            s = cp["potential"]
            kind = s.get("kind", "square-barrier")
            if kind == "square-barrier":
                kw["potential"] = (kind, s.getfloat("V0", 4.0), s.getfloat("R", 1.0))
            elif kind == "file":
                kw["potential"] = (kind, str((base / s["path"]).resolve()))
            else:
                kw["potential"] = (kind,)
        if cp.has_section("trap"):
            s = cp["trap"]
            kw["trap"] = (s.get("kind", "harmonic"), s.getfloat("c", 1.0))
        if cp.has_section("physics"):
            s = cp["physics"]
            if s.get("a0", "").strip():
                kw["a0"] = s.getfloat("a0")
            if "N_list" in s:
                kw["N_list"] = _floats(s["N_list"])
            if "ell" in s:
                kw["ell"] = s.getfloat("ell")
        if cp.has_section("basis"):
            s = cp["basis"]
            for k, conv in (("points", s.getint), ("r_max", s.getfloat), ("l_max", s.getint)):
                if k in s:
                    kw[k] = conv(k)
        if cp.has_section("ebog"):
            s = cp["ebog"]
            if "kappa" in s:
                kw["kappa"] = s.getfloat("kappa")
            if "delta_list" in s:
                kw["delta_list"] = _floats(s["delta_list"])
            if "quad_nodes" in s:
                kw["quad_nodes"] = s.getint("quad_nodes")
        if cp.has_section("spectrum"):
            s = cp["spectrum"]
            if "zeta" in s:
                kw["zeta"] = s.getfloat("zeta")
            if "levels" in s:
                kw["levels"] = s.getint("levels")
        if cp.has_section("oracle"):
            s = cp["oracle"]
            if s.get("fixtures", "").strip():
                kw["oracle_fixtures"] = str((base / s["fixtures"]).resolve())
            if "count" in s:
                kw["oracle_count"] = s.getint("count")
            if "seed" in s:
                kw["oracle_seed"] = s.getint("seed")
        if cp.has_section("run"):
            s = cp["run"]
            if "out" in s:
                kw["out"] = str(base / s["out"])
            if "seed" in s:
                kw["seed"] = s.getint("seed")
            if "binary" in s:
                kw["binary"] = s.getboolean("binary")
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad value in {path}: {exc}") from None
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# manifest


def _versions() -> dict:
    import scipy

    v = {"bogospec": __version__, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        import numba

        v["numba"] = numba.__version__
    except ImportError:  # pragma: no cover
        v["numba"] = None
    v["backend"] = _accel.backend()
    return v


@dataclass
class RunManifest:
    """What ran, how long it took and which files it wrote."""

    out: str
    config_hash: str
    config: dict
    stages: list = field(default_factory=list)
    versions: dict = field(default_factory=_versions)
    timings: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[str]:
        return [f"{st}:{name}" for st, inv in self.invariants.items() for name, ok in inv.items() if not ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    def path(self, name: str) -> Path:
        return Path(self.out) / name

    def add_file(self, name: str) -> None:
        if name not in self.files:
            self.files.append(name)
            self.files.sort()

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "config": self.config,
            "stages": self.stages,
            "versions": self.versions,
            "timings": self.timings,
            "files": self.files,
            "invariants": self.invariants,
            "passed": self.passed,
        }

    def write(self) -> Path:
        p = self.path("manifest.json")
        p.write_text(dumps(self.to_dict()))
        return p


def load_manifest(out) -> RunManifest:
    import json

    p = Path(out) / "manifest.json"
    if not p.is_file():
        raise UsageError(f"no manifest in {out}; run the pipeline first")
    d = json.loads(p.read_text())
    return RunManifest(str(out), d["config_hash"], d["config"], d["stages"], d["versions"], d["timings"], d["files"],
                       d["invariants"])


# ---------------------------------------------------------------------------
# binary dumps


def write_bgps(path, values, spacing) -> None:
    """``BGPS`` dump: magic, ``<u4`` ndim, ``<u8`` dims, ``<f8`` spacings,
    then the values as little-endian float64 in C order."""
    v = np.ascontiguousarray(values, dtype="<f8")
    sp = np.broadcast_to(np.asarray(spacing, float), (v.ndim,))
    with open(path, "wb") as fh:
        fh.write(b"BGPS" + struct.pack("<I", v.ndim) + struct.pack(f"<{v.ndim}Q", *v.shape))
        fh.write(struct.pack(f"<{v.ndim}d", *sp))
        fh.write(v.tobytes())


def read_bgps(path):
    """Inverse of :func:`write_bgps`; returns ``(values, spacing)``."""
    data = Path(path).read_bytes()
    if data[:4] != b"BGPS":
        raise ValidationError(f"{path} is not a BGPS file")
    (nd,) = struct.unpack_from("<I", data, 4)
    dims = struct.unpack_from(f"<{nd}Q", data, 8)
    off = 8 + 8 * nd
    sp = struct.unpack_from(f"<{nd}d", data, off)
    vals = np.frombuffer(data, "<f8", offset=off + 8 * nd).reshape(dims)
    return vals, np.array(sp)


def write_bgkm(path, matrix) -> None:
    """``BGKM`` dump: magic, ``<u4`` rows, ``<u4`` cols, row-major float64."""
    m = np.ascontiguousarray(matrix, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(b"BGKM" + struct.pack("<II", *m.shape) + m.tobytes())


def read_bgkm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != b"BGKM":
        raise ValidationError(f"{path} is not a BGKM file")
    r, c = struct.unpack_from("<II", data, 4)
    return np.frombuffer(data, "<f8", offset=12).reshape(r, c)


# ---------------------------------------------------------------------------
# stages


def _potential(cfg: RunConfig):
    from .scattering import load_potential, square_barrier, zero_potential

    kind = cfg.potential[0]
    if kind == "square-barrier":
        return square_barrier(cfg.potential[1], cfg.potential[2])
    if kind == "file":
        return load_potential(cfg.potential[1])
    return zero_potential()


def _stage_scatter(cfg, ctx, man):
    from .scattering import check_asymptotics, solution_record, solve_neumann, solve_zero_energy

    pot = _potential(cfg)
    zero = solve_zero_energy(pot)
    ctx["a0_computed"] = zero.a0
    ctx["scatter"] = {}
    neumann = []
    for N in cfg.N_list:
        s = solve_neumann(pot, cfg.ell, N)
        ctx["scatter"][N] = s
        rec = solution_record(s, max_profile=200)
        nb = s.neumann
        rec.update(N=N, ell=cfg.ell, integral_w=nb.integral_w, residual=nb.residual)
        neumann.append(rec)
    fam = [solve_neumann(pot, 0.5, L / 0.5) for L in ASYMPTOTIC_ELL_N]
    rep = check_asymptotics(fam)
    f_ok = all(s.neumann.f_ell.min() >= -1e-12 and s.neumann.f_ell.max() <= 1 + 1e-12 for s in ctx["scatter"].values())
    inv = {
        "a0_routes_agree": zero.a0_mismatch <= 1e-6,
        "f_in_unit_interval": bool(f_ok),
        "lambda_nonnegative": all(s.neumann.lam >= 0 for s in ctx["scatter"].values()),
    }
    body = {
        "a0": zero.a0,
        "a0_integral": zero.a0_integral,
        "a0_mismatch": zero.a0_mismatch,
        "tail_residual": zero.tail_residual,
        "profile": solution_record(zero, max_profile=200)["profile"],
        "neumann": neumann,
        "asymptotics": {
            "ell_N": rep.ell_N,
            "lambda_scaled": rep.lambda_scaled,
            "three_a0": 3.0 * zero.a0,
            "c1": rep.c1,
            "c2": rep.c2,
            "Vf_residual": rep.Vf_residual,
            "Vf_exponent": rep.Vf_exponent,
            "w_scaled": rep.w_scaled,
            "w_limit": rep.w_limit,
            "w_target": rep.w_target,
            "C_w": rep.C_w,
        },
    }
    return body, inv, []


def _a0_for_gp(cfg, ctx):
    if cfg.a0 is not None:
        return cfg.a0
    return ctx["a0_computed"]


def _stage_gp(cfg, ctx, man):
    from .gp_solver import RadialBasis, SolverOptions, harmonic_trap, minimize_gp

    st = minimize_gp(harmonic_trap(cfg.trap[1]), _a0_for_gp(cfg, ctx), RadialBasis(cfg.points, cfg.r_max),
                     SolverOptions(seed=cfg.seed))
    ctx["state"] = st
    b = st.basis
    phi = st.phi_values
    inv = {
        "residual_le_1e-8": st.residual <= 1e-8,
        "multiplier_identity": abs(st.multiplier_gap) <= 1e-10,
        "phi0_positive": bool(np.all(st.phi0 > 0)),
        "normalized": abs(np.linalg.norm(st.phi0) - 1) <= 1e-12,
    }
    body = {
        "a0": st.a0,
        "E_GP": st.E_GP,
        "eps_GP": st.eps_GP,
        "norm4": st.norm4,
        "residual": st.residual,
        "multiplier_gap": st.multiplier_gap,
        "iterations": st.iterations,
        "basis": {"kind": b.kind, "points": b.n, "r_max": b.r_max, "spacing": b.spacing()},
        "phi0": [[float(r), float(v)] for r, v in zip(b.r, phi)],
    }
    extra = []
    if cfg.binary:
        write_bgps(man.path("gp_phi0.bin"), phi, b.spacing())
        extra.append("gp_phi0.bin")
    return body, inv, extra


def _stage_spectrum(cfg, ctx, man):
    from .operators import assemble_E, assemble_hgp, excitation_levels

    bu = assemble_hgp(ctx["state"], l_max=cfg.l_max)
    sp = assemble_E(bu)
    ctx["bundle"], ctx["spectrum"] = bu, sp
    lv = excitation_levels(sp.eigenvalues, cfg.zeta)
    e = sp.eigenvalues
    man.path("spectrum.csv").write_text("index,e_j\n" + "".join(f"{i + 1},{_fmt_float(float(x))}\n" for i, x in enumerate(e)))
    inv = {
        "E_positive": sp.min_eig > 0,
        "E_ge_H": bool(sp.monotone),
        "hgp_annihilates_phi0": bu.hgp_phi0_norm <= 1e-7,
        "H_perp_positive": bu.min_perp_eig > 0,
    }
    body = {
        "zeta": cfg.zeta,
        "eigenvalues": e,
        "hgp_eigenvalues": sp.hgp_eigenvalues,
        "by_channel": {str(l): v for l, v in sp.by_channel.items()},
        "weights": {str(l): w for l, w in sp.weights.items()},
        "levels": lv.levels,
        "multiplicities": lv.multiplicities,
        "eps_GP": bu.eps_GP,
        "hgp_phi0_norm": bu.hgp_phi0_norm,
        "min_perp_eig": bu.min_perp_eig,
    }
    return body, inv, ["spectrum.csv"]


def _stage_kernels(cfg, ctx, man):
    from .bogo_diag import QuadraticForm, check_alpha_properties, diagonalize_quadratic
    from .kernels import assemble_tilde_forms, build_kernels, compare_Etilde_E, fit_ratio_decay
    from .operators import assemble_E, assemble_hgp
    from .scattering import solve_neumann

    st = ctx["state"]
    bu = ctx.get("bundle") or assemble_hgp(st, l_max=cfg.l_max)
    sp = ctx.get("spectrum") or assemble_E(bu)
    pot = _potential(cfg)
    per_N, reports, extra = [], [], []
    inv = {"identity_D": True, "identity_sum": True, "hyperbolic": True, "D_tilde_positive": True, "alpha_properties": True}
    for N in cfg.N_list:
        scat = ctx.get("scatter", {}).get(N)
        if scat is None or abs(scat.neumann.ell - cfg.ell) > 0:
            scat = solve_neumann(pot, cfg.ell, N)
        kern = build_kernels(st, scat, N, bundle=bu, seed=cfg.seed)
        forms = assemble_tilde_forms(kern, bu)
        d_ok = all(np.linalg.eigvalsh(tc.D)[0] > 0 and np.linalg.eigvalsh(tc.Phi + tc.Gamma)[0] > 0 for tc in forms.channels)
        rec = {
            "N": N,
            "ell": cfg.ell,
            "eta_hs_discrete": kern.eta_hs_discrete,
            "eta_phi0_norm": kern.eta_phi0_norm,
            "hyperbolic_residual": kern.hyperbolic_residual,
            "symmetry_residual": kern.symmetry_residual,
            "identity_residual_D": forms.identity_residual_D,
            "identity_residual_sum": forms.identity_residual_sum,
            "gamma_tilde_hs": forms.gamma_hs,
            "D_tilde_positive": d_ok,
        }
        if kern.continuum is not None:
            c = kern.continuum
            rec.update(eta_hs=c.eta_hs, k_hs=c.k_hs, sup_eta_ratio=c.sup_eta_ratio, sup_mu_ratio=c.sup_mu_ratio,
                       pointwise_C=c.pointwise_C)
        if d_ok:
            cmp = compare_Etilde_E(forms, sp, N, levels=cfg.levels)
            reports.append(cmp)
            rec["ratios"] = cmp.ratios
            rec["max_deviation"] = cmp.max_deviation
            pr = check_alpha_properties(diagonalize_quadratic(QuadraticForm(forms.Phi_tilde, forms.Gamma_tilde)))
            rec["alpha"] = {"c": pr.c, "C": pr.C, "A_minus_I_hs": pr.A_minus_I_hs, "B_minus_I_hs": pr.B_minus_I_hs,
                            "alpha_beta": {str(k): v for k, v in pr.alpha_beta.items()}, "checks": pr.checks}
            inv["alpha_properties"] &= pr.passed
        inv["identity_D"] &= forms.identity_residual_D <= 1e-8
        inv["identity_sum"] &= forms.identity_residual_sum <= 1e-8
        inv["hyperbolic"] &= kern.hyperbolic_residual <= 1e-10
        inv["D_tilde_positive"] &= bool(d_ok)
        per_N.append(rec)
        if cfg.binary:
            name = f"kernels_eta_N{N:g}.bin"
            write_bgkm(man.path(name), kern.channels[0].lift(kern.channels[0].eta))
            extra.append(name)
    body = {"ell": cfg.ell, "l_max": cfg.l_max, "per_N": per_N}
    if len(reports) >= 2:
        p, C = fit_ratio_decay(reports)
        body["ratio_decay"] = {"exponent": p, "C": C}
    return body, {k: bool(v) for k, v in inv.items()}, extra


def _stage_ebog(cfg, ctx, man):
    from .ebog import QuadratureSpec, ebog_kappa, ebog_mollified, ground_energy

    bu = ctx["bundle"]
    res = ebog_kappa(bu, cfg.kappa, QuadratureSpec(cfg.quad_nodes))
    mol = ebog_mollified(bu, list(cfg.delta_list) or None)
    total = res.total
    agree = abs(mol.extrapolated - total) <= 1e-3 * abs(total) if total != 0 else mol.extrapolated == 0
    inv = {
        "terms_finite": all(math.isfinite(v) for v in res.terms.values()),
        "routes_agree_1e-3": bool(agree),
        "T1_nonnegative": res.terms["T1"] >= 0,
    }
    E_N = {}
    for N in cfg.N_list:
        g = ground_energy(N, ctx["state"], total)
        E_N[f"{N:g}"] = {"leading": g.leading, "subleading": g.subleading, "ebog": g.ebog, "total": g.total}
    body = {
        "kappa": res.kappa,
        "terms": res.terms,
        "total": total,
        "closed_form": res.closed_form,
        "per_channel": {str(l): v for l, v in res.per_channel.items()},
        "diagnostics": res.diagnostics,
        "mollified": {"delta_list": mol.delta_list, "values": mol.values, "extrapolated": mol.extrapolated,
                      "order": mol.order, "monotone": mol.monotone},
        "E_N": E_N,
    }
    return body, inv, []


def _stage_oracle(cfg, ctx, man):
    from .fock_oracle import default_fixtures, load_fixtures, run_fixture

    if cfg.oracle_fixtures:
        fixtures = load_fixtures(cfg.oracle_fixtures)
    else:
        fixtures = default_fixtures(cfg.oracle_count, cfg.oracle_seed)
    rows = []
    for i, fx in enumerate(fixtures):
        r = run_fixture(fx)
        rows.append({"index": i, "seed": fx.get("seed"), "modes": len(fx["phi"]), "ground_residual": r.ground_residual,
                     "gap_residual": r.gap_residual, "pass": r.max_residual <= 1e-5})
    inv = {"all_fixtures_1e-5": all(r["pass"] for r in rows)}
    return {"tolerance": 1e-5, "fixtures": rows}, inv, []


def _stage_validate(cfg, ctx, man):
    from .validate import run_suite

    rep = run_suite()
    man.path("validate.txt").write_text(rep.table() + "\n")
    inv = {e.fixture + "/" + e.check: e.passed for e in rep.entries}
    d = rep.to_dict()
    for e in d["entries"]:
        e.pop("seconds", None)
    return d, inv, ["validate.txt"]


_RUNNERS = {
    "scatter": _stage_scatter,
    "gp": _stage_gp,
    "spectrum": _stage_spectrum,
    "kernels": _stage_kernels,
    "ebog": _stage_ebog,
    "oracle": _stage_oracle,
    "validate": _stage_validate,
}


def dependency_graph() -> str:
    lines = ["stage dependencies:"]
    for s in STAGES:
        deps = ", ".join(DEPENDENCIES[s]) or "-"
        note = " (scatter not needed when a0 is configured)" if s == "gp" else ""
        lines.append(f"  {s:<9} <- {deps}{note}")
    return "\n".join(lines)


def _required(stage, cfg):
    deps = DEPENDENCIES[stage]
    if stage == "gp" and cfg.a0 is not None:
        return ()
    return deps


def with_dependencies(stages, cfg: RunConfig) -> list[str]:
    """Close ``stages`` under the dependency relation."""
    todo, seen = list(stages), set()
    while todo:
        s = todo.pop()
        if s in seen:
            continue
        seen.add(s)
        todo.extend(_required(s, cfg))
    return [s for s in STAGES if s in seen]


def _parse_stages(stages) -> list[str]:
    if isinstance(stages, str):
        stages = [s for s in stages.replace(",", " ").split() if s]
    stages = list(stages)
    bad = [s for s in stages if s not in STAGES]
    if bad or not stages:
        raise UsageError(f"unknown or empty stage list {bad or stages}; choose from {', '.join(STAGES)}")
    return stages


def run_pipeline(config: RunConfig, stages, *, resolve: bool = False, log=None) -> RunManifest:
    """Run ``stages`` in dependency order and write their JSON and the manifest.

    Parameters
    ----------
    config : RunConfig
    stages : iterable of str or comma-separated str
    resolve : bool
        Add missing dependencies instead of raising.
    log : callable, optional
        Receives one progress line per stage.

    Raises
    ------
    UsageError
        A dependency is missing and ``resolve`` is false.
    """
    stages = _parse_stages(stages)
    if resolve:
        stages = with_dependencies(stages, config)
    else:
        chosen = set(stages)
        for s in stages:
            missing = [d for d in _required(s, config) if d not in chosen]
            if missing:
                raise UsageError(f"stage {s!r} needs {', '.join(missing)}\n{dependency_graph()}")
        stages = [s for s in STAGES if s in chosen]
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(str(out), config.config_hash, config.canonical(), stages)
    ctx: dict = {}
    for s in stages:
        t0 = time.perf_counter()
        body, inv, extra = _RUNNERS[s](config, ctx, man)
        inv = {k: bool(v) for k, v in inv.items()}
        body = {"stage": s, "config_hash": man.config_hash, **body, "invariants": inv}
        man.path(f"{s}.json").write_text(dumps(body))
        man.timings[s] = time.perf_counter() - t0
        man.invariants[s] = inv
        for f in [f"{s}.json", *extra]:
            man.add_file(f)
        if log:
            bad = [k for k, v in inv.items() if not v]
            log(f"{s:<9} {man.timings[s]:8.2f} s  " + ("ok" if not bad else "FAILED: " + ", ".join(bad)))
    man.write()
    return man


# ---------------------------------------------------------------------------
# plot data


def emit_plot_data(manifest: RunManifest, which: str) -> Path:
    """Write ``plot_<which>.csv`` from a finished run and list it in the manifest."""
    import json

    sources = {"dispersion": "spectrum", "phi0": "gp", "neumann-asymptotics": "scatter", "ebog-terms": "ebog"}
    if which not in sources:
        raise UsageError(f"unknown plot kind {which!r}; choose from {', '.join(PLOT_KINDS)}")
    src = manifest.path(f"{sources[which]}.json")
    if not src.is_file():
        raise UsageError(f"plot {which!r} needs the {sources[which]} stage output")
    d = json.loads(src.read_text())
    f = _fmt_float
    if which == "dispersion":
        rows = ["index,e_j"] + [f"{i + 1},{f(x)}" for i, x in enumerate(d["eigenvalues"])]
    elif which == "phi0":
        rows = ["r,phi0"] + [f"{f(r)},{f(v)}" for r, v in d["phi0"]]
    elif which == "neumann-asymptotics":
        a = d["asymptotics"]
        rows = ["ellN,lambda_scaled"] + [f"{f(x)},{f(y)}" for x, y in zip(a["ell_N"], a["lambda_scaled"])]
    else:
        rows = ["term,value"] + [f"{k},{f(v)}" for k, v in d["terms"].items()]
    name = f"plot_{which}.csv"
    manifest.path(name).write_text("\n".join(rows) + "\n")
    manifest.add_file(name)
    manifest.write()
    return manifest.path(name)


# ---------------------------------------------------------------------------
# command line


def _common(p):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="seed for randomized steps (U64)")
    p.add_argument("--kappa", type=float, help="resolvent parameter for E_Bog")
    p.add_argument("--zeta", type=float, help="cutoff for excitation levels")
    p.add_argument("--binary", action="store_true", default=None, help="also write BGPS/BGKM binary dumps")
    p.add_argument("-q", "--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bogospec", description="Bogoliubov excitation spectra of trapped Bose gases.")
    ap.add_argument("--version", action="version", version=f"bogospec {__version__}")
    sub = ap.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run a list of stages")
    _common(run)
    run.add_argument("--stages", default=",".join(STAGES[:5]), help="comma-separated stages")
    run.add_argument("--resolve", action="store_true", help="add missing dependencies instead of failing")
    for name in ("scatter", "gp", "spectrum"):
        _common(sub.add_parser(name, help=f"run the {name} stage and its dependencies"))
    k = sub.add_parser("kernels", help="correlation kernels and tilde-form checks")
    _common(k)
    k.add_argument("--N", type=float, action="append", help="particle number (repeatable)")
    k.add_argument("--ell", type=float, help="Neumann ball radius")
    e = sub.add_parser("ebog", help="E_Bog by both routes")
    _common(e)
    e.add_argument("--delta-list", help="comma-separated mollifier widths")
    e.add_argument("--quad-nodes", type=int)
    o = sub.add_parser("oracle", help="Fock-space oracle fixture suite")
    _common(o)
    o.add_argument("--fixtures", help="JSON fixture file")
    o.add_argument("--count", type=int)
    v = sub.add_parser("validate", help="cross-module property suite")
    _common(v)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--only", action="append", help="fixture name (repeatable)")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    pl = sub.add_parser("plot", help="write CSV plot data from a finished run")
    pl.add_argument("which", choices=PLOT_KINDS)
    pl.add_argument("--out", default="bogospec-out")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    kw = {}
    for name in ("out", "seed", "kappa", "zeta", "binary"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    if getattr(args, "N", None):
        kw["N_list"] = tuple(args.N)
    if getattr(args, "ell", None) is not None:
        kw["ell"] = args.ell
    if getattr(args, "delta_list", None):
        try:
            kw["delta_list"] = _floats(args.delta_list)
        except ValueError:
            raise UsageError(f"bad --delta-list {args.delta_list!r}") from None
    if getattr(args, "quad_nodes", None) is not None:
        kw["quad_nodes"] = args.quad_nodes
    if getattr(args, "fixtures", None):
        kw["oracle_fixtures"] = args.fixtures
    if getattr(args, "count", None) is not None:
        kw["oracle_count"] = args.count
    return cfg.replace(**kw) if kw else cfg


def main(argv=None) -> int:
    threads = os.environ.get("BOGOSPEC_THREADS")
    if threads:
        try:
            _accel.set_threads(int(threads))
        except ValueError:
            print("error: BOGOSPEC_THREADS must be an integer", file=sys.stderr)
            return UsageError.exit_code
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    commands = {"run", "plot", "kernels", "ebog", "oracle", "validate", *STAGES}
    if not argv or (argv[0] not in commands and argv[0] not in ("-h", "--help", "--version")):
        argv.insert(0, "run")
    args = ap.parse_args(argv)
    cmd = args.command
    say = (lambda s: None) if getattr(args, "quiet", False) else (lambda s: print(s, file=sys.stderr))
    try:
        if cmd == "plot":
            path = emit_plot_data(load_manifest(args.out), args.which)
            print(path)
            return 0
        cfg = _config_from_args(args)
        if cmd == "validate" and (args.workers > 1 or args.only or args.json):
            from .validate import report_json, run_suite

            rep = run_suite(workers=args.workers, only=args.only)
            print(report_json(rep) if args.json else rep.table())
            return 0 if rep.passed else NumericalError.exit_code
        if cmd == "run":
            man = run_pipeline(cfg, args.stages, resolve=args.resolve, log=say)
        else:
            man = run_pipeline(cfg, [cmd], resolve=True, log=say)
        if cmd == "validate":
            print(man.path("validate.txt").read_text(), end="")
        elif cmd == "oracle":
            _print_oracle(man)
        print(f"manifest: {man.path('manifest.json')}")
        if not man.passed:
            print("invariant failures: " + ", ".join(man.failures), file=sys.stderr)
            return NumericalError.exit_code
        return 0
    except BogospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def _print_oracle(man: RunManifest) -> None:
    import json

    d = json.loads(man.path("oracle.json").read_text())
    print(f"{'#':>3} {'modes':>5} {'ground_res':>12} {'gap_res':>12}  result")
    for r in d["fixtures"]:
        print(f"{r['index']:>3} {r['modes']:>5} {r['ground_residual']:12.3e} {r['gap_residual']:12.3e}  "
              + ("PASS" if r["pass"] else "FAIL"))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
