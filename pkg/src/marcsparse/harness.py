"""Experiment configs, runners and deterministic CSV persistence.

Each experiment is a pure function of its config: grids, kernels, fields
and weights are rebuilt from ids, every float is written with 17
significant digits, and rows are sorted by a total key (beta descending,
then the id columns), so a rerun with the same config produces the same
bytes.  Wall-clock time is measured and kept on the in-memory report only;
it never reaches the CSV.

The headline quantity is the normalized ratio

    R(beta) = |mu f|_{q, w^q} / (|Omega|_inf [w]^e |f|_{p, w^p})

whose stability as beta shrinks is the whole point; the contrast column
carries the naive predictor 1/(1 - 2^-beta) that diverges in the same
limit.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from dataclasses import dataclass, fields

import numpy as np

from .functions import (GridFunction, bmo_norm, log_abs_symbol, lp_norm,
                        make_test_field, make_test_kernels)
from .geometry import Box, Grid, scan_lattices
from .operators import (commutator, fractional_integral, marcinkiewicz,
                        multiplier_envelope)
from .sparse import build_sparse_family, sparse_operator, verify_sparse
from .weights import (apq_characteristic, default_scan_level, exp_bmo_weight,
                      power_weight)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "commutator_exponent",
    "config_hash",
    "derive_q",
    "load_config",
    "make_symbol",
    "make_weight",
    "parse_config_text",
    "read_csv",
    "run_commutator",
    "run_domination",
    "run_eval",
    "run_multiplier",
    "run_sparse",
    "run_uniformity",
    "run_weights",
    "sparse_form_exponent",
    "square_function_exponent",
    "write_csv",
]

KERNEL_IDS = ("cos", "rough", "sin2")
FUNCTION_IDS = ("disk", "gaussian", "spike", "two_bump")
SYMBOL_IDS = ("const", "log_abs")

UNIFORMITY_COLUMNS = ("beta", "p", "q", "weight", "function", "kernel",
                      "mu_norm", "f_norm", "apq", "exponent", "ratio",
                      "predictor")
COMMUTATOR_COLUMNS = ("beta", "p", "q", "weight", "function", "kernel",
                      "symbol", "bmo_norm", "mu_b_norm", "f_norm", "apq",
                      "exponent", "ratio", "predictor")
DOMINATION_COLUMNS = ("beta", "l", "p", "q", "weight", "function", "kernel",
                      "d_used", "eta_ratio", "pointwise_margin",
                      "sparse_norm", "f_norm", "apq", "exponent", "ratio")
ENVELOPE_COLUMNS = ("beta", "j", "t", "direction", "xi_abs", "two_j_xi",
                    "khat_abs", "scaled_khat", "envelope_small",
                    "envelope_large", "slope_small")
WEIGHTS_COLUMNS = ("weight_id", "p", "q", "value", "argmax_level",
                   "argmax_index", "cubes")
EVAL_COLUMNS = ("beta", "function", "kernel", "quantity", "value")
SPARSE_COLUMNS = ("beta", "l", "function", "kernel", "nodes", "d_used",
                  "eta_ratio", "pointwise_margin", "ok")

# small-scale fit window: phases 2 pi 2^(j+1) t |xi| stay well under 1 so
# the first oscillation term dominates and the fitted slope is clean
SMALL_SCALE_CUT = 2.0 ** -6

_EXPONENT_RELATION_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid experiment configuration; the CLI maps this to exit 2."""


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class ExperimentConfig:
    """Flat description of one experiment run.

    q is derived from (p, beta) through 1/q = 1/p - beta/n per row; an
    explicit qs list is accepted but must match the relation to 1e-12.
    """

    dim: int = 2
    points: int = 128
    half_width: float = 2.0
    kernel_id: str = "cos"
    function_ids: tuple[str, ...] = ("disk",)
    betas: tuple[float, ...] = (0.25, 0.1, 0.01, 0.001)
    p: float = 2.0
    qs: tuple[float, ...] | None = None
    weight_ids: tuple[str, ...] = ("unit", "power:0.3")
    symbol_id: str = "log_abs"
    smoothing_ls: tuple[int, ...] = (4,)
    octave_js: tuple[int, ...] = tuple(range(-10, 7))
    window_ts: tuple[float, ...] = (1.0, 1.5)
    direction_degs: tuple[float, ...] = (0.0, 30.0, 60.0)
    out_dir: str = "runs"
    seed: int = 0
    samples_per_octave: int = 8
    d_init: float = 1.0
    max_doublings: int = 20
    max_depth: int = 12

    def __post_init__(self) -> None:
        if self.dim != 2:
            raise ConfigError("only the planar pipeline is implemented")
        n = self.points
        if n < 8 or n & (n - 1):
            raise ConfigError("points must be a power of two >= 8")
        if not self.half_width > 0.0:
            raise ConfigError("half_width must be positive")
        if self.kernel_id not in KERNEL_IDS:
            raise ConfigError(f"unknown kernel {self.kernel_id!r}")
        if not self.function_ids:
            raise ConfigError("need at least one function id")
        for fid in self.function_ids:
            if fid not in FUNCTION_IDS:
                raise ConfigError(f"unknown function {fid!r}")
        if self.symbol_id not in SYMBOL_IDS:
            raise ConfigError(f"unknown symbol {self.symbol_id!r}")
        if not self.betas:
            raise ConfigError("need at least one beta")
        if not self.p > 1.0:
            raise ConfigError("p must exceed 1")
        for beta in self.betas:
            if not 0.0 < beta < self.dim:
                raise ConfigError(f"beta {beta} outside (0, n)")
            if not self.p < self.dim / beta:
                raise ConfigError(f"p {self.p} too large for beta {beta}")
        if self.qs is not None:
            if len(self.qs) != len(self.betas):
                raise ConfigError("qs list must pair with betas")
            for beta, q in zip(self.betas, self.qs):
                if not q > 0:
                    raise ConfigError("q must be positive")
                gap = abs(1.0 / q - (1.0 / self.p - beta / self.dim))
                if gap > _EXPONENT_RELATION_TOL:
                    raise ConfigError(
                        f"q {q} violates the exponent relation at beta {beta}")
        for wid in self.weight_ids:
            _parse_weight_id(wid)
        if not self.smoothing_ls or any(l < 1 for l in self.smoothing_ls):
            raise ConfigError("smoothing scales must be >= 1")
        if any(not 1.0 <= t <= 2.0 for t in self.window_ts):
            raise ConfigError("window positions must lie in [1, 2]")
        if self.samples_per_octave < 2:
            raise ConfigError("samples_per_octave must be >= 2")
        if not self.d_init > 0.0:
            raise ConfigError("d_init must be positive")
        if self.max_doublings < 0 or self.max_depth < 1:
            raise ConfigError("bad recursion budget")

    def grid(self) -> Grid:
        return Grid(Box(self.dim, (0.0,) * self.dim, self.half_width),
                    self.points)

    def q_for(self, beta: float) -> float:
        if self.qs is not None:
            return self.qs[self.betas.index(beta)]
        return 1.0 / (1.0 / self.p - beta / self.dim)


_LIST_KEYS = {
    "functions": str,
    "betas": float,
    "qs": float,
    "weights": str,
    "ls": int,
    "js": int,
    "ts": float,
    "directions": float,
}
_SCALAR_KEYS = {
    "n": int,
    "points": int,
    "half_width": float,
    "kernel": str,
    "p": float,
    "symbol": str,
    "out": str,
    "seed": int,
    "samples_per_octave": int,
    "d_init": float,
    "max_doublings": int,
    "max_depth": int,
}
_KEY_TO_FIELD = {
    "n": "dim",
    "points": "points",
    "half_width": "half_width",
    "kernel": "kernel_id",
    "functions": "function_ids",
    "betas": "betas",
    "p": "p",
    "qs": "qs",
    "weights": "weight_ids",
    "symbol": "symbol_id",
    "ls": "smoothing_ls",
    "js": "octave_js",
    "ts": "window_ts",
    "directions": "direction_degs",
    "out": "out_dir",
    "seed": "seed",
    "samples_per_octave": "samples_per_octave",
    "d_init": "d_init",
    "max_doublings": "max_doublings",
    "max_depth": "max_depth",
}


def parse_config_text(text: str) -> ExperimentConfig:
    """key=value lines, '#' comments, list values comma-separated."""
    updates: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field = _KEY_TO_FIELD[key]
        if field in updates:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _LIST_KEYS:
                conv = _LIST_KEYS[key]
                items = tuple(conv(v.strip())
                              for v in value.split(",") if v.strip())
                updates[field] = items if items else None
            else:
                updates[field] = _SCALAR_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}") from exc
    try:
        return ExperimentConfig(**updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config_text(text)


def config_hash(cfg: ExperimentConfig) -> str:
    """Short digest of the typed config; the output location is excluded
    so runs written to different directories stay byte-comparable."""
    parts = []
    for f in sorted(fields(cfg), key=lambda f: f.name):
        if f.name == "out_dir":
            continue
        parts.append(f"{f.name}={getattr(cfg, f.name)!r}")
    blob = "\n".join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def derive_q(p: float, beta: float, n: int) -> float:
    return 1.0 / (1.0 / p - beta / n)


# ---------------------------------------------------------------------------
# weighted-bound exponents

def square_function_exponent(beta: float, p: float, q: float,
                             n: int = 2) -> float:
    """Characteristic exponent of the weighted square-function bound."""
    pc = p / (p - 1.0)
    scale = max(pc / q * (1.0 - beta / n), 0.5 - beta / n)
    if beta < 0.5:
        return max(1.0, pc / q) + scale
    return max(pc / q * (1.0 - beta / n), 1.0 - beta / n)


def commutator_exponent(beta: float, p: float, q: float, n: int = 2) -> float:
    """One more characteristic power than the plain square function."""
    return 1.0 + square_function_exponent(beta, p, q, n)


def sparse_form_exponent(beta: float, p: float, q: float, n: int = 2) -> float:
    """Characteristic exponent of the weighted sparse-form bound."""
    pc = p / (p - 1.0)
    return max(pc / q * (1.0 - beta / n), 0.5 - beta / n)


# ---------------------------------------------------------------------------
# weight and symbol descriptors

def _parse_weight_id(wid: str) -> tuple[str, float]:
    if wid == "unit":
        return ("unit", 0.0)
    kind, _, arg = wid.partition(":")
    if kind in ("power", "expb") and arg:
        try:
            return (kind, float(arg))
        except ValueError:
            pass
    raise ConfigError(f"unknown weight descriptor {wid!r}")


def make_weight(grid: Grid, wid: str) -> GridFunction:
    """unit | power:<a> -> |x|^a | expb:<lam> -> exp(lam log|x|-symbol)."""
    kind, arg = _parse_weight_id(wid)
    if kind == "unit":
        return GridFunction(grid, np.ones(grid.shape))
    if kind == "power":
        return power_weight(grid, arg)
    return exp_bmo_weight(log_abs_symbol(grid), arg)


def make_symbol(grid: Grid, sid: str) -> GridFunction:
    if sid == "log_abs":
        return log_abs_symbol(grid)
    if sid == "const":
        return GridFunction(grid, np.ones(grid.shape))
    raise ConfigError(f"unknown symbol {sid!r}")


# ---------------------------------------------------------------------------
# reports and CSV persistence

@dataclass
class ExperimentReport:
    """Rows plus provenance; runtime stays in memory (CSV bytes must not
    depend on wall time)."""

    experiment_id: str
    columns: tuple[str, ...]
    rows: list[tuple]
    provenance: dict[str, str]
    runtime_s: float

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _provenance(cfg: ExperimentConfig) -> dict[str, str]:
    return {
        "config_hash": config_hash(cfg),
        "grid": f"n{cfg.dim}_N{cfg.points}_L{cfg.half_width:.17g}",
    }


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(report: ExperimentReport, path: str) -> None:
    lines = [f"# config_hash={report.provenance['config_hash']}",
             f"# grid={report.provenance['grid']}",
             ",".join(report.columns)]
    for row in report.rows:
        if len(row) != len(report.columns):
            raise ValueError("row width does not match the header")
        lines.append(",".join(_fmt(x) for x in row))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]], dict[str, str]]:
    """Header, string rows, and the '#' provenance pairs."""
    provenance: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                provenance[key] = value
                continue
            if not header:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return header, rows, provenance


# ---------------------------------------------------------------------------
# experiments

def run_uniformity(cfg: ExperimentConfig) -> ExperimentReport:
    """Normalized weighted ratios of the square function across betas."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    kern = make_test_kernels()[cfg.kernel_id]
    rows = []
    for beta in cfg.betas:
        q = cfg.q_for(beta)
        expo = square_function_exponent(beta, cfg.p, q, cfg.dim)
        predictor = 1.0 / (1.0 - 2.0 ** (-beta))
        for fid in cfg.function_ids:
            f = make_test_field(grid, fid)
            mu = marcinkiewicz(f, kern, beta,
                               samples_per_octave=cfg.samples_per_octave)
            for wid in cfg.weight_ids:
                w = make_weight(grid, wid)
                apq = apq_characteristic(w, cfg.p, q).value
                wq = GridFunction(grid, w.values ** q)
                wp = GridFunction(grid, w.values ** cfg.p)
                mu_norm = lp_norm(mu, q, wq)
                f_norm = lp_norm(f, cfg.p, wp)
                ratio = mu_norm / (kern.sup_norm * apq ** expo * f_norm)
                rows.append((beta, cfg.p, q, wid, fid, cfg.kernel_id,
                             mu_norm, f_norm, apq, expo, ratio, predictor))
    rows.sort(key=lambda r: (-r[0], r[3], r[4]))
    return ExperimentReport("uniformity", UNIFORMITY_COLUMNS, rows,
                            _provenance(cfg), time.perf_counter() - t0)


def run_commutator(cfg: ExperimentConfig) -> ExperimentReport:
    """Same ratios for the symbol commutator, normalized by the symbol's
    oscillation norm; a constant symbol makes every norm 0 and the ratio
    is recorded as nan to flag the degenerate row."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    kern = make_test_kernels()[cfg.kernel_id]
    b = make_symbol(grid, cfg.symbol_id)
    bmo = bmo_norm(b, scan_lattices(grid.box, default_scan_level(grid)))
    rows = []
    for beta in cfg.betas:
        q = cfg.q_for(beta)
        expo = commutator_exponent(beta, cfg.p, q, cfg.dim)
        predictor = 1.0 / (1.0 - 2.0 ** (-beta))
        for fid in cfg.function_ids:
            f = make_test_field(grid, fid)
            mu_b = commutator(f, kern, beta, b,
                              samples_per_octave=cfg.samples_per_octave)
            for wid in cfg.weight_ids:
                w = make_weight(grid, wid)
                apq = apq_characteristic(w, cfg.p, q).value
                wq = GridFunction(grid, w.values ** q)
                wp = GridFunction(grid, w.values ** cfg.p)
                mu_b_norm = lp_norm(mu_b, q, wq)
                f_norm = lp_norm(f, cfg.p, wp)
                if bmo > 0.0:
                    ratio = mu_b_norm / (kern.sup_norm * bmo
                                         * apq ** expo * f_norm)
                else:
                    ratio = math.nan
                rows.append((beta, cfg.p, q, wid, fid, cfg.kernel_id,
                             cfg.symbol_id, bmo, mu_b_norm, f_norm, apq,
                             expo, ratio, predictor))
    rows.sort(key=lambda r: (-r[0], r[3], r[4]))
    return ExperimentReport("commutator", COMMUTATOR_COLUMNS, rows,
                            _provenance(cfg), time.perf_counter() - t0)


def run_domination(cfg: ExperimentConfig) -> ExperimentReport:
    """Sparse families per (beta, l, f): recursion constant, certificate,
    and the weighted norm of the sparse form."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    kern = make_test_kernels()[cfg.kernel_id]
    rows = []
    for beta in cfg.betas:
        q = cfg.q_for(beta)
        expo = sparse_form_exponent(beta, cfg.p, q, cfg.dim)
        for l in cfg.smoothing_ls:
            for fid in cfg.function_ids:
                f = make_test_field(grid, fid)
                fam = build_sparse_family(
                    f, kern, beta, l,
                    samples_per_octave=cfg.samples_per_octave,
                    d_init=cfg.d_init, max_doublings=cfg.max_doublings,
                    max_depth=cfg.max_depth)
                cert = verify_sparse(fam, f, kern)
                form = sparse_operator(fam, f, 2.0, beta)
                for wid in cfg.weight_ids:
                    w = make_weight(grid, wid)
                    apq = apq_characteristic(w, cfg.p, q).value
                    wq = GridFunction(grid, w.values ** q)
                    wp = GridFunction(grid, w.values ** cfg.p)
                    sparse_norm = lp_norm(form, q, wq)
                    f_norm = lp_norm(f, cfg.p, wp)
                    ratio = sparse_norm / (apq ** expo * f_norm) \
                        if f_norm > 0.0 else 0.0
                    rows.append((beta, l, cfg.p, q, wid, fid, cfg.kernel_id,
                                 fam.d_used, cert.eta_ratio,
                                 cert.pointwise_margin, sparse_norm, f_norm,
                                 apq, expo, ratio))
    rows.sort(key=lambda r: (-r[0], r[1], r[4], r[5]))
    return ExperimentReport("domination", DOMINATION_COLUMNS, rows,
                            _provenance(cfg), time.perf_counter() - t0)


def run_multiplier(cfg: ExperimentConfig) -> ExperimentReport:
    """Annulus-kernel Fourier tables: normalized values against the two
    envelope branches, with a fitted small-scale slope per sample line."""
    t0 = time.perf_counter()
    kern = make_test_kernels()[cfg.kernel_id]
    rows = []
    for beta in cfg.betas:
        # zero-frequency row: everything vanishes; the decaying branch is
        # vacuous there and is recorded as zero to keep the table finite
        khat0 = abs(multiplier_envelope(kern, beta, 0, 1.0, (0.0, 0.0)))
        rows.append((beta, 0, 1.0, 0.0, 0.0, 0.0, khat0, 0.0, 0.0, 0.0,
                     math.nan))
        for t in cfg.window_ts:
            for deg in cfg.direction_degs:
                rad = math.radians(deg)
                xi = (math.cos(rad), math.sin(rad))
                xi_abs = 1.0
                line = []
                for j in cfg.octave_js:
                    khat = abs(multiplier_envelope(kern, beta, j, t, xi))
                    u = 2.0 ** j * xi_abs
                    scaled = khat * xi_abs ** beta / kern.sup_norm
                    line.append((j, u, khat, scaled))
                small = [(u, s) for _, u, _, s in line
                         if u <= SMALL_SCALE_CUT and s > 0.0]
                if len(small) >= 2:
                    xs = np.log([u for u, _ in small])
                    ys = np.log([s for _, s in small])
                    slope = float(np.polyfit(xs, ys, 1)[0])
                else:
                    slope = math.nan
                for j, u, khat, scaled in line:
                    rows.append((beta, j, t, deg, xi_abs, u, khat, scaled,
                                 u ** (1.0 + beta),
                                 u ** (-(1.0 - beta) / 2.0), slope))
    rows.sort(key=lambda r: (-r[0], r[1], r[2], r[3], r[4]))
    return ExperimentReport("envelope", ENVELOPE_COLUMNS, rows,
                            _provenance(cfg), time.perf_counter() - t0)


def run_weights(cfg: ExperimentConfig) -> ExperimentReport:
    """Characteristic table of the configured weights, one row per
    (weight, beta-derived q)."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    rows = []
    for beta in cfg.betas:
        q = cfg.q_for(beta)
        for wid in cfg.weight_ids:
            w = make_weight(grid, wid)
            res = apq_characteristic(w, cfg.p, q)
            index = ";".join(str(i) for i in res.argmax_index)
            rows.append((wid, cfg.p, q, res.value, res.argmax_level, index,
                         res.cubes, beta))
    rows.sort(key=lambda r: (-r[7], r[0]))
    rows = [r[:7] for r in rows]
    return ExperimentReport("weights", WEIGHTS_COLUMNS, rows,
                            _provenance(cfg), time.perf_counter() - t0)


def run_eval(cfg: ExperimentConfig) -> tuple[ExperimentReport,
                                             dict[str, GridFunction]]:
    """Operator smoke evaluation: named norms plus the grid functions
    themselves for persistence."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    kern = make_test_kernels()[cfg.kernel_id]
    rows = []
    saved: dict[str, GridFunction] = {}
    for beta in cfg.betas:
        q = cfg.q_for(beta)
        for fid in cfg.function_ids:
            f = make_test_field(grid, fid)
            mu = marcinkiewicz(f, kern, beta,
                               samples_per_octave=cfg.samples_per_octave)
            pot = fractional_integral(
                GridFunction(grid, np.abs(f.values)), beta)
            saved.setdefault(f"field_{fid}", f)
            saved[f"mu_{fid}_beta{beta:.17g}"] = mu
            quantities = (
                ("f_norm_p", lp_norm(f, cfg.p)),
                ("ibeta_norm_q", lp_norm(pot, q)),
                ("mu_norm_q", lp_norm(mu, q)),
                ("mu_sup", float(np.max(mu.values))),
            )
            for name, value in quantities:
                rows.append((beta, fid, cfg.kernel_id, name, value))
    rows.sort(key=lambda r: (-r[0], r[1], r[3]))
    report = ExperimentReport("eval", EVAL_COLUMNS, rows, _provenance(cfg),
                              time.perf_counter() - t0)
    return report, saved


def run_sparse(cfg: ExperimentConfig) -> tuple[ExperimentReport, dict]:
    """Families for every (beta, l, f) with their certificates, plus the
    families themselves keyed by file tag for persistence."""
    t0 = time.perf_counter()
    grid = cfg.grid()
    kern = make_test_kernels()[cfg.kernel_id]
    rows = []
    families: dict[str, object] = {}
    for beta in cfg.betas:
        for l in cfg.smoothing_ls:
            for fid in cfg.function_ids:
                f = make_test_field(grid, fid)
                fam = build_sparse_family(
                    f, kern, beta, l,
                    samples_per_octave=cfg.samples_per_octave,
                    d_init=cfg.d_init, max_doublings=cfg.max_doublings,
                    max_depth=cfg.max_depth)
                cert = verify_sparse(fam, f, kern)
                tag = f"family_{fid}_{cfg.kernel_id}_beta{beta:.17g}_l{l}"
                families[tag] = fam
                rows.append((beta, l, fid, cfg.kernel_id, len(fam),
                             fam.d_used, cert.eta_ratio,
                             cert.pointwise_margin, bool(cert.ok)))
    rows.sort(key=lambda r: (-r[0], r[1], r[2]))
    report = ExperimentReport("sparse", SPARSE_COLUMNS, rows,
                              _provenance(cfg), time.perf_counter() - t0)
    return report, families
