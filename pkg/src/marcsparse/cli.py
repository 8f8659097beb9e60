"""Command line front: one subcommand per experiment, fixed exit codes.

Exit 0 on success, 2 on any configuration problem, 3 when the sparse
recursion exhausts its doubling budget (a finding about the discretization,
distinguished from a crash), 64 for an unknown subcommand.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

from scipy.fft import set_workers

from .functions import save_text
from .harness import (ConfigError, ExperimentConfig, load_config, read_csv,
                      run_commutator, run_domination, run_eval,
                      run_multiplier, run_sparse, run_uniformity, run_weights,
                      write_csv)
from .sparse import DominationBlowupError, save_sparse_text

_USAGE = """\
usage: marcsparse <subcommand> [--config PATH] [--out DIR] [--threads K]
                  [--grid N] [--beta LIST]

subcommands:
  eval             square function and fractional integral on bundled fields
  sparse           build, certify and export sparse families
  weights          characteristic table of the configured weights
  exp-uniformity   normalized weighted ratios of the square function
  exp-commutator   the same ratios for the symbol commutator
  exp-domination   recursion constants, certificates and weighted forms
  exp-multiplier   annulus-kernel Fourier envelope tables
  report           summarize the CSVs already written to --out
"""


def _build_parser(cmd: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"marcsparse {cmd}", add_help=True)
    parser.add_argument("--config", default=None,
                        help="key=value config file")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, default=1,
                        help="FFT worker threads")
    parser.add_argument("--grid", type=int, default=None,
                        help="points per axis (overrides the config)")
    parser.add_argument("--beta", default=None,
                        help="comma-separated beta list (overrides the config)")
    return parser


def _effective_config(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(ns.config) if ns.config else ExperimentConfig()
    updates: dict = {}
    if ns.grid is not None:
        updates["points"] = ns.grid
    if ns.beta is not None:
        try:
            betas = tuple(float(v) for v in ns.beta.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad --beta list {ns.beta!r}") from exc
        if not betas:
            raise ConfigError("empty --beta list")
        updates["betas"] = betas
        updates["qs"] = None  # derived again for the overridden betas
    if ns.out is not None:
        updates["out_dir"] = ns.out
    if ns.threads < 1:
        raise ConfigError("threads must be >= 1")
    if updates:
        try:
            cfg = replace(cfg, **updates)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def _write_report(report, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    write_csv(report, path)
    print(f"{report.experiment_id}: {len(report.rows)} rows -> {path}")
    return path


def _cmd_eval(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    report, saved = run_eval(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for tag in sorted(saved):
        save_text(saved[tag], os.path.join(cfg.out_dir, f"eval_{tag}.txt"))
    _write_report(report, cfg.out_dir, "eval.csv")
    return 0


def _cmd_sparse(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    report, families = run_sparse(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    for tag in sorted(families):
        save_sparse_text(families[tag],
                         os.path.join(cfg.out_dir, f"{tag}.txt"))
    _write_report(report, cfg.out_dir, "sparse.csv")
    return 0


def _cmd_weights(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    _write_report(run_weights(cfg), cfg.out_dir, "weights.csv")
    return 0


def _cmd_uniformity(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    _write_report(run_uniformity(cfg), cfg.out_dir, "uniformity.csv")
    return 0


def _cmd_commutator(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    _write_report(run_commutator(cfg), cfg.out_dir, "commutator.csv")
    return 0


def _cmd_domination(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    _write_report(run_domination(cfg), cfg.out_dir, "domination.csv")
    return 0


def _cmd_multiplier(ns: argparse.Namespace) -> int:
    cfg = _effective_config(ns)
    _write_report(run_multiplier(cfg), cfg.out_dir, "envelope.csv")
    return 0


# ---------------------------------------------------------------------------
# report

def _floats(header: list[str], rows: list[list[str]], name: str) -> list[float]:
    i = header.index(name)
    return [float(r[i]) for r in rows]


def _spread(values: list[float]) -> tuple[float, float, float]:
    finite = [v for v in values if math.isfinite(v) and v > 0.0]
    if not finite:
        return (math.nan, math.nan, math.nan)
    lo, hi = min(finite), max(finite)
    return (lo, hi, hi / lo)


def _summarize(name: str, header: list[str], rows: list[list[str]]) -> list[str]:
    lines = [f"{name}: {len(rows)} rows"]
    if not rows:
        return lines
    if name in ("uniformity.csv", "commutator.csv"):
        lo, hi, sp = _spread(_floats(header, rows, "ratio"))
        _, _, psp = _spread(_floats(header, rows, "predictor"))
        lines.append(f"  ratio {lo:.6g}..{hi:.6g} (spread x{sp:.6g}), "
                     f"predictor spread x{psp:.6g}")
        if name == "commutator.csv":
            bad = sum(1 for v in _floats(header, rows, "ratio")
                      if math.isnan(v))
            if bad:
                lines.append(f"  degenerate rows (constant symbol): {bad}")
    elif name == "domination.csv":
        lo, hi, sp = _spread(_floats(header, rows, "d_used"))
        margin = min(_floats(header, rows, "pointwise_margin"))
        eta = min(_floats(header, rows, "eta_ratio"))
        lines.append(f"  d_used {lo:.6g}..{hi:.6g} (spread x{sp:.6g}), "
                     f"min margin {margin:.6g}, min eta {eta:.6g}")
    elif name == "envelope.csv":
        betas = sorted({float(r[header.index("beta")]) for r in rows},
                       reverse=True)
        for beta in betas:
            sub = [r for r in rows
                   if float(r[header.index("beta")]) == beta]
            slopes = [v for v in _floats(header, sub, "slope_small")
                      if math.isfinite(v)]
            if slopes:
                lines.append(f"  beta {beta:.6g}: slope "
                             f"{min(slopes):.6g}..{max(slopes):.6g} "
                             f"(target {1.0 + beta:.6g})")
        large = [float(r[header.index("scaled_khat")])
                 / float(r[header.index("envelope_large")])
                 for r in rows
                 if float(r[header.index("two_j_xi")]) >= 4.0]
        if large:
            lines.append(f"  large-scale normalized max {max(large):.6g}")
    elif name == "weights.csv":
        lo, hi, _ = _spread(_floats(header, rows, "value"))
        lines.append(f"  value {lo:.6g}..{hi:.6g}")
    elif name == "sparse.csv":
        ok = all(r[header.index("ok")] == "1" for r in rows)
        lines.append("  all certified" if ok else "  CERTIFICATE FAILURES")
    return lines


_REPORT_FILES = ("uniformity.csv", "commutator.csv", "domination.csv",
                 "envelope.csv", "weights.csv", "eval.csv", "sparse.csv")


def _cmd_report(ns: argparse.Namespace) -> int:
    if ns.config:
        cfg = load_config(ns.config)
        out_dir = ns.out if ns.out is not None else cfg.out_dir
    else:
        out_dir = ns.out if ns.out is not None else "runs"
    found = 0
    for name in _REPORT_FILES:
        path = os.path.join(out_dir, name)
        if not os.path.exists(path):
            continue
        header, rows, _ = read_csv(path)
        for line in _summarize(name, header, rows):
            print(line)
        found += 1
    if not found:
        raise ConfigError(f"no experiment CSVs in {out_dir!r}")
    return 0


_HANDLERS = {
    "eval": _cmd_eval,
    "sparse": _cmd_sparse,
    "weights": _cmd_weights,
    "exp-uniformity": _cmd_uniformity,
    "exp-commutator": _cmd_commutator,
    "exp-domination": _cmd_domination,
    "exp-multiplier": _cmd_multiplier,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if not argv:
        print(_USAGE, file=sys.stderr)
        return 64
    cmd = argv[0]
    if cmd in ("-h", "--help", "help"):
        print(_USAGE)
        return 0
    if cmd not in _HANDLERS:
        print(f"unknown subcommand {cmd!r}", file=sys.stderr)
        print(_USAGE, file=sys.stderr)
        return 64
    parser = _build_parser(cmd)
    try:
        ns = parser.parse_args(argv[1:])
    except SystemExit as exc:
        return 0 if exc.code in (None, 0) else 2
    try:
        with set_workers(ns.threads if ns.threads >= 1 else 1):
            return _HANDLERS[cmd](ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DominationBlowupError as exc:
        print(str(exc), file=sys.stderr)
        return 3
