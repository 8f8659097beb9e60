"""Commutator ratio sweep with the logarithm symbol.

Same reading as run_uniformity but for the symbol-twisted square function:
the weighted norm ratio R_b(beta) should stay within a small factor as
beta walks toward 0 while the classical constant diverges.
"""

import argparse
import os

from marcsparse.harness import ExperimentConfig, run_commutator, write_csv

BETAS = (0.25, 0.1, 0.01)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--out", default="results/desk")
    args = ap.parse_args()

    cfg = ExperimentConfig(points=args.grid, function_ids=("two_bump",),
                           betas=BETAS, out_dir=args.out)
    rep = run_commutator(cfg)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "commutator.csv")
    write_csv(rep, path)

    by_weight = {}
    for row in rep.rows:
        d = dict(zip(rep.columns, row))
        by_weight.setdefault(d["weight"], []).append(d["ratio"])
    for wid in sorted(by_weight):
        vals = by_weight[wid]
        print(f"{wid}: R_b spread x{max(vals) / min(vals):.3f}")
    print(f"wrote {path} ({len(rep.rows)} rows, {rep.runtime_s:.1f}s)")


if __name__ == "__main__":
    main()
