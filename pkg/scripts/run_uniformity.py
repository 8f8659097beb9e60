"""Weighted ratio sweep: R(beta) per weight against the divergent predictor.

Writes uniformity.csv and prints the per-weight spread of R over the beta
ladder next to the spread of the classical predictor (1 - 2^-beta)^-1.
A flat R column with an exploding predictor is the point of the table.
"""

import argparse
import os

from marcsparse.harness import ExperimentConfig, run_uniformity, write_csv

BETAS = (0.25, 0.1, 0.01, 0.001)


def spread(values):
    vals = [v for v in values if v > 0.0]
    return max(vals) / min(vals)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--out", default="results/desk")
    args = ap.parse_args()

    cfg = ExperimentConfig(points=args.grid, function_ids=("two_bump",),
                           betas=BETAS, out_dir=args.out)
    rep = run_uniformity(cfg)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "uniformity.csv")
    write_csv(rep, path)

    by_weight = {}
    for row in rep.rows:
        d = dict(zip(rep.columns, row))
        by_weight.setdefault(d["weight"], []).append(d["ratio"])
    for wid in sorted(by_weight):
        print(f"{wid}: R spread x{spread(by_weight[wid]):.3f}")
    print(f"predictor spread x{spread(set(rep.column('predictor'))):.1f}")
    print(f"wrote {path} ({len(rep.rows)} rows, {rep.runtime_s:.1f}s)")


if __name__ == "__main__":
    main()
