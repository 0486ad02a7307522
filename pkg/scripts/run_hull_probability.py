"""Monte Carlo frequency of 0 in the convex hull of Gaussian columns vs the closed form."""

import argparse
from pathlib import Path

from nnunique.experiments import build_config, parse_csv, run_wendel_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = build_config("wendel-mc", overrides=dict(trials=args.trials, seed=args.seed,
                                                   out=str(Path(args.out_dir) / "hull_probability.csv")))
    res = run_wendel_mc(cfg)
    for row in parse_csv(res.csv).rows:
        print(f"m={row['m']:.0f} n={row['n']:.0f}: freq {row['frequency']:.4f} "
              f"formula {row['formula']:.4f} z {row['z']:+.2f}")


if __name__ == "__main__":
    main()
