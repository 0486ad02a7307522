"""Smallest positive/negative supports of random null vectors of 0-1 matrices with a ones row."""

import argparse
from pathlib import Path

from nnunique.experiments import build_config, run_nullspace_support


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--profile", choices=["desk", "paper"], default="desk")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = build_config("nullspace-support", overrides=dict(
        profile=args.profile, seed=args.seed,
        out=str(Path(args.out_dir) / f"nullspace_support_{args.profile}.csv")))
    for rec in run_nullspace_support(cfg).rows:
        print(f"draw {rec['draw']}: min positive {rec['min_pos']}, min negative {rec['min_neg']}, "
              f"floor {rec['floor_fraction']:.3f}n")


if __name__ == "__main__":
    main()
