"""Singleton and L1 recovery fractions vs sparsity for 50x200 and 100x200 0-1 matrices.

Writes one CSV and one gnuplot script per row count into --out-dir.
"""

import argparse
from pathlib import Path

from nnunique.experiments import build_config, crossing, emit_plot, run_vector_phase

GRIDS = {50: "2:40:2", 100: "4:80:4"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rows", type=int, nargs="+", default=[50, 100])
    args = ap.parse_args()
    out = Path(args.out_dir)
    for m in args.rows:
        grid = GRIDS.get(m, "1:60")
        lo, hi, step = (int(x) for x in grid.split(":"))
        cfg = build_config("vector-phase", overrides=dict(
            m=m, grid=tuple(range(lo, hi + 1, step)), trials=args.trials, seed=args.seed,
            out=str(out / f"sparse_phase_m{m}.csv")))
        res = run_vector_phase(cfg)
        emit_plot(cfg.out)
        c = crossing([r.grid for r in res.rows], [r.singleton_fraction for r in res.rows])
        print(f"m={m}: 50% crossing k={c}; csv {cfg.out}")


if __name__ == "__main__":
    main()
