"""PSD singleton fraction vs rank for Gaussian operators.

Desk scale is n=16 with m = ceil(0.61*136) and ceil(0.73*136); --paper runs
n=40 with m in {500, 600} (hours to days on one core).
"""

import argparse
import math
from pathlib import Path

from nnunique.experiments import build_config, crossing, emit_plot, run_matrix_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paper", action="store_true")
    args = ap.parse_args()
    profile = "paper" if args.paper else "desk"
    ms = (500, 600) if args.paper else (math.ceil(0.61 * 136), math.ceil(0.73 * 136))
    for m in ms:
        over = dict(profile=profile, m=m, seed=args.seed, trials=args.trials,
                    out=str(Path(args.out_dir) / f"psd_phase_{profile}_m{m}.csv"))
        cfg = build_config("matrix-phase", overrides=over)
        res = run_matrix_phase(cfg)
        emit_plot(cfg.out)
        fr = [r.singleton_fraction for r in res.rows]
        print(f"n={cfg.n} m={m}: fractions {fr}; 50% crossing {crossing(cfg.grid, fr)}")


if __name__ == "__main__":
    main()
