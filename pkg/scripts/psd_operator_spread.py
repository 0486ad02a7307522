"""Rank-1 singleton fraction at n=16, m=83 across operator draws.

Shows how much the rank-1 fraction depends on which Gaussian operator is
drawn when m sits just above the rank-1 transition.
"""

import argparse

from nnunique.experiments import build_config, run_matrix_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=12)
    ap.add_argument("--m", type=int, default=83)
    ap.add_argument("--trials", type=int, default=50)
    args = ap.parse_args()
    print("seed,rank1_fraction,inconclusive")
    for seed in range(args.seeds):
        cfg = build_config("matrix-phase", overrides=dict(m=args.m, grid=(1,), trials=args.trials,
                                                          seed=seed))
        row = run_matrix_phase(cfg).rows[0]
        print(f"{seed},{row.singleton_fraction},{row.inconclusive}", flush=True)


if __name__ == "__main__":
    main()
