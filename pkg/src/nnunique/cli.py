"""Command-line entry point: sweeps, plots and single-instance verdicts."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ContractError, NumericalError
from .experiments import (RUNNERS, ConfigError, CsvFormatError, build_config, emit_plot,
                          parse_config_text, parse_grid, parse_pairs)
from .linalg import parse_operator, read_matrix
from .sdp import SymOperator

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _sweep_parser(sub, kind: str, help_text: str):
    p = sub.add_parser(kind, help=help_text)
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--profile", choices=["desk", "paper"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--ones-row", dest="ones_row", action="store_const", const=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--probes", type=int)
    p.add_argument("--grid", help="lo:hi[:step] inclusive, or a comma list")
    p.add_argument("--pairs", help="wendel-mc (m, n) pairs, e.g. 1x2,4x10")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--exact", action="store_const", const=True)
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script next to the CSV")
    p.set_defaults(kind=kind)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nnunique", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _sweep_parser(sub, "vector-phase", "singleton / L1 recovery fraction vs sparsity (0-1 matrices)")
    _sweep_parser(sub, "matrix-phase", "PSD singleton fraction vs rank (Gaussian operators)")
    _sweep_parser(sub, "wendel-mc", "Monte Carlo check of the convex-hull probability")
    _sweep_parser(sub, "nullspace-support", "support sizes of random null vectors")

    p = sub.add_parser("plot", help="emit a gnuplot script for a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--kind", choices=["vector-phase", "matrix-phase"])
    p.add_argument("--out")

    p = sub.add_parser("mplus", help="row span meets the positive orthant? (matrix file)")
    p.add_argument("matrix")

    p = sub.add_parser("singleton", help="is {x >= 0 : Ax = Ax0} a single point?")
    p.add_argument("matrix")
    p.add_argument("x0", help="vector in the matrix text format (n x 1 or 1 x n)")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--probes", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("psd-singleton", help="is {X PSD : A(X) = A(X0)} a single point?")
    p.add_argument("operator")
    p.add_argument("x0", help="symmetric matrix in the matrix text format")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--probes", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("expander", help="expansion check and sparsity threshold of a 0-1 matrix")
    p.add_argument("matrix")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sampled", type=int, metavar="COUNT", help="sample COUNT subsets per size")
    p.add_argument("--seed", type=int, default=0)
    return ap


_SWEEP_KEYS = ("profile", "n", "m", "density", "ones_row", "trials", "probes", "grid",
               "pairs", "samples", "seed", "out", "exact")


def _run_sweep(args) -> int:
    file_values = {}
    if args.config:
        file_values = parse_config_text(Path(args.config).read_text())
    flags = {k: getattr(args, k) for k in _SWEEP_KEYS}
    if flags["grid"] is not None:
        flags["grid"] = parse_grid(flags["grid"])
    if flags["pairs"] is not None:
        flags["pairs"] = parse_pairs(flags["pairs"])
    cfg = build_config(args.kind, file_values, flags)
    result = RUNNERS[args.kind](cfg)
    if not cfg.out:
        sys.stdout.write(result.csv)
    elif args.plot and args.kind in ("vector-phase", "matrix-phase"):
        emit_plot(cfg.out, args.kind)
    if result.over_budget:
        logging.error("%d of %d trials hit solver failures (budget %.0f%%)",
                      result.failures, result.total_trials, 100 * cfg.failure_budget)
        return EXIT_SOLVER
    return EXIT_OK


def _read_vector(path) -> np.ndarray:
    v = read_matrix(path)
    if min(v.shape) != 1:
        raise ContractError("x0 must be a single row or column")
    return v.ravel()


def _dispatch(args) -> int:
    from . import expander, psd, vector

    if args.command in RUNNERS:
        return _run_sweep(args)
    if args.command == "plot":
        emit_plot(args.csv, args.kind, args.out)
        return EXIT_OK
    if args.command == "mplus":
        sys.stdout.write(vector.mplus_membership(read_matrix(args.matrix)).to_record())
        return EXIT_OK
    if args.command == "singleton":
        A, x0 = read_matrix(args.matrix), _read_vector(args.x0)
        v = (vector.exact_singleton(A, x0) if args.exact
             else vector.probe_singleton(A, x0, args.probes, args.seed))
        sys.stdout.write(v.to_record())
        return EXIT_OK
    if args.command == "psd-singleton":
        n, mats = parse_operator(Path(args.operator).read_text())
        op = SymOperator.from_list(mats, n)
        X0 = read_matrix(args.x0)
        v = (psd.exact_singleton_psd(op, X0) if args.exact
             else psd.probe_singleton_psd(op, X0, args.probes, args.seed))
        sys.stdout.write(v.to_record())
        return EXIT_OK
    if args.command == "expander":
        A = read_matrix(args.matrix)
        if args.sampled:
            rep = expander.expander_report(A, args.alpha, args.delta, mode="sampled",
                                           samples=args.sampled, seed=args.seed)
        else:
            rep = expander.expander_report(A, args.alpha, args.delta)
        sys.stdout.write(rep.to_record())
        return EXIT_OK
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ConfigError, CsvFormatError, ContractError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
