"""Bipartite-graph view of 0-1 matrices and expansion-based sparsity thresholds.

Columns are left nodes, rows are right nodes, and ``A[i, j] = 1`` is an edge.
For a left set ``S``, ``E(S)`` is its edge set (so ``|E(S)|`` is the sum of
the degrees in ``S``) and ``Gamma(S)`` is its neighbourhood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .ensembles import _rng
from .errors import ContractError, DegenerateGraph, EnumerationTooLarge

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_SUBSETS = 10**6


def _binary(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all((A == 0) | (A == 1)):
        raise ContractError("adjacency matrix must be 0-1")
    return A.astype(bool)


def degree_profile(A) -> tuple[int, int, float]:
    """``(d_l, d_u, rho)``: min and max left degree and their ratio."""
    B = _binary(A)
    deg = B.sum(axis=0)
    if deg.size == 0 or deg.min() == 0:
        raise DegenerateGraph("every left node needs at least one edge")
    d_l, d_u = int(deg.min()), int(deg.max())
    return d_l, d_u, d_l / d_u


def expansion_ratio(A, S) -> float:
    B = _binary(A)
    cols = B[:, list(S)]
    return float(np.any(cols, axis=1).sum() / cols.sum())


def _max_size(alpha: float, n: int) -> int:
    if not 0.0 < alpha <= 1.0:
        raise ContractError(f"alpha must lie in (0, 1], got {alpha}")
    # guard against alpha * n landing a hair under an integer
    return int(math.floor(alpha * n + 1e-9))


def _subset_count(n: int, s_max: int) -> int:
    return sum(math.comb(n, s) for s in range(1, s_max + 1))


@dataclass
class ExpansionCheck:
    status: str  # certified | refuted | no-violation-found
    violating_set: Optional[tuple] = None
    checked: int = 0

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def _violates(B: np.ndarray, S, delta: float) -> bool:
    cols = B[:, S]
    # exact integer comparison up to the float delta: |Gamma| >= delta |E|
    return np.any(cols, axis=1).sum() < delta * cols.sum() - 1e-12


def verify_expansion(A, alpha: float, delta: float, mode: str = "exhaustive",
                     samples: int = 1000, seed=0, max_subsets: int = MAX_SUBSETS) -> ExpansionCheck:
    """Check ``|Gamma(S)| >= delta |E(S)|`` for every left set with ``|S| <= floor(alpha n)``.

    ``exhaustive`` enumerates subsets by increasing size and stops at the
    first violation. ``sampled`` draws ``samples`` subsets per size; it can
    refute but never certifies.
    """
    B = _binary(A)
    n = B.shape[1]
    if not 0.0 < delta <= 1.0:
        raise ContractError(f"delta must lie in (0, 1], got {delta}")
    s_max = _max_size(alpha, n)
    checked = 0
    if mode == "exhaustive":
        total = _subset_count(n, s_max)
        if total > max_subsets:
            raise EnumerationTooLarge(f"{total} subsets exceed the enumeration limit {max_subsets}")
        for s in range(1, s_max + 1):
            for S in combinations(range(n), s):
                checked += 1
                if _violates(B, list(S), delta):
                    return ExpansionCheck("refuted", S, checked)
        return ExpansionCheck("certified", None, checked)
    if mode == "sampled":
        rng = _rng(seed)
        for s in range(1, s_max + 1):
            for _ in range(samples):
                S = tuple(sorted(rng.choice(n, size=s, replace=False).tolist()))
                checked += 1
                if _violates(B, list(S), delta):
                    return ExpansionCheck("refuted", S, checked)
        return ExpansionCheck("no-violation-found", None, checked)
    raise ContractError(f"unknown mode {mode!r}")


def best_delta(A, alpha: float, max_subsets: int = MAX_SUBSETS) -> float:
    """Largest ``delta`` for which the graph is an ``(alpha, delta)`` expander (exhaustive)."""
    B = _binary(A)
    n = B.shape[1]
    s_max = _max_size(alpha, n)
    if s_max == 0:
        return 1.0
    total = _subset_count(n, s_max)
    if total > max_subsets:
        raise EnumerationTooLarge(f"{total} subsets exceed the enumeration limit {max_subsets}")
    if B.sum(axis=0).min() == 0:
        raise DegenerateGraph("every left node needs at least one edge")
    best = 1.0
    for s in range(1, s_max + 1):
        for S in combinations(range(n), s):
            cols = B[:, S]
            best = min(best, np.any(cols, axis=1).sum() / cols.sum())
    return float(best)


@dataclass
class Threshold:
    condition_met: bool
    k: Optional[int] = None


def uniqueness_threshold(alpha: float, delta: float, rho: float, n: int) -> Threshold:
    """Sparsity up to which nonnegative solutions are unique for an expander.

    Requires ``delta * rho`` above the golden-ratio constant 0.618...; the
    bound is then ``floor(alpha n / (1 + delta rho))``.
    """
    for name, v in (("alpha", alpha), ("delta", delta), ("rho", rho)):
        if not 0.0 < v <= 1.0:
            raise ContractError(f"{name} must lie in (0, 1], got {v}")
    if n < 1:
        raise ContractError("n must be positive")
    dr = delta * rho
    if dr <= GOLDEN:
        return Threshold(False)
    return Threshold(True, int(math.floor(alpha * n / (1.0 + dr) + 1e-9)))


@dataclass
class ExpanderReport:
    d_l: int
    d_u: int
    rho: float
    alpha: float
    delta: float
    certified: bool
    status: str
    violating_set: Optional[tuple] = None
    threshold_k: Optional[int] = None

    def to_record(self) -> str:
        fields = {
            "d_l": self.d_l, "d_u": self.d_u, "rho": f"{self.rho:.10g}",
            "alpha": f"{self.alpha:.10g}", "delta": f"{self.delta:.10g}",
            "certified": str(self.certified).lower(), "status": self.status,
        }
        if self.violating_set is not None:
            fields["violating_set"] = ",".join(map(str, self.violating_set))
        if self.threshold_k is not None:
            fields["threshold_k"] = self.threshold_k
        return "".join(f"{k}={v}\n" for k, v in fields.items())


def expander_report(A, alpha: float, delta: float, mode: str = "exhaustive", **kw) -> ExpanderReport:
    """Degree profile, expansion check and, when certified, the sparsity threshold."""
    d_l, d_u, rho = degree_profile(A)
    chk = verify_expansion(A, alpha, delta, mode=mode, **kw)
    k = None
    if chk.certified:
        th = uniqueness_threshold(alpha, delta, rho, np.shape(A)[1])
        k = th.k if th.condition_met else None
    return ExpanderReport(d_l, d_u, rho, alpha, delta, chk.certified, chk.status, chk.violating_set, k)
