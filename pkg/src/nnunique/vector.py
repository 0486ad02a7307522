"""Uniqueness of nonnegative solutions of ``A x = b``.

Everything here reduces to linear programs on the polyhedron
``{x : A x = A x0, x >= 0}`` or on small auxiliary systems, solved by
:mod:`nnunique.lp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from .ensembles import _rng
from .errors import ContractError, EnumerationTooLarge, NumericalError
from .linalg import numerical_rank
from .lp import FeasibleSet, check_feasible

MAX_SUBSETS = 10**6
SPREAD_TOL = 1e-6
WITNESS_TOL = 1e-6
DEFAULT_PROBES = 5

CERTIFIED = "certified-singleton"
REFUTED = "refuted"
PROBABLE = "probable-singleton"


@dataclass
class SingletonVerdict:
    kind: str
    witness: Optional[np.ndarray] = None
    probes_used: int = 0
    gap: float = 0.0

    @property
    def singleton(self) -> bool:
        return self.kind in (CERTIFIED, PROBABLE)

    def to_record(self) -> str:
        lines = [f"kind={self.kind}", f"probes_used={self.probes_used}", f"gap={self.gap:.10g}"]
        if self.witness is not None:
            lines.append("witness=" + ",".join(format(v, ".10g") for v in self.witness))
        return "\n".join(lines) + "\n"


@dataclass
class MPlusCertificate:
    member: bool
    h: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None

    def to_record(self) -> str:
        vec = self.h if self.member else self.lam
        key = "h" if self.member else "lambda"
        return f"member={str(self.member).lower()}\n{key}=" + ",".join(format(v, ".10g") for v in vec) + "\n"


def _as_matrix(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all(np.isfinite(A)):
        raise ContractError("matrix entries must be finite")
    return A


def _check_subsets(count: int, limit: int) -> None:
    if count > limit:
        raise EnumerationTooLarge(f"{count} subsets exceed the enumeration limit {limit}")


def mplus_membership(A) -> MPlusCertificate:
    """Decide whether the row span of ``A`` meets the positive orthant.

    One LP, ``min mu  s.t.  A lam = 0, 1^T lam + mu = 1, (lam, mu) >= 0``,
    settles it: the optimum is 0 exactly when the origin is a convex
    combination of the columns (``lam`` is then the witness), and 1 otherwise,
    in which case the constraint duals give ``h`` with ``h^T A >= 1``.
    """
    A = _as_matrix(A)
    if not np.any(A):
        raise ContractError("mplus_membership needs a nonzero matrix")
    m, n = A.shape
    M = np.zeros((m + 1, n + 1))
    M[:m, :n] = A
    M[m, :] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    c = np.zeros(n + 1)
    c[n] = 1.0
    out = FeasibleSet(M, rhs).minimize(c)
    if not out.optimal:
        raise NumericalError(f"membership LP ended with status {out.status}")
    if out.value < 0.5:
        lam = np.clip(out.x[:n], 0.0, None)
        return MPlusCertificate(False, lam=lam / lam.sum())
    h = -out.duals[:m]
    beta = h @ A
    if beta.min() <= 0:
        raise NumericalError("dual separating vector failed verification", residual=float(beta.min()))
    return MPlusCertificate(True, h=h / beta.min())


def _witness_from(points, x0) -> Optional[np.ndarray]:
    best, dist = None, -1.0
    for p in points:
        if p is None:
            continue
        d = float(np.max(np.abs(p - x0)))
        if d > dist:
            best, dist = p, d
    return best if dist >= WITNESS_TOL else None


def _probe_polyhedron(fs: FeasibleSet, x0: np.ndarray, probes: int, rng,
                      tol: float = SPREAD_TOL) -> SingletonVerdict:
    """Min/max random objectives over ``fs``; stops at the first refutation."""
    gap = 0.0
    for used in range(1, probes + 1):
        d = rng.standard_normal(fs.n)
        lo = fs.minimize(d)
        hi = fs.maximize(d)
        pts = []
        for out in (lo, hi):
            if out.status == "unbounded":
                ray = out.ray / np.max(np.abs(out.ray))
                pts.append(out.x + ray)
            elif out.optimal:
                pts.append(out.x)
            else:
                raise NumericalError(f"probe LP ended with status {out.status}")
        if lo.optimal and hi.optimal:
            spread = hi.value - lo.value
            gap = max(gap, spread)
            if spread <= tol * (1.0 + abs(lo.value)):
                continue
        else:
            gap = math.inf
        w = _witness_from(pts, x0)
        if w is None:
            continue
        return SingletonVerdict(REFUTED, witness=w, probes_used=used, gap=gap)
    return SingletonVerdict(PROBABLE, probes_used=probes, gap=gap)


def _check_x0(A, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape[0] != A.shape[1]:
        raise ContractError(f"x0 has length {x0.shape[0]}, expected {A.shape[1]}")
    if np.any(x0 < 0):
        raise ContractError("x0 must be nonnegative")
    return x0


def probe_singleton(A, x0, probes: int = DEFAULT_PROBES, seed=0,
                    tol: float = SPREAD_TOL) -> SingletonVerdict:
    """Randomized singleton test for ``{x : A x = A x0, x >= 0}``.

    Each probe draws a Gaussian objective and compares its minimum and
    maximum over the set; a spread above ``tol * (1 + |min|)`` refutes with a
    second feasible point, otherwise after ``probes`` rounds the set is
    reported as a probable singleton.
    """
    A = _as_matrix(A)
    x0 = _check_x0(A, x0)
    fs = FeasibleSet(A, A @ x0)
    if not fs.feasible:
        raise NumericalError("phase one rejected a feasible x0")
    return _probe_polyhedron(fs, x0, probes, _rng(seed), tol)


def exact_singleton(A, x0, tol: float = SPREAD_TOL, fs: Optional[FeasibleSet] = None) -> SingletonVerdict:
    """Deterministic singleton test: min and max of every coordinate (2n LPs)."""
    A = _as_matrix(A)
    x0 = _check_x0(A, x0)
    if fs is None:
        fs = FeasibleSet(A, A @ x0)
    if not fs.feasible:
        raise NumericalError("phase one rejected a feasible x0")
    gap = 0.0
    for i in range(A.shape[1]):
        e = np.zeros(A.shape[1])
        e[i] = 1.0
        lo, hi = fs.minimize(e), fs.maximize(e)
        if hi.status == "unbounded":
            ray = hi.ray / np.max(np.abs(hi.ray))
            return SingletonVerdict(REFUTED, witness=hi.x + ray, probes_used=i + 1, gap=math.inf)
        spread = hi.value - lo.value
        gap = max(gap, spread)
        if spread > tol * (1.0 + abs(lo.value)):
            w = _witness_from([lo.x, hi.x], x0)
            if w is not None:
                return SingletonVerdict(REFUTED, witness=w, probes_used=i + 1, gap=spread)
    return SingletonVerdict(CERTIFIED, probes_used=A.shape[1], gap=gap)


@dataclass
class L1Result:
    status: str  # optimal | infeasible
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    unique_minimizer: Optional[bool] = None


def l1_recover(A, y, seed=0, tol: float = SPREAD_TOL) -> L1Result:
    """``min 1^T x  s.t.  A x = y, x >= 0`` plus a uniqueness check of the minimizer.

    Uniqueness is judged by fixing the optimal value and comparing the min
    and max of a random objective over the optimal face.
    """
    A = _as_matrix(A)
    y = np.asarray(y, dtype=float).ravel()
    fs = FeasibleSet(A, y)
    if not fs.feasible:
        return L1Result("infeasible")
    ones = np.ones(A.shape[1])
    best = fs.minimize(ones)
    face = FeasibleSet(np.vstack([A, ones]), np.append(y, best.value))
    d = _rng(seed).standard_normal(A.shape[1])
    lo, hi = face.minimize(d), face.maximize(d)
    unique = bool(hi.value - lo.value <= tol * (1.0 + abs(lo.value)))
    return L1Result("optimal", best.x, best.value, unique)


# -- combinatorial characterizations ----------------------------------------

@dataclass
class PropertyCheck:
    holds: bool
    violating_set: Optional[tuple] = None
    witness: Optional[np.ndarray] = None
    checked: int = 0


def null_space_support_property(A, k: int, max_subsets: int = MAX_SUBSETS) -> PropertyCheck:
    """Does every nonzero null vector have >= k+1 positive and >= k+1 negative entries?

    A violation is a nonzero null vector whose positive support has at most
    ``k`` elements (negating a vector swaps the two supports, so this side is
    enough). Positive support empty means ``A`` is outside M+. Otherwise,
    for each candidate set ``P`` with ``1 <= |P| <= k`` we ask for ``u >= 0``
    on ``P`` and ``v >= 0`` off ``P`` with ``A_P u = A_{P^c} v`` and
    ``1^T u = 1``; a feasible pair gives the violating ``w = u - v``.
    """
    A = _as_matrix(A)
    if k < 0:
        raise ContractError("k must be nonnegative")
    m, n = A.shape
    kk = min(k, n)
    _check_subsets(sum(math.comb(n, j) for j in range(1, kk + 1)), max_subsets)
    if numerical_rank(A) == n:
        return PropertyCheck(True)
    cert = mplus_membership(A)
    if not cert.member:
        return PropertyCheck(False, violating_set=(), witness=cert.lam, checked=1)
    checked = 1
    for size in range(1, kk + 1):
        for P in combinations(range(n), size):
            checked += 1
            rest = [j for j in range(n) if j not in P]
            M = np.zeros((m + 1, n))
            M[:m, :size] = A[:, P]
            M[:m, size:] = -A[:, rest]
            M[m, :size] = 1.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            res = check_feasible(M, rhs, ["nonneg"] * n)
            if res.feasible:
                w = np.zeros(n)
                w[list(P)] = res.witness[:size]
                w[rest] = -res.witness[size:]
                return PropertyCheck(False, violating_set=P, witness=w, checked=checked)
    return PropertyCheck(True, checked=checked)


def _is_face(A: np.ndarray, I) -> bool:
    """Is there ``(alpha, c)`` with ``alpha^T a_i = c`` on ``I`` and ``<= c - 1`` elsewhere?

    By homogeneity in ``(alpha, c)`` the margin 1 is the same as strict
    inequality.
    """
    m, n = A.shape
    I = set(I)
    out = [j for j in range(n) if j not in I]
    # variables: alpha (m, free), c (free), slack s_j >= 0 for j outside I
    rows = np.zeros((n, m + 1 + len(out)))
    rhs = np.zeros(n)
    for r, j in enumerate(sorted(I) + out):
        rows[r, :m] = A[:, j]
        rows[r, m] = -1.0
    for t, j in enumerate(out):
        r = len(I) + t
        rows[r, m + 1 + t] = 1.0
        rhs[r] = -1.0
    signs = ["free"] * (m + 1) + ["nonneg"] * len(out)
    return check_feasible(rows, rhs, signs).feasible


def neighborliness_check(A, k: int, max_subsets: int = MAX_SUBSETS) -> PropertyCheck:
    """Does ``conv(columns)`` have all ``n`` columns as vertices and is it k-neighborly?"""
    A = _as_matrix(A)
    if k < 0:
        raise ContractError("k must be nonnegative")
    n = A.shape[1]
    kk = min(k, n)
    _check_subsets(n + (math.comb(n, kk) if kk >= 2 else 0), max_subsets)
    checked = 0
    for i in range(n):
        checked += 1
        if not _is_face(A, (i,)):
            return PropertyCheck(False, violating_set=(i,), checked=checked)
    if kk >= 2:
        for I in combinations(range(n), kk):
            checked += 1
            if not _is_face(A, I):
                return PropertyCheck(False, violating_set=I, checked=checked)
    return PropertyCheck(True, checked=checked)


def all_supports_singleton(A, k: int, max_subsets: int = MAX_SUBSETS) -> PropertyCheck:
    """Is ``{x : A x = A x0, x >= 0}`` a singleton for every ``x0 >= 0`` with ``|supp x0| <= k``?

    Whether the set is a singleton depends only on the support of ``x0``, and
    it can only get worse on larger supports, so one exact test per support of
    size ``min(k, n)`` settles the question.
    """
    A = _as_matrix(A)
    n = A.shape[1]
    kk = min(max(k, 0), n)
    _check_subsets(math.comb(n, kk), max_subsets)
    checked = 0
    for S in combinations(range(n), kk):
        checked += 1
        x0 = np.zeros(n)
        x0[list(S)] = 1.0
        v = exact_singleton(A, x0)
        if not v.singleton:
            return PropertyCheck(False, violating_set=S, witness=v.witness, checked=checked)
    return PropertyCheck(True, checked=checked)


def min_rows_bound(p: int) -> int:
    """Rows needed for every nonnegative p-sparse vector to be a unique solution."""
    if p < 0:
        raise ContractError("p must be nonnegative")
    return 2 * p + 1


def wendel_probability(m: int, n: int) -> float:
    """Probability that the origin lies in the convex hull of n Gaussian points in R^m.

    ``1 - 2^{-(n-1)} * sum_{k<m} C(n-1, k)``, evaluated in exact rationals.
    """
    if m < 1 or n < 1:
        raise ContractError("wendel_probability needs m >= 1 and n >= 1")
    tail = sum(math.comb(n - 1, k) for k in range(min(m, n)))
    p = 1 - Fraction(tail, 2 ** (n - 1))
    return float(min(max(p, Fraction(0)), Fraction(1)))


def rip_constant_brute(A, q: int, max_subsets: int = MAX_SUBSETS) -> float:
    """Restricted isometry constant over supports of size ``q``, sqrt(m)-normalized.

    ``max over |T| = q of max(1 - s_min(A_T)/sqrt(m), s_max(A_T)/sqrt(m) - 1)``.
    """
    A = _as_matrix(A)
    m, n = A.shape
    if not 1 <= q <= n:
        raise ContractError(f"support size must be in [1, {n}], got {q}")
    _check_subsets(math.comb(n, q), max_subsets)
    root = math.sqrt(m)
    delta = 0.0
    for T in combinations(range(n), q):
        sv = np.linalg.svd(A[:, T], compute_uv=False)
        smin = sv[-1] if q <= m else 0.0
        delta = max(delta, 1.0 - smin / root, sv[0] / root - 1.0)
    return float(delta)
