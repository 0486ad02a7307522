"""Dense two-phase simplex for standard-form linear programs.

Every LP here has the shape ``min/max c^T x  s.t.  A x = b, x >= 0``.
:class:`FeasibleSet` runs phase one once and can then be optimized over any
number of objectives from the stored basis, which is how the singleton probes
use it (one polyhedron, many objectives).

Pivoting uses Dantzig's rule until a run of degenerate pivots is seen and then
switches permanently to Bland's rule, so cycling cannot occur.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, NumericalError

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
# consecutive degenerate pivots tolerated before Bland's rule takes over;
# scaled by problem size in FeasibleSet
DEGENERATE_STREAK = 50
REFACTOR_EVERY = 60


@dataclass
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    sense: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.size == 0:
            self.A = self.A.reshape(len(self.b), len(self.c))
        m, n = self.A.shape
        if len(self.c) != n or len(self.b) != m:
            raise ContractError(f"inconsistent LP dimensions: A {self.A.shape}, c {len(self.c)}, b {len(self.b)}")
        if self.sense not in ("min", "max"):
            raise ContractError(f"sense must be 'min' or 'max', got {self.sense!r}")


@dataclass
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    duals: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class _State:
    T: np.ndarray  # rows: constraint rows of B^-1 [A | b]
    basis: list
    bland: bool = False
    streak: int = 0
    pivots: int = 0


def _pivot(T: np.ndarray, r: int, q: int) -> None:
    prow = T[r] / T[r, q]
    T -= np.outer(T[:, q], prow)
    T[r] = prow


class FeasibleSet:
    """The polyhedron ``{x : A x = b, x >= 0}`` with a phase-one basis.

    ``feasible`` tells whether phase one succeeded; when it did, ``point`` is
    a basic feasible solution and :meth:`minimize` / :meth:`maximize` solve
    phase two for any objective.
    """

    def __init__(self, A, b, feas_tol: float = FEAS_TOL, opt_tol: float = OPT_TOL,
                 max_iter: Optional[int] = None, verbose: bool = False):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.size == 0:
            A = A.reshape(len(b), -1)
        m, n = A.shape
        if len(b) != m:
            raise ContractError(f"A has {m} rows but b has {len(b)} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ContractError("LP data must be finite")
        self.n = n
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.verbose = verbose
        self.max_iter = max_iter or 50 * (m + n) + 1000
        self.iterations = 0
        self.degenerate_streak = DEGENERATE_STREAK + m + n

        flip = np.where(b < 0, -1.0, 1.0)
        self._A = A * flip[:, None]
        self._b = b * flip
        self._flip = flip
        self._rows = np.arange(m)
        self.feasible = self._phase_one()

    # -- core loop ---------------------------------------------------------

    def _refactor(self, st: _State, A: np.ndarray, b: np.ndarray) -> None:
        B = A[:, st.basis]
        st.T[:, :-1] = np.linalg.solve(B, A)
        st.T[:, -1] = np.linalg.solve(B, b)

    def _run(self, st: _State, cost: np.ndarray, A: np.ndarray, b: np.ndarray):
        """Phase-two loop on ``st`` for ``min cost^T x``; returns (status, q)."""
        T = st.T
        while True:
            if st.pivots and st.pivots % REFACTOR_EVERY == 0:
                self._refactor(st, A, b)
            red = cost - cost[st.basis] @ T[:, :-1]
            red[st.basis] = 0.0
            if st.bland:
                cand = np.flatnonzero(red < -self.opt_tol)
                if cand.size == 0:
                    return "optimal", None
                q = int(cand[0])
            else:
                q = int(np.argmin(red))
                if red[q] >= -self.opt_tol:
                    return "optimal", None
            col = T[:, q]
            mask = col > PIVOT_TOL
            if not np.any(mask):
                return "unbounded", q
            rows = np.flatnonzero(mask)
            ratios = T[rows, -1] / col[rows]
            theta = ratios.min()
            tied = rows[ratios <= theta + 1e-12 * (1.0 + abs(theta))]
            if st.bland:
                basis_arr = np.asarray(st.basis)
                r = int(tied[np.argmin(basis_arr[tied])])
            else:
                r = int(tied[np.argmax(np.abs(col[tied]))])
            if theta <= 1e-12:
                st.streak += 1
                if st.streak >= self.degenerate_streak and not st.bland:
                    st.bland = True
            else:
                st.streak = 0
            if self.verbose:
                log.debug("pivot %d: enter %d leave row %d (theta=%.3g, bland=%s)",
                          st.pivots, q, r, theta, st.bland)
            _pivot(T, r, q)
            st.basis[r] = q
            st.pivots += 1
            self.iterations += 1
            if st.pivots > self.max_iter:
                raise NumericalError(f"simplex exceeded {self.max_iter} pivots", residual=float(red[q]))

    def _phase_one(self) -> bool:
        A, b = self._A, self._b
        m, n = A.shape
        if m == 0:
            self._T = np.zeros((0, n + 1))
            self._basis = []
            return True
        T = np.hstack([A, np.eye(m), b[:, None]])
        basis = list(range(n, n + m))
        st = _State(T=T, basis=basis)
        Aext = np.hstack([A, np.eye(m)])
        cost = np.concatenate([np.zeros(n), np.ones(m)])
        self._run(st, cost, Aext, b)
        self._refactor(st, Aext, b)
        infeas = float(cost[st.basis] @ st.T[:, -1])
        if infeas > self.feas_tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            self._T, self._basis = None, None
            return False

        # drive remaining artificials out of the basis, dropping redundant rows
        # an artificial stuck on a zero tableau row marks its own original row as
        # a combination of the others, so that original row is the one to drop
        keep = np.ones(m, dtype=bool)
        structural = np.ones(m, dtype=bool)
        for r in range(m):
            if st.basis[r] < n:
                continue
            row = st.T[r, :n]
            cand = np.flatnonzero(np.abs(row) > 1e-7)
            if cand.size:
                q = int(cand[np.argmax(np.abs(row[cand]))])
                _pivot(st.T, r, q)
                st.basis[r] = q
            else:
                keep[st.basis[r] - n] = False
                structural[r] = False
        self._rows = np.flatnonzero(keep)
        self._basis = [st.basis[r] for r in np.flatnonzero(structural)]
        self._A = A[self._rows]
        self._b = b[self._rows]
        self._T = np.hstack([st.T[structural, :n], st.T[structural, -1:]])
        if self._basis:
            st2 = _State(T=self._T, basis=self._basis)
            self._refactor(st2, self._A, self._b)
        return True

    # -- public API --------------------------------------------------------

    def _basic_point(self, basis, T=None) -> np.ndarray:
        x = np.zeros(self.n)
        if basis:
            x[basis] = np.linalg.solve(self._A[:, basis], self._b)
        return x

    @property
    def point(self) -> Optional[np.ndarray]:
        if not self.feasible:
            return None
        return self._basic_point(self._basis)

    def minimize(self, c) -> LpOutcome:
        c = np.asarray(c, dtype=float).ravel()
        if len(c) != self.n:
            raise ContractError(f"objective has length {len(c)}, expected {self.n}")
        if not self.feasible:
            return LpOutcome("infeasible")
        st = _State(T=self._T.copy(), basis=list(self._basis))
        start = self.iterations
        status, q = self._run(st, c, self._A, self._b)
        iters = self.iterations - start
        if status == "unbounded":
            ray = np.zeros(self.n)
            ray[q] = 1.0
            ray[st.basis] = -st.T[:, q]
            x = self._basic_point(st.basis)
            return LpOutcome("unbounded", x=x, ray=ray, iterations=iters)
        x = self._basic_point(st.basis)
        x[np.abs(x) < 1e-13] = 0.0
        duals = self._duals(st.basis, c)
        return LpOutcome("optimal", x=x, value=float(c @ x), duals=duals, iterations=iters)

    def maximize(self, c) -> LpOutcome:
        out = self.minimize(-np.asarray(c, dtype=float))
        if out.status == "optimal":
            out.value = -out.value
            out.duals = -out.duals
        return out

    def _duals(self, basis, c) -> np.ndarray:
        y = np.zeros(len(self._flip))
        if basis:
            y_kept = np.linalg.solve(self._A[:, basis].T, c[basis])
            y[self._rows] = y_kept
        return y * self._flip


def solve_lp(lp: LinearProgram, **opts) -> LpOutcome:
    """Solve ``lp`` with the two-phase simplex.

    The optimal outcome carries a basic optimal ``x``, its objective value and
    the equality-constraint duals ``y`` (``A^T y <= c`` for minimization).
    An unbounded outcome carries a feasible point and a ray along which the
    objective improves without bound.
    """
    fs = FeasibleSet(lp.A, lp.b, **opts)
    return fs.maximize(lp.c) if lp.sense == "max" else fs.minimize(lp.c)


@dataclass
class Feasibility:
    feasible: bool
    witness: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)


def check_feasible(A, b, sign_pattern: Sequence[str], **opts) -> Feasibility:
    """Feasibility of ``A x = b`` with per-variable signs.

    ``sign_pattern[j]`` is ``"nonneg"``, ``"nonpos"`` or ``"free"``. Free
    variables are split into a difference of two nonnegative parts and
    nonpositive ones are negated; the witness is mapped back to the original
    variables.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if len(sign_pattern) != n:
        raise ContractError(f"sign pattern has {len(sign_pattern)} entries for {n} variables")
    cols, back = [], []
    for j, sgn in enumerate(sign_pattern):
        if sgn == "nonneg":
            cols.append(A[:, j]); back.append((j, 1.0))
        elif sgn == "nonpos":
            cols.append(-A[:, j]); back.append((j, -1.0))
        elif sgn == "free":
            cols.append(A[:, j]); back.append((j, 1.0))
            cols.append(-A[:, j]); back.append((j, -1.0))
        else:
            raise ContractError(f"unknown sign {sgn!r}")
    Ast = np.column_stack(cols) if cols else np.zeros((m, 0))
    fs = FeasibleSet(Ast, b, **opts)
    if not fs.feasible:
        return Feasibility(False)
    z = fs.point
    x = np.zeros(n)
    for k, (j, s) in enumerate(back):
        x[j] += s * z[k]
    return Feasibility(True, x)
