"""Uniqueness of PSD solutions of ``A(X) = b``.

Singleton tests solve min/max SDPs over ``{X PSD : A(X) = A(X0)}`` with the
ADMM solver in :mod:`nnunique.sdp`. The eigenvalue condition works on the
null space of the operator directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .ensembles import _rng
from .errors import ContractError, EmptyNullSpace
from .linalg import (null_space_basis, smat, smat_iso, svec_dim, svec_index,
                     symmetrize)
from .sdp import SdpContext, SdpOptions, SymOperator, project_psd

SPREAD_TOL = 1e-5
WITNESS_TOL = 1e-5
EIG_TOL = 1e-8
DEFAULT_PROBES = 5

CERTIFIED = "certified-singleton"
REFUTED = "refuted"
PROBABLE = "probable-singleton"
INCONCLUSIVE = "inconclusive"


@dataclass
class PsdSingletonVerdict:
    kind: str
    witness: Optional[np.ndarray] = None
    probes_used: int = 0
    gap: float = 0.0
    inconclusive: int = 0
    basis_directions_checked: int = 0

    @property
    def singleton(self) -> bool:
        return self.kind in (CERTIFIED, PROBABLE)

    def to_record(self) -> str:
        lines = [f"kind={self.kind}", f"probes_used={self.probes_used}",
                 f"gap={self.gap:.10g}", f"inconclusive={self.inconclusive}",
                 f"basis_directions_checked={self.basis_directions_checked}"]
        if self.witness is not None:
            n = self.witness.shape[0]
            lines.append(f"witness_n={n}")
            lines.append("witness=" + ",".join(format(v, ".10g") for v in self.witness.ravel()))
        return "\n".join(lines) + "\n"


def _check_op(op) -> SymOperator:
    if not isinstance(op, SymOperator):
        op = SymOperator.from_list(op)
    return op


def _check_X(op: SymOperator, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (op.n, op.n):
        raise ContractError(f"expected a {op.n}x{op.n} matrix, got {X.shape}")
    if not np.array_equal(X, X.T):
        raise ContractError("matrix must be exactly symmetric")
    return X


def apply_operator(op, X) -> np.ndarray:
    op = _check_op(op)
    return op.apply(_check_X(op, X))


def operator_null_basis(op, isometric: bool = False) -> np.ndarray:
    """Orthonormal basis (columns) of the operator's null space in svec coordinates.

    Plain coordinates take the upper triangle as is, so the constraint row
    for ``A_i`` carries ``A_i[j, j]`` on diagonal slots and ``2 A_i[j, k]`` on
    off-diagonal ones. With ``isometric=True`` the coordinates are the
    Frobenius-isometric ones and the basis is orthonormal in the trace inner
    product.
    """
    op = _check_op(op)
    n = op.n
    if isometric:
        rows = op.iso_matrix()
    else:
        iu, ju = np.triu_indices(n)
        w = np.where(iu == ju, 1.0, 2.0)
        rows = op.coeffs[:, iu, ju] * w if op.m else np.zeros((0, svec_dim(n)))
    return null_space_basis(rows)


# -- singleton tests --------------------------------------------------------

def _repair_witness(ctx: SdpContext, Y: np.ndarray, b: np.ndarray, iters: int = 5000) -> np.ndarray:
    """Alternate affine and PSD projections from ``Y`` until both constraints hold tightly."""
    Xp, _ = ctx.particular(b[None])
    Z = project_psd(Y)
    tol = 1e-9 * (1.0 + np.linalg.norm(b))
    for _ in range(iters):
        if ctx.residual(Z, b) <= tol:
            break
        Z = project_psd(ctx.project_affine(Z, Xp[0]))
    return Z


def _stalled_witness(ctx, lo, hi, D, x0, spread_tol):
    """Candidate witness when exactly one of a min/max pair converged."""
    if lo is None or hi is None or lo.optimal == hi.optimal:
        return None, math.nan
    done, stalled = (lo, hi) if lo.optimal else (hi, lo)
    if stalled.status != "max-iterations" or stalled.X is None:
        return None, math.nan
    b = ctx.op.apply(x0)
    if stalled.residuals[0] > 1e-6 * (1.0 + np.linalg.norm(b)):
        return None, math.nan
    spread = abs(float(np.sum(D * stalled.X)) - done.value)
    if spread <= spread_tol * (1.0 + np.linalg.norm(D) * np.linalg.norm(x0)):
        return None, math.nan
    return _repair_witness(ctx, stalled.X, b), spread


def _spread_verdicts(ctx, lo, hi, Ds, X0s, spread_tol):
    """Per-problem classification of paired min/max outcomes.

    Returns (kind, witness, gap) where kind is "refuted", "flat" or
    "inconclusive". Witnesses are polished to tight feasibility and must stay
    away from ``X0``.
    """
    out = []
    far = lambda W, x0: np.linalg.norm(W - x0) >= WITNESS_TOL * max(1.0, np.linalg.norm(x0))
    for k in range(len(lo)):
        a, b = lo[k], hi[k]
        x0 = X0s[k]
        for o in (a, b):
            if o is not None and o.status == "unbounded" and o.direction is not None:
                d = project_psd(o.direction)
                nd = np.linalg.norm(d)
                if nd > 0:
                    W = _repair_witness(ctx, x0 + d / nd, ctx.op.apply(x0))
                    if far(W, x0):
                        out.append((REFUTED, W, math.inf))
                        break
        else:
            if a.optimal and b.optimal:
                spread = b.value - a.value
                scale = 1.0 + np.linalg.norm(Ds[k]) * np.linalg.norm(x0)
                if spread > spread_tol * scale:
                    cand = max((a.X, b.X), key=lambda Y: np.linalg.norm(Y - x0))
                    W = _repair_witness(ctx, cand, ctx.op.apply(x0))
                    if far(W, x0):
                        out.append((REFUTED, W, spread))
                        continue
                out.append(("flat", None, max(spread, 0.0)))
            else:
                # a stalled side can still refute: its last iterate only has to
                # beat the settled side by the spread threshold and survive repair
                W, spread = _stalled_witness(ctx, a, b, Ds[k], x0, spread_tol)
                if W is not None and far(W, x0):
                    out.append((REFUTED, W, spread))
                else:
                    out.append((INCONCLUSIVE, None, math.nan))
    return out


def probe_singleton_psd_batch(op, X0s, probes: int = DEFAULT_PROBES, seeds=None,
                              ctx: Optional[SdpContext] = None,
                              spread_tol: float = SPREAD_TOL) -> list[PsdSingletonVerdict]:
    """Randomized singleton tests for several ``X0`` sharing one operator.

    Probes run in rounds: round ``j`` solves the ``j``-th probe of every
    instance not yet refuted as one solver batch, so an instance stops at its
    first refutation. A probe is flat when its min/max values agree up to
    ``spread_tol * (1 + |D| |X0|)``; probes the solver could not settle are
    inconclusive and never count toward a singleton verdict.
    """
    op = _check_op(op)
    X0s = [_check_X(op, X) for X in X0s]
    if seeds is None:
        seeds = range(len(X0s))
    ctx = ctx or SdpContext(op)
    n = op.n
    Ds = np.zeros((len(X0s), probes, n, n))
    for k, s in enumerate(seeds):
        rng = _rng(s)
        for j in range(probes):
            Ds[k, j] = symmetrize(rng.standard_normal((n, n)))
    bs = np.stack([op.apply(X) for X in X0s]) if X0s else np.zeros((0, op.m))

    gap = np.zeros(len(X0s))
    bad = np.zeros(len(X0s), dtype=int)
    verdicts: list[Optional[PsdSingletonVerdict]] = [None] * len(X0s)
    for j in range(probes):
        live = [k for k in range(len(X0s)) if verdicts[k] is None]
        if not live:
            break
        D = Ds[live, j]
        lo = ctx.solve_batch(D, bs[live], "min")
        hi = ctx.solve_batch(D, bs[live], "max")
        cls = _spread_verdicts(ctx, lo, hi, D, [X0s[k] for k in live], spread_tol)
        for k, (kind, wit, g) in zip(live, cls):
            if kind == REFUTED:
                verdicts[k] = PsdSingletonVerdict(REFUTED, wit, j + 1, g, int(bad[k]))
            elif kind == INCONCLUSIVE:
                bad[k] += 1
            else:
                gap[k] = max(gap[k], g)
    for k in range(len(X0s)):
        if verdicts[k] is None:
            kind = INCONCLUSIVE if bad[k] else PROBABLE
            verdicts[k] = PsdSingletonVerdict(kind, None, probes, float(gap[k]), int(bad[k]))
    return verdicts  # type: ignore[return-value]


def probe_singleton_psd(op, X0, probes: int = DEFAULT_PROBES, seed=0,
                        ctx: Optional[SdpContext] = None,
                        spread_tol: float = SPREAD_TOL) -> PsdSingletonVerdict:
    return probe_singleton_psd_batch(op, [X0], probes, [seed], ctx, spread_tol)[0]


def _canonical_directions(n: int) -> np.ndarray:
    E = np.zeros((svec_dim(n), n, n))
    for i in range(n):
        for j in range(i, n):
            k = svec_index(i, j, n)
            E[k, i, j] = E[k, j, i] = 1.0
    return E


def exact_singleton_psd(op, X0, ctx: Optional[SdpContext] = None,
                        spread_tol: float = SPREAD_TOL) -> PsdSingletonVerdict:
    """Min and max along every canonical symmetric direction (2 n(n+1)/2 SDPs).

    A refutation carries a witness and beats any inconclusive solve; if no
    direction refutes but some solve was inconclusive, so is the verdict.
    """
    op = _check_op(op)
    X0 = _check_X(op, X0)
    ctx = ctx or SdpContext(op)
    E = _canonical_directions(op.n)
    bs = np.repeat(op.apply(X0)[None], len(E), axis=0)
    lo = ctx.solve_batch(E, bs, "min")
    hi = ctx.solve_batch(E, bs, "max")
    cls = _spread_verdicts(ctx, lo, hi, E, [X0] * len(E), spread_tol)
    gap, bad = 0.0, 0
    for used, (kind, wit, g) in enumerate(cls, 1):
        if kind == REFUTED:
            return PsdSingletonVerdict(REFUTED, wit, used, g, bad, used)
        if kind == INCONCLUSIVE:
            bad += 1
        else:
            gap = max(gap, g)
    return PsdSingletonVerdict(INCONCLUSIVE if bad else CERTIFIED, None, 0, gap, bad, len(E))


# -- eigenvalue condition on the null space ---------------------------------

@dataclass
class EigConditionReport:
    r: int
    samples: int
    min_negative_count: Optional[int]
    refuting_matrix: Optional[np.ndarray] = None
    vacuous: bool = False
    note: str = ""
    counts: list = field(default_factory=list)

    @property
    def refuted(self) -> bool:
        return self.refuting_matrix is not None


def negative_count(Y: np.ndarray, tol: float = EIG_TOL) -> int:
    lam = np.linalg.eigvalsh(symmetrize(Y))
    return int(np.sum(lam < -tol * max(np.linalg.norm(Y), 1e-300)))


def eig_condition_sample(op, r: int, samples: int, seed=0,
                         basis: Optional[np.ndarray] = None) -> EigConditionReport:
    """Sample unit-Frobenius null matrices and count their negative eigenvalues.

    Uniqueness for every rank-r PSD ``X0`` needs each nonzero null matrix to
    have at least ``r + 1`` negative eigenvalues. Sampling can only refute:
    a sample with ``<= r`` negative eigenvalues is returned as the refuting
    matrix. Samples are Gaussian in Frobenius-isometric coordinates, which
    makes them uniform on the null sphere.
    """
    op = _check_op(op)
    if r < 0 or samples < 1:
        raise ContractError("need r >= 0 and samples >= 1")
    Z = operator_null_basis(op, isometric=True) if basis is None else basis
    if Z.shape[1] == 0:
        return EigConditionReport(r, 0, None, vacuous=True,
                                  note="operator is injective; condition holds vacuously")
    g = _rng(seed).standard_normal((samples, Z.shape[1]))
    Ys = smat_iso(g @ Z.T, op.n)
    Ys /= np.sqrt(np.einsum("bij,bij->b", Ys, Ys))[:, None, None]
    lam = np.linalg.eigvalsh(Ys)
    counts = np.sum(lam < -EIG_TOL, axis=1)
    rep = EigConditionReport(r, samples, int(counts.min()), counts=counts.tolist())
    hits = np.flatnonzero(counts <= r)
    if hits.size:
        rep.refuting_matrix = symmetrize(Ys[hits[np.argmin(counts[hits])]])
    return rep


def construct_second_solution(Y, r: int, margin: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Given a null matrix with at most ``r`` negative eigenvalues, build ``X`` and ``X + Y``.

    ``X = U diag(lam') U^T`` with ``lam'_i = -lam_i + margin`` where ``lam_i < 0``
    and zero elsewhere, so ``X`` is PSD of rank ``<= r`` and ``X + Y`` is PSD.
    """
    Y = symmetrize(np.asarray(Y, dtype=float))
    if not np.any(Y):
        raise ContractError("Y must be nonzero")
    if margin <= 0:
        raise ContractError("margin must be positive")
    lam, U = np.linalg.eigh(Y)
    neg = lam < 0
    tol_neg = lam < -EIG_TOL * np.linalg.norm(Y)
    if tol_neg.sum() > r:
        raise ContractError(f"Y has {int(tol_neg.sum())} negative eigenvalues, more than r={r}")
    if neg.sum() > r:
        # the extra ones are rounding-level; lift only the r most negative
        neg = np.zeros_like(neg)
        neg[:r] = lam[:r] < 0
    lift = np.where(neg, -lam + margin, 0.0)
    X = symmetrize((U * lift) @ U.T)
    return X, symmetrize(X + Y)


# -- semicircle law ---------------------------------------------------------

_EDGE = math.sqrt(2.0)


def _density(x: float) -> float:
    return math.sqrt(max(2.0 - x * x, 0.0)) / math.pi


def semicircle_alpha(c: float) -> float:
    """Mass below ``c`` of the semicircle density ``sqrt(2 - x^2) / pi`` on [-sqrt2, sqrt2]."""
    if c <= -_EDGE:
        return 0.0
    if c >= _EDGE:
        return 1.0
    half, _ = quad(_density, 0.0, abs(c), epsabs=1e-13, epsrel=1e-13)
    return 0.5 + math.copysign(half, c) if c else 0.5


def semicircle_c(alpha1: float, tol: float = 1e-10) -> float:
    """Inverse of :func:`semicircle_alpha` by bisection."""
    if not 0.0 <= alpha1 <= 1.0:
        raise ContractError("alpha must lie in [0, 1]")
    lo, hi = -_EDGE, _EDGE
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if semicircle_alpha(mid) < alpha1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

