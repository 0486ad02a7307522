"""Small dense semidefinite programs by operator splitting.

Solves ``min <D, X>  s.t.  <A_i, X> = b_i (i = 1..m),  X PSD`` with ADMM on
the splitting ``X`` (affine set, objective) / ``Z`` (PSD cone):

    X <- Proj_affine(Z - U - D / rho)
    X <- a X + (1 - a) Z          (over-relaxation, a = 1.6 by default)
    Z <- Proj_psd(X + U)
    U <- U + X - Z

The affine projection reuses one eigen-factorization of the Gram matrix
``G_ij = <A_i, A_j>``, so a :class:`SdpContext` built for an operator can solve
many problems (different ``D`` and ``b``) cheaply, and whole batches of them
are iterated together with stacked eigendecompositions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError
from .linalg import is_symmetric, svec_dim, svec_iso, symmetrize


@dataclass
class SymOperator:
    """Linear map ``X -> (<A_1, X>, ..., <A_m, X>)`` on symmetric matrices."""

    coeffs: np.ndarray  # shape (m, n, n)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 2 and c.size == 0:
            c = c.reshape(0, 0, 0)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ContractError("operator coefficients must have shape (m, n, n)")
        if not np.array_equal(c, np.swapaxes(c, 1, 2)):
            raise ContractError("operator coefficients must be exactly symmetric")
        self.coeffs = c

    @classmethod
    def from_list(cls, mats, n: Optional[int] = None) -> "SymOperator":
        mats = [np.asarray(M, dtype=float) for M in mats]
        if not mats:
            if n is None:
                raise ContractError("an empty operator needs an explicit dimension")
            return cls(np.zeros((0, n, n)))
        return cls(np.stack(mats))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def underdetermined(self) -> bool:
        return self.m < svec_dim(self.n)

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-2:] != (self.n, self.n):
            raise ContractError(f"operator acts on {self.n}x{self.n} matrices, got {X.shape}")
        return np.einsum("...ij,kij->...k", X, self.coeffs)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.einsum("...k,kij->...ij", np.asarray(y, dtype=float), self.coeffs)

    def iso_matrix(self) -> np.ndarray:
        """Rows ``svec_iso(A_i)``; their dot with ``svec_iso(X)`` is ``<A_i, X>``."""
        if self.m == 0:
            return np.zeros((0, svec_dim(self.n)))
        return svec_iso(self.coeffs)


@dataclass
class SdpOptions:
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    tol_objective: float = 1e-7
    window: int = 50
    max_iter: int = 50_000
    rho: Optional[float] = None
    unbounded_value: float = 1e10
    check_every: int = 10
    relaxation: float = 1.6
    # residual balancing cadence; rho is frozen after adapt_until iterations so
    # the fixed-rho convergence guarantee applies to the tail of the run
    adapt_every: int = 10
    adapt_until: int = 2000


@dataclass
class SdpOutcome:
    status: str  # optimal | infeasible | unbounded | max-iterations
    X: Optional[np.ndarray]
    value: float
    residuals: tuple = (np.inf, -np.inf)  # (affine residual, min eigenvalue)
    iterations: int = 0
    direction: Optional[np.ndarray] = None  # recession direction when unbounded

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def project_psd(S: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero.

    Works on a single matrix or a stack of them.
    """
    S = symmetrize(S)
    lam, V = np.linalg.eigh(S)
    return symmetrize((V * np.maximum(lam, 0.0)[..., None, :]) @ np.swapaxes(V, -1, -2))


def _psd_and_mineig(W: np.ndarray):
    lam, V = np.linalg.eigh(W)
    Z = (V * np.maximum(lam, 0.0)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return 0.5 * (Z + np.swapaxes(Z, -1, -2)), lam[..., 0]


def _fro(X: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...ij,...ij->...", X, X))


class SdpContext:
    """Solver state bound to one :class:`SymOperator`.

    The Gram factorization is computed once here and only read afterwards.
    """

    def __init__(self, op: SymOperator, options: Optional[SdpOptions] = None):
        self.op = op
        self.options = options or SdpOptions()
        m = op.m
        if m:
            G = np.einsum("kij,lij->kl", op.coeffs, op.coeffs)
            lam, Q = np.linalg.eigh(G)
            keep = lam > 1e-12 * max(lam.max(), 1e-300) * max(m, 1)
            self._Q = Q[:, keep]
            self._inv = 1.0 / lam[keep]
        else:
            self._Q = np.zeros((0, 0))
            self._inv = np.zeros(0)
        self.rank = len(self._inv)

    def _gram_pinv(self, r: np.ndarray) -> np.ndarray:
        return ((r @ self._Q) * self._inv) @ self._Q.T

    def particular(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Least-norm ``X`` with ``A(X) = b`` and its residual norms."""
        b = np.atleast_2d(np.asarray(b, dtype=float))
        if self.op.m == 0:
            X = np.zeros((b.shape[0], self.op.n, self.op.n))
            return X, np.zeros(b.shape[0])
        X = self.op.adjoint(self._gram_pinv(b))
        res = np.linalg.norm(self.op.apply(X) - b, axis=-1)
        return X, res

    def project_affine(self, V: np.ndarray, Xp: np.ndarray) -> np.ndarray:
        if self.op.m == 0:
            return V
        r = self.op.apply(V - Xp)
        return V - self.op.adjoint(self._gram_pinv(r))

    def residual(self, X: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.op.m == 0:
            return np.zeros(X.shape[:-2])
        return np.linalg.norm(self.op.apply(X) - b, axis=-1)

    # ---------------------------------------------------------------------

    def solve(self, D: np.ndarray, b: np.ndarray, sense: str = "min") -> SdpOutcome:
        return self.solve_batch(np.asarray(D)[None], np.atleast_2d(b), sense=sense)[0]

    def solve_batch(self, Ds: np.ndarray, bs: np.ndarray, sense: str = "min") -> list[SdpOutcome]:
        """Solve a stack of SDPs that share this context's operator.

        ``Ds`` has shape ``(B, n, n)``, ``bs`` shape ``(B, m)``. Maximization is
        minimization of ``-D``.
        """
        opt = self.options
        n = self.op.n
        Ds = symmetrize(np.asarray(Ds, dtype=float))
        bs = np.asarray(bs, dtype=float).reshape(len(Ds), self.op.m)
        if Ds.shape[1:] != (n, n):
            raise ContractError(f"objective must be {n}x{n}")
        sign = -1.0 if sense == "max" else 1.0
        if sense not in ("min", "max"):
            raise ContractError(f"sense must be 'min' or 'max', got {sense!r}")
        B = len(Ds)
        results: list[Optional[SdpOutcome]] = [None] * B

        Xp, aff_res = self.particular(bs)
        bnorm = np.linalg.norm(bs, axis=-1)
        infeasible_affine = aff_res > opt.tol_primal * (1.0 + bnorm)
        for k in np.flatnonzero(infeasible_affine):
            results[k] = SdpOutcome("infeasible", None, np.nan, (float(aff_res[k]), np.nan))

        act = np.flatnonzero(~infeasible_affine)
        if act.size == 0:
            return results  # type: ignore[return-value]

        Dn = Ds[act] * sign
        dnorm = _fro(Dn)
        dnorm[dnorm == 0] = 1.0
        Dh = Dn / dnorm[:, None, None]
        xp = Xp[act]
        b_act = bs[act]
        scale = np.maximum(_fro(xp), 1.0)
        rho = np.full(act.size, opt.rho) if opt.rho else 1.0 / scale
        Z = project_psd(xp)
        U = np.zeros_like(Z)
        idx = act.copy()
        obj_hist: list[np.ndarray] = []
        gap_prev = None
        gap_stable = np.zeros(act.size, dtype=int)
        unb_hits = np.zeros(act.size, dtype=int)
        Z_prev_check = Z.copy()
        it = 0

        def finish(sel: np.ndarray, status: str, direction=None):
            for loc in np.flatnonzero(sel):
                k = int(idx[loc])
                Zk = Z[loc]
                res = float(self.residual(Zk, bs[k]))
                lmin = float(np.linalg.eigvalsh(Zk)[0])
                val = float(np.sum(Ds[k] * Zk))
                out = SdpOutcome(status, Zk.copy(), val, (res, lmin), it)
                if status == "unbounded":
                    out.value = -np.inf if sense == "min" else np.inf
                    out.direction = None if direction is None else direction[loc].copy()
                elif status == "infeasible":
                    out.value = np.nan
                results[k] = out

        while idx.size:
            it += 1
            Xn = self.project_affine(Z - U - Dh / rho[:, None, None], xp)
            Xr = opt.relaxation * Xn + (1.0 - opt.relaxation) * Z
            Zn, _ = _psd_and_mineig(Xr + U)
            U = U + Xr - Zn
            dz = Zn - Z
            Z = Zn
            if it % opt.check_every and it < opt.max_iter:
                continue

            r_p = _fro(Xn - Z)
            r_d = rho * _fro(dz)
            nz = np.maximum(np.maximum(_fro(Xn), _fro(Z)), 1.0)
            obj = np.einsum("bij,bij->b", Dh, Z)
            obj_hist.append(obj)
            w = max(opt.window // opt.check_every, 1)
            stationary = np.zeros(idx.size, dtype=bool)
            if len(obj_hist) > w:
                old = obj_hist[-1 - w]
                stationary = np.abs(obj - old) <= opt.tol_objective * (1.0 + np.abs(obj))
            eps_p = opt.tol_primal * nz
            eps_d = opt.tol_dual * np.maximum(rho * _fro(U), 1.0)
            res_true = self.residual(Z, b_act)
            done = (r_p <= eps_p) & (r_d <= eps_d) & stationary & (
                res_true <= opt.tol_primal * (1.0 + np.linalg.norm(b_act, axis=-1))
            )

            # recession direction: normalized change of Z since the last check
            step = Z - Z_prev_check
            snorm = _fro(step)
            Z_prev_check = Z.copy()
            with np.errstate(invalid="ignore", divide="ignore"):
                dirn = step / np.where(snorm > 0, snorm, 1.0)[:, None, None]
            lmin_dir = np.linalg.eigvalsh(dirn)[:, 0]
            a_dir = self.residual(dirn, np.zeros_like(b_act))
            slope = np.einsum("bij,bij->b", Dh, dirn)
            grows = _fro(Z) > 1e3 * scale
            cert = (snorm > 0) & grows & (lmin_dir >= -1e-6) & (a_dir <= 1e-6) & (slope < -1e-6)
            unb_hits = np.where(cert, unb_hits + 1, 0)
            unbounded = (unb_hits >= 2) | (obj * dnorm < -opt.unbounded_value)

            # infeasible: the X-Z gap settles to a fixed nonzero displacement
            gap = Xn - Z
            if gap_prev is not None:
                settled = _fro(gap - gap_prev) <= 1e-6 * np.maximum(_fro(gap), 1e-300)
                big = r_p > 1e3 * eps_p
                gap_stable = np.where(settled & big, gap_stable + 1, 0)
            gap_prev = gap
            infeasible = gap_stable >= 5

            stop_max = np.full(idx.size, it >= opt.max_iter)
            finished = done | unbounded | infeasible | stop_max
            if np.any(finished):
                finish(done & ~unbounded, "optimal")
                finish(unbounded, "unbounded", direction=dirn)
                finish(infeasible & ~done & ~unbounded, "infeasible")
                finish(stop_max & ~done & ~unbounded & ~infeasible, "max-iterations")
                keep = ~finished
                idx, Z, U, xp, Dh, dnorm, rho, scale, b_act = (
                    a[keep] for a in (idx, Z, U, xp, Dh, dnorm, rho, scale, b_act)
                )
                obj_hist = [h[keep] for h in obj_hist]
                gap_prev = gap_prev[keep]
                gap_stable, unb_hits, Z_prev_check = gap_stable[keep], unb_hits[keep], Z_prev_check[keep]
                r_p, r_d = r_p[keep], r_d[keep]
                eps_p, eps_d = eps_p[keep], eps_d[keep]
                if not idx.size:
                    break

            if it % opt.adapt_every or it > opt.adapt_until:
                continue
            # residual balancing
            up = r_p / eps_p > 10.0 * r_d / eps_d
            down = r_d / eps_d > 10.0 * r_p / eps_p
            factor = np.where(up, 2.0, np.where(down, 0.5, 1.0))
            rho = rho * factor
            U = U / factor[:, None, None]
        return results  # type: ignore[return-value]


def solve_sdp(D, op: SymOperator, b, options: Optional[SdpOptions] = None,
              sense: str = "min") -> SdpOutcome:
    """Solve ``min/max <D, X>  s.t.  A(X) = b, X PSD``."""
    D = np.asarray(D, dtype=float)
    if D.shape != (op.n, op.n):
        raise ContractError(f"objective must be {op.n}x{op.n}, got {D.shape}")
    return SdpContext(op, options).solve(D, b, sense=sense)
