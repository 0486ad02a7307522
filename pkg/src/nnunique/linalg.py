"""Dense real linear algebra used throughout the package.

Symmetric matrices are flattened in two coordinate systems:

* plain ``svec``: the upper triangle read row by row,
  ``(0,0), (0,1), ..., (0,n-1), (1,1), ...``;
* isometric ``svec_iso``: the same ordering with off-diagonal entries
  multiplied by sqrt(2), so the Euclidean inner product of two flattened
  matrices equals their trace inner product.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ContractError, NumericalError

SQRT2 = math.sqrt(2.0)


def svec_dim(n: int) -> int:
    return n * (n + 1) // 2


def svec_index(i: int, j: int, n: int) -> int:
    """Flat position of entry ``(i, j)``, ``i <= j``, in the upper triangle."""
    if not (0 <= i <= j < n):
        raise ContractError(f"svec_index needs 0 <= i <= j < n, got ({i}, {j}, {n})")
    # rows 0..i-1 contribute n, n-1, ..., n-i+1 slots
    return i * n - i * (i - 1) // 2 + (j - i)


def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n)


def svec(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    rows, cols = _triu(S.shape[-1])
    return S[..., rows, cols].copy()


def smat(v: np.ndarray, n: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if n is None:
        n = int(round((math.sqrt(8 * v.shape[-1] + 1) - 1) / 2))
    if v.shape[-1] != svec_dim(n):
        raise ContractError(f"svec length {v.shape[-1]} does not match n={n}")
    rows, cols = _triu(n)
    S = np.zeros(v.shape[:-1] + (n, n))
    S[..., rows, cols] = v
    S[..., cols, rows] = v
    return S


def _iso_weights(n: int) -> np.ndarray:
    rows, cols = _triu(n)
    return np.where(rows == cols, 1.0, SQRT2)


def svec_iso(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    return svec(S) * _iso_weights(S.shape[-1])


def smat_iso(v: np.ndarray, n: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if n is None:
        n = int(round((math.sqrt(8 * v.shape[-1] + 1) - 1) / 2))
    return smat(v / _iso_weights(n), n)


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Return ``(M + M^T) / 2`` with exactly mirrored entries."""
    M = np.asarray(M, dtype=float)
    S = 0.5 * (M + np.swapaxes(M, -1, -2))
    # force bit-exact symmetry regardless of rounding in the sum
    rows, cols = np.triu_indices(M.shape[-1], 1)
    S[..., cols, rows] = S[..., rows, cols]
    return S


def is_symmetric(S: np.ndarray) -> bool:
    S = np.asarray(S)
    return S.ndim == 2 and S.shape[0] == S.shape[1] and np.array_equal(S, S.T)


def jacobi_eigh(S: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns. Raises NumericalError if the off-diagonal mass
    has not dropped below ``tol * ||S||_F`` after ``max_sweeps`` sweeps.
    """
    a = np.array(S, dtype=float)
    n = a.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        lam = np.diag(a).copy()
        order = np.argsort(lam, kind="stable")
        return lam[order], V[:, order]

    target = tol * scale
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off > target:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps", residual=off
            )
    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def sym_eigs(S: np.ndarray, method: str = "jacobi"):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric ``S``.

    ``method="jacobi"`` uses :func:`jacobi_eigh`; ``method="lapack"`` defers to
    ``numpy.linalg.eigh`` and is what the hot loops use.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ContractError("sym_eigs expects a square matrix")
    if not np.all(np.isfinite(S)):
        raise ContractError("sym_eigs expects finite entries")
    if method == "jacobi":
        return jacobi_eigh(S)
    if method == "lapack":
        lam, V = np.linalg.eigh(symmetrize(S))
        return lam, V
    raise ContractError(f"unknown eigensolver {method!r}")


def rank_tolerance(A: np.ndarray, sigma_max: float) -> float:
    return 1e-10 * max(A.shape) * sigma_max


def numerical_rank(A: np.ndarray, tol: float | None = None) -> int:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if tol is None:
        tol = rank_tolerance(A, sv[0] if sv.size else 0.0)
    return int(np.sum(sv > tol))


def null_space_basis(A: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{w : A w = 0}``.

    Singular values at or below ``tol`` count as zero; the default is
    ``1e-10 * max(A.shape) * sigma_max``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if m == 0 or not np.any(A):
        return np.eye(n)
    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    if tol is None:
        tol = rank_tolerance(A, sv[0])
    rank = int(np.sum(sv > tol))
    return Vt[rank:].T.copy()


def min_eig(S: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(symmetrize(S))[0])


# -- text format -----------------------------------------------------------

def format_matrix(A: np.ndarray) -> str:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(format(float(x), ".17g") for x in row) for row in A]
    return "\n".join(lines) + "\n"


def _parse_matrix(lines: list[str], start: int) -> tuple[np.ndarray, int]:
    header = lines[start].split()
    if len(header) != 2:
        raise ValueError(f"line {start + 1}: expected 'rows cols' header")
    rows, cols = int(header[0]), int(header[1])
    data = np.zeros((rows, cols))
    for r in range(rows):
        idx = start + 1 + r
        if idx >= len(lines):
            raise ValueError(f"line {idx + 1}: missing matrix row")
        vals = lines[idx].split()
        if len(vals) != cols:
            raise ValueError(f"line {idx + 1}: expected {cols} entries, got {len(vals)}")
        data[r] = [float(v) for v in vals]
    if not np.all(np.isfinite(data)):
        raise ValueError("matrix entries must be finite")
    return data, start + 1 + rows


def _content_lines(text: str) -> list[str]:
    return [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def parse_matrix(text: str) -> np.ndarray:
    A, _ = _parse_matrix(_content_lines(text), 0)
    return A


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, A: np.ndarray) -> None:
    Path(path).write_text(format_matrix(A))


def format_operator(coeffs) -> str:
    coeffs = [np.asarray(c, dtype=float) for c in coeffs]
    n = coeffs[0].shape[0] if coeffs else 0
    return f"{n} {len(coeffs)}\n" + "".join(format_matrix(c) for c in coeffs)


def parse_operator(text: str) -> tuple[int, list[np.ndarray]]:
    lines = _content_lines(text)
    n, m = (int(x) for x in lines[0].split())
    pos, mats = 1, []
    for _ in range(m):
        M, pos = _parse_matrix(lines, pos)
        if M.shape != (n, n) or not np.array_equal(M, M.T):
            raise ValueError("operator coefficients must be symmetric n x n matrices")
        mats.append(M)
    return n, mats
