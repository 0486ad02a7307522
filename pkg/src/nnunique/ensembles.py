"""Seeded random measurement ensembles.

All randomness flows through :class:`Seed`, a ``(master, stream)`` pair that
keys numpy's Philox4x64-10 counter-based generator. The key is the two 64-bit
words ``[master, stream]`` and the counter starts at zero, so a seed pins the
output bit for bit and distinct streams are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EmptyNullSpace
from .linalg import null_space_basis, symmetrize
from .sdp import SymOperator

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if not 0 <= v <= _MASK64:
                raise ContractError(f"{name} must fit in 64 unsigned bits, got {v}")

    def rng(self) -> np.random.Generator:
        key = np.array([self.master, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *keys: int) -> "Seed":
        """A new stream derived from this one and ``keys`` (order matters)."""
        s = self.stream
        for k in keys:
            # splitmix64 step per key
            s = (s + 0x9E3779B97F4A7C15 + int(k)) & _MASK64
            s = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            s = ((s ^ (s >> 27)) * 0x94D049BB133111EB) & _MASK64
            s ^= s >> 31
        return Seed(self.master, s)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, Seed):
        return seed.rng()
    if isinstance(seed, np.random.Generator):
        return seed
    return Seed(int(seed)).rng()


def bernoulli01(m: int, n: int, p: float, append_ones_row: bool, seed) -> np.ndarray:
    """``m x n`` i.i.d. Bernoulli(p) 0-1 matrix, optionally with an all-ones row appended."""
    if not 0.0 < p < 1.0:
        raise ContractError(f"density must lie in (0, 1), got {p}")
    A = (_rng(seed).random((m, n)) < p).astype(float)
    if append_ones_row:
        A = np.vstack([A, np.ones((1, n))])
    return A


def gaussian_matrix(m: int, n: int, seed) -> np.ndarray:
    return _rng(seed).standard_normal((m, n))


def gaussian_sym_operator(n: int, m: int, seed) -> SymOperator:
    """``m`` coefficient matrices ``(G + G^T)/2`` with ``G`` i.i.d. N(0, 1).

    Diagonal entries are N(0, 1) and off-diagonal entries N(0, 1/2).
    """
    G = _rng(seed).standard_normal((m, n, n))
    return SymOperator(symmetrize(G))


def random_bipartite(n_left: int, m_right: int, d: int, seed) -> np.ndarray:
    """0-1 adjacency (right x left) where every left node has ``d`` distinct neighbours."""
    if not 0 < d <= m_right:
        raise ContractError(f"left degree must satisfy 0 < d <= m_right, got d={d}, m_right={m_right}")
    rng = _rng(seed)
    A = np.zeros((m_right, n_left))
    for j in range(n_left):
        A[rng.choice(m_right, size=d, replace=False), j] = 1.0
    return A


def sample_null_vector(A: np.ndarray, seed, basis: np.ndarray | None = None) -> np.ndarray:
    """Unit vector drawn uniformly from the null sphere of ``A``."""
    Z = null_space_basis(A) if basis is None else basis
    if Z.shape[1] == 0:
        raise EmptyNullSpace("matrix has a trivial null space")
    g = _rng(seed).standard_normal(Z.shape[1])
    w = Z @ g
    return w / np.linalg.norm(w)
