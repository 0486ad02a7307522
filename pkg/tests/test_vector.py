import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnunique.ensembles import Seed, bernoulli01, gaussian_matrix
from nnunique.errors import ContractError, EnumerationTooLarge
from nnunique.vector import (all_supports_singleton, exact_singleton, l1_recover, min_rows_bound,
                             mplus_membership, neighborliness_check, null_space_support_property,
                             probe_singleton, rip_constant_brute, wendel_probability)
from oracles import distinct_01_with_ones_row, is_vertex_by_hull, lp_by_vertices, sampled_support_minima

EQ5 = np.array([[1, 1, 1, 0, 0], [1, 0, 0, 1, 0], [0, 0, 1, 1, 1]], float)


def _check_cert(A, cert):
    if cert.member:
        assert cert.lam is None and (cert.h @ A).min() >= 1 - 1e-8
    else:
        assert cert.h is None
        lam = cert.lam
        assert lam.min() >= -1e-8 and abs(lam.sum() - 1) <= 1e-8
        assert np.abs(A @ lam).max() <= 1e-8


def test_mplus_examples():
    c = mplus_membership([[1, 1, 1]])
    assert c.member and np.allclose(c.h, [1])
    c = mplus_membership([[1, -1]])
    assert not c.member and np.allclose(c.lam, [0.5, 0.5])
    c = mplus_membership(EQ5)
    assert c.member
    _check_cert(EQ5, c)
    # the all-ones vector is one valid certificate for this matrix
    assert np.array_equal(np.ones(3) @ EQ5, [2, 1, 2, 2, 1])
    with pytest.raises(ContractError):
        mplus_membership(np.zeros((2, 2)))


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 9))
def test_mplus_certificates_and_invariance(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    c = mplus_membership(A)
    _check_cert(A, c)
    scaled = A[rng.permutation(m)] * rng.uniform(0.1, 10, n)
    assert mplus_membership(scaled).member == c.member


def test_probe_examples():
    A = np.array([[1.0, 2, 0.5], [0, 1, 1]])
    v = probe_singleton(A, np.zeros(3))
    assert v.kind == "probable-singleton" and v.probes_used == 5
    assert exact_singleton(A, np.zeros(3)).kind == "certified-singleton"
    v = probe_singleton([[1, 1]], [1, 0])
    assert v.kind == "refuted"
    w = v.witness
    assert np.isclose(w.sum(), 1) and w.min() >= 0 and np.abs(w - [1, 0]).max() >= 1e-6
    x0 = np.eye(5)[0]
    assert probe_singleton(EQ5, x0).singleton == exact_singleton(EQ5, x0).singleton


def test_exact_examples():
    assert exact_singleton(np.eye(4), [1, 0, 2, 3]).kind == "certified-singleton"
    v = exact_singleton([[1, 1]], [1, 0])
    assert v.kind == "refuted" and v.witness is not None
    with pytest.raises(ContractError):
        exact_singleton([[1, 1]], [-1, 0])
    with pytest.raises(ContractError):
        probe_singleton([[1, 1]], [1, 0, 0])


def test_unbounded_feasible_set_is_refuted_with_feasible_witness():
    A = np.array([[1.0, -1.0]])
    v = exact_singleton(A, [1, 0])
    assert v.kind == "refuted" and np.isclose(A @ v.witness, 1) and v.witness.min() >= 0
    v = probe_singleton(A, [1, 0])
    assert v.kind == "refuted" and np.isclose(A @ v.witness, 1) and v.witness.min() >= 0


def test_probe_agrees_with_exact_on_sparse_bernoulli():
    for t in range(100):
        A = bernoulli01(6, 12, 0.5, False, Seed(10, t))
        rng = Seed(11, t).rng()
        x0 = np.zeros(12)
        x0[rng.integers(12)] = rng.random() + 0.1
        assert probe_singleton(A, x0, seed=Seed(12, t)).singleton == exact_singleton(A, x0).singleton


def test_refuted_witness_contract():
    rng = np.random.default_rng(0)
    for t in range(30):
        A = bernoulli01(5, 12, 0.4, False, Seed(20, t))
        x0 = np.zeros(12)
        x0[rng.choice(12, 5, replace=False)] = rng.random(5)
        for v in (probe_singleton(A, x0, seed=t), exact_singleton(A, x0)):
            if v.kind == "refuted":
                assert np.abs(A @ v.witness - A @ x0).max() <= 1e-7
                assert v.witness.min() >= -1e-9
                assert np.abs(v.witness - x0).max() >= 1e-6


def test_l1_examples():
    r = l1_recover(np.eye(3), [1, 2, 0])
    assert np.allclose(r.x, [1, 2, 0]) and r.unique_minimizer
    r = l1_recover([[1, 0, 1], [0, 1, 1]], [1, 1])
    assert np.allclose(r.x, [0, 0, 1]) and np.isclose(r.value, 1)
    # oracle: enumerate basic feasible points
    v, _ = lp_by_vertices(np.ones(3), np.array([[1.0, 0, 1], [0, 1, 1]]), np.array([1.0, 1]))
    assert np.isclose(v, r.value)
    r = l1_recover([[1, 1]], [2])
    assert np.isclose(r.value, 2) and r.unique_minimizer is False
    assert l1_recover([[1, 1]], [-1]).status == "infeasible"


def test_nsp_examples():
    assert null_space_support_property(np.eye(3), 5).holds
    assert null_space_support_property([[1, 1]], 0).holds
    res = null_space_support_property([[1, 1]], 1)
    assert not res.holds
    w = res.witness
    assert np.allclose(np.abs(w), [1, 1]) and w[0] == -w[1]
    # a nonneg null vector breaks the property at every k
    assert not null_space_support_property([[1, -1]], 0).holds
    with pytest.raises(EnumerationTooLarge):
        null_space_support_property(np.ones((1, 60)), 5, max_subsets=1000)


def _support_sizes(w, tol=1e-9):
    t = tol * np.abs(w).max()
    return int((w > t).sum()), int((w < -t).sum())


def test_nsp_against_dense_null_sphere_sampling():
    rng = np.random.default_rng(1)
    found = 0
    for t in range(20):
        A = bernoulli01(3, 8, 0.5, True, Seed(30, t))
        pos, neg = sampled_support_minima(A, 100_000, rng)
        for k in (1, 2, 3):
            res = null_space_support_property(A, k)
            if min(pos, neg) <= k:
                # a sampled violator exists, so the exhaustive check must fail
                assert not res.holds
                found += 1
            if not res.holds and res.violating_set:
                p, _ = _support_sizes(res.witness)
                assert p <= k and np.abs(A @ res.witness).max() <= 1e-8
    assert found > 0


def test_nsp_monotone_in_k():
    for t in range(20):
        A = bernoulli01(4, 9, 0.5, True, Seed(31, t))
        flags = [null_space_support_property(A, k).holds for k in range(4)]
        assert all(a >= b for a, b in zip(flags, flags[1:]))


def test_neighborliness_examples():
    assert neighborliness_check(np.eye(3), 1).holds
    assert neighborliness_check(np.eye(3), 2).holds
    res = neighborliness_check([[1, 1]], 1)
    assert not res.holds and len(res.violating_set) == 1
    # square: diagonals are not edges
    sq = np.array([[0, 1, 1, 0], [0, 0, 1, 1], [1, 1, 1, 1.0]])
    assert neighborliness_check(sq, 1).holds and not neighborliness_check(sq, 2).holds


def test_vertex_check_matches_hull_oracle():
    for t in range(30):
        A = Seed(32, t).rng().standard_normal((3, 7))
        A[:, 3] = 0.5 * (A[:, 0] + A[:, 1])  # force one non-vertex
        res = neighborliness_check(A, 1)
        verts = [is_vertex_by_hull(A, i) for i in range(7)]
        assert res.holds == all(verts)
        if not res.holds:
            assert not verts[res.violating_set[0]]


@pytest.mark.parametrize("t", range(15))
def test_three_way_equivalence_sample(t):
    rng = Seed(33, t).rng()
    m = int(rng.integers(4, 7))
    n = min(int(rng.integers(8, 11)), 2 ** (m - 1))
    A = distinct_01_with_ones_row(m, n, rng)
    for k in (0, 1, 2):
        a = all_supports_singleton(A, k).holds
        b = null_space_support_property(A, k).holds
        c = neighborliness_check(A, k).holds
        assert a == b == c


def test_singleton_implies_mplus():
    for t in range(40):
        rng = Seed(34, t).rng()
        A = rng.standard_normal((3, 6))
        x0 = np.zeros(6)
        x0[rng.integers(6)] = 1.0
        if exact_singleton(A, x0).singleton:
            assert mplus_membership(A).member


def test_min_rows_bound():
    assert [min_rows_bound(p) for p in range(3)] == [1, 3, 5]
    with pytest.raises(ContractError):
        min_rows_bound(-1)


def test_wendel_examples():
    assert wendel_probability(1, 2) == 0.5
    assert wendel_probability(2, 2) == 0.0
    assert wendel_probability(3, 4) == 0.125
    assert wendel_probability(5, 3) == 0.0
    # large arguments stay exact and in range
    assert 0.0 <= wendel_probability(500, 2000) <= 1.0
    with pytest.raises(ContractError):
        wendel_probability(0, 3)


@given(st.integers(1, 30), st.integers(1, 30))
def test_wendel_matches_independent_sum(m, n):
    ref = 1 - sum(math.comb(n - 1, k) for k in range(m)) / 2 ** (n - 1)
    assert math.isclose(wendel_probability(m, n), max(ref, 0.0), abs_tol=1e-15)


def test_rip_examples():
    assert rip_constant_brute(math.sqrt(4) * np.eye(4), 2) == pytest.approx(0.0, abs=1e-12)
    A = np.array([[1.0, 1, 0], [0, 0, 1]])
    assert rip_constant_brute(A, 2) >= 1
    with pytest.raises(EnumerationTooLarge):
        rip_constant_brute(np.ones((2, 40)), 10, max_subsets=100)


def test_rip_matches_per_support_svd():
    A = np.where(Seed(35).rng().random((8, 16)) < 0.5, -1.0, 1.0)
    ref = 0.0
    for T in combinations(range(16), 2):
        s = np.linalg.svd(A[:, T], compute_uv=False)
        ref = max(ref, 1 - s.min() / math.sqrt(8), s.max() / math.sqrt(8) - 1)
    assert rip_constant_brute(A, 2) == pytest.approx(ref, abs=1e-12)


def test_2p_rows_cannot_certify_all_p_sparse():
    for t in range(10):
        A = gaussian_matrix(2, 5, Seed(36, t))
        assert not all_supports_singleton(A, 1).holds
