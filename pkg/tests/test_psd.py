import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnunique.ensembles import Seed, gaussian_sym_operator
from nnunique.errors import ContractError
from nnunique.linalg import smat, smat_iso, svec_dim, symmetrize
from nnunique.psd import (apply_operator, construct_second_solution, eig_condition_sample,
                          exact_singleton_psd, operator_null_basis, probe_singleton_psd,
                          semicircle_alpha, semicircle_c)
from nnunique.sdp import SymOperator
from oracles import naive_trace, semicircle_closed_form


def unit(i, j, n):
    M = np.zeros((n, n))
    M[i, j] = M[j, i] = 1.0
    return M


def test_apply_operator_examples():
    op = gaussian_sym_operator(4, 3, Seed(1))
    assert np.array_equal(apply_operator(op, np.zeros((4, 4))), np.zeros(3))
    X = symmetrize(np.random.default_rng(0).standard_normal((4, 4)))
    assert np.isclose(apply_operator(SymOperator.from_list([np.eye(4)]), X)[0], np.trace(X))
    ref = [naive_trace(A.tolist(), X.tolist()) for A in op.coeffs]
    assert np.allclose(apply_operator(op, X), ref)
    with pytest.raises(ContractError):
        apply_operator(op, np.eye(3))
    with pytest.raises(ContractError):
        apply_operator(op, np.triu(np.ones((4, 4))))


@pytest.mark.parametrize("iso", [False, True])
def test_null_basis(iso):
    to_mat = smat_iso if iso else smat
    assert operator_null_basis(SymOperator(np.zeros((0, 3, 3))), iso).shape == (6, 6)
    assert operator_null_basis(gaussian_sym_operator(3, 6, Seed(2)), iso).shape == (6, 0)
    op = gaussian_sym_operator(6, 10, Seed(3))
    Z = operator_null_basis(op, iso)
    assert Z.shape == (svec_dim(6), 11)
    for k in range(Z.shape[1]):
        assert np.abs(op.apply(to_mat(Z[:, k], 6))).max() <= 1e-10


def test_probe_examples():
    op = SymOperator.from_list([np.eye(3)])
    assert probe_singleton_psd(op, np.zeros((3, 3))).kind == "probable-singleton"
    op = SymOperator.from_list([unit(0, 0, 2)])
    v = probe_singleton_psd(op, unit(0, 0, 2))
    assert v.kind == "refuted"
    W = v.witness
    assert np.isclose(W[0, 0], 1, atol=1e-6) and np.linalg.eigvalsh(W)[0] >= -1e-8
    assert np.linalg.norm(W - unit(0, 0, 2)) >= 1e-5


def test_exact_examples():
    op = gaussian_sym_operator(3, 6, Seed(4))
    F = np.random.default_rng(1).standard_normal((3, 2))
    assert exact_singleton_psd(op, F @ F.T).kind == "certified-singleton"
    op = SymOperator.from_list([unit(0, 0, 2)])
    v = exact_singleton_psd(op, unit(0, 0, 2))
    assert v.kind == "refuted" and np.allclose(v.witness, np.eye(2), atol=1e-5)


def test_probe_agrees_with_exact_at_rank_zero():
    for t in range(10):
        op = gaussian_sym_operator(4, 8, Seed(50, t))
        Z = np.zeros((4, 4))
        p = probe_singleton_psd(op, Z, seed=t)
        e = exact_singleton_psd(op, Z)
        assert "inconclusive" not in (p.kind, e.kind)
        assert p.singleton == e.singleton


def test_refuted_witness_contract():
    for t in range(6):
        op = gaussian_sym_operator(4, 5, Seed(51, t))
        F = np.random.default_rng(t).standard_normal((4, 2))
        X0 = symmetrize(F @ F.T)
        v = probe_singleton_psd(op, X0, seed=t)
        assert v.kind == "refuted"
        W = v.witness
        b = op.apply(X0)
        assert np.linalg.norm(op.apply(W) - b) <= 1e-6 * (1 + np.linalg.norm(b))
        assert np.linalg.eigvalsh(W)[0] >= -1e-8 and np.linalg.norm(W - X0) >= 1e-5


def test_eig_condition_examples():
    rep = eig_condition_sample(gaussian_sym_operator(3, 6, Seed(5)), 2, 100)
    assert rep.vacuous and not rep.refuted
    rep = eig_condition_sample(SymOperator(np.zeros((0, 2, 2))), 0, 500, seed=1)
    assert rep.refuted and rep.min_negative_count == 0
    Y = rep.refuting_matrix
    assert np.isclose(np.linalg.norm(Y), 1) and np.linalg.eigvalsh(Y)[0] >= -1e-8


def test_eig_condition_report_contract():
    op = gaussian_sym_operator(10, 38, Seed(6))
    rep = eig_condition_sample(op, 2, 300, seed=2)
    assert rep.min_negative_count == min(rep.counts)
    assert rep.refuted == (rep.min_negative_count <= 2)
    if rep.refuted:
        Y = rep.refuting_matrix
        assert np.isclose(np.linalg.norm(Y), 1) and np.abs(op.apply(Y)).max() <= 1e-9


def test_second_solution_examples():
    X, XY = construct_second_solution(np.diag([-1.0, 2.0]), 1)
    assert np.allclose(X, np.diag([2.0, 0])) and np.allclose(XY, np.diag([1.0, 2]))
    Y = np.diag([1.0, 3.0])
    X, XY = construct_second_solution(Y, 0)
    assert np.allclose(X, 0) and np.allclose(XY, Y)
    with pytest.raises(ContractError):
        construct_second_solution(np.diag([-1.0, -1.0]), 1)
    with pytest.raises(ContractError):
        construct_second_solution(np.zeros((2, 2)), 1)


@given(st.integers(0, 2**32 - 1))
def test_second_solution_random(seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    lam = np.concatenate([-rng.uniform(0.1, 2, 2), rng.uniform(0, 2, 6)])
    Y = symmetrize(U @ np.diag(lam) @ U.T)
    X, XY = construct_second_solution(Y, 2)
    assert np.linalg.eigvalsh(X)[0] >= -1e-8 and np.linalg.eigvalsh(XY)[0] >= -1e-8
    assert np.linalg.matrix_rank(X, tol=1e-8) <= 2
    assert np.allclose(XY - X, Y, atol=1e-12)


def test_semicircle_examples():
    assert semicircle_alpha(0) == 0.5
    assert semicircle_alpha(-2) == 0.0 and semicircle_alpha(2) == 1.0
    assert abs(semicircle_alpha(-1) - semicircle_closed_form(-1)) <= 1e-10
    assert abs(semicircle_alpha(-1) - 0.09085) <= 1e-4


@given(st.floats(-1.5, 1.5))
def test_semicircle_matches_closed_form(c):
    assert abs(semicircle_alpha(c) - semicircle_closed_form(c)) <= 1e-9


@given(st.floats(0.0, 1.0))
def test_semicircle_inverse(a):
    c = semicircle_c(a)
    assert abs(semicircle_closed_form(c) - a) <= 1e-9
    with pytest.raises(ContractError):
        semicircle_c(1.5)


def test_stalled_side_can_refute_but_needs_feasibility():
    from nnunique.psd import _stalled_witness
    from nnunique.sdp import SdpContext, SdpOutcome
    op = SymOperator.from_list([unit(0, 0, 2)])
    ctx = SdpContext(op)
    X0, D = unit(0, 0, 2), unit(1, 1, 2)
    done = SdpOutcome("optimal", X0, 0.0, (0.0, 0.0))
    stalled = SdpOutcome("max-iterations", np.eye(2), 1.0, (0.0, 1.0))
    W, spread = _stalled_witness(ctx, done, stalled, D, X0, 1e-5)
    assert spread == pytest.approx(1.0) and np.allclose(W, np.eye(2), atol=1e-8)
    off = SdpOutcome("max-iterations", 3 * np.eye(2), 3.0, (2.0, 3.0))
    assert _stalled_witness(ctx, done, off, D, X0, 1e-5)[0] is None
    near = SdpOutcome("max-iterations", X0 + 1e-9 * np.eye(2), 1e-9, (1e-9, 0.0))
    assert _stalled_witness(ctx, done, near, D, X0, 1e-5)[0] is None
    assert _stalled_witness(ctx, done, done, D, X0, 1e-5)[0] is None
