import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nnunique.errors import ContractError, NumericalError
from nnunique.linalg import (format_matrix, format_operator, jacobi_eigh, null_space_basis,
                             numerical_rank, parse_matrix, parse_operator, smat, smat_iso, svec,
                             svec_dim, svec_index, svec_iso, sym_eigs, symmetrize)


def test_svec_index_examples():
    assert svec_index(0, 0, 3) == 0
    assert svec_index(0, 2, 3) == 2
    assert svec_index(2, 2, 3) == 5


@pytest.mark.parametrize("args", [(1, 0, 3), (0, 3, 3), (-1, 0, 3)])
def test_svec_index_rejects(args):
    with pytest.raises(ContractError):
        svec_index(*args)


@given(st.integers(1, 9))
def test_svec_index_is_bijection(n):
    idx = [svec_index(i, j, n) for i in range(n) for j in range(i, n)]
    assert idx == list(range(svec_dim(n)))


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_svec_roundtrip_exact(n, seed):
    S = symmetrize(np.random.default_rng(seed).standard_normal((n, n)))
    assert np.array_equal(smat(svec(S)), S)
    assert np.allclose(smat_iso(svec_iso(S)), S, atol=1e-15)
    # isometric coordinates preserve the trace inner product
    T = symmetrize(np.random.default_rng(seed + 1).standard_normal((n, n)))
    assert np.isclose(svec_iso(S) @ svec_iso(T), np.sum(S * T))


def test_symmetrize_is_bit_exact():
    M = np.random.default_rng(0).standard_normal((5, 7, 7)) * 1e3
    S = symmetrize(M)
    assert np.array_equal(S, np.swapaxes(S, 1, 2))


@pytest.mark.parametrize("S,expected", [
    (np.eye(3), [1, 1, 1]),
    (np.diag([3.0, 1, 2]), [1, 2, 3]),
    (np.array([[0.0, 1], [1, 0]]), [-1, 1]),
])
def test_sym_eigs_examples(S, expected):
    lam, V = sym_eigs(S)
    assert np.allclose(lam, expected, atol=1e-14)
    assert np.allclose(S @ V, V * lam, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 50])
def test_jacobi_reconstruction_and_orthogonality(n):
    S = symmetrize(np.random.default_rng(n).standard_normal((n, n)))
    lam, V = jacobi_eigh(S)
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm(V @ np.diag(lam) @ V.T - S) <= 1e-8 * (1 + np.linalg.norm(S))
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)


@given(arrays(np.float64, (6, 6), elements=st.floats(-1e3, 1e3)))
def test_jacobi_matches_lapack(M):
    S = symmetrize(M)
    lam_j, _ = sym_eigs(S, "jacobi")
    lam_l, _ = sym_eigs(S, "lapack")
    assert np.allclose(lam_j, lam_l, atol=1e-9 * (1 + np.linalg.norm(S)))


def test_jacobi_reports_nonconvergence():
    S = symmetrize(np.random.default_rng(3).standard_normal((12, 12)))
    with pytest.raises(NumericalError) as info:
        jacobi_eigh(S, max_sweeps=1)
    assert info.value.residual > 0


def test_sym_eigs_rejects_bad_input():
    with pytest.raises(ContractError):
        sym_eigs(np.ones((2, 3)))
    with pytest.raises(ContractError):
        sym_eigs(np.array([[np.nan, 0], [0, 1]]))


def test_null_space_examples():
    Z = null_space_basis(np.array([[1.0, 1.0]]))
    assert Z.shape == (2, 1)
    assert np.allclose(np.abs(Z[:, 0]), [2 ** -0.5, 2 ** -0.5])
    assert Z[0, 0] * Z[1, 0] < 0
    assert null_space_basis(np.eye(2)).shape == (2, 0)


@given(st.integers(1, 8), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_null_space_residual_and_dimension(m, n, seed):
    A = np.random.default_rng(seed).standard_normal((m, n))
    Z = null_space_basis(A)
    assert Z.shape[1] == n - numerical_rank(A) == max(n - m, 0)
    assert np.abs(A @ Z).max(initial=0) <= 1e-10 * max(A.shape) * np.linalg.norm(A, 2) + 1e-15
    assert np.allclose(Z.T @ Z, np.eye(Z.shape[1]), atol=1e-12)


def test_hoffman_wielandt_small():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 21))
        A = symmetrize(rng.standard_normal((n, n)))
        E = symmetrize(rng.standard_normal((n, n))) * rng.uniform(0.01, 3)
        la, lb = np.linalg.eigvalsh(A), np.linalg.eigvalsh(A + E)
        assert np.sum((lb - la) ** 2) <= np.linalg.norm(E) ** 2 * (1 + 1e-12)


def test_interlacing_under_rank_r_update():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        r = int(rng.integers(1, n))
        A = symmetrize(rng.standard_normal((n, n)))
        F = rng.standard_normal((n, r))
        B = symmetrize(F @ np.diag(rng.standard_normal(r)) @ F.T)
        la, lab = np.linalg.eigvalsh(A), np.linalg.eigvalsh(A + B)
        for k in range(n - r):
            assert lab[k] <= la[k + r] + 1e-9 * (1 + np.abs(la).max())


def test_matrix_text_roundtrip():
    A = np.random.default_rng(0).standard_normal((3, 4))
    assert np.array_equal(parse_matrix(format_matrix(A)), A)
    assert np.array_equal(parse_matrix("# comment\n1 2\n\n3 4.5\n"), [[3.0, 4.5]])


@pytest.mark.parametrize("text", ["2 2\n1 2\n", "1 2\n1 2 3\n", "x\n", "1 1\nnan\n"])
def test_matrix_text_errors(text):
    with pytest.raises(ValueError):
        parse_matrix(text)


def test_operator_text_roundtrip():
    mats = [symmetrize(np.random.default_rng(i).standard_normal((3, 3))) for i in range(2)]
    n, back = parse_operator(format_operator(mats))
    assert n == 3 and all(np.array_equal(a, b) for a, b in zip(mats, back))
    with pytest.raises(ValueError):
        parse_operator("2 1\n2 2\n1 2\n3 4\n")
