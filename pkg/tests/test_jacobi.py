import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdx.jacobi import jacobi_eigh, jacobi_eigvalsh, off_norm


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 2**31))
def test_eigenvalues_match_lapack(n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    A = A + A.T
    w = jacobi_eigvalsh(A)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-11 * max(1, np.abs(A).max()))


def test_eigenpairs_and_orthogonality():
    A = np.random.default_rng(7).standard_normal((60, 60))
    A = A + A.T
    w, U = jacobi_eigh(A)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(U.T @ U, np.eye(60), atol=1e-12)
    assert np.max(np.abs(A @ U - U * w)) <= 1e-11


def test_repeated_eigenvalues():
    Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((6, 6)))
    A = Q @ np.diag([2.0, 2.0, 2.0, -1.0, -1.0, 0.5]) @ Q.T
    np.testing.assert_allclose(jacobi_eigvalsh(A), [2, 2, 2, 0.5, -1, -1], atol=1e-12)


def test_diagonal_input_untouched():
    A = np.diag([3.0, -1.0, 2.0])
    w, U = jacobi_eigh(A)
    np.testing.assert_array_equal(w, [3.0, 2.0, -1.0])
    assert off_norm(A) == 0.0


def test_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))
