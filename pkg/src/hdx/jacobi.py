"""Cyclic Jacobi eigensolver for small dense symmetric matrices."""
import math

import numpy as np


def off_norm(A) -> float:
    """Frobenius norm of the off-diagonal part."""
    off = A - np.diag(np.diag(A))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(A, tol=1e-13, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps visit the pairs (p, q), p < q, in row order and annihilate each
    off-diagonal entry.  Iteration stops once the off-diagonal Frobenius
    norm falls below ``tol``.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues in descending order.
    V : (n, n) ndarray
        Orthonormal eigenvectors as columns, aligned with ``w``.
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    asym = float(np.max(np.abs(A - A.T))) if n else 0.0
    if asym > 1e-10 * max(1.0, float(np.max(np.abs(A))) if n else 1.0):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    A = 0.5 * (A + A.T)
    V = np.eye(n)

    for _ in range(max_sweeps):
        if off_norm(A) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0

                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if off_norm(A) >= tol:
            raise np.linalg.LinAlgError("Jacobi iteration did not converge")

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def jacobi_eigvalsh(A, tol=1e-13, max_sweeps=100) -> np.ndarray:
    return jacobi_eigh(A, tol, max_sweeps)[0]
