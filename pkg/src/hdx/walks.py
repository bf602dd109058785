"""Up/down walk operators, level projections, Dirichlet forms and variances.

Functions on a level are plain 1-D arrays aligned with ``cx.faces[k]``.
Operators act on functions by matrix-vector product, so ``up_step(cx, k)``
applied to a level-(k+1) function averages it down onto level k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import Face, PureSimplicialComplex, link
from .errors import DimensionError, InvalidParameterError, LevelOutOfRangeError


@dataclass(frozen=True, eq=False)
class WalkOperator:
    source_level: int
    target_level: int
    matrix: np.ndarray
    source_faces: list[Face]
    target_faces: list[Face]
    stationary: np.ndarray | None = None
    name: str = ""

    @property
    def is_square(self) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "WalkOperator") -> "WalkOperator":
        if self.target_level != other.source_level:
            raise DimensionError("operator levels do not chain")
        return WalkOperator(self.source_level, other.target_level, self.matrix @ other.matrix,
                            self.source_faces, other.target_faces)


def _cached(kind):
    def deco(build):
        def wrapper(cx, k):
            key = (kind, k)
            if key not in cx._cache:
                op = build(cx, k)
                op.matrix.flags.writeable = False
                cx._cache[key] = op
            return cx._cache[key]
        wrapper.__name__ = build.__name__
        wrapper.__doc__ = build.__doc__
        return wrapper
    return deco


@_cached("up")
def up_step(cx: PureSimplicialComplex, k: int) -> WalkOperator:
    """P^up_k: from S in C(k) add i with probability proportional to w(S + i)."""
    if not 0 <= k <= cx.d - 1:
        raise LevelOutOfRangeError(f"up step needs 0 <= k <= {cx.d - 1}, got {k}")
    lo, hi = cx.faces[k], cx.faces[k + 1]
    idx = cx._index[k]
    M = np.zeros((len(lo), len(hi)))
    for j, T in enumerate(hi):
        wt = cx.weights[k + 1][j]
        for i in range(k + 1):
            M[idx[T[:i] + T[i + 1:]], j] = wt
    M /= M.sum(axis=1, keepdims=True)
    return WalkOperator(k, k + 1, M, lo, hi, cx.distribution(k), f"P_up_{k}")


@_cached("down")
def down_step(cx: PureSimplicialComplex, k: int) -> WalkOperator:
    """P^down_k: from S in C(k) remove a uniformly random element."""
    if not 1 <= k <= cx.d:
        raise LevelOutOfRangeError(f"down step needs 1 <= k <= {cx.d}, got {k}")
    hi, lo = cx.faces[k], cx.faces[k - 1]
    idx = cx._index[k - 1]
    M = np.zeros((len(hi), len(lo)))
    for j, T in enumerate(hi):
        for i in range(k):
            M[j, idx[T[:i] + T[i + 1:]]] = 1.0 / k
    return WalkOperator(k, k - 1, M, hi, lo, cx.distribution(k), f"P_down_{k}")


@_cached("rw_down")
def down_up(cx: PureSimplicialComplex, k: int) -> WalkOperator:
    """RW^down_k = P^down_k P^up_{k-1}, reversible w.r.t. pi_k."""
    if not 1 <= k <= cx.d:
        raise LevelOutOfRangeError(f"down-up walk needs 1 <= k <= {cx.d}, got {k}")
    M = down_step(cx, k).matrix @ up_step(cx, k - 1).matrix
    return WalkOperator(k, k, M, cx.faces[k], cx.faces[k], cx.distribution(k), f"RW_down_{k}")


@_cached("rw_up")
def up_down(cx: PureSimplicialComplex, k: int) -> WalkOperator:
    """RW^up_k = P^up_k P^down_{k+1}, reversible w.r.t. pi_k."""
    if not 0 <= k <= cx.d - 1:
        raise LevelOutOfRangeError(f"up-down walk needs 0 <= k <= {cx.d - 1}, got {k}")
    M = up_step(cx, k).matrix @ down_step(cx, k + 1).matrix
    return WalkOperator(k, k, M, cx.faces[k], cx.faces[k], cx.distribution(k), f"RW_up_{k}")


def local_walk(cx: PureSimplicialComplex, S) -> WalkOperator:
    """Non-lazy local walk G_S = 2 RW^up_{S,1} - I on the vertices of the link of S."""
    lnk = link(cx, S)
    lk = lnk.complex
    if lk.d < 2:
        raise LevelOutOfRangeError(f"local walk needs |S| <= {cx.d - 2}")
    rw = up_down(lk, 1)
    G = 2.0 * rw.matrix - np.eye(rw.size)
    return WalkOperator(1, 1, G, lk.faces[1], lk.faces[1], lk.distribution(1),
                        f"G_{list(lnk.base_face)}")


def local_walk_from_weights(lk: PureSimplicialComplex) -> np.ndarray:
    """diag(w_1)^{-1} W with W(u, v) = w_2({u, v}), for a link of dimension >= 2."""
    idx = lk._index[1]
    W = np.zeros((len(lk.faces[1]),) * 2)
    for (u, v), wt in zip(lk.faces[2], lk.weights[2]):
        W[idx[(u,)], idx[(v,)]] = wt
        W[idx[(v,)], idx[(u,)]] = wt
    return W / lk.weights[1][:, None]


def project_down(cx: PureSimplicialComplex, f, k: int, i: int) -> np.ndarray:
    """f^(i) = P^up_i ... P^up_{k-1} f for a level-k function f."""
    f = np.asarray(f, dtype=float)
    if not 0 <= i <= k:
        raise InvalidParameterError(f"target level {i} must lie in 0..{k}")
    if not 0 <= k <= cx.d:
        raise LevelOutOfRangeError(f"level {k} outside 0..{cx.d}")
    if f.shape != (len(cx.faces[k]),):
        raise DimensionError(f"function has shape {f.shape}, level {k} has "
                             f"{len(cx.faces[k])} faces")
    for j in range(k - 1, i - 1, -1):
        f = up_step(cx, j).matrix @ f
    return f


def lift_up(cx: PureSimplicialComplex, g, k: int) -> np.ndarray:
    """P^down_k g: the level-k function averaging the level-(k-1) function g over facets."""
    g = np.asarray(g, dtype=float)
    P = down_step(cx, k).matrix
    if g.shape != (P.shape[1],):
        raise DimensionError("function does not match level k-1")
    return P @ g


def restrict_to_link(cx: PureSimplicialComplex, f, k: int, lk) -> np.ndarray:
    """f_S(T) = f(S | T) on level k - |S| of the link ``lk``."""
    f = np.asarray(f, dtype=float)
    S = lk.base_face
    level = k - len(S)
    return np.array([f[cx.index_of(T + S)] for T in lk.complex.faces[level]])


def _check_square(P: WalkOperator, *fs) -> None:
    if not P.is_square or P.stationary is None:
        raise DimensionError("operator must be square with a stationary distribution")
    for f in fs:
        if np.shape(f) != (P.size,):
            raise DimensionError(f"function of shape {np.shape(f)} vs operator size {P.size}")


def dirichlet_form(P: WalkOperator, f, g) -> float:
    """E_P(f, g) = f^T diag(pi) (I - P) g."""
    _check_square(P, f, g)
    f, g = np.asarray(f, float), np.asarray(g, float)
    return float(f @ (P.stationary * (g - P.matrix @ g)))


def expectation(pi, f) -> float:
    return float(np.dot(pi, f))


def variance(pi, f) -> float:
    pi, f = np.asarray(pi, float), np.asarray(f, float)
    if pi.shape != f.shape:
        raise DimensionError(f"distribution {pi.shape} vs function {f.shape}")
    # centred form avoids cancellation in E f^2 - (E f)^2
    m = np.dot(pi, f)
    return float(max(np.dot(pi, (f - m) ** 2), 0.0))


def relative_residual(lhs: float, rhs: float, floor: float = 1e-30) -> float:
    return abs(lhs - rhs) / max(abs(lhs), floor)


def variance_down_identity(cx: PureSimplicialComplex, k: int, f) -> tuple[float, float]:
    """(E_{RW^down_k}(f, f), Var_k f - Var_{k-1} f^(k-1))."""
    lhs = dirichlet_form(down_up(cx, k), f, f)
    rhs = variance(cx.distribution(k), f) - variance(cx.distribution(k - 1),
                                                      project_down(cx, f, k, k - 1))
    return lhs, rhs


def variance_up_identity(cx: PureSimplicialComplex, k: int, g) -> tuple[float, float]:
    """(E_{RW^up_{k-1}}(g, g), Var_{k-1} g - Var_k P^down_k g) for a level-(k-1) g."""
    lhs = dirichlet_form(up_down(cx, k - 1), g, g)
    rhs = variance(cx.distribution(k - 1), g) - variance(cx.distribution(k), lift_up(cx, g, k))
    return lhs, rhs


def variance_decomposition_sides(cx: PureSimplicialComplex, k: int, f) -> tuple[float, float]:
    """Both sides of Var_k f = sum_S pi_{k-2}(S) Var_{pi_{S,2}} f_S + Var_{k-2} f^(k-2)."""
    if not 2 <= k <= cx.d:
        raise LevelOutOfRangeError(f"decomposition needs 2 <= k <= {cx.d}")
    lhs = variance(cx.distribution(k), f)
    pi_base = cx.distribution(k - 2)
    rhs = variance(pi_base, project_down(cx, f, k, k - 2))
    for j, S in enumerate(cx.faces[k - 2]):
        lk = link(cx, S)
        rhs += pi_base[j] * variance(lk.complex.distribution(2), restrict_to_link(cx, f, k, lk))
    return lhs, rhs


def check_variance_decomposition(cx: PureSimplicialComplex, k: int, f) -> float:
    lhs, rhs = variance_decomposition_sides(cx, k, f)
    return relative_residual(lhs, rhs)


# -- operator invariants -------------------------------------------------------

def row_sum_residual(P: WalkOperator) -> float:
    return float(np.max(np.abs(P.matrix.sum(axis=1) - 1.0)))


def detailed_balance_residual(P: WalkOperator) -> float:
    F = P.stationary[:, None] * P.matrix
    return float(np.max(np.abs(F - F.T)))


def stationarity_residual(P: WalkOperator) -> float:
    return float(np.max(np.abs(P.stationary @ P.matrix - P.stationary)))


def random_function(rng, size: int, kind: str = "normal") -> np.ndarray:
    """Seeded test function: standard normal (variance checks) or U[0,1] (entropy checks)."""
    if kind == "normal":
        return rng.standard_normal(size)
    if kind == "uniform":
        return rng.random(size)
    raise InvalidParameterError(f"unknown function kind {kind!r}")
