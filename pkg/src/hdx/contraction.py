"""Local-to-global contraction bounds from a spectral profile or from contraction factors.

Given per-level factors s_0..s_{m}, the global factors follow the recursion

    v_0 = s_0,    v_k = s_k - (s_k - 1) / v_{k-1},

with the closed form v_k = 1 + 1 / sum_{i<=k} S_i^k, S_i^k = prod_{j=i}^k 1/(s_j - 1).
The second-eigenvalue bound at level k is gamma_k = 1 / v_{k-2}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AdmissibilityError,
    InvalidParameterError,
    InvalidProfileError,
    LevelOutOfRangeError,
    PreconditionUnmetError,
)
from .spectral import trickling_down_propagate

ADMISSIBLE_DELTA = 1e-3


def factors_from_profile(a) -> np.ndarray:
    """s_k = 2 / (1 + a_k)."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= -1):
        raise InvalidProfileError("profile entries must exceed -1")
    return 2.0 / (1.0 + a)


@dataclass
class ContractionSolution:
    s: np.ndarray
    v: np.ndarray
    x: np.ndarray
    products: np.ndarray | None         # products[i, k] = S_i^k for i <= k, else 0
    v_closed: np.ndarray | None
    our_bounds: np.ndarray              # our_bounds[k - 2] = gamma_k, k = 2..len(s)+1
    al_bounds: np.ndarray | None = None

    @property
    def singular_closed_form(self) -> bool:
        return self.products is None

    @property
    def d(self) -> int:
        return len(self.s) + 1

    def our_bound(self, k: int) -> float:
        if not 2 <= k <= self.d:
            raise LevelOutOfRangeError(f"bound defined for 2 <= k <= {self.d}")
        return float(self.our_bounds[k - 2])


def solve_recursion(s, a=None) -> ContractionSolution:
    """Solve the contraction recursion for factors ``s`` (all >= 1).

    If the originating profile ``a`` is given, the product bounds
    1 - (1/k) prod (1 - a_i) are attached.  When some s_j == 1 the closed form is singular and only the
    recursion values are returned.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or len(s) == 0:
        raise InvalidParameterError("need a nonempty 1-D array of factors")
    if np.any(s < 1):
        raise InvalidParameterError("contraction factors must be >= 1")
    m = len(s)
    v = np.empty(m)
    v[0] = s[0]
    for k in range(1, m):
        v[k] = s[k] - (s[k] - 1.0) / v[k - 1]
    with np.errstate(divide="ignore"):
        x = np.where(v > 1, v / np.where(v > 1, v - 1.0, 1.0), np.inf)

    products = v_closed = None
    if np.all(s > 1):
        r = 1.0 / (s - 1.0)
        products = np.zeros((m, m))
        for k in range(m):
            products[k, k] = r[k]
            for i in range(k - 1, -1, -1):
                products[i, k] = products[i + 1, k] * r[i]
        v_closed = 1.0 + 1.0 / products.sum(axis=0)

    sol = ContractionSolution(s, v, x, products, v_closed, 1.0 / v)
    if a is not None:
        sol.al_bounds = np.array([al_bound(a, k) for k in range(2, m + 2)])
    return sol


def solve_profile(a) -> ContractionSolution:
    return solve_recursion(factors_from_profile(a), a)


def our_bound(s, k: int) -> float:
    """gamma_k = 1 / v_{k-2} for factors s_0..s_{d-2}."""
    s = np.asarray(s, dtype=float)
    if not 2 <= k <= len(s) + 1:
        raise LevelOutOfRangeError(f"bound defined for 2 <= k <= {len(s) + 1}")
    return solve_recursion(s[: k - 1]).our_bound(k)


def al_bound(a, k: int) -> float:
    """1 - (1/k) prod_{i=0}^{k-2} (1 - a_i)."""
    a = np.asarray(a, dtype=float)
    if not 2 <= k <= len(a) + 1:
        raise LevelOutOfRangeError(f"bound defined for 2 <= k <= {len(a) + 1}")
    return float(1.0 - np.prod(1.0 - a[: k - 1]) / k)


def trickling_profile_bound(gamma: float, d: int, k: int) -> float:
    """1 - (1/k) (1 - (d-1) gamma) / (1 - (d-k) gamma)."""
    if not 2 <= k <= d:
        raise LevelOutOfRangeError(f"need 2 <= k <= d, got k={k}, d={d}")
    if gamma < 0 or gamma > 1.0 / (d - 1):
        raise PreconditionUnmetError(f"gamma={gamma} outside [0, 1/(d-1)]")
    return 1.0 - (1.0 - (d - 1) * gamma) / (k * (1.0 - (d - k) * gamma))


def is_admissible(a, tol: float = 1e-12) -> tuple[bool, int | None]:
    """(ok, first violating index): a_i < 1 for all i and a_{i-1} <= a_i/(1-a_i).

    The second condition is allowed ``tol`` of slack: profiles produced by
    trickling down sit exactly on that boundary, so rounding would otherwise
    reject them.
    """
    a = [float(x) for x in a]
    for i, ai in enumerate(a):
        if not ai < 1:
            return False, i
        if i >= 1 and a[i - 1] > ai / (1.0 - ai) + tol:
            return False, i
    return True, None


def check_profile_property(a, k: int) -> float:
    """a_k (k+1) + prod_{i<=k} (1 - a_i) - 1; nonnegative for admissible profiles."""
    a = np.asarray(a, dtype=float)
    if not 1 <= k <= len(a) - 1:
        raise LevelOutOfRangeError(f"need 1 <= k <= {len(a) - 1}")
    return float(a[k] * (k + 1) + np.prod(1.0 - a[: k + 1]) - 1.0)


def comparison_lower_bound(a, k: int) -> float:
    """(k+2) / prod_{i<=k} (1 - a_i), the lower bound on x_k for admissible profiles."""
    a = np.asarray(a, dtype=float)
    return float((k + 2) / np.prod(1.0 - a[: k + 1]))


@dataclass
class ComparisonRow:
    k: int
    ours: float
    al: float

    @property
    def gap(self) -> float:
        return self.ours - self.al


def compare_bounds(a, tol: float = 1e-12) -> list[ComparisonRow]:
    """Per-level table of (recursion bound, product bound) for an admissible profile."""
    ok, where = is_admissible(a)
    if not ok:
        raise AdmissibilityError(f"profile is not admissible at index {where}")
    sol = solve_profile(a)
    return [ComparisonRow(k, float(sol.our_bounds[k - 2]), float(sol.al_bounds[k - 2]))
            for k in range(2, sol.d + 1)]


def sample_admissible_profile(rng, d: int, delta: float = ADMISSIBLE_DELTA) -> np.ndarray:
    """Random admissible profile of length d-1, drawn from the top level down."""
    if d < 2:
        raise InvalidParameterError("need d >= 2")
    a = np.empty(d - 1)
    a[-1] = rng.uniform(0.0, 1.0 - delta)
    for i in range(d - 2, 0, -1):
        a[i - 1] = rng.uniform(0.0, min(a[i] / (1.0 - a[i]), 1.0 - delta))
    return a


def trickling_profile(gamma: float, d: int) -> np.ndarray:
    return np.array(trickling_down_propagate(gamma, d))
