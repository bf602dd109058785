"""Relative entropy, KL divergence, and numerical estimates of entropy contraction.

The estimators minimise a ratio over positive functions written as f = exp(g).
Both ratios are invariant under f -> c f, so every iterate is rescaled to
E_pi f = 1.  Minimisation can only overshoot an infimum, hence every
:class:`EntropyEstimate` is an upper estimate, never a certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complex import PureSimplicialComplex, link
from .contraction import solve_recursion
from .errors import (
    DimensionError,
    LevelOutOfRangeError,
    NegativeFunctionError,
    OptimizationFailedError,
    SupportError,
)
from .jacobi import jacobi_eigvalsh
from .walks import (
    WalkOperator,
    down_up,
    lift_up,
    project_down,
    relative_residual,
    restrict_to_link,
    up_down,
    up_step,
)

DEFAULT_RESTARTS = 64
DEFAULT_SEED = 42
DEFAULT_MAX_ITER = 5000
DEFAULT_OPT_TOL = 1e-10
PROGRESS_WINDOW = 200      # iterations between progress checks in a descent
PROGRESS_RTOL = 1e-10      # minimum relative improvement per window
COLLAPSE_SPREAD = 1e-2     # log-spread below which a descent counts as collapsed to a constant


_PHI_SERIES = tuple((-1.0) ** n / (n * (n - 1)) for n in range(10, 1, -1))


def _phi(t: np.ndarray) -> np.ndarray:
    """t log t - t + 1 (>= 0), with phi(0) = 1 and a series near t = 1.

    Entropies are written as sums of these nonnegative terms, so nothing
    cancels when f is close to constant.
    """
    t = np.asarray(t, dtype=float)
    if np.all(t > 0):
        return _phi_pos(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(t > 0, t * np.log(t), 0.0) - (t - 1.0)
    return _series_near_one(t, out)


def _phi_pos(t: np.ndarray) -> np.ndarray:
    # strictly positive t: the hot path of the ratio objectives
    return _series_near_one(t, t * np.log(t) - (t - 1.0))


def _series_near_one(t, out):
    u = t - 1.0
    near = np.abs(u) < 1e-2
    if near.any():
        un = u[near]
        # sum_{n>=2} (-1)^n u^n / (n (n-1)), Horner form
        acc = np.zeros_like(un)
        for c in _PHI_SERIES:
            acc = un * acc + c
        out[near] = un * un * acc
    return out


def relative_entropy(pi, f) -> float:
    """Ent_pi(f) = E_pi[f log f] - E_pi f log E_pi f, with 0 log 0 = 0."""
    pi, f = np.asarray(pi, float), np.asarray(f, float)
    if pi.shape != f.shape:
        raise DimensionError(f"distribution {pi.shape} vs function {f.shape}")
    if np.any(f < 0):
        raise NegativeFunctionError("relative entropy needs a nonnegative function")
    m = float(np.dot(pi, f))
    if m == 0.0:
        return 0.0
    return float(m * np.dot(pi, _phi(f / m)))


def kl_divergence(tau, pi) -> float:
    """D(tau || pi) = sum tau log(tau / pi)."""
    tau, pi = np.asarray(tau, float), np.asarray(pi, float)
    if tau.shape != pi.shape:
        raise DimensionError("distributions differ in shape")
    if np.any((tau > 0) & (pi <= 0)):
        raise SupportError("tau is not absolutely continuous w.r.t. pi")
    pos = tau > 0
    return float(max(np.sum(tau[pos] * np.log(tau[pos] / pi[pos])), 0.0))


def entropy_dirichlet(P: WalkOperator, f) -> float:
    """E_P(f, log f), via (1/2) sum pi(x) P(x,y) (f(x)-f(y)) (log f(x) - log f(y)).

    Returns +inf when P moves between a zero and a positive entry of f.
    """
    f = np.asarray(f, float)
    if not P.is_square or P.stationary is None or f.shape != (P.size,):
        raise DimensionError("function does not match the operator")
    if np.any(f < 0):
        raise NegativeFunctionError("entropy Dirichlet form needs f >= 0")
    Q = P.stationary[:, None] * P.matrix
    df = np.subtract.outer(f, f)
    zero = f == 0
    if np.any((Q > 0) & np.logical_xor.outer(zero, zero)):
        return math.inf
    with np.errstate(divide="ignore"):
        logf = np.where(zero, 0.0, np.log(np.where(zero, 1.0, f)))
    return float(0.5 * np.sum(Q * df * np.subtract.outer(logf, logf)))


# -- identities and inequalities ---------------------------------------------------

def entropy_down_inequality(cx: PureSimplicialComplex, k: int, f) -> tuple[float, float]:
    """(E_{RW^down_k}(f, log f), Ent_k f - Ent_{k-1} f^(k-1)); lhs >= rhs."""
    lhs = entropy_dirichlet(down_up(cx, k), f)
    rhs = relative_entropy(cx.distribution(k), f) - relative_entropy(
        cx.distribution(k - 1), project_down(cx, f, k, k - 1))
    return lhs, rhs


def entropy_up_inequality(cx: PureSimplicialComplex, k: int, g) -> tuple[float, float]:
    """(E_{RW^up_{k-1}}(g, log g), Ent_{k-1} g - Ent_k P^down_k g); lhs >= rhs."""
    lhs = entropy_dirichlet(up_down(cx, k - 1), g)
    rhs = relative_entropy(cx.distribution(k - 1), g) - relative_entropy(
        cx.distribution(k), lift_up(cx, g, k))
    return lhs, rhs


def entropy_decomposition_sides(cx: PureSimplicialComplex, k: int, f) -> tuple[float, float]:
    if not 2 <= k <= cx.d:
        raise LevelOutOfRangeError(f"decomposition needs 2 <= k <= {cx.d}")
    lhs = relative_entropy(cx.distribution(k), f)
    pi_base = cx.distribution(k - 2)
    rhs = relative_entropy(pi_base, project_down(cx, f, k, k - 2))
    for j, S in enumerate(cx.faces[k - 2]):
        lk = link(cx, S)
        rhs += pi_base[j] * relative_entropy(lk.complex.distribution(2),
                                             restrict_to_link(cx, f, k, lk))
    return lhs, rhs


def check_entropy_decomposition(cx: PureSimplicialComplex, k: int, f) -> float:
    lhs, rhs = entropy_decomposition_sides(cx, k, f)
    return relative_residual(lhs, rhs)


# -- ratio objectives over g = log f ------------------------------------------------

def _second_eigenvalue_sym(M) -> float:
    return float(jacobi_eigvalsh(M)[1])


START_LOW = -10.0   # log-value off the support in a structured start


def _indicator_starts(mask):
    # the set and its complement, when both are nonempty
    if mask.any() and not mask.all():
        yield np.where(mask, 0.0, START_LOW)
        yield np.where(mask, START_LOW, 0.0)


class MLSIObjective:
    """g -> E_P(e^g, g) / Ent_pi(e^g) and its gradient."""

    def __init__(self, P: WalkOperator):
        self.pi = P.stationary
        Q = P.stationary[:, None] * P.matrix
        self.Q = 0.5 * (Q + Q.T)
        self.n = P.size
        self._P = P

    def __call__(self, g):
        f = np.exp(g)
        # (1/2) sum Q(x,y) (f_x - f_y)(g_x - g_y): a sum of nonnegative terms
        num = 0.5 * float(np.sum(self.Q * np.subtract.outer(f, f) * np.subtract.outer(g, g)))
        m = self.pi @ f
        den = m * (self.pi @ _phi_pos(f / m))
        if not den > 0:
            return math.nan, None
        Qg, Qf = self.Q @ g, self.Q @ f
        dnum = f * (self.pi * g - Qg) + self.pi * f - Qf
        dden = self.pi * f * (g - math.log(m))
        r = num / den
        return r, (dnum - r * dden) / den

    def structured_starts(self):
        """Indicators of single states and of their complements."""
        for x in range(self.n):
            mask = np.zeros(self.n, dtype=bool)
            mask[x] = True
            yield from _indicator_starts(mask)

    def quadratic_limit(self) -> float:
        """Limit of the ratio along f = 1 + eps h, eps -> 0, at the best h: 2 (1 - lambda_2)."""
        r = np.sqrt(self.pi)
        return 2.0 * (1.0 - _second_eigenvalue_sym(self.Q / r[:, None] / r[None, :]))


class ContractionObjective:
    """g -> Ent_hi(e^g) / Ent_lo(A e^g) for an averaging operator A (lo x hi)."""

    def __init__(self, A, pi_hi, pi_lo):
        self.A = np.asarray(A, float)
        self.pi = np.asarray(pi_hi, float)
        self.pi_lo = np.asarray(pi_lo, float)
        self.n = self.A.shape[1]

    def __call__(self, g):
        f = np.exp(g)
        m = self.pi @ f
        num = m * (self.pi @ _phi_pos(f / m))
        h = self.A @ f
        mh = self.pi_lo @ h
        den = mh * (self.pi_lo @ _phi_pos(h / mh))
        if not den > 0:
            return math.nan, None
        dnum = self.pi * f * (g - math.log(m))
        dden = f * (self.A.T @ (self.pi_lo * (np.log(h) - math.log(mh))))
        r = num / den
        return r, (dnum - r * dden) / den

    def structured_starts(self):
        """Indicators of the support of each row of A (a star) and of its complement."""
        seen = set()
        for row in self.A:
            mask = row > 0
            key = mask.tobytes()
            if key not in seen:
                seen.add(key)
                yield from _indicator_starts(mask)

    def quadratic_limit(self) -> float:
        """inf over h of Var_hi(h) / Var_lo(A h), the limit of the ratio at constant f."""
        r = np.sqrt(self.pi)
        M = (self.A.T @ (self.pi_lo[:, None] * self.A)) / r[:, None] / r[None, :]
        mu = _second_eigenvalue_sym(0.5 * (M + M.T)) if self.n >= 2 else 0.0
        return 1.0 / mu if mu > 1e-14 else math.inf


def ratio_on_f(objective, f) -> float:
    """Evaluate a ratio objective on a positive function f."""
    return objective(np.log(np.asarray(f, float)))[0]


@dataclass
class EntropyEstimate:
    value: float
    minimizing_function: np.ndarray | None
    restarts_used: int
    converged: bool
    unbounded: bool = False
    iterations: list[int] = field(default_factory=list)
    estimate_direction: str = "upper"
    descent_value: float = math.inf
    limit_value: float = math.inf    # value approached as f tends to a constant


def _normalize(g, pi):
    # shift so that E_pi e^g = 1; the ratios are invariant under this shift
    top = g.max()
    return g - (top + math.log(pi @ np.exp(g - top)))


FLOOR = -60.0       # log-value standing in for an exact zero of f
PRUNE_GAP = 12.0    # coordinates this far below the max are tried at FLOOR
PRUNE_EVERY = 40


def _try_prune(objective, g, val, frozen):
    """Pin tiny coordinates of f at exp(FLOOR) when that does not raise the ratio."""
    cand = (g < g.max() - PRUNE_GAP) & ~frozen
    if not cand.any():
        return None
    trial = g.copy()
    trial[cand] = FLOOR
    tval, tgrad = objective(trial)
    if math.isfinite(tval) and tval <= val:
        return trial, tval, tgrad, frozen | cand
    return None


def _descend(objective, g, pi, max_iter, tol):
    """Gradient descent with Barzilai-Borwein steps, Armijo backtracking and pruning.

    Minima of these ratios often sit on the boundary (some f(x) -> 0), which
    plain descent in log-space approaches only linearly; pruned coordinates
    are frozen and the descent continues on the rest.
    """
    g = _normalize(g, pi)
    val, grad = objective(g)
    if not math.isfinite(val):
        return math.nan, g, 0, False
    frozen = np.zeros(len(g), dtype=bool)
    alpha = 1.0
    g_prev = grad_prev = None
    stall = 0
    collapse_ok = hasattr(objective, "quadratic_limit")
    window_val = val
    for it in range(1, max_iter + 1):
        grad = np.where(frozen, 0.0, grad)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < tol:
            return val, g, it, True
        if g_prev is not None:
            dg, dgrad = g - g_prev, grad - grad_prev
            curv = float(dg @ dgrad)
            alpha = float(dg @ dg) / curv if curv > 0 else 2.0 * alpha
            alpha = min(max(alpha, 1e-12), 1e6)
        # Armijo backtracking
        while True:
            trial = _normalize(g - alpha * grad, pi)
            tval, tgrad = objective(trial)
            if math.isfinite(tval) and tval <= val - 1e-4 * alpha * gnorm * gnorm:
                break
            alpha *= 0.5
            if alpha < 1e-18:
                return val, g, it, False
        stall = stall + 1 if val - tval <= 1e-15 * max(abs(val), 1.0) else 0
        g_prev, grad_prev = g, grad
        g, val, grad = trial, tval, tgrad
        if it % PRUNE_EVERY == 0 or stall >= 10:
            pruned = _try_prune(objective, g, val, frozen)
            if pruned is not None:
                g, val, grad, frozen = pruned
                g_prev = grad_prev = None
                stall = 0
        if stall >= 25:
            return val, g, it, False
        if it % PROGRESS_WINDOW == 0:
            # near-constant iterates approach the constant limit, which the
            # caller evaluates in closed form; slow crawls are cut off
            live = g[~frozen]
            if collapse_ok and not frozen.any() and live.max() - live.min() < COLLAPSE_SPREAD:
                return val, g, it, False
            if window_val - val <= PROGRESS_RTOL * max(abs(val), 1.0):
                return val, g, it, False
            window_val = val
    return val, g, max_iter, False


def minimize_ratio(objective, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED,
                   max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_OPT_TOL) -> EntropyEstimate:
    """Multi-start gradient descent with Barzilai-Borwein steps and Armijo backtracking.

    Restart r starts from g ~ N(0, c^2 I), c = 1 + r mod 4, drawn from ``default_rng([seed, r])``,
    so the result does not depend on how restarts are scheduled.  Objectives
    may add deterministic starts (indicator-like functions, where boundary
    minima tend to sit); those run after the random ones.  The value
    reported is the smaller of the best descent value and the objective's
    constant-limit value, when it has one.
    """
    best_val, best_g = math.inf, None
    converged_any = False
    iters = []
    starts = [np.random.default_rng([seed, r]).standard_normal(objective.n) * (1.0 + r % 4)
              for r in range(restarts)]
    if hasattr(objective, "structured_starts"):
        starts += list(objective.structured_starts())
    for g0 in starts:
        with np.errstate(all="ignore"):   # exp underflow in trial steps is handled as nan
            val, g, it, conv = _descend(objective, g0, objective.pi, max_iter, tol)
        iters.append(it)
        if math.isfinite(val) and val < best_val:
            best_val, best_g = val, g
        converged_any |= conv
    if best_g is None:
        raise OptimizationFailedError(f"all {restarts} restarts failed")
    # Near-constant f the ratio tends to a spectral quantity that descent from
    # random starts cannot reach; it is a legitimate candidate for the infimum.
    limit = objective.quadratic_limit() if hasattr(objective, "quadratic_limit") else math.inf
    return EntropyEstimate(float(min(best_val, limit)), np.exp(best_g), len(starts), converged_any,
                           iterations=iters, descent_value=float(best_val),
                           limit_value=float(limit))


def estimate_mlsi(P: WalkOperator, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED,
                  max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_OPT_TOL) -> EntropyEstimate:
    """Upper estimate of inf E_P(f, log f) / Ent_pi(f) over positive f."""
    if not P.is_square or P.stationary is None or P.size < 2:
        raise DimensionError("need a square reversible walk on at least two states")
    return minimize_ratio(MLSIObjective(P), restarts, seed, max_iter, tol)


def _contraction_estimate(A, pi_hi, pi_lo, restarts, seed, max_iter, tol) -> EntropyEstimate:
    A = np.asarray(A, float)
    if A.shape[0] < 2 or np.allclose(A, A[0]):
        # A f is constant for every f: the denominator vanishes identically
        return EntropyEstimate(math.inf, None, 0, True, unbounded=True)
    return minimize_ratio(ContractionObjective(A, pi_hi, pi_lo), restarts, seed, max_iter, tol)


def estimate_entropy_contraction(lk, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED,
                                 max_iter: int = DEFAULT_MAX_ITER,
                                 tol: float = DEFAULT_OPT_TOL) -> EntropyEstimate:
    """Upper estimate of inf Ent_{pi_{S,2}}(f) / Ent_{pi_{S,1}}(P^up_{S,1} f) over a link.

    ``lk`` is a :class:`~hdx.complex.Link` or a complex (treated as the link of the empty face).
    """
    cx = getattr(lk, "complex", lk)
    if cx.d < 2:
        raise LevelOutOfRangeError("entropy contraction needs a link of dimension >= 2")
    return _contraction_estimate(up_step(cx, 1).matrix, cx.distribution(2), cx.distribution(1),
                                 restarts, seed, max_iter, tol)


def estimate_global_ratio(cx: PureSimplicialComplex, k: int, restarts: int = DEFAULT_RESTARTS,
                          seed: int = DEFAULT_SEED, max_iter: int = DEFAULT_MAX_ITER,
                          tol: float = DEFAULT_OPT_TOL) -> EntropyEstimate:
    """Upper estimate of inf Ent_{pi_k}(f) / Ent_{pi_{k-1}}(f^(k-1))."""
    if not 1 <= k <= cx.d:
        raise LevelOutOfRangeError(f"need 1 <= k <= {cx.d}")
    return _contraction_estimate(up_step(cx, k - 1).matrix, cx.distribution(k),
                                 cx.distribution(k - 1), restarts, seed, max_iter, tol)


def mlsi_ratio(P: WalkOperator):
    """f -> E_P(f, log f) / Ent_pi(f), evaluated directly from the functionals."""
    return lambda f: entropy_dirichlet(P, f) / relative_entropy(P.stationary, f)


def contraction_ratio(A, pi_hi, pi_lo):
    """f -> Ent_hi(f) / Ent_lo(A f), evaluated directly from the functionals."""
    A = np.asarray(A, float)
    return lambda f: relative_entropy(pi_hi, f) / relative_entropy(pi_lo, A @ f)


def grid_ratio_oracle(ratio, n_grid: int = 200, refine_tol: float = 1e-12) -> float:
    """Minimum of a scale-invariant ratio over nonnegative f on three states.

    Scans the simplex {f >= 0, sum f = 1} on a grid of spacing 1/n_grid,
    boundary included, then polishes the best few points by compass search.
    Points where the ratio is undefined (0/0) are ignored.
    """
    def value(p):
        with np.errstate(all="ignore"):
            v = ratio(np.array(p))
        return v if np.isfinite(v) else math.inf

    pts = []
    for i in range(n_grid + 1):
        for j in range(n_grid + 1 - i):
            p = (i / n_grid, j / n_grid, (n_grid - i - j) / n_grid)
            pts.append((value(p), p))
    pts.sort()
    dirs = [np.array(v, float) for v in ((1, -1, 0), (-1, 1, 0), (1, 0, -1), (-1, 0, 1),
                                         (0, 1, -1), (0, -1, 1))]
    best = pts[0][0]
    for val, p in pts[:5]:
        p, step = np.array(p), 1.0 / n_grid
        while step > refine_tol:
            moved = False
            for d in dirs:
                q = np.clip(p + step * d, 0.0, None)
                q /= q.sum()
                qv = value(q)
                if qv < val:
                    p, val, moved = q, qv, True
                    break
            if not moved:
                step *= 0.5
        best = min(best, val)
    return float(best)


# -- local-to-global entropy verification -------------------------------------------

@dataclass
class MainEntResult:
    k: int
    local_factors: list[float]            # s-hat_j, j = 0..k-2 (worst face per level)
    local_argmin: list[tuple | None]
    v_hat: float | None
    global_ratio: float
    margin: float | None
    mlsi: float | None
    mlsi_bound: float | None
    skipped_faces: list[tuple] = field(default_factory=list)

    def passed(self, tol: float = 1e-6) -> bool:
        ok = self.margin is None or self.margin >= -tol
        if self.mlsi is not None and self.mlsi_bound is not None:
            ok = ok and self.mlsi >= self.mlsi_bound - tol
        return ok


def local_entropy_factors(cx: PureSimplicialComplex, max_level: int,
                          restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED,
                          max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_OPT_TOL,
                          executor=None):
    """Worst-case link estimates s-hat_j over faces of level j, for j = 0..max_level.

    Returns (factors, argmin faces, unbounded faces, per-face estimates).
    """
    tasks = [(j, S) for j in range(max_level + 1) for S in cx.faces[j]]
    links = [link(cx, S) for _, S in tasks]
    args = (restarts, seed, max_iter, tol)
    if executor is None:
        ests = [estimate_entropy_contraction(lk, *args) for lk in links]
    else:
        ests = list(executor.map(_estimate_link_task, [(lk, args) for lk in links]))
    factors, argmin, skipped = [], [], []
    per_face = {}
    for j in range(max_level + 1):
        best, best_S = math.inf, None
        for (jj, S), est in zip(tasks, ests):
            if jj != j:
                continue
            per_face[S] = est.value
            if est.unbounded:
                skipped.append(S)
            elif est.value < best:
                best, best_S = est.value, S
        factors.append(best)
        argmin.append(best_S)
    return factors, argmin, skipped, per_face


def _estimate_link_task(payload):
    lk, args = payload
    return estimate_entropy_contraction(lk, *args)


def verify_main_ent(cx: PureSimplicialComplex, k: int, restarts: int = DEFAULT_RESTARTS,
                    seed: int = DEFAULT_SEED, max_iter: int = DEFAULT_MAX_ITER,
                    tol: float = DEFAULT_OPT_TOL, with_mlsi: bool = True,
                    executor=None, local=None) -> MainEntResult:
    """Compare the global entropy ratio at level k with the recursion fed by local estimates.

    ``local`` may carry the output of :func:`local_entropy_factors` for levels
    up to at least k-2, to share link estimates across several k.
    """
    if not 2 <= k <= cx.d:
        raise LevelOutOfRangeError(f"need 2 <= k <= {cx.d}")
    if local is None:
        local = local_entropy_factors(cx, k - 2, restarts, seed, max_iter, tol, executor)
    factors, argmin, skipped, _ = local
    factors, argmin = factors[: k - 1], argmin[: k - 1]
    glob = estimate_global_ratio(cx, k, restarts, seed, max_iter, tol).value
    v_hat = margin = mlsi = mlsi_bound = None
    if all(math.isfinite(s) for s in factors):
        # estimates are >= 1 up to optimizer noise; the recursion needs s >= 1
        s = np.maximum(np.array(factors), 1.0)
        v_hat = float(solve_recursion(s).v[k - 2])
        margin = glob - v_hat
        if with_mlsi:
            mlsi = estimate_mlsi(down_up(cx, k), restarts, seed, max_iter, tol).value
            mlsi_bound = 1.0 - 1.0 / v_hat
    skipped = [S for S in skipped if len(S) <= k - 2]
    return MainEntResult(k, [float(s) for s in factors], argmin, v_hat, float(glob), margin,
                         mlsi, mlsi_bound, skipped)
