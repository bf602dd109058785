"""Spectra of reversible walks, local spectral profiles and trickling-down checks."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .complex import Face, PureSimplicialComplex, link
from .errors import (
    DegenerateStateSpaceError,
    DimensionError,
    InvalidParameterError,
    LevelOutOfRangeError,
    NotReversibleError,
    PreconditionUnmetError,
)
from .jacobi import jacobi_eigh
from .walks import (
    WalkOperator,
    detailed_balance_residual,
    dirichlet_form,
    down_up,
    local_walk,
    up_down,
    variance,
)

REVERSIBILITY_TOL = 1e-8
DISCONNECTED_TOL = 1e-9


def symmetrize(P: WalkOperator) -> np.ndarray:
    """D^{1/2} P D^{-1/2}, symmetric when P is reversible w.r.t. its stationary law."""
    if not P.is_square or P.stationary is None:
        raise DimensionError("operator must be square with a stationary distribution")
    pi = P.stationary
    if np.any(pi <= 0):
        raise InvalidParameterError("stationary distribution must be strictly positive")
    if P.size < 2:
        raise DegenerateStateSpaceError("state space has a single state")
    res = detailed_balance_residual(P)
    if res > REVERSIBILITY_TOL:
        raise NotReversibleError(f"detailed-balance residual {res:.3g}")
    r = np.sqrt(pi)
    M = r[:, None] * P.matrix / r[None, :]
    return 0.5 * (M + M.T)


def spectrum(P: WalkOperator, method: str = "jacobi") -> np.ndarray:
    """All eigenvalues of a reversible walk, descending."""
    M = symmetrize(P)
    if method == "jacobi":
        return jacobi_eigh(M)[0]
    if method == "numpy":
        return np.linalg.eigvalsh(M)[::-1]
    raise InvalidParameterError(f"unknown eigensolver {method!r}")


def second_eigenvalue(P: WalkOperator, method: str = "jacobi") -> float:
    """Second largest eigenvalue, counted with multiplicity."""
    return float(spectrum(P, method)[1])


def second_eigenvector(P: WalkOperator) -> tuple[float, np.ndarray]:
    """(lambda_2, f) with f an eigenvector of P itself (not of the symmetrization)."""
    w, U = jacobi_eigh(symmetrize(P))
    return float(w[1]), U[:, 1] / np.sqrt(P.stationary)


@dataclass
class SpectralProfile:
    values: list[float]
    argmax: list[Face | None] = field(default_factory=list)
    per_face: list[list[tuple[Face, float]]] = field(default_factory=list)
    degenerate: list[Face] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def clamped(self) -> list[float]:
        """Profile with negative entries raised to 0."""
        return [max(0.0, a) for a in self.values]

    def to_list(self) -> list[float]:
        return [float(a) for a in self.values]


def measure_spectral_profile(cx: PureSimplicialComplex, method: str = "jacobi") -> SpectralProfile:
    """a_k = max over S in C(k) of lambda_2(G_S), for k = 0..d-2."""
    if cx.d < 2:
        raise LevelOutOfRangeError("spectral profile needs d >= 2")
    prof = SpectralProfile([])
    for k in range(cx.d - 1):
        rows = []
        for S in cx.faces[k]:
            G = local_walk(cx, S)
            if G.size < 2:
                warnings.warn(f"link of {list(S)} has fewer than two vertices; skipped")
                prof.degenerate.append(S)
                continue
            rows.append((S, second_eigenvalue(G, method)))
        prof.per_face.append(rows)
        if rows:
            S_max, a = max(rows, key=lambda r: r[1])
            prof.values.append(a)
            prof.argmax.append(S_max)
        else:
            prof.values.append(float("nan"))
            prof.argmax.append(None)
    return prof


def trickling_down_propagate(gamma: float, d: int) -> list[float]:
    """Profile obtained by trickling gamma down from level d-2: a_j = gamma / (1 - (d-j-2) gamma)."""
    if d < 2:
        raise LevelOutOfRangeError("need d >= 2")
    limit = 1.0 / (d - 1)
    if gamma < 0 or gamma > limit or (d == 2 and gamma >= 1):
        raise PreconditionUnmetError(f"gamma={gamma} outside [0, 1/(d-1)] = [0, {limit}]")
    return [gamma / (1.0 - (d - j - 2) * gamma) for j in range(d - 1)]


@dataclass
class TricklingDownRow:
    face: Face
    lambda2: float
    bound: float
    raw_bound: float | None
    status: str              # "pass", "fail" or "disconnected"
    raw_status: str


@dataclass
class TricklingDownResult:
    level: int
    gamma_measured: float
    gamma_used: float
    rows: list[TricklingDownRow]

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.rows)

    @property
    def worst_margin(self) -> float:
        margins = [r.bound - r.lambda2 for r in self.rows if r.status != "disconnected"]
        return min(margins) if margins else float("inf")


def trickling_down_check(cx: PureSimplicialComplex, k: int, gamma: float | None = None,
                         tol: float = 1e-9, method: str = "jacobi") -> TricklingDownResult:
    """Check lambda_2(G_S) <= gamma/(1-gamma) for every connected S in C(k-1).

    ``gamma`` defaults to the measured maximum of lambda_2(G_T) over C(k),
    raised to 0 when negative; the raw-gamma verdict is reported alongside.
    """
    if not 1 <= k <= cx.d - 2:
        raise LevelOutOfRangeError(f"trickling-down check needs 1 <= k <= {cx.d - 2}")
    measured = max(second_eigenvalue(local_walk(cx, T), method) for T in cx.faces[k])
    used = max(0.0, measured) if gamma is None else float(gamma)
    if used < measured - tol:
        raise PreconditionUnmetError(f"gamma={used} is below the measured level-{k} value {measured}")
    if used >= 1.0 - DISCONNECTED_TOL:
        raise PreconditionUnmetError(f"level-{k} local walks have lambda_2 = {measured}, "
                                     "numerically 1 (a disconnected link)")
    bound = used / (1.0 - used)
    raw_bound = measured / (1.0 - measured) if measured < 1.0 else None
    rows = []
    for S in cx.faces[k - 1]:
        lam = second_eigenvalue(local_walk(cx, S), method)
        if lam >= 1.0 - DISCONNECTED_TOL:
            rows.append(TricklingDownRow(S, lam, bound, raw_bound, "disconnected", "disconnected"))
            continue
        status = "pass" if lam <= bound + tol else "fail"
        raw_status = "pass" if raw_bound is not None and lam <= raw_bound + tol else "fail"
        rows.append(TricklingDownRow(S, lam, bound, raw_bound, status, raw_status))
    return TricklingDownResult(k, measured, used, rows)


# -- identities from the variational proof of trickling down ---------------------

@dataclass
class TricklingIdentityResiduals:
    diag_decomposition: float
    operator_decomposition: float
    row_identity: float
    dirichlet_decomposition: float
    eigen_relation_margin: float
    gamma: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def trickling_down_identities(cx: PureSimplicialComplex, rng=None, n_functions: int = 100,
                              method: str = "jacobi") -> TricklingIdentityResiduals:
    """Residuals of the decompositions of D_1, G_empty and its Dirichlet form over vertex links.

    Requires d >= 3 so that every vertex link carries a local walk.
    """
    if cx.d < 3:
        raise LevelOutOfRangeError("proof identities need d >= 3")
    rng = np.random.default_rng(rng)
    n1 = len(cx.faces[1])
    pi1 = cx.distribution(1)
    G0 = local_walk(cx, ())

    D_sum = np.zeros((n1, n1))
    DG_sum = np.zeros((n1, n1))
    row_res = 0.0
    links = []
    gamma = -np.inf
    for v_idx, (v,) in enumerate(cx.faces[1]):
        lk = link(cx, (v,)).complex
        idx = np.array([cx.index_of(u) for u in lk.faces[1]])
        Gv = local_walk(cx, (v,))
        pi_v = Gv.stationary
        D_sum[idx, idx] += pi1[v_idx] * pi_v
        DG_sum[np.ix_(idx, idx)] += pi1[v_idx] * pi_v[:, None] * Gv.matrix
        row = np.zeros(n1)
        row[idx] = pi_v
        row_res = max(row_res, float(np.max(np.abs(G0.matrix[v_idx] - row))))
        links.append((v_idx, idx, Gv))
        if Gv.size >= 2:
            gamma = max(gamma, second_eigenvalue(Gv, method))

    diag_res = float(np.max(np.abs(D_sum - np.diag(pi1))))
    op_res = float(np.max(np.abs(DG_sum / pi1[:, None] - G0.matrix)))

    dir_res = 0.0
    for _ in range(n_functions):
        f = rng.standard_normal(n1)
        lhs = dirichlet_form(G0, f, f)
        rhs = sum(pi1[v_idx] * dirichlet_form(Gv, f[idx], f[idx]) for v_idx, idx, Gv in links)
        dir_res = max(dir_res, float(abs(lhs - rhs) / max(abs(lhs), 1e-30)))

    lams = spectrum(G0, method)
    margin = float(np.min((1.0 - lams) - (1.0 - gamma) * (1.0 - lams ** 2)))
    return TricklingIdentityResiduals(diag_res, op_res, row_res, dir_res, margin, float(gamma))


# -- variational and structural spectral checks --------------------------------

def poincare_check(P: WalkOperator, rng=None, n_functions: int = 1000) -> tuple[float, float]:
    """Return (|E(f2,f2)/Var(f2) - (1 - lambda_2)|, min over random f of ratio - (1 - lambda_2)).

    ``f2`` is the second eigenvector; the second value should be >= 0.
    """
    rng = np.random.default_rng(rng)
    lam2, f2 = second_eigenvector(P)
    gap = 1.0 - lam2
    eig_err = abs(dirichlet_form(P, f2, f2) / variance(P.stationary, f2) - gap)
    worst = np.inf
    for _ in range(n_functions):
        f = rng.standard_normal(P.size)
        var = variance(P.stationary, f)
        if var > 0:
            worst = min(worst, dirichlet_form(P, f, f) / var - gap)
    return float(eig_err), float(worst)


def cospectral_residual(cx: PureSimplicialComplex, k: int, method: str = "jacobi") -> float:
    """Distance between the spectra of RW^up_k and RW^down_{k+1}, zero-padded."""
    a = spectrum(up_down(cx, k), method) if len(cx.faces[k]) >= 2 else np.ones(1)
    b = spectrum(down_up(cx, k + 1), method) if len(cx.faces[k + 1]) >= 2 else np.ones(1)
    n = max(len(a), len(b))
    a = np.sort(np.pad(a, (0, n - len(a))))
    b = np.sort(np.pad(b, (0, n - len(b))))
    return float(np.max(np.abs(a - b)))


def symmetrization_residual(P: WalkOperator) -> float:
    """Distance between the eigenvalues of P (general solver) and of its symmetrization."""
    general = np.sort(np.linalg.eigvals(P.matrix).real)
    sym = np.sort(spectrum(P))
    return float(np.max(np.abs(general - sym)))
