"""Verification suites run by ``hdx analyze``.

Each suite returns a list of :class:`~hdx.report.CheckRecord`.  A failing
check never aborts the run; it is recorded with status ``fail``.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .complex import (
    PureSimplicialComplex,
    level_distribution_brute_force,
    link_consistency_residual,
    mixture_identity_residual,
    weight_recursion_residual,
)
from .contraction import (
    al_bound,
    check_profile_property,
    is_admissible,
    solve_profile,
    trickling_profile,
    trickling_profile_bound,
)
from .entropy import (
    DEFAULT_MAX_ITER,
    DEFAULT_OPT_TOL,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    entropy_decomposition_sides,
    entropy_down_inequality,
    entropy_up_inequality,
    local_entropy_factors,
    relative_entropy,
    verify_main_ent,
)
from .errors import PreconditionUnmetError
from .report import CheckRecord, Tolerances, VerificationReport
from .spectral import (
    cospectral_residual,
    measure_spectral_profile,
    poincare_check,
    second_eigenvalue,
    symmetrization_residual,
    trickling_down_check,
    trickling_down_identities,
)
from .walks import (
    detailed_balance_residual,
    down_step,
    down_up,
    project_down,
    relative_residual,
    row_sum_residual,
    stationarity_residual,
    up_down,
    up_step,
    variance_decomposition_sides,
    variance_down_identity,
    variance_up_identity,
)

SUITES = ("structure", "walks", "spectral", "bounds", "entropy")
BRUTE_FORCE_LIMIT = 10_000


@dataclass
class Options:
    seed: int = DEFAULT_SEED
    restarts: int = DEFAULT_RESTARTS
    n_functions: int = 1000
    max_iter: int = DEFAULT_MAX_ITER
    opt_tol: float = DEFAULT_OPT_TOL
    jobs: int = 1
    suites: tuple[str, ...] = SUITES
    tol: Tolerances = field(default_factory=Tolerances)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def residual_check(id, suite, anchor, residual, tol, **details) -> CheckRecord:
    return CheckRecord(id, suite, anchor, float(residual), None, float(tol - residual), tol,
                       _status(residual <= tol), details)


def upper_check(id, suite, anchor, measured, bound, tol, **details) -> CheckRecord:
    """measured <= bound + tol."""
    return CheckRecord(id, suite, anchor, float(measured), float(bound), float(bound - measured),
                       tol, _status(measured <= bound + tol), details)


def lower_check(id, suite, anchor, measured, bound, tol, **details) -> CheckRecord:
    """measured >= bound - tol."""
    return CheckRecord(id, suite, anchor, float(measured), float(bound), float(measured - bound),
                       tol, _status(measured >= bound - tol), details)


def skipped(id, suite, anchor, reason) -> CheckRecord:
    return CheckRecord(id, suite, anchor, None, status="skipped", details={"reason": reason})


# -- structure ----------------------------------------------------------------------

def structure_suite(cx: PureSimplicialComplex, opt: Options) -> list[CheckRecord]:
    t = opt.tol
    out = [residual_check("structure.weight_recursion", "structure",
                          "recursive weight identity w(S) = sum of covering weights",
                          weight_recursion_residual(cx), t.exact)]
    if len(cx.faces[cx.d]) <= BRUTE_FORCE_LIMIT:
        worst = max(float(np.max(np.abs(cx.distribution(k) - level_distribution_brute_force(cx, k))))
                    for k in range(cx.d + 1))
        out.append(residual_check("structure.marginal_consistency", "structure",
                                  "pi_k from weights equals direct summation over top faces",
                                  worst, t.exact))
    else:
        out.append(skipped("structure.marginal_consistency", "structure",
                           "pi_k by direct summation", "too many top faces for brute force"))

    rng = np.random.default_rng([opt.seed, 0])
    all_faces = [S for level in cx.faces for S in level]
    picks = rng.choice(len(all_faces), size=min(10, len(all_faces)), replace=False)
    worst = max(link_consistency_residual(cx, all_faces[i]) for i in sorted(picks))
    out.append(residual_check("structure.link_consistency", "structure",
                              "link distributions proportional to global ones", worst, t.exact,
                              faces=[list(all_faces[i]) for i in sorted(picks)]))
    for k in range(2, cx.d + 1):
        out.append(residual_check(f"structure.mixture_identity.k={k}", "structure",
                                  "pi_k(I) = sum_S pi_{k-2}(S) pi_{S,2}(I - S)",
                                  mixture_identity_residual(cx, k), t.exact))
    return out


# -- walks ---------------------------------------------------------------------------

def walks_suite(cx: PureSimplicialComplex, opt: Options) -> list[CheckRecord]:
    t = opt.tol
    out = []
    half = [up_step(cx, k) for k in range(cx.d)] + [down_step(cx, k) for k in range(1, cx.d + 1)]
    square = [down_up(cx, k) for k in range(1, cx.d + 1)] + [up_down(cx, k) for k in range(cx.d)]
    out.append(residual_check("walks.row_stochastic", "walks", "operators are row-stochastic",
                              max(row_sum_residual(P) for P in half + square), t.exact))
    out.append(residual_check("walks.detailed_balance", "walks",
                              "RW^up_k and RW^down_k reversible w.r.t. pi_k",
                              max(detailed_balance_residual(P) for P in square), t.exact))
    out.append(residual_check("walks.stationarity", "walks", "pi_k RW_k = pi_k",
                              max(stationarity_residual(P) for P in square), t.exact))
    for k in range(cx.d):
        out.append(residual_check(f"walks.cospectral.k={k}", "walks",
                                  "RW^up_k and RW^down_{k+1} share nonzero spectra",
                                  cospectral_residual(cx, k), t.spectral))

    rng = np.random.default_rng([opt.seed, 1])
    for k in range(1, cx.d + 1):
        n_k, n_lo = len(cx.faces[k]), len(cx.faces[k - 1])
        down_res = up_res = 0.0
        for _ in range(opt.n_functions):
            down_res = max(down_res, relative_residual(*variance_down_identity(
                cx, k, rng.standard_normal(n_k))))
            if n_lo >= 2:
                up_res = max(up_res, relative_residual(*variance_up_identity(
                    cx, k, rng.standard_normal(n_lo))))
        out.append(residual_check(f"walks.dirichlet_equals_variance_drop.k={k}", "walks",
                                  "E_{RW^down_k}(f,f) = Var_k f - Var_{k-1} f^(k-1)",
                                  down_res, t.eq, functions=opt.n_functions))
        if n_lo >= 2:
            out.append(residual_check(f"walks.dirichlet_equals_variance_gain_up.k={k}", "walks",
                                      "E_{RW^up_{k-1}}(g,g) = Var_{k-1} g - Var_k P^down_k g",
                                      up_res, t.eq, functions=opt.n_functions))
        else:
            out.append(skipped(f"walks.dirichlet_equals_variance_gain_up.k={k}", "walks",
                               "up-walk variance identity", "single-state level"))

    for k in range(1, cx.d + 1):
        P = down_up(cx, k)
        if P.size < 2:
            out.append(skipped(f"walks.poincare.k={k}", "walks", "Poincare inequality",
                               "single-state level"))
            continue
        eig_err, worst = poincare_check(P, rng, opt.n_functions)
        rec = residual_check(f"walks.poincare.k={k}", "walks",
                             "1 - lambda_2 = inf E(f,f)/Var(f)", eig_err, t.spectral,
                             random_min_margin=worst)
        if worst < -t.spectral:
            rec.status = "fail"
        out.append(rec)

    for k in range(2, cx.d + 1):
        res = 0.0
        for _ in range(opt.n_functions):
            res = max(res, relative_residual(*variance_decomposition_sides(
                cx, k, rng.standard_normal(len(cx.faces[k])))))
        out.append(residual_check(f"walks.var_decomposition.k={k}", "walks",
                                  "variance decomposition over links of C(k-2)", res, t.eq,
                                  functions=opt.n_functions))
    return out


# -- spectral ------------------------------------------------------------------------

def spectral_suite(cx: PureSimplicialComplex, opt: Options, profile=None) -> list[CheckRecord]:
    t = opt.tol
    out = []
    if cx.d < 2:
        return [skipped("spectral.profile", "spectral", "local spectral profile", "d < 2")]
    profile = profile or measure_spectral_profile(cx)
    out.append(CheckRecord("spectral.profile", "spectral", "a_k = max_S lambda_2(G_S)",
                           profile.to_list(), details={
                               "argmax": [list(S) if S is not None else None
                                          for S in profile.argmax],
                               "degenerate": [list(S) for S in profile.degenerate]}))
    for k in range(1, cx.d + 1):
        P = down_up(cx, k)
        if P.size >= 2:
            out.append(residual_check(f"spectral.symmetrization.k={k}", "spectral",
                                      "spectrum of P equals that of D^1/2 P D^-1/2",
                                      symmetrization_residual(P), t.eq))
    for k in range(1, cx.d - 1):
        anchor = "trickling down: lambda_2(G_S) <= gamma/(1-gamma)"
        try:
            res = trickling_down_check(cx, k, tol=t.spectral)
        except PreconditionUnmetError as exc:
            out.append(skipped(f"spectral.trickling_down.k={k}", "spectral", anchor, str(exc)))
            continue
        connected = [r for r in res.rows if r.status != "disconnected"]
        if not connected:
            out.append(skipped(f"spectral.trickling_down.k={k}", "spectral", anchor,
                               "all level-(k-1) links disconnected"))
            continue
        lam = max(r.lambda2 for r in connected)
        rec = upper_check(f"spectral.trickling_down.k={k}", "spectral", anchor, lam,
                          connected[0].bound, t.spectral, gamma_measured=res.gamma_measured,
                          gamma_used=res.gamma_used,
                          raw_bound=connected[0].raw_bound,
                          raw_pass=all(r.raw_status == "pass" for r in connected),
                          disconnected=[list(r.face) for r in res.rows
                                        if r.status == "disconnected"])
        out.append(rec)
    if cx.d >= 3:
        ids = trickling_down_identities(cx, np.random.default_rng([opt.seed, 3]),
                                        min(opt.n_functions, 200))
        out.append(residual_check("spectral.identity.diag", "spectral",
                                  "D_1 = sum_v pi_1(v) D_{v,1} (extended by zeros)",
                                  ids.diag_decomposition, t.exact))
        out.append(residual_check("spectral.identity.operator", "spectral",
                                  "G_0 = D_1^-1 sum_v pi_1(v) D_{v,1} G_v",
                                  ids.operator_decomposition, t.exact))
        out.append(residual_check("spectral.identity.row", "spectral",
                                  "row v of G_0 equals pi_{v,1}", ids.row_identity, t.exact))
        out.append(residual_check("spectral.identity.dirichlet", "spectral",
                                  "E_{G_0}(f,f) = sum_v pi_1(v) E_{G_v}(f_v,f_v)",
                                  ids.dirichlet_decomposition, t.eq))
        out.append(lower_check("spectral.identity.eigen_relation", "spectral",
                               "(1 - lambda_i) >= (1 - gamma)(1 - lambda_i^2)",
                               ids.eigen_relation_margin, 0.0, t.spectral, gamma=ids.gamma))
    return out


# -- bounds --------------------------------------------------------------------------

def bounds_suite(cx: PureSimplicialComplex, opt: Options, profile=None) -> list[CheckRecord]:
    t = opt.tol
    out = []
    if cx.d < 2:
        return [skipped("bounds.variance_recursion", "bounds", "local-to-global variance bound", "d < 2")]
    profile = profile or measure_spectral_profile(cx)
    a = np.array(profile.to_list())
    if np.any(a >= 1) or np.any(~np.isfinite(a)):
        return [skipped("bounds.variance_recursion", "bounds", "local-to-global variance bound",
                        "some link is disconnected (a_k >= 1)")]
    sol = solve_profile(a)
    clamped = solve_profile(profile.clamped())
    for k in range(2, cx.d + 1):
        lam_down = second_eigenvalue(down_up(cx, k))
        lam_up = second_eigenvalue(up_down(cx, k - 1))
        out.append(residual_check(f"bounds.down_equals_up.k={k}", "bounds",
                                  "lambda_2(RW^down_k) = lambda_2(RW^up_{k-1})",
                                  abs(lam_down - lam_up), t.eq))
        out.append(upper_check(f"bounds.variance_recursion.k={k}", "bounds",
                               "lambda_2(RW^down_k) <= 1/v_{k-2}", lam_down,
                               sol.our_bound(k), t.spectral))
        out.append(upper_check(f"bounds.product.k={k}", "bounds",
                               "lambda_2(RW^down_k) <= 1 - (1/k) prod (1 - a_i)", lam_down,
                               al_bound(a, k), t.spectral))
        out.append(upper_check(f"bounds.variance_recursion_clamped.k={k}", "bounds",
                               "lambda_2(RW^down_k) <= 1/v_{k-2} for max(a, 0)", lam_down,
                               clamped.our_bound(k), t.spectral))
    if sol.v_closed is not None:
        rel = float(np.max(np.abs(sol.v - sol.v_closed) / sol.v))
        out.append(residual_check("bounds.closed_form", "bounds",
                                  "recursion equals closed form 1 + 1/sum S_i^k", rel, 1e-11))
    ok, where = is_admissible(a)
    if ok:
        gaps = [float(o - b) for o, b in zip(sol.our_bounds, sol.al_bounds)]
        out.append(lower_check("bounds.comparison", "bounds", "recursion bound >= product bound",
                               min(gaps), 0.0, t.exact, gaps=gaps))
        if cx.d >= 3:
            worst = min(check_profile_property(a, k) for k in range(1, cx.d - 1))
            out.append(lower_check("bounds.profile_property", "bounds",
                                   "a_k (k+1) + prod_{i<=k} (1 - a_i) >= 1", worst, 0.0, t.exact))
    else:
        out.append(skipped("bounds.comparison", "bounds", "recursion bound >= product bound",
                           f"measured profile not admissible at index {where}"))
    if cx.d >= 3:
        gamma = 1.0 / cx.d
        prop = solve_profile(trickling_profile(gamma, cx.d))
        err = max(max(abs(trickling_profile_bound(gamma, cx.d, k) - (1 - 1 / k ** 2)),
                      abs(prop.our_bound(k) - (1 - 1 / k ** 2)))
                  for k in range(2, cx.d + 1))
        out.append(residual_check("bounds.one_minus_inverse_k_squared", "bounds",
                                  "trickled gamma = 1/d profile gives 1 - 1/k^2", err, t.exact))
    return out


# -- entropy -------------------------------------------------------------------------

def entropy_suite(cx: PureSimplicialComplex, opt: Options) -> list[CheckRecord]:
    t = opt.tol
    out = []
    rng = np.random.default_rng([opt.seed, 2])
    for k in range(1, cx.d + 1):
        n_k, n_lo = len(cx.faces[k]), len(cx.faces[k - 1])
        worst_down = worst_up = worst_dp = math.inf
        for _ in range(opt.n_functions):
            f = rng.random(n_k)
            lhs, rhs = entropy_down_inequality(cx, k, f)
            worst_down = min(worst_down, lhs - rhs)
            worst_dp = min(worst_dp, relative_entropy(cx.distribution(k), f)
                           - relative_entropy(cx.distribution(k - 1), project_down(cx, f, k, k - 1)))
            lhs, rhs = entropy_up_inequality(cx, k, rng.random(n_lo))
            worst_up = min(worst_up, lhs - rhs)
        out.append(lower_check(f"entropy.ineq_down.k={k}", "entropy",
                               "E_{RW^down_k}(f, log f) >= Ent_k f - Ent_{k-1} f^(k-1)",
                               worst_down, 0.0, t.eq))
        out.append(lower_check(f"entropy.ineq_up.k={k}", "entropy",
                               "E_{RW^up_{k-1}}(g, log g) >= Ent_{k-1} g - Ent_k P^down_k g",
                               worst_up, 0.0, t.eq))
        out.append(lower_check(f"entropy.data_processing.k={k}", "entropy",
                               "Ent_{k-1} f^(k-1) <= Ent_k f", worst_dp, 0.0, t.eq))
    for k in range(2, cx.d + 1):
        res = 0.0
        for _ in range(opt.n_functions):
            res = max(res, relative_residual(*entropy_decomposition_sides(
                cx, k, rng.random(len(cx.faces[k])))))
        out.append(residual_check(f"entropy.decomposition.k={k}", "entropy",
                                  "entropy decomposition over links of C(k-2)", res, t.eq))
    if cx.d >= 2:
        out.extend(local_to_global_entropy_checks(cx, opt))
    return out


def local_to_global_entropy_checks(cx: PureSimplicialComplex, opt: Options) -> list[CheckRecord]:
    t = opt.tol
    out = []
    args = (opt.restarts, opt.seed, opt.max_iter, opt.opt_tol)
    if opt.jobs > 1:
        with ProcessPoolExecutor(opt.jobs) as pool:
            local = local_entropy_factors(cx, cx.d - 2, *args, executor=pool)
    else:
        local = local_entropy_factors(cx, cx.d - 2, *args)
    anchor = "Ent_k f >= v_{k-2} Ent_{k-1} f^(k-1) with v from local factors"
    for k in range(2, cx.d + 1):
        start = time.perf_counter()
        res = verify_main_ent(cx, k, *args, local=local)
        details = {"local_factors": res.local_factors,
                   "local_argmin": [list(S) if S is not None else None for S in res.local_argmin],
                   "unbounded_faces": [list(S) for S in res.skipped_faces],
                   "estimate_direction": "upper"}
        if res.v_hat is None:
            out.append(skipped(f"entropy.local_to_global.k={k}", "entropy", anchor,
                               "a level has only degenerate links"))
            continue
        rec = lower_check(f"entropy.local_to_global.k={k}", "entropy", anchor, res.global_ratio,
                          res.v_hat, t.opt_margin, **details)
        rec.wall_time = time.perf_counter() - start
        out.append(rec)
        out.append(lower_check(f"entropy.mlsi_from_local.k={k}", "entropy",
                               "rho(RW^down_k) >= 1 - 1/v_{k-2}", res.mlsi, res.mlsi_bound,
                               t.opt_margin, estimate_direction="upper"))
        if k == 2:
            out.append(residual_check("entropy.k2_collapse", "entropy",
                                      "global ratio at k=2 equals the local factor at the empty face",
                                      abs(res.global_ratio - res.local_factors[0]), t.opt_margin))
    return out


# -- driver --------------------------------------------------------------------------

def instance_descriptor(cx: PureSimplicialComplex, source: str) -> dict:
    return {"source": source, "n": cx.ground_set_size, "d": cx.d,
            "face_counts": cx.face_counts()}


def run_analyze(cx: PureSimplicialComplex, source: str = "<memory>",
                options: Options | None = None) -> VerificationReport:
    opt = options or Options()
    report = VerificationReport(
        instance_descriptor(cx, source),
        {"seed": opt.seed, "restarts": opt.restarts, "n_functions": opt.n_functions,
         "max_iter": opt.max_iter, "opt_tol": opt.opt_tol, "suites": list(opt.suites),
         "tolerances": opt.tol.__dict__.copy(), "tool_version": __version__})
    t0 = time.perf_counter()
    profile = measure_spectral_profile(cx) if cx.d >= 2 and (
        "spectral" in opt.suites or "bounds" in opt.suites) else None
    runners = {
        "structure": lambda: structure_suite(cx, opt),
        "walks": lambda: walks_suite(cx, opt),
        "spectral": lambda: spectral_suite(cx, opt, profile),
        "bounds": lambda: bounds_suite(cx, opt, profile),
        "entropy": lambda: entropy_suite(cx, opt),
    }
    for name in SUITES:
        if name not in opt.suites:
            continue
        start = time.perf_counter()
        records = runners[name]()
        elapsed = time.perf_counter() - start
        for rec in records:
            if not rec.wall_time:
                rec.wall_time = elapsed / max(len(records), 1)
        report.checks.extend(records)
    report.total_wall_time = time.perf_counter() - t0
    return report
