"""Command-line entry point: ``hdx analyze | bounds | entropy | export-operators``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .analysis import SUITES, Options, run_analyze
from .complex import (
    generate_complete_complex,
    generate_graphic_matroid_bases,
    generate_random_complex,
    load_instance,
)
from .contraction import is_admissible, solve_profile, trickling_profile
from .entropy import DEFAULT_MAX_ITER, DEFAULT_OPT_TOL, DEFAULT_RESTARTS
from .errors import HDXError
from .report import Tolerances, emit_report
from .spectral import measure_spectral_profile
from .walks import down_step, down_up, up_down, up_step

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_generator(spec: str):
    """Instance from a generator spec.

    ``complete:n=6,d=4``, ``matroid:edges=0-1;1-2;0-2`` or
    ``random:n=7,d=3,seed=1[,density=0.5]``.
    """
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"bad generator parameter {item!r} in {spec!r}")
        params[key.strip()] = value.strip()
    try:
        if kind == "complete":
            return generate_complete_complex(int(params["n"]), int(params["d"]))
        if kind == "matroid":
            edges = [tuple(int(v) for v in e.split("-")) for e in params["edges"].split(";") if e]
            return generate_graphic_matroid_bases(edges)
        if kind == "random":
            return generate_random_complex(int(params["n"]), int(params["d"]),
                                           int(params.get("seed", 0)),
                                           float(params.get("density", 0.5)))
    except KeyError as exc:
        raise UsageError(f"generator {kind!r} needs parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, HDXError):
            raise
        raise UsageError(f"bad generator spec {spec!r}: {exc}") from None
    raise UsageError(f"unknown generator {kind!r} (use complete, matroid or random)")


def load_from_args(args):
    if args.input and args.generate:
        raise UsageError("give either --input or --generate, not both")
    if args.input:
        return load_instance(args.input), str(args.input)
    if args.generate:
        return parse_generator(args.generate), f"generate:{args.generate}"
    raise UsageError("an instance is required: --input FILE or --generate SPEC")


def default_seed() -> int:
    env = os.environ.get("HDX_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"HDX_SEED={env!r} is not an integer") from None


def _add_instance_args(p):
    p.add_argument("--input", type=Path, help="instance JSON file")
    p.add_argument("--generate", help="generator spec, e.g. complete:n=6,d=4")


def _add_run_args(p, default_checks="all"):
    p.add_argument("--checks", default=default_checks,
                   help=f"'all' or a comma list of {','.join(SUITES)}")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default $HDX_SEED or 42)")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--opt-tol", type=float, default=DEFAULT_OPT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--n-functions", type=int, default=1000,
                   help="random test functions per identity check")
    p.add_argument("--eq-tol", type=float, default=1e-10)
    p.add_argument("--spec-tol", type=float, default=1e-9,
                   help="tolerance for eigenvalue comparisons")
    p.add_argument("--opt-margin", type=float, default=1e-6)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run verification suites on an instance")
    _add_instance_args(p)
    _add_run_args(p)

    p = sub.add_parser("entropy", help="entropy suite only (optimizer heavy)")
    _add_instance_args(p)
    _add_run_args(p, default_checks="entropy")

    p = sub.add_parser("bounds", help="contraction bounds for a spectral profile")
    p.add_argument("--profile", help="JSON array a_0..a_{d-2}")
    p.add_argument("--trickle", type=float, metavar="GAMMA",
                   help="use the profile trickled down from GAMMA (needs --d)")
    p.add_argument("--d", type=int)
    p.add_argument("--k-max", type=int, default=None)
    _add_instance_args(p)

    p = sub.add_parser("export-operators", help="dump walk operators as CSV")
    _add_instance_args(p)
    p.add_argument("--out-dir", type=Path, required=True)
    return parser


def options_from_args(args) -> Options:
    if args.checks == "all":
        suites = SUITES
    else:
        suites = tuple(s.strip() for s in args.checks.split(",") if s.strip())
        unknown = set(suites) - set(SUITES)
        if unknown:
            raise UsageError(f"unknown check suites: {', '.join(sorted(unknown))}")
    seed = args.seed if args.seed is not None else default_seed()
    if args.restarts < 1 or args.n_functions < 1 or args.jobs < 1:
        raise UsageError("--restarts, --n-functions and --jobs must be positive")
    return Options(seed=seed, restarts=args.restarts, n_functions=args.n_functions,
                   max_iter=args.max_iter, opt_tol=args.opt_tol, jobs=args.jobs, suites=suites,
                   tol=Tolerances(eq=args.eq_tol, spectral=args.spec_tol, opt_margin=args.opt_margin))


def cmd_analyze(args) -> int:
    cx, source = load_from_args(args)
    report = run_analyze(cx, source, options_from_args(args))
    text = emit_report(report, args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def bounds_table(a, k_max=None) -> dict:
    a = [float(x) for x in a]
    sol = solve_profile(a)
    d = len(a) + 1
    top = d if k_max is None else min(k_max, d)
    ok, where = is_admissible(a)
    rows = [{"k": k, "ours": float(sol.our_bounds[k - 2]), "al": float(sol.al_bounds[k - 2]),
             "gap": float(sol.our_bounds[k - 2] - sol.al_bounds[k - 2])}
            for k in range(2, top + 1)]
    return {"profile": a, "d": d, "admissible": ok, "first_violation": where,
            "closed_form_singular": sol.singular_closed_form, "rows": rows,
            "truncated_at_d": k_max is not None and k_max > d}


def cmd_bounds(args) -> int:
    sources = [args.profile is not None, args.trickle is not None,
               bool(args.input or args.generate)]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --profile, --trickle, --input/--generate")
    if args.profile is not None:
        try:
            a = json.loads(args.profile)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--profile is not valid JSON: {exc.msg}") from None
        if not isinstance(a, list) or not a or not all(isinstance(x, (int, float)) for x in a):
            raise UsageError("--profile must be a nonempty JSON array of numbers")
    elif args.trickle is not None:
        if args.d is None:
            raise UsageError("--trickle needs --d")
        a = trickling_profile(args.trickle, args.d).tolist()
    else:
        cx, _ = load_from_args(args)
        a = measure_spectral_profile(cx).to_list()
    table = bounds_table(a, args.k_max)
    lines = [f"profile: {json.dumps(table['profile'])}  admissible: {table['admissible']}"]
    if table["truncated_at_d"]:
        lines.append(f"note: --k-max {args.k_max} exceeds d = {table['d']}; table stops at k = d")
    lines.append(f"{'k':>3}  {'recursion':>14}  {'product':>14}  {'gap':>12}")
    for r in table["rows"]:
        lines.append(f"{r['k']:>3}  {r['ours']:>14.10f}  {r['al']:>14.10f}  {r['gap']:>12.3e}")
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.write(json.dumps(table) + "\n")
    return EXIT_OK


def _face_label(face) -> str:
    return "{" + ",".join(str(e) for e in face) + "}"


def write_operator_csv(op, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["face"] + [_face_label(f) for f in op.target_faces])
        for face, row in zip(op.source_faces, op.matrix):
            w.writerow([_face_label(face)] + [repr(float(x)) for x in row])


def cmd_export(args) -> int:
    cx, _ = load_from_args(args)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    ops = [up_step(cx, k) for k in range(cx.d)] + [down_step(cx, k) for k in range(1, cx.d + 1)]
    ops += [up_down(cx, k) for k in range(cx.d)] + [down_up(cx, k) for k in range(1, cx.d + 1)]
    for op in ops:
        write_operator_csv(op, args.out_dir / f"{op.name}.csv")
    written = [f"{op.name}.csv" for op in ops]
    if cx.d >= 2:
        (args.out_dir / "profile.json").write_text(
            json.dumps(measure_spectral_profile(cx).to_list()))
        written.append("profile.json")
    sys.stdout.write("\n".join(str(args.out_dir / w) for w in written) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"analyze": cmd_analyze, "entropy": cmd_analyze, "bounds": cmd_bounds,
                "export-operators": cmd_export}
    try:
        return handlers[args.command](args)
    except (UsageError, HDXError, OSError) as exc:
        print(f"hdx: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
