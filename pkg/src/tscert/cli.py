"""Command-line front end.

Subcommands: check, lambda-max, complexity, simulate, verify, table1.

Exit codes: 0 feasible/success, 1 infeasible or failed verification,
2 usage or input error, 3 numerical failure. Primary output is
deterministic and goes to stdout; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .analysis import DEFAULT_HI, DEFAULT_LO, DEFAULT_TOL, complexity_report, lambda_max_search
from .conditions import Certificate, Method, build_condition, load_certificate, save_certificate
from .errors import EigenConvergenceError, ExprError, LinAlgError, ModelError, SolverError
from .jsonio import dumps
from .model import load_bundle
from .sdp import SolverConfig, Verdict, solve_feasibility
from .verify import check_lyapunov_decrease, lyapunov_values, simulate, verify_certificate, write_trajectory_csv

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# lambda* comparison values for the bundled two-rule benchmark, as published.
_TABLE1_PUBLISHED = (
    ("quadratic", None, 3.8269),
    ("augmented-slack", None, 5.4749),
    ("tanaka", 2.0, 0.0061),
    ("tanaka", 1.0, 0.0061),
    ("tanaka", 0.5, 0.0061),
    ("tanaka", 0.1, 41.8152),
    ("mozelli", 2.0, 3.8269),
    ("mozelli", 1.0, 6.7810),
    ("mozelli", 0.5, 12.9333),
    ("mozelli", 0.1, 53.0457),
)
_LINE_INTEGRAL_PUBLISHED = 7.7454


def _floats(text: str, flag: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ModelError(f"{flag} expects comma-separated reals, got {text!r}") from exc


def _method(args) -> Method:
    phi = _floats(args.phi, "--phi") if args.phi else None
    return Method(args.method, phi)


def _fmt(x: float) -> str:
    return format(x, ".10g")


def cmd_check(args) -> int:
    bundle = load_bundle(args.model)
    method = _method(args)
    problem = build_condition(bundle.model, method, args.lam, bundle.jacobian)
    outcome = solve_feasibility(problem, SolverConfig())
    print(f"method: {method.label()}")
    print(f"lambda: {_fmt(args.lam)}")
    print(f"verdict: {outcome.verdict.value}")
    if outcome.t_star is not None:
        print(f"t* = {_fmt(outcome.t_star)}  (threshold {_fmt(outcome.threshold)})")
    if outcome.message:
        print(f"note: {outcome.message}")
    if outcome.verdict is Verdict.STRICTLY_FEASIBLE:
        margin = min(outcome.margins)
        print(f"min verified margin = {_fmt(margin)}")
        if args.out:
            cert = Certificate(method, args.lam, margin, outcome.assignment)
            save_certificate(cert, args.out)
            print(f"certificate written: {args.out}")
        return EXIT_OK
    if outcome.verdict is Verdict.INFEASIBLE:
        return EXIT_NEGATIVE
    raise SolverError(outcome.message or "solver failed")


def cmd_lambda_max(args) -> int:
    bundle = load_bundle(args.model)
    method = _method(args)
    bracket = _floats(args.range, "--range")
    if len(bracket) != 2:
        raise ModelError(f"--range expects L,U, got {args.range!r}")
    lo, hi = bracket
    result = lambda_max_search(bundle.model, method, bundle.jacobian, lo=lo, hi=hi, tol=args.tol)
    if args.history:
        with open(args.history, "w") as fh:
            for rec in result.history:
                fh.write(dumps({"lambda": rec.lam, "verdict": rec.verdict, "t_star": rec.t_star}, indent=None) + "\n")
    print(f"method: {method.label()}")
    if not result.found:
        print(f"no feasible lambda in [{_fmt(lo)}, {_fmt(hi)}]")
        return EXIT_NEGATIVE
    blo, bhi = result.bracket
    print(f"lambda* = {_fmt(result.lambda_star)}")
    print(f"bracket = [{_fmt(blo)}, {_fmt(bhi)}]  probes = {result.iterations}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    rows = complexity_report(args.n, args.r)
    if args.format == "csv":
        print("method,N_d,N_l,cost,log_cost")
        for row in rows:
            print(f"{row.method},{row.n_d},{row.n_l},{row.cost},{_fmt(row.log_cost)}")
        return EXIT_OK
    print(f"problem sizes for n = {args.n}, r = {args.r}")
    header = f"{'method':<18} {'N_d':>6} {'N_l':>6} {'N_d^3*N_l':>14} {'ln(N_d^2*N_l)':>14}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(f"{row.method:<18} {row.n_d:>6} {row.n_l:>6} {row.cost:>14} {row.log_cost:>14.6f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    bundle = load_bundle(args.model)
    if bundle.memberships is None:
        raise ModelError("model file has no membership expressions; cannot simulate")
    x0 = _floats(args.x0, "--x0")
    traj = simulate(bundle.model, bundle.memberships, args.lam, x0, args.t_end, args.dt)
    lines = [
        f"# exit: {traj.exit_flag}",
        f"# final-norm = {_fmt(float(np.linalg.norm(traj.x[-1])))}",
    ]
    v = None
    if args.certificate:
        cert = load_certificate(args.certificate)
        rep = check_lyapunov_decrease(cert, bundle.memberships, traj)
        v = rep.v
        lines.append(f"# certificate: {cert.method.label()} at lambda = {_fmt(cert.lam)}")
        lines.append(f"# {rep.violations} decrease violations (worst dV = {_fmt(rep.worst_delta)})")
    csv = write_trajectory_csv(traj, v)
    out = "\n".join(lines) + "\n" + csv
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
        print(f"trajectory written: {args.out}")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    bundle = load_bundle(args.model)
    cert = load_certificate(args.certificate)
    try:
        report = verify_certificate(cert, bundle.model, bundle.jacobian)
    except LinAlgError as exc:
        raise ModelError(f"certificate does not match the model: {exc}") from exc
    problem = build_condition(bundle.model, cert.method, cert.lam, bundle.jacobian)
    print(f"method: {cert.method.label()}  lambda: {_fmt(cert.lam)}")
    width = max(len(c.label) for c in problem.constraints)
    for c, margin in zip(problem.constraints, report.margins):
        print(f"{c.label:<{width}}  {_fmt(margin)}")
    print(f"threshold = {_fmt(report.threshold)}")
    if report.margins_ok:
        print("verdict: pass")
        return EXIT_OK
    print("verdict: FAIL")
    return EXIT_NEGATIVE


def cmd_table1(args) -> int:
    bundle = load_bundle(args.model)
    if bundle.jacobian is None or bundle.memberships is None:
        raise ModelError("comparison table needs membership expressions and jacobian vertices")
    width = 22
    print(f"{'method':<{width}} {'computed lambda*':>18} {'published':>10}")
    for kind, phi, published in _TABLE1_PUBLISHED:
        method = Method(kind, None if phi is None else (phi,))
        t0 = time.perf_counter()
        result = lambda_max_search(bundle.model, method, bundle.jacobian, tol=args.tol)
        print(f"[{method.label()}: {time.perf_counter() - t0:.1f}s]", file=sys.stderr)
        computed = _fmt(result.lambda_star) if result.found else "no feasible lambda"
        print(f"{method.label():<{width}} {computed:>18} {published:>10}")
    print(f"{'line-integral':<{width}} {'not computed':>18} {_LINE_INTEGRAL_PUBLISHED:>10}")
    print()
    print("note: tanaka with phi >= 0.5 is infeasible for every lambda in "
          f"[{_fmt(DEFAULT_LO)}, {_fmt(DEFAULT_HI)}];")
    print("      the published 0.0061 sits at a line-search floor and is treated as a search artifact.")
    print("note: the line-integral row is a published literature value, not computed here.")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tscert",
        description="Stability certificates for Takagi-Sugeno fuzzy systems via LMI feasibility.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_method_flags(p):
        p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument(
            "--method",
            required=True,
            choices=("quadratic", "tanaka", "mozelli", "augmented", "augmented-slack"),
        )
        p.add_argument("--phi", help="comma-separated positive rate bounds (tanaka/mozelli)")

    p = sub.add_parser("check", help="solve one stability condition at a fixed lambda")
    add_method_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="parameter value (default 1.0)")
    p.add_argument("--out", help="write certificate JSON here when strictly feasible")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("lambda-max", help="bisection search for the largest feasible lambda")
    add_method_flags(p)
    p.add_argument("--range", default=f"{DEFAULT_LO},{DEFAULT_HI}", help="search bracket L,U")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="bracket width tolerance")
    p.add_argument("--history", help="write probe history as JSON lines here")
    p.set_defaults(handler=cmd_lambda_max)

    p = sub.add_parser("complexity", help="decision-variable and row counts for all conditions")
    p.add_argument("--n", type=int, required=True, help="state dimension")
    p.add_argument("--r", type=int, required=True, help="number of rules")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(handler=cmd_complexity)

    p = sub.add_parser("simulate", help="integrate the nonlinear system and dump a CSV trajectory")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--x0", required=True, help="initial state, comma separated")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--t-end", dest="t_end", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--certificate", help="certificate JSON; adds a V column and a decrease report")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("verify", help="re-check a certificate against a model, solver-free")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--certificate", required=True, help="certificate JSON file")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("table1", help="lambda* comparison table on the bundled benchmark")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="bisection tolerance")
    p.set_defaults(handler=cmd_table1)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        return args.handler(args)
    except (EigenConvergenceError, SolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ModelError, ExprError, LinAlgError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        print(f"[elapsed {time.perf_counter() - t0:.2f}s]", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
