"""Command-line front end.

Exit codes: 0 success (or boolean true), 1 boolean false, 2 usage
errors, 3 parse/validation errors, 4 math-domain errors.  All numbers
print with 12 significant digits so identical invocations produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import latent
from .bayesnet import forward_sample, query
from .errors import (
    DegenerateEndpoints,
    DomainError,
    InfeasibleEndpoints,
    ParseError,
    PositivityViolation,
    SizeCapExceeded,
    StructureError,
    UnknownNode,
    ValidationError,
    ZeroProbabilityEvidence,
)
from .graph import backdoor_admissible, d_separated
from .intervention import (
    InterventionQuery,
    ace,
    adjusted_estimate,
    conditioning_bias,
    interventional_distribution,
    select_sufficient_confounders,
    unadjusted_estimate,
)
from .latent import (
    bias_scan,
    correlation_feasible,
    decompose_common_cause,
    scan_summary,
    scan_to_csv,
    third_correlation_interval,
)
from .modelfile import load_model

PARSE_ERRORS = (ParseError, ValidationError)
DOMAIN_ERRORS = (
    PositivityViolation,
    InfeasibleEndpoints,
    DegenerateEndpoints,
    DomainError,
    ZeroProbabilityEvidence,
    SizeCapExceeded,
    StructureError,
    UnknownNode,
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _parse_assignments(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise ValidationError(f"bad assignment {part!r}; expected NAME=state")
        name, state = part.split("=", 1)
        out[name.strip()] = state.strip()
    return out


def _parse_set(text: str | None) -> list[str]:
    if not text:
        return []
    return [s.strip() for s in text.split(",") if s.strip()]


def _print_dist(var: str, factor) -> None:
    for state, p in zip(factor.states[0], factor.values):
        print(f"{var}={state}: {_fmt(float(p))}")


def cmd_query(args) -> int:
    net = load_model(args.model)
    dist = query(net, [args.target], _parse_assignments(args.given or ""))
    _print_dist(args.target, dist)
    return 0


def cmd_do(args) -> int:
    net = load_model(args.model)
    do = _parse_assignments(args.do)
    dist = interventional_distribution(InterventionQuery(args.target, do, net))
    _print_dist(args.target, dist)
    return 0


def cmd_ace(args) -> int:
    net = load_model(args.model)
    value = ace(net, args.treatment, args.outcome, args.z1, args.z0)
    print(_fmt(value))
    return 0


def cmd_adjust(args) -> int:
    net = load_model(args.model)
    s = _parse_set(args.set)
    adj = adjusted_estimate(net, args.treatment, args.outcome, s)
    for level in net.variables[args.treatment].states:
        truth = interventional_distribution(
            InterventionQuery(args.outcome, {args.treatment: level}, net)
        )
        print(f"do({args.treatment}={level}):")
        for i, state in enumerate(adj[level].states[0]):
            a = float(adj[level].values[i])
            t = float(truth.values[i])
            print(
                f"  {args.outcome}={state}: adjusted={_fmt(a)} "
                f"true={_fmt(t)} diff={_fmt(a - t)}"
            )
    return 0


def cmd_dsep(args) -> int:
    net = load_model(args.model)
    verdict = d_separated(
        net.dag, _parse_set(args.a), _parse_set(args.b), _parse_set(args.given)
    )
    print("true" if verdict else "false")
    return 0 if verdict else 1


def cmd_backdoor(args) -> int:
    net = load_model(args.model)
    verdict = backdoor_admissible(
        net.dag, args.treatment, args.outcome, _parse_set(args.set)
    )
    print("true" if verdict else "false")
    return 0 if verdict else 1


def cmd_select(args) -> int:
    net = load_model(args.model)
    mode = {"graph": "graphical", "dist": "distributional"}[args.mode]
    result = select_sufficient_confounders(
        net, args.treatment, args.outcome, mode=mode, tolerance=args.tol
    )
    chosen = ",".join(result.chosen) if result.chosen else "(empty)"
    print(f"chosen: {chosen}")
    print(f"pool: {','.join(result.pool) if result.pool else '(empty)'}")
    for rec in result.audit:
        subset = ",".join(rec.subset) if rec.subset else "(empty)"
        print(f"stage {rec.stage}: {{{subset}}} -> {'equal' if rec.verdict else 'unequal'}")
    return 0


def cmd_bias(args) -> int:
    net = load_model(args.model)
    value = conditioning_bias(
        net, args.treatment, args.outcome, args.covariate, args.z1, args.z0
    )
    adj = adjusted_estimate(net, args.treatment, args.outcome, [args.covariate])
    for level in net.variables[args.treatment].states:
        truth = interventional_distribution(
            InterventionQuery(args.outcome, {args.treatment: level}, net)
        )
        err = float(adj[level].values[-1] - truth.values[-1])
        print(f"per-level error at {args.treatment}={level}: {_fmt(err)}")
    print(f"bias: {_fmt(value)}")
    return 0


def _parse_grid_value(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"bad grid range {text!r}; expected a:b:step")
    a, b, step = (float(p) for p in parts)
    if step <= 0:
        raise ValidationError("grid step must be positive")
    values = []
    v = a
    while v <= b + 1e-12:
        values.append(round(v, 12))
        v += step
    return values


def cmd_scan(args) -> int:
    grid = {}
    for spec in args.param:
        if "=" not in spec:
            raise ValidationError(f"bad --param {spec!r}; expected NAME=a:b:step")
        # parameter names may themselves contain '=' (e.g. "w|u=1")
        name, rng = spec.rsplit("=", 1)
        grid[name] = _parse_grid_value(rng)
    results = bias_scan(
        args.template,
        grid,
        treatment=args.treatment,
        outcome=args.outcome,
        covariate=args.covariate,
        workers=args.workers,
    )
    Path(args.out).write_text(scan_to_csv(results), encoding="utf-8", newline="")
    print(scan_summary(results))
    return 0


def cmd_decompose(args) -> int:
    d = decompose_common_cause(args.py, args.pyp, args.lo, args.hi)
    print(f"p(t|y): {_fmt(d.p_t_given_y)}")
    print(f"p(t|y'): {_fmt(d.p_t_given_yprime)}")
    print(f"p(x|t): {_fmt(d.p_x_given_t)}")
    print(f"p(x|t'): {_fmt(d.p_x_given_tprime)}")
    recon_y = (1 - d.p_t_given_y) * d.p_x_given_tprime + d.p_t_given_y * d.p_x_given_t
    recon_yp = (
        1 - d.p_t_given_yprime
    ) * d.p_x_given_tprime + d.p_t_given_yprime * d.p_x_given_t
    print(f"reconstruction p(x|y): {_fmt(recon_y)} (residual {_fmt(recon_y - d.p_x_given_y)})")
    print(
        f"reconstruction p(x|y'): {_fmt(recon_yp)} "
        f"(residual {_fmt(recon_yp - d.p_x_given_yprime)})"
    )
    return 0


def cmd_corr(args) -> int:
    lo, hi = third_correlation_interval(args.r1, args.r2)
    print(f"feasible interval: [{_fmt(lo)}, {_fmt(hi)}]")
    print("0 excluded" if lo > 0 or hi < 0 else "0 included")
    if args.r3 is None:
        return 0
    verdict = correlation_feasible(args.r3, args.r1, args.r2)
    print(f"r3={_fmt(args.r3)}: {'feasible' if verdict else 'infeasible'}")
    return 0 if verdict else 1


def cmd_sample(args) -> int:
    net = load_model(args.model)
    ds = forward_sample(net, args.n, args.seed)
    ds.write_csv(args.out)
    print(f"wrote {len(ds)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalbn",
        description="Exact interventional inference and confounder-bias analysis "
        "on discrete Bayesian networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("query", help="conditional distribution of a variable")
    p.add_argument("model")
    p.add_argument("--target", required=True)
    p.add_argument("--given", default="")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("do", help="interventional distribution")
    p.add_argument("model")
    p.add_argument("--target", required=True)
    p.add_argument("--do", required=True)
    p.set_defaults(func=cmd_do)

    p = sub.add_parser("ace", help="average causal effect")
    p.add_argument("model")
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--z1")
    p.add_argument("--z0")
    p.set_defaults(func=cmd_ace)

    p = sub.add_parser("adjust", help="covariate-adjusted estimate vs truth")
    p.add_argument("model")
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--set", default="")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("dsep", help="d-separation test (exit 0 true, 1 false)")
    p.add_argument("model")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--given", default="")
    p.set_defaults(func=cmd_dsep)

    p = sub.add_parser("backdoor", help="back-door admissibility (exit 0/1)")
    p.add_argument("model")
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--set", default="")
    p.set_defaults(func=cmd_backdoor)

    p = sub.add_parser("select", help="minimal sufficient confounder set")
    p.add_argument("model")
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--mode", choices=["graph", "dist"], default="graph")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bias", help="bias of conditioning on one covariate")
    p.add_argument("model")
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--covariate", required=True)
    p.add_argument("--z1")
    p.add_argument("--z0")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("scan", help="exact bias scan over a parameter grid")
    p.add_argument("--template", required=True, choices=sorted(latent.TEMPLATES))
    p.add_argument("--param", action="append", default=[], metavar="NAME=a:b:step")
    p.add_argument("--treatment", default="Z")
    p.add_argument("--outcome", default="Y")
    p.add_argument("--covariate", default="X")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("decompose", help="common-cause dissection weights")
    p.add_argument("--py", type=float, required=True)
    p.add_argument("--pyp", type=float, required=True)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("corr", help="third-correlation feasibility")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--r3", type=float)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("sample", help="seeded forward sampling to CSV")
    p.add_argument("model")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
