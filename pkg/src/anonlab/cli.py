"""Command line front end: ``lab group|predict|verify|diffeo|equiv <action>``.

Results go to standard output as JSON (group results as short text unless
``--json``); a one-line human summary goes to standard error.  Exit codes:
0 when everything passes, 1 for a verification failure or an inconclusive
certificate, 2 for usage errors and malformed input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from .errors import ContractError, DomainError, InconclusiveError, LabError
from .glue import (
    FamilyF,
    assemble_diffeo,
    blocking_demo,
    build_approach,
    certify_lipschitz,
    certify_smooth_at_target,
    explore_equivalence,
    family_witness,
)
from .homeo import (
    FixedPointReport,
    GroupElement,
    apply,
    archimedean_witness,
    commutator,
    compose,
    element_to_json,
    fixed_point_propagation,
    fixed_points,
    format_element,
    holder_compare,
    invert,
    iterate_fixed_points_equal,
    parse_element,
    verify_free_action,
)
from .predictor import bad_set, build_amalgamated, handle_request, predict, predict_weak
from .rationals import format_rational, parse_rational
from .steps import holed_from_json, past_from_json, step_from_json
from .suites import DEFAULT_TRIALS, RunConfig, SuiteReport, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DIFFEO_ALIASES = {"certify": "certify", "certify-smooth": "certify", "lipschitz": "lipschitz",
                  "certify-lipschitz": "lipschitz", "blocking": "blocking", "blocking-demo": "blocking"}
SUITE_ALIASES = {"anonymity-suite": "anonymity", "welldef-suite": "welldef", "badset": "goodness"}


class UsageError(Exception):
    pass


def _load_json(text: str):
    """Inline JSON, or ``@path`` / an existing file path holding JSON."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    elif not text.lstrip().startswith(("{", "[", '"')) and Path(text).is_file():
        text = Path(text).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON: {exc}") from exc


def _pair(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 'x,y', got {text!r}")
    return parse_rational(parts[0]), parse_rational(parts[1])


def _emit(obj, args) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    report = getattr(args, "report", None)
    if report:
        Path(report).write_text(text + "\n")


def _summary(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- group


def _fixed_text(rep: FixedPointReport) -> str:
    if rep.kind == "none":
        return "none"
    if rep.kind == "identity":
        return "identity"
    pts = ",".join(format_rational(p) if isinstance(p, Fraction) else repr(p) for p in rep.points)
    return f"{rep.kind} {pts}"


def cmd_group(args) -> int:
    g = parse_element(args.g) if args.g else None
    h = parse_element(args.h) if args.h else None

    def need(e, flag):
        if e is None:
            raise UsageError(f"--{flag} is required for group {args.action}")
        return e

    a = args.action
    status = EXIT_OK
    if a == "apply":
        out = apply(need(g, "g"), parse_rational(args.x))
        result = format_rational(out) if isinstance(out, Fraction) else repr(out)
    elif a == "compose":
        result = compose(need(g, "g"), need(h, "h"))
    elif a == "invert":
        result = invert(need(g, "g"))
    elif a == "commutator":
        result = commutator(need(g, "g"), need(h, "h"))
    elif a == "fixed":
        result = _fixed_text(fixed_points(need(g, "g")))
    elif a == "holder":
        result = str(holder_compare(need(g, "g"), need(h, "h"), parse_rational(args.x0)))
    elif a == "archimedean":
        n = archimedean_witness(need(g, "g"), need(h, "h"), parse_rational(args.x0), args.max_n)
        result = "exhausted" if n is None else str(n)
        status = EXIT_FAIL if n is None else EXIT_OK
    elif a == "free":
        family = [parse_element(t) for t in args.family]
        sample = [parse_rational(t) for t in args.sample]
        ce = verify_free_action(family, sample)
        result = "ok" if ce is None else f"counterexample {format_element(ce.element)} at {format_rational(ce.point)}"
        status = EXIT_OK if ce is None else EXIT_FAIL
    elif a == "iterate-fixed":
        ce = iterate_fixed_points_equal(need(g, "g"), args.n, [parse_rational(t) for t in args.sample])
        result = "ok" if ce is None else f"counterexample {format_element(ce.element)} at {format_rational(ce.point)}"
        status = EXIT_OK if ce is None else EXIT_FAIL
    elif a == "propagate":
        pts = fixed_point_propagation(need(g, "g"), need(h, "h"), parse_rational(args.x0), args.n)
        result = "[" + ",".join(format_rational(p) for p in pts) + "]"
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(a)
    if isinstance(result, GroupElement):
        text, payload = format_element(result), element_to_json(result)
    else:
        text, payload = result, result
    if args.json:
        _emit({"action": a, "result": payload}, args)
    else:
        print(text)
    return status


# ---------------------------------------------------------------- predict


def cmd_predict(args) -> int:
    a = args.action
    if a == "predict":
        state = predict(past_from_json(_load_json(args.past)))
        _emit({"state": state}, args)
    elif a == "weak":
        _emit({"state": predict_weak(holed_from_json(_load_json(args.holed)))}, args)
    elif a == "amalgamate":
        Q = build_amalgamated(parse_element(args.phi), args.s0)
        past = past_from_json(_load_json(args.past))
        _emit({"state": Q.predict(past), "fixed_points": [format_rational(c) for c in Q.decomposition.C]}, args)
    elif a == "request":
        _emit(handle_request(_load_json(args.request)), args)
    return EXIT_OK


# ---------------------------------------------------------------- verify


def _config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else 0
    return RunConfig(seed=seed, depth=args.depth, workers=args.workers)


def cmd_verify(args) -> int:
    a = SUITE_ALIASES.get(args.action, args.action)
    if args.action == "badset" and args.total:
        probes = [parse_rational(p) for p in _load_json(args.probes)] if args.probes else None
        _emit(bad_set(step_from_json(_load_json(args.total)), probes).to_json(), args)
        return EXIT_OK
    cfg = _config(args)
    names = list(DEFAULT_TRIALS) if a == "all" else [a]
    reports: list[SuiteReport] = []
    for name in names:
        reports.append(run_suite(name, cfg, args.trials))
    for r in reports:
        _summary(f"{r.suite}: {r.trials} trials, {len(r.failures)} failures, {r.wall_time:.2f}s")
    body = reports[0].to_json() if len(reports) == 1 else {"seed": cfg.seed, "suites": [r.to_json() for r in reports]}
    _emit(body, args)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------- diffeo / equiv


def _status_code(report: dict) -> int:
    return EXIT_OK if report.get("status") == "pass" else EXIT_FAIL


def cmd_diffeo(args) -> int:
    target = _pair(args.target)
    a = DIFFEO_ALIASES.get(args.action, args.action)
    if a == "approach":
        _emit(build_approach(target, args.side, args.depth).to_json(), args)
        return EXIT_OK
    if a == "blocking":
        import random

        rng = random.Random(f"{args.seed or 0}:blocking-cli")
        G = assemble_diffeo(target, args.depth)
        sample = []
        while len(sample) < args.samples:
            z = G.w + Fraction(rng.randint(-3000, 3000), 1000)
            if z != G.w and not G.in_truncated_zone(z):
                sample.append(z)
        report = blocking_demo(target[0], target[1], args.depth, sample)
        _emit(report, args)
        return _status_code(report)
    G = assemble_diffeo(target, args.depth)
    if a == "build":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "assembly.json").write_text(json.dumps(G.to_json(), indent=2, sort_keys=True) + "\n")
        (out / "curve.csv").write_text(G.curve_csv())
        _emit({"assembly": str(out / "assembly.json"), "curve": str(out / "curve.csv"),
               "pieces": len(G.pieces()), "depth": G.depth,
               "residual": format_rational(G.residual)}, args)
        return EXIT_OK
    if a == "certify":
        scales = [parse_rational(s) for s in args.scales.split(",")] if args.scales else None
        report = certify_smooth_at_target(G, args.orders, scales)
        _emit(report, args)
        if report["status"] == "inconclusive":
            _summary(f"inconclusive: {report['reason']}; try --depth {report['suggestion']['depth']}")
        return _status_code(report)
    if a == "lipschitz":
        report = certify_lipschitz(G, args.orders)
        _emit(report, args)
        return _status_code(report)
    if a == "witness":
        try:
            wit = family_witness(G, parse_rational(args.z))
        except InconclusiveError as exc:
            _emit({"status": "inconclusive", "reason": str(exc), "suggestion": exc.suggestion}, args)
            return EXIT_FAIL
        _emit(wit.to_json(), args)
        return EXIT_OK
    raise UsageError(a)  # pragma: no cover


def cmd_equiv(args) -> int:
    family = FamilyF.from_json(_load_json(args.family))
    points = [parse_rational(p) for p in _load_json(args.points)]
    ex = explore_equivalence(family, points, args.rounds)
    classes = []
    for cls in ex.classes():
        root = cls[0]
        paths = {}
        for x in cls[1:]:
            path = ex.witness_path(root, x)
            paths[format_rational(x) if isinstance(x, Fraction) else repr(x)] = {
                "edges": [e.to_json() for e in path], "replayed": ex.replay(path)}
        classes.append({"members": [format_rational(x) if isinstance(x, Fraction) else repr(x) for x in cls],
                        "paths_from_first": paths})
    ok = all(p["replayed"] for c in classes for p in c["paths_from_first"].values())
    _emit({"classes": classes, "edges": len(ex.edges)}, args)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="also write the JSON result to this path")

    g = sub.add_parser("group", help="group element algebra")
    g.add_argument("action", choices=["apply", "compose", "invert", "commutator", "fixed", "holder",
                                      "archimedean", "free", "iterate-fixed", "propagate"])
    g.add_argument("--g", help="element, e.g. affine:2,0 or power:3/2 or JSON")
    g.add_argument("--h", help="second element (psi for archimedean, tau for propagate)")
    g.add_argument("--x", default="0")
    g.add_argument("--x0", default="0")
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--max-n", type=int, default=1000)
    g.add_argument("--family", nargs="*", default=[])
    g.add_argument("--sample", nargs="*", default=[])
    g.add_argument("--json", action="store_true")
    common(g)
    g.set_defaults(func=cmd_group)

    p = sub.add_parser("predict", help="run the predictor on one input")
    p.add_argument("action", nargs="?", default="predict", choices=["predict", "weak", "amalgamate", "request"])
    p.add_argument("--past")
    p.add_argument("--holed")
    p.add_argument("--request")
    p.add_argument("--phi", default="affine:2,0")
    p.add_argument("--s0", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_predict)

    v = sub.add_parser("verify", help="randomized verification suites")
    v.add_argument("action", choices=sorted(set(DEFAULT_TRIALS) | set(SUITE_ALIASES) | {"all"}))
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--depth", type=int, default=20)
    v.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))
    v.add_argument("--total", help="single total step function for badset")
    v.add_argument("--probes", help="JSON list of probe rationals for badset")
    common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("diffeo", help="assemble and certify the map through a target")
    d.add_argument("action", choices=sorted({"build", "approach", "witness", *DIFFEO_ALIASES}))
    d.add_argument("--target", default="1,1")
    d.add_argument("--depth", type=int, default=20)
    d.add_argument("--orders", type=int, default=4)
    d.add_argument("--scales", help="comma-separated decreasing rationals")
    d.add_argument("--z", default="0")
    d.add_argument("--side", choices=["left", "right"], default="left")
    d.add_argument("--samples", type=int, default=500)
    d.add_argument("--seed", type=int)
    d.add_argument("--out", default="diffeo_out")
    common(d)
    d.set_defaults(func=cmd_diffeo)

    e = sub.add_parser("equiv", help="explore the relation generated by a family")
    e.add_argument("action", choices=["explore"])
    e.add_argument("--family", required=True, help="JSON or path: {'members': [...]}")
    e.add_argument("--points", required=True, help="JSON or path: list of rationals")
    e.add_argument("--rounds", type=int, default=0)
    common(e)
    e.set_defaults(func=cmd_equiv)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (UsageError, DomainError, ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
        _summary(f"error: {exc}")
        return EXIT_USAGE
    except (ContractError, InconclusiveError, LabError) as exc:
        _summary(f"failed: {exc}")
        return EXIT_FAIL
    _summary(f"done in {time.perf_counter() - start:.2f}s")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
