"""Command-line front end.

Exit codes: 0 success (or no violations), 1 at least one suite violation,
2 malformed input or usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import documents as docs
from ._numbers import fmt, parse
from .errors import InvariantError
from .harness import SUITES, GeneratorConfig, TrialReport, extremal_search, replay, run_suite
from .metric import (
    FiniteMetricMeasureSpace,
    c_star,
    c_star_probe,
    cz_decompose,
    distinct_balls,
    doubling_ratio,
    verify_cz,
)
from .oscillation import bmo_discrete, bmo_interval_enclosure, bmo_monotone_interval, bmo_step_exact
from .rearrange import StepFunction1D, WeightedFunction, decreasing_rearrangement, signed_decreasing_rearrangement

CSV_COLUMNS = ("suite", "seed", "trial", "lhs", "rhs", "pass", "witness")


class UsageError(Exception):
    pass


def _load_function(path: str, space=None):
    p = Path(path)
    return docs.parse_function(docs.load(p), base=p.parent, space=space)


def _rational(s: str):
    try:
        return parse(s)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from None


def _emit(doc, out=None) -> None:
    text = docs.dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_rearrange(args) -> int:
    f = _load_function(args.input)
    g = signed_decreasing_rearrangement(f) if args.signed else decreasing_rearrangement(f)
    _emit(docs.emit_step(g))
    return 0


def cmd_bmo(args) -> int:
    f = _load_function(args.input)
    if isinstance(f, WeightedFunction):
        if args.basis == "balls":
            if not isinstance(f.space, FiniteMetricMeasureSpace):
                raise UsageError("--basis balls needs a function on a metric space")
            basis = distinct_balls(f.space)
        else:
            basis = docs.parse_basis(docs.load(args.basis), f.space)
        _emit(docs.emit_scalar("bmo", bmo_discrete(f, basis)))
        return 0
    if not isinstance(f, StepFunction1D):
        f = decreasing_rearrangement(f)
    if f.is_decreasing() or f.is_increasing():
        _emit(docs.emit_seminorm(bmo_monotone_interval(f)))
    elif args.exact:
        _emit(docs.emit_seminorm(bmo_step_exact(f)))
    else:
        if f.halfline:
            raise UsageError("the enclosure needs a bounded interval; use --exact on the half-line")
        _emit(docs.emit_enclosure(bmo_interval_enclosure(f, args.tol, args.budget)))
    return 0


def cmd_cz(args) -> int:
    X = docs.parse_space(docs.load(args.space))
    if not isinstance(X, FiniteMetricMeasureSpace):
        raise UsageError("cz needs a metric space document")
    g = _load_function(args.function, space=X)
    if not isinstance(g, WeightedFunction):
        raise UsageError("cz needs a weighted function on the given space")
    if g.space != X:
        raise UsageError("the function's space differs from the given space")
    lam = args.lam if args.lam is not None else c_star_probe(X)
    dec = cz_decompose(X, g, args.gamma, lam, check=args.verify)
    out = {"decomposition": docs.emit_cz(dec, args.gamma)}
    ok = True
    if args.verify and dec is not None:
        rep = verify_cz(dec, g, args.gamma)
        out["report"] = docs.emit_cz_report(rep)
        ok = rep.passed
    _emit(out if args.verify else out["decomposition"])
    return 0 if ok else 1


def cmd_doubling(args) -> int:
    X = docs.parse_space(docs.load(args.space))
    if not isinstance(X, FiniteMetricMeasureSpace):
        raise UsageError("doubling needs a metric space document")
    if args.c_star:
        _emit(docs.emit_scalar("c_star", c_star(X), **{"lambda": c_star_probe(X), "c5": doubling_ratio(X, 5)}))
    else:
        _emit(docs.emit_scalar("doubling_ratio", doubling_ratio(X, args.lam), **{"lambda": args.lam}))
    return 0


def _csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([r.suite, r.seed, r.trial, r.lhs, r.rhs, r.status,
                    "" if r.witness is None else json.dumps(r.witness, sort_keys=True)])
    return buf.getvalue()


def cmd_verify(args) -> int:
    suites = sorted(SUITES) if args.suite == "all" else [args.suite]
    cfg = GeneratorConfig(seed=args.seed)
    if args.tol is not None:
        cfg = GeneratorConfig(seed=args.seed, kk_tol=fmt(args.tol))
    if args.budget is not None:
        cfg = GeneratorConfig(**{**cfg.as_dict(), "kk_budget": args.budget})
    reports = []
    for s in suites:
        reports.extend(run_suite(s, cfg, args.trials))
    if args.out == "csv":
        text = _csv(reports)
    else:
        text = docs.dumps({"version": docs.VERSION, "kind": "trial_reports",
                           "reports": [r.as_dict() for r in reports]})
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    counts = {}
    for r in reports:
        counts.setdefault(r.suite, {"pass": 0, "fail": 0, "inconclusive": 0})[r.status] += 1
    for s in suites:
        c = counts.get(s, {"pass": 0, "fail": 0, "inconclusive": 0})
        print(f"{s}: {c['pass']} pass, {c['fail']} fail, {c['inconclusive']} inconclusive", file=sys.stderr)
    return 1 if any(r.status == "fail" for r in reports) else 0


def cmd_search(args) -> int:
    res = extremal_search(GeneratorConfig(seed=args.seed), args.objective, args.strategy, args.iters)
    _emit(res, args.out)
    return 0


def cmd_replay(args) -> int:
    doc = docs.load(args.report)
    if isinstance(doc, dict) and doc.get("kind") == "trial_reports":
        items = doc.get("reports", [])
        if args.trial is not None:
            items = [r for r in items if r["trial"] == args.trial and (args.suite is None or r["suite"] == args.suite)]
    else:
        items = [doc]
    if not items:
        raise UsageError("no matching trial report")
    try:
        fresh = [replay(TrialReport.from_dict(r)) for r in items]
    except (TypeError, KeyError) as exc:
        raise UsageError(f"malformed trial report ({exc})") from None
    _emit({"version": docs.VERSION, "kind": "trial_reports", "reports": [r.as_dict() for r in fresh]})
    return 1 if any(r.status == "fail" for r in fresh) else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmo-rearrangement",
                                description="Exact decreasing rearrangements and BMO seminorms.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rearrange", help="decreasing rearrangement of a function document")
    r.add_argument("input")
    r.add_argument("--signed", action="store_true", help="signed rearrangement (no absolute values)")
    r.set_defaults(func=cmd_rearrange)

    b = sub.add_parser("bmo", help="BMO seminorm of a function document")
    b.add_argument("input")
    b.add_argument("--basis", default="balls", help="'balls' or a basis document path")
    b.add_argument("--tol", type=_rational, default=parse("1/1000"))
    b.add_argument("--budget", type=int, default=20000)
    b.add_argument("--exact", action="store_true", help="exact value for non-monotone step functions")
    b.set_defaults(func=cmd_bmo)

    c = sub.add_parser("cz", help="Calderon-Zygmund decomposition at a level")
    c.add_argument("space")
    c.add_argument("function")
    c.add_argument("--gamma", type=_rational, required=True)
    c.add_argument("--lambda", dest="lam", type=_rational)
    c.add_argument("--verify", action="store_true")
    c.set_defaults(func=cmd_cz)

    d = sub.add_parser("doubling", help="doubling ratio or the constant c_*")
    d.add_argument("space")
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=_rational)
    g.add_argument("--c-star", action="store_true")
    d.set_defaults(func=cmd_doubling)

    v = sub.add_parser("verify", help="run seeded verification suites")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, help="trials per suite (default: the suite's own)")
    v.add_argument("--tol", type=_rational, help="enclosure tolerance for the kk suite")
    v.add_argument("--budget", type=int, help="enclosure budget for the kk suite")
    v.add_argument("--out", choices=["csv", "json"], default="json")
    v.add_argument("--report", help="write the report here instead of standard output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="best-found ratio search")
    s.add_argument("--objective", choices=["main_theorem_ratio", "kk_ratio"], default="main_theorem_ratio")
    s.add_argument("--strategy", choices=["random", "hill_climb"], default="random")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--iters", type=int, default=200)
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    rp = sub.add_parser("replay", help="re-check trials from a report document")
    rp.add_argument("report")
    rp.add_argument("--suite")
    rp.add_argument("--trial", type=int)
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (InvariantError, UsageError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
