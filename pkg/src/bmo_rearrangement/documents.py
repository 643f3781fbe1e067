"""Versioned JSON documents for spaces, functions, decompositions and reports.

Rationals are strings ``"p/q"`` (integers too: ``"3/1"``), ``"inf"`` marks
infinite masses and lengths.  Parsing is strict: unknown fields, missing
fields and version mismatches raise :class:`DocumentError`, whose message names
the offending field.  ``emit(parse(doc)) == doc`` on canonical documents.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

from ._numbers import fmt, parse
from .errors import DocumentError
from .metric import Ball, CZDecomposition, CZReport, FiniteMetricMeasureSpace, Interval
from .oscillation import Basis, Enclosure, SeminormResult
from .rearrange import MassDistribution, MeasureSpace, StepFunction1D, WeightedFunction

VERSION = 1
_RATIONAL = re.compile(r"-?\d+(/\d+)?|inf")


def _fields(doc, kind: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(doc, dict):
        raise DocumentError(f"{kind}: expected a JSON object")
    allowed = required | optional | {"version", "kind"}
    unknown = set(doc) - allowed
    if unknown:
        raise DocumentError(f"{kind}: unknown field(s) {sorted(unknown)}")
    if doc.get("version") != VERSION:
        raise DocumentError(f"{kind}: unsupported version {doc.get('version')!r} (expected {VERSION})")
    if doc.get("kind") != kind:
        raise DocumentError(f"expected kind {kind!r}, got {doc.get('kind')!r}")
    missing = required - set(doc)
    if missing:
        raise DocumentError(f"{kind}: missing field(s) {sorted(missing)}")
    return doc


def _num(x, where: str):
    if not isinstance(x, str) or not _RATIONAL.fullmatch(x):
        raise DocumentError(f"{where}: bad rational {x!r} (expected a 'p/q' string or 'inf')")
    try:
        return parse(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"{where}: bad rational {x!r} ({exc})") from None


def _obj(item, where: str, keys: set) -> dict:
    if not isinstance(item, dict) or set(item) != keys:
        raise DocumentError(f"{where}: expected an object with fields {sorted(keys)}")
    return item


def _id(x, where: str) -> str:
    if not isinstance(x, str):
        raise DocumentError(f"{where}: atom ids must be strings, got {x!r}")
    return x


# -- spaces ------------------------------------------------------------------

def emit_space(X: MeasureSpace) -> dict:
    doc = {"version": VERSION,
           "kind": "metric_space" if isinstance(X, FiniteMetricMeasureSpace) else "measure_space",
           "atoms": [{"id": str(a), "weight": fmt(w)} for a, w in zip(X.ids, X.weights)]}
    if isinstance(X, FiniteMetricMeasureSpace):
        doc["distances"] = [[fmt(d) for d in row] for row in X.distances]
    return doc


def parse_space(doc) -> MeasureSpace:
    metric = isinstance(doc, dict) and doc.get("kind") == "metric_space"
    if metric:
        _fields(doc, "metric_space", {"atoms", "distances"})
    else:
        _fields(doc, "measure_space", {"atoms"})
    atoms = [_obj(a, f"atoms[{i}]", {"id", "weight"}) for i, a in enumerate(doc["atoms"])]
    ids = tuple(_id(a["id"], f"atoms[{i}].id") for i, a in enumerate(atoms))
    weights = tuple(_num(a["weight"], f"atoms[{i}].weight") for i, a in enumerate(atoms))
    if not metric:
        return MeasureSpace(ids, weights)
    dist = doc["distances"]
    if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
        raise DocumentError("distances: expected a list of rows")
    rows = tuple(tuple(_num(x, f"distances[{i}][{j}]") for j, x in enumerate(r)) for i, r in enumerate(dist))
    return FiniteMetricMeasureSpace(ids, weights, rows)


# -- functions ---------------------------------------------------------------

def emit_weighted(f: WeightedFunction, inline_space: bool = True) -> dict:
    doc = {"version": VERSION, "kind": "weighted_function"}
    if inline_space:
        doc["space"] = emit_space(f.space)
    doc["values"] = {str(a): fmt(v) for a, v in zip(f.space.ids, f.values)}
    return doc


def parse_weighted(doc, *, base: Path | None = None, space: MeasureSpace | None = None) -> WeightedFunction:
    _fields(doc, "weighted_function", {"values"}, {"space", "space_ref"})
    if "space" in doc and "space_ref" in doc:
        raise DocumentError("weighted_function: give either 'space' or 'space_ref', not both")
    if "space" in doc:
        space = parse_space(doc["space"])
    elif "space_ref" in doc:
        path = Path(doc["space_ref"])
        if base is not None and not path.is_absolute():
            path = base / path
        space = parse_space(load(path))
    elif space is None:
        raise DocumentError("weighted_function: missing 'space' or 'space_ref'")
    values = doc["values"]
    if not isinstance(values, dict):
        raise DocumentError("values: expected an object mapping atom id to rational")
    return WeightedFunction.from_mapping(space, {k: _num(v, f"values[{k!r}]") for k, v in values.items()})


def emit_step(f: StepFunction1D) -> dict:
    domain = {"kind": "halfline"} if f.halfline else {"kind": "interval", "length": fmt(f.length)}
    return {"version": VERSION, "kind": "step_function", "domain": domain,
            "pieces": [{"length": fmt(l), "value": fmt(v)} for l, v in f.pieces]}


def parse_step(doc) -> StepFunction1D:
    _fields(doc, "step_function", {"domain", "pieces"})
    dom = doc["domain"]
    if not isinstance(dom, dict) or dom.get("kind") not in ("interval", "halfline"):
        raise DocumentError("domain: expected {'kind': 'interval', 'length'} or {'kind': 'halfline'}")
    halfline = dom["kind"] == "halfline"
    _obj(dom, "domain", {"kind"} if halfline else {"kind", "length"})
    pieces = [_obj(p, f"pieces[{i}]", {"length", "value"}) for i, p in enumerate(doc["pieces"])]
    f = StepFunction1D(tuple((_num(p["length"], f"pieces[{i}].length"), _num(p["value"], f"pieces[{i}].value"))
                             for i, p in enumerate(pieces)), halfline)
    if not halfline and f.length != _num(dom["length"], "domain.length"):
        raise DocumentError("domain.length: piece lengths must sum to the domain length")
    return f


def emit_mass(d: MassDistribution) -> dict:
    return {"version": VERSION, "kind": "mass_distribution",
            "entries": [{"value": fmt(v), "mass": fmt(m)} for v, m in d.entries]}


def parse_mass(doc) -> MassDistribution:
    _fields(doc, "mass_distribution", {"entries"})
    entries = [_obj(e, f"entries[{i}]", {"value", "mass"}) for i, e in enumerate(doc["entries"])]
    return MassDistribution(tuple((_num(e["value"], f"entries[{i}].value"), _num(e["mass"], f"entries[{i}].mass"))
                                  for i, e in enumerate(entries)))


def parse_function(doc, *, base: Path | None = None, space: MeasureSpace | None = None):
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "weighted_function":
        return parse_weighted(doc, base=base, space=space)
    if kind == "step_function":
        return parse_step(doc)
    if kind == "mass_distribution":
        return parse_mass(doc)
    raise DocumentError(f"expected a function document, got kind {kind!r}")


def emit_function(f) -> dict:
    if isinstance(f, WeightedFunction):
        return emit_weighted(f)
    if isinstance(f, StepFunction1D):
        return emit_step(f)
    return emit_mass(f)


def emit_basis(b: Basis) -> dict:
    return {"version": VERSION, "kind": "basis",
            "sets": [sorted(str(a) for a in s) for s in b.sets]}


def parse_basis(doc, space: MeasureSpace) -> Basis:
    _fields(doc, "basis", {"sets"})
    sets = doc["sets"]
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise DocumentError("sets: expected a list of id lists")
    return Basis(space, tuple(frozenset(_id(a, "sets") for a in s) for s in sets))


# -- results -----------------------------------------------------------------

def emit_scalar(name: str, value, **extra) -> dict:
    doc = {"version": VERSION, "kind": "scalar", "name": name, "value": fmt(value)}
    doc.update({k: (fmt(v) if not isinstance(v, (str, bool, type(None))) else v) for k, v in extra.items()})
    return doc


def emit_seminorm(r: SeminormResult) -> dict:
    return {"version": VERSION, "kind": "seminorm", "value": fmt(r.value),
            "witness": [fmt(r.witness[0]), fmt(r.witness[1])], "family": r.family,
            "boundary_limit": r.boundary_limit}


def emit_enclosure(e: Enclosure) -> dict:
    return {"version": VERSION, "kind": "enclosure", "lo": fmt(e.lo), "hi": fmt(e.hi),
            "converged": e.converged,
            "witness": None if e.witness is None else [fmt(e.witness[0]), fmt(e.witness[1])],
            "evaluations": e.evaluations}


def _emit_set(s) -> dict:
    if isinstance(s, Ball):
        return {"center": str(s.center), "radius": fmt(s.radius),
                "members": sorted(str(m) for m in s.members), "measure": fmt(s.measure)}
    return {"a": fmt(s.a), "b": fmt(s.b)}


def _parse_set(item, where: str, space):
    if isinstance(item, dict) and "center" in item:
        _obj(item, where, {"center", "radius", "members", "measure"})
        b = space.ball(_id(item["center"], where), _num(item["radius"], where + ".radius"))
        if sorted(b.members) != sorted(item["members"]):
            raise DocumentError(f"{where}: members do not match the ball in the given space")
        return b
    _obj(item, where, {"a", "b"})
    return Interval(_num(item["a"], where + ".a"), _num(item["b"], where + ".b"))


def emit_cz(dec: CZDecomposition | None, level=None) -> dict:
    if dec is None:
        return {"version": VERSION, "kind": "cz_decomposition", "none_needed": True,
                "level": fmt(level), "constant": None, "dilation": None, "pairs": []}
    radii = list(dec.radii) or [None] * len(dec.pairs)
    return {"version": VERSION, "kind": "cz_decomposition", "none_needed": False,
            "level": fmt(dec.level), "constant": fmt(dec.constant),
            "dilation": None if dec.dilation is None else fmt(dec.dilation),
            "pairs": [{"inner": _emit_set(A), "outer": _emit_set(At),
                       "radius": None if r is None else fmt(r)}
                      for (A, At), r in zip(dec.pairs, radii)]}


def parse_cz(doc, space=None) -> CZDecomposition | None:
    _fields(doc, "cz_decomposition", {"none_needed", "level", "constant", "dilation", "pairs"})
    if doc["none_needed"]:
        return None
    pairs, radii = [], []
    for i, p in enumerate(doc["pairs"]):
        _obj(p, f"pairs[{i}]", {"inner", "outer", "radius"})
        pairs.append((_parse_set(p["inner"], f"pairs[{i}].inner", space),
                      _parse_set(p["outer"], f"pairs[{i}].outer", space)))
        if p["radius"] is not None:
            radii.append(_num(p["radius"], f"pairs[{i}].radius"))
    return CZDecomposition(_num(doc["level"], "level"), tuple(pairs), _num(doc["constant"], "constant"),
                           None if doc["dilation"] is None else _num(doc["dilation"], "dilation"),
                           tuple(radii))


def emit_cz_report(rep: CZReport) -> dict:
    return {"version": VERSION, "kind": "cz_report",
            "overlapping": [list(p) for p in rep.overlapping],
            "cond_i": list(rep.cond_i), "cond_ii": list(rep.cond_ii),
            "cond_iii": [str(x) for x in rep.cond_iii], "passed": rep.passed}


# -- io ----------------------------------------------------------------------

def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: not valid JSON ({exc})") from None
