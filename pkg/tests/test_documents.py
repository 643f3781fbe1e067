from __future__ import annotations

import json
import random
from fractions import Fraction as F

import pytest

from bmo_rearrangement import (
    INF,
    Basis,
    DocumentError,
    FiniteMetricMeasureSpace,
    MassDistribution,
    MeasureSpace,
    StepFunction1D,
    WeightedFunction,
    cz_decompose,
)
from bmo_rearrangement import documents as docs
from bmo_rearrangement.harness import GeneratorConfig, gen_mass, gen_metric_space, gen_step, gen_weighted


def roundtrip(doc, parse, emit, **kw):
    text = docs.dumps(doc)
    again = emit(parse(json.loads(text), **kw))
    assert docs.dumps(again) == text
    return again


def test_random_documents_roundtrip():
    cfg = GeneratorConfig()
    for k in range(30):
        rng = random.Random(k)
        X = gen_metric_space(rng, cfg)
        roundtrip(docs.emit_space(X), docs.parse_space, docs.emit_space)
        roundtrip(docs.emit_weighted(gen_weighted(rng, cfg)), docs.parse_weighted, docs.emit_weighted)
        roundtrip(docs.emit_weighted(gen_weighted(rng, cfg, space=X)), docs.parse_weighted, docs.emit_weighted)
        roundtrip(docs.emit_step(gen_step(rng, cfg)), docs.parse_step, docs.emit_step)
        roundtrip(docs.emit_mass(gen_mass(rng, cfg, tail=F(0))), docs.parse_mass, docs.emit_mass)


def test_halfline_step_roundtrip():
    f = StepFunction1D.on_halfline([(1, 3), (F(1, 2), 1)], 0)
    doc = docs.emit_step(f)
    assert doc["domain"] == {"kind": "halfline"} and doc["pieces"][-1]["length"] == "inf"
    assert docs.parse_step(doc) == f


def test_cz_roundtrip():
    X = FiniteMetricMeasureSpace(("a", "b"), (1, 1), ((0, 1), (1, 0)))
    dec = cz_decompose(X, WeightedFunction(X, (3, 0)), 2, 4)
    doc = docs.emit_cz(dec)
    assert docs.emit_cz(docs.parse_cz(doc, X)) == doc
    none = docs.emit_cz(None, 5)
    assert none["none_needed"] and docs.parse_cz(none) is None


def test_basis_roundtrip():
    X = MeasureSpace(("a", "b"), (1, 1))
    b = Basis(X, (frozenset({"a"}), frozenset({"a", "b"})))
    assert docs.parse_basis(docs.emit_basis(b), X) == b


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.update(extra=1), "unknown field"),
    (lambda d: d.update(version=2), "version"),
    (lambda d: d.pop("values"), "missing"),
    (lambda d: d["values"].update(a="1.5"), "bad rational"),
    (lambda d: d.update(kind="step_function"), "kind"),
])
def test_malformed_weighted_documents(mutate, needle):
    X = MeasureSpace(("a", "b"), (1, 2))
    doc = docs.emit_weighted(WeightedFunction(X, (1, -1)))
    mutate(doc)
    with pytest.raises(DocumentError, match=needle):
        docs.parse_weighted(doc)


def test_unknown_nested_fields_rejected():
    doc = docs.emit_step(StepFunction1D.interval([(1, 2)]))
    doc["pieces"][0]["colour"] = "red"
    with pytest.raises(DocumentError, match="pieces"):
        docs.parse_step(doc)
    doc = docs.emit_space(MeasureSpace(("a",), (1,)))
    doc["atoms"][0]["id"] = 7
    with pytest.raises(DocumentError, match="strings"):
        docs.parse_space(doc)


def test_step_domain_length_must_match():
    doc = docs.emit_step(StepFunction1D.interval([(1, 2)]))
    doc["domain"]["length"] = "2/1"
    with pytest.raises(DocumentError, match="domain.length"):
        docs.parse_step(doc)


def test_space_ref_resolves_relative_to_document(tmp_path):
    X = MeasureSpace(("a", "b"), (1, 2))
    (tmp_path / "space.json").write_text(docs.dumps(docs.emit_space(X)))
    doc = {"version": 1, "kind": "weighted_function", "space_ref": "space.json", "values": {"a": "1/1", "b": "0/1"}}
    f = docs.parse_weighted(doc, base=tmp_path)
    assert f.space == X and f["a"] == 1


def test_mass_distribution_infinite_entry():
    d = MassDistribution.from_pairs([(1, 2), (0, INF)])
    doc = docs.emit_mass(d)
    assert {"value": "0/1", "mass": "inf"} in doc["entries"]
    assert docs.parse_mass(doc) == d
