from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmo_rearrangement import (
    Basis,
    InvariantError,
    MeasureSpace,
    NotMonotone,
    StepFunction1D,
    WeightedFunction,
    bmo_discrete,
    bmo_interval_enclosure,
    bmo_monotone_interval,
    bmo_step_exact,
    mean,
    oscillation,
)
from bmo_rearrangement.harness import GeneratorConfig, gen_step

from oracles import all_subsets, brute_bmo_sets, dense_interval_sup, dense_monotone_sup, omega_pieces

CHI = StepFunction1D.interval([(1, 1), (1, 0)])
TWO_ZERO = StepFunction1D.interval([(1, 2), (1, 0)])

pieces = st.lists(st.tuples(st.fractions(min_value=F(1, 8), max_value=2, max_denominator=8),
                            st.fractions(min_value=-3, max_value=3, max_denominator=8)),
                  min_size=1, max_size=6)


def test_mean_examples():
    X = MeasureSpace(("a", "b"), (1, 3))
    assert mean(WeightedFunction(X, (5, 5)), ["a"]) == 5
    assert mean(CHI, (0, 2)) == F(1, 2)
    assert mean(WeightedFunction(X, (2, 0)), ["a", "b"]) == F(1, 2)


def test_oscillation_examples():
    assert oscillation(StepFunction1D.interval([(3, 7)]), (0, 3)) == 0
    assert oscillation(CHI, (0, 2)) == F(1, 2)
    assert oscillation(TWO_ZERO, (0, F(3, 2))) == F(8, 9)


def test_basis_validation():
    X = MeasureSpace(("a", "b"), (1, 1))
    with pytest.raises(InvariantError):
        Basis(X, (frozenset({"a"}),))
    with pytest.raises(InvariantError):
        Basis(X, (frozenset(), frozenset({"a", "b"})))


def test_bmo_discrete_examples():
    X = MeasureSpace(("1", "2"), (1, 1))
    basis = Basis(X, (frozenset({"1"}), frozenset({"2"}), frozenset({"1", "2"})))
    assert bmo_discrete(WeightedFunction(X, (0, 2)), basis) == 1
    assert bmo_discrete(WeightedFunction(X, (4, 4)), basis) == 0


def test_bmo_discrete_matches_exhaustive_recomputation():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 6)
        w = [F(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(n)]
        v = [F(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)]
        X = MeasureSpace(tuple(str(i) for i in range(n)), w)
        subsets = list(all_subsets(n))
        basis = Basis(X, tuple(frozenset(str(i) for i in s) for s in subsets))
        assert bmo_discrete(WeightedFunction(X, v), basis) == brute_bmo_sets(v, w, subsets)


def test_monotone_seminorm_examples():
    assert bmo_monotone_interval(StepFunction1D.interval([(2, 5)])).value == 0
    r = bmo_monotone_interval(TWO_ZERO)
    assert r.value == 1 and r.witness == (0, 2) and r.boundary_limit
    r = bmo_monotone_interval(StepFunction1D.interval([(1, 3), (1, 1), (1, 0)]))
    # frozen from a 10^6-point sampling oracle: 1.12499999999998 at t = 2.666667
    assert r.value == F(9, 8) and r.witness == (0, F(8, 3))
    assert abs(float(r.value) - dense_monotone_sup([(1, 3), (1, 1), (1, 0)])[0]) < 1e-5


def test_monotone_seminorm_rejects_non_monotone():
    with pytest.raises(NotMonotone):
        bmo_monotone_interval(StepFunction1D.interval([(1, 0), (1, 2), (1, 1)]))


def test_monotone_seminorm_on_halfline():
    f = StepFunction1D.on_halfline([(1, 2)], 0)
    r = bmo_monotone_interval(f)
    # prefix (0, t), t > 1: Omega = 4 (t - 1) / t^2, maximized at t = 2
    assert r.value == 1 and r.witness == (0, 2)


def test_monotone_seminorm_against_dense_oracle():
    cfg = GeneratorConfig()
    for k in range(40):
        rng = random.Random(k)
        f = gen_step(rng, cfg, rng.choice(["decreasing", "increasing"]))
        exact = bmo_monotone_interval(f)
        approx, (a, b) = dense_monotone_sup(list(f.pieces))
        assert abs(float(exact.value) - approx) <= 1e-5
        a, b = F(a).limit_denominator(10**7), F(b).limit_denominator(10**7)
        if b > a:
            assert exact.value >= omega_pieces(f.pieces, max(a, F(0)), min(b, f.length))
        assert omega_pieces(f.pieces, *exact.witness) == exact.value


def test_exact_step_seminorm_frozen_value():
    f = StepFunction1D.interval([(F(1, 4), 1), (F(1, 4), -2), (F(1, 2), F(3, 2))])
    r = bmo_step_exact(f)
    # frozen from an 800-point grid over all endpoint pairs: 1.75
    assert r.value == F(7, 4) and r.witness == (F(1, 4), F(3, 4))


def test_exact_step_seminorm_against_grid_oracle():
    cfg = GeneratorConfig(max_pieces=5, max_denominator=8)
    for k in range(25):
        f = gen_step(random.Random(100 + k), cfg)
        exact = bmo_step_exact(f)
        grid = dense_interval_sup(list(f.pieces), 240)
        assert float(exact.value) >= grid - 1e-12
        assert omega_pieces(f.pieces, *exact.witness) == exact.value


def test_exact_step_seminorm_equals_monotone_on_monotone_input():
    cfg = GeneratorConfig()
    for k in range(30):
        rng = random.Random(200 + k)
        f = gen_step(rng, cfg, rng.choice(["decreasing", "increasing"]))
        assert bmo_step_exact(f).value == bmo_monotone_interval(f).value


def test_enclosure_examples():
    e = bmo_interval_enclosure(CHI, F(1, 1000), 5000)
    assert F(1, 2) in e and e.lo == e.hi == F(1, 2)
    e = bmo_interval_enclosure(StepFunction1D.interval([(1, 4)]), F(1, 1000), 100)
    assert e.lo == e.hi == 0
    mono = StepFunction1D.interval([(F(1, 3), 3), (F(1, 3), 1), (F(1, 3), 0)])
    assert bmo_monotone_interval(mono).value in bmo_interval_enclosure(mono, F(1, 1000), 100)


def test_enclosure_upper_bound_is_independent_of_anchored_solver():
    cfg = GeneratorConfig(max_pieces=6)
    for k in range(15):
        f = gen_step(random.Random(300 + k), cfg)
        exact = bmo_step_exact(f).value
        e = bmo_interval_enclosure(f, F(1, 100), 4000, anchored=False)
        assert e.lo <= exact <= e.hi
        if e.converged:
            assert e.hi - e.lo <= F(1, 100)


@settings(max_examples=60, deadline=None)
@given(pieces)
def test_half_oscillation_bound(ps):
    f = StepFunction1D.interval(ps)
    osc = max(f.values) - min(f.values)
    assert bmo_step_exact(f).value <= osc / 2


@settings(max_examples=60, deadline=None)
@given(pieces, st.integers(1, 7), st.integers(1, 7))
def test_exact_value_dominates_sampled_intervals(ps, i, j):
    f = StepFunction1D.interval(ps)
    T = f.length
    a, b = sorted((T * F(i, 8), T * F(j, 8) + T / 16))
    assert bmo_step_exact(f).value >= omega_pieces(f.pieces, a, min(b, T))
