"""Simple functions, distribution functions and decreasing rearrangements.

Two function models are supported: :class:`WeightedFunction` (values on the
atoms of a finite measure space) and :class:`StepFunction1D` (piecewise
constant on ``(0, T)`` or on the half-line ``(0, inf)``).  Both reduce to a
:class:`MassDistribution`, the multiset of ``(value, mass)`` pairs from which
all rearrangements are computed.

Infinite measure is modelled by entries of infinite mass ("tails").
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Union

from ._numbers import INF, Scalar, add_mass, is_inf, mass, rational
from .errors import (
    InfiniteMeasure,
    InvariantError,
    NotRearrangeable,
    OutOfDomain,
)

__all__ = [
    "MeasureSpace",
    "WeightedFunction",
    "MassDistribution",
    "StepFunction1D",
    "to_mass_distribution",
    "distribution_function",
    "decreasing_rearrangement",
    "signed_decreasing_rearrangement",
    "p_norm",
    "step_eval",
    "jump_points",
    "pointwise_compare",
]


@dataclass(frozen=True)
class MeasureSpace:
    """Finitely many atoms with strictly positive rational weights."""

    ids: tuple
    weights: tuple

    def __post_init__(self):
        ids = tuple(self.ids)
        weights = tuple(rational(w) for w in self.weights)
        if not ids:
            raise InvariantError("measure space must have at least one atom")
        if len(ids) != len(weights):
            raise InvariantError("one weight per atom is required")
        if len(set(ids)) != len(ids):
            raise InvariantError("atom ids must be unique")
        if any(w <= 0 for w in weights):
            raise InvariantError("atom weights must be strictly positive")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(ids)})

    def __len__(self) -> int:
        return len(self.ids)

    def index(self, atom: Hashable) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise InvariantError(f"unknown atom id {atom!r}") from None

    def indices(self, atoms: Iterable[Hashable]) -> list[int]:
        return sorted({self.index(a) for a in atoms})

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def measure(self, atoms: Iterable[Hashable]) -> Fraction:
        return sum((self.weights[i] for i in self.indices(atoms)), Fraction(0))


@dataclass(frozen=True)
class WeightedFunction:
    space: MeasureSpace
    values: tuple

    def __post_init__(self):
        values = tuple(rational(v) for v in self.values)
        if len(values) != len(self.space):
            raise InvariantError("every atom needs exactly one value")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, space: MeasureSpace, values: dict) -> "WeightedFunction":
        missing = [a for a in space.ids if a not in values]
        if missing:
            raise InvariantError(f"atoms without a value: {missing!r}")
        extra = [a for a in values if a not in space._index]
        if extra:
            raise InvariantError(f"values for unknown atoms: {extra!r}")
        return cls(space, tuple(values[a] for a in space.ids))

    def __getitem__(self, atom) -> Fraction:
        return self.values[self.space.index(atom)]

    def map(self, fn: Callable[[Fraction], Fraction]) -> "WeightedFunction":
        return WeightedFunction(self.space, tuple(fn(v) for v in self.values))


def _canonical_entries(pairs: Iterable) -> tuple:
    merged: dict = {}
    for value, m in pairs:
        value, m = rational(value), mass(m)
        if not (is_inf(m) or m > 0):
            raise InvariantError(f"mass must be positive or inf, got {m}")
        merged[value] = add_mass(merged.get(value, Fraction(0)), m)
    return tuple(sorted(merged.items(), key=lambda e: e[0], reverse=True))


@dataclass(frozen=True)
class MassDistribution:
    """Canonical multiset of ``(value, mass)``: values strictly decreasing."""

    entries: tuple

    def __post_init__(self):
        entries = _canonical_entries(self.entries)
        if not entries:
            raise InvariantError("mass distribution must be nonempty")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "MassDistribution":
        return cls(tuple(pairs))

    @property
    def total_mass(self) -> Scalar:
        total: Scalar = Fraction(0)
        for _, m in self.entries:
            total = add_mass(total, m)
        return total

    @property
    def is_finite(self) -> bool:
        return not is_inf(self.total_mass)

    @property
    def tail_level(self) -> Fraction | None:
        """Largest ``|v|`` carried by infinite mass, or None."""
        levels = [abs(v) for v, m in self.entries if is_inf(m)]
        return max(levels) if levels else None

    @property
    def is_rearrangeable(self) -> bool:
        # mu_f(alpha) -> 0; with finitely many entries mu_f vanishes from max|v| on.
        top = max(abs(v) for v, _ in self.entries)
        return distribution_function(self, top) == 0

    def map(self, fn: Callable[[Fraction], Fraction]) -> "MassDistribution":
        return MassDistribution(tuple((fn(v), m) for v, m in self.entries))

    def positive_part(self) -> "MassDistribution":
        return self.map(lambda v: max(v, Fraction(0)))

    def negative_part(self) -> "MassDistribution":
        return self.map(lambda v: max(-v, Fraction(0)))


@dataclass(frozen=True)
class StepFunction1D:
    """Piecewise-constant function on ``(0, T)`` or on ``(0, inf)``.

    ``pieces`` is a tuple of ``(length, value)``; on the half-line the last
    length is ``INF`` and its value is the tail value.  Adjacent equal values
    are merged, so two step functions are equal off their jump points iff
    they are structurally equal.
    """

    pieces: tuple
    halfline: bool = False

    def __post_init__(self):
        out: list = []
        raw = list(self.pieces)
        if not raw:
            raise InvariantError("step function needs at least one piece")
        for k, (length, value) in enumerate(raw):
            length, value = mass(length), rational(value)
            last = k == len(raw) - 1
            if is_inf(length):
                if not (self.halfline and last):
                    raise InvariantError("only the final half-line piece may be infinite")
            elif length <= 0:
                raise InvariantError(f"piece lengths must be positive, got {length}")
            if out and out[-1][1] == value:
                out[-1] = (add_mass(out[-1][0], length), value)
            else:
                out.append((length, value))
        if self.halfline and not is_inf(out[-1][0]):
            raise InvariantError("half-line step function must end with an infinite tail piece")
        object.__setattr__(self, "pieces", tuple(out))
        lefts = [Fraction(0)]
        for length, _ in out[:-1]:
            lefts.append(lefts[-1] + length)
        object.__setattr__(self, "_lefts", tuple(lefts))

    @classmethod
    def interval(cls, pieces: Iterable) -> "StepFunction1D":
        return cls(tuple(pieces), False)

    @classmethod
    def on_halfline(cls, pieces: Iterable, tail) -> "StepFunction1D":
        return cls(tuple(pieces) + ((INF, tail),), True)

    @property
    def length(self) -> Scalar:
        if self.halfline:
            return INF
        return self._lefts[-1] + self.pieces[-1][0]

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self.pieces)

    @property
    def tail(self) -> Fraction | None:
        return self.pieces[-1][1] if self.halfline else None

    def breakpoints(self) -> tuple:
        """Interior jump locations (strictly inside the domain)."""
        return self._lefts[1:]

    def cells(self) -> list:
        """``(left, right, value)`` per piece; ``right`` is INF for the tail."""
        out = []
        for left, (length, value) in zip(self._lefts, self.pieces):
            out.append((left, add_mass(left, length), value))
        return out

    def map(self, fn: Callable[[Fraction], Fraction]) -> "StepFunction1D":
        return StepFunction1D(tuple((l, fn(v)) for l, v in self.pieces), self.halfline)

    def reflect(self) -> "StepFunction1D":
        """``s -> f(T - s)`` (equal to the true reflection off jump points)."""
        if self.halfline:
            raise InfiniteMeasure("cannot reflect a half-line function")
        return StepFunction1D(tuple(reversed(self.pieces)), False)

    def is_decreasing(self) -> bool:
        vals = self.values
        return all(a >= b for a, b in zip(vals, vals[1:]))

    def is_increasing(self) -> bool:
        vals = self.values
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def segments(self, a, b) -> list:
        """``(length, value)`` pieces of the restriction to ``(a, b)``."""
        a, b = rational(a), rational(b)
        if not (0 <= a < b) or (not self.halfline and b > self.length):
            raise OutOfDomain(f"interval ({a}, {b}) is not a subinterval of the domain")
        out = []
        k = bisect.bisect_right(self._lefts, a) - 1
        while k < len(self.pieces):
            left = self._lefts[k]
            right = add_mass(left, self.pieces[k][0])
            lo, hi = max(left, a), min(right, b)
            if hi > lo:
                out.append((hi - lo, self.pieces[k][1]))
            if right >= b:
                break
            k += 1
        return out

    def integral(self, a, b) -> Fraction:
        return sum((l * v for l, v in self.segments(a, b)), Fraction(0))


Function = Union[WeightedFunction, StepFunction1D, MassDistribution]


def to_mass_distribution(f: Function) -> MassDistribution:
    """Push the underlying measure forward through the function values."""
    if isinstance(f, MassDistribution):
        return f
    if isinstance(f, WeightedFunction):
        return MassDistribution(tuple(zip(f.values, f.space.weights)))
    if isinstance(f, StepFunction1D):
        return MassDistribution(tuple((v, l) for l, v in f.pieces))
    raise TypeError(f"cannot build a mass distribution from {type(f).__name__}")


def distribution_function(d: Function, alpha) -> Scalar:
    """``mu_f(alpha)``: total mass where ``|value| > alpha`` (may be INF)."""
    alpha = rational(alpha)
    if alpha < 0:
        raise InvariantError("distribution function is defined for alpha >= 0 only")
    total: Scalar = Fraction(0)
    for v, m in to_mass_distribution(d).entries:
        if abs(v) > alpha:
            total = add_mass(total, m)
    return total


def decreasing_rearrangement(d: Function) -> StepFunction1D:
    """``f*``: the decreasing right-continuous function equimeasurable with ``|f|``.

    Finite total mass gives a function on ``(0, mu(X))``; otherwise the result
    lives on the half-line and its tail value is the largest ``|v|`` carried by
    an infinite-mass entry (smaller finite-mass levels never surface).
    """
    d = to_mass_distribution(d)
    if not d.is_rearrangeable:
        raise NotRearrangeable("mu_f(alpha) does not tend to 0")
    tail = d.tail_level
    levels: dict = {}
    for v, m in d.entries:
        if tail is not None and abs(v) <= tail:
            continue
        levels[abs(v)] = add_mass(levels.get(abs(v), Fraction(0)), m)
    pieces = [(m, v) for v, m in sorted(levels.items(), reverse=True)]
    if tail is None:
        return StepFunction1D.interval(pieces)
    return StepFunction1D.on_halfline(pieces, tail)


def signed_decreasing_rearrangement(d: Function) -> StepFunction1D:
    """``f°``: decreasing sort of the signed values on ``(0, mu(X))``."""
    d = to_mass_distribution(d)
    if not d.is_finite:
        raise InfiniteMeasure("signed rearrangement needs finite total mass")
    return StepFunction1D.interval((m, v) for v, m in d.entries)


def p_norm(d: Function, p) -> Scalar:
    """Exact L^p data: p=1 gives ``sum |v| m``, p=2 the *squared* norm, p=inf ``max |v|``."""
    d = to_mass_distribution(d)
    if p in (INF, "inf"):
        return max(abs(v) for v, _ in d.entries)
    if p not in (1, 2):
        raise ValueError("p must be 1, 2 or inf")
    total: Scalar = Fraction(0)
    for v, m in d.entries:
        if v == 0:
            continue
        total = add_mass(total, abs(v) ** p * m if not is_inf(m) else INF)
    return total


def step_eval(f: StepFunction1D, s) -> Fraction:
    """Right-continuous evaluation at ``s`` in ``(0, length)``."""
    s = rational(s)
    if not (0 < s < f.length):
        raise OutOfDomain(f"s={s} outside (0, {f.length})")
    k = bisect.bisect_right(f._lefts, s) - 1
    return f.pieces[k][1]


def jump_points(*fs: StepFunction1D) -> list:
    pts = set()
    for f in fs:
        pts.update(f.breakpoints())
    return sorted(pts)


def pointwise_compare(f: StepFunction1D, g: StepFunction1D) -> tuple[bool, bool]:
    """Return ``(f >= g everywhere, f > g somewhere)`` for equal-domain step functions."""
    if f.halfline != g.halfline or (not f.halfline and f.length != g.length):
        raise InvariantError("step functions live on different domains")
    ge, gt = True, False
    for s in [Fraction(0)] + jump_points(f, g):
        # both are constant on [s, next jump); sample a point just inside
        probe = s if s > 0 else None
        fv = f.pieces[0][1] if probe is None else step_eval(f, probe)
        gv = g.pieces[0][1] if probe is None else step_eval(g, probe)
        ge = ge and fv >= gv
        gt = gt or fv > gv
    return ge, gt
