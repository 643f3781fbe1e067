"""Piecewise-linear maps applied value-wise to functions (truncations etc.)."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from ._numbers import rational
from .errors import InvariantError
from .rearrange import MassDistribution, StepFunction1D, WeightedFunction

__all__ = [
    "MonotoneMap",
    "inner_truncation",
    "outer_truncation",
    "outer_truncation_literal",
    "identity",
    "affine",
    "positive_part",
    "negative_part",
    "absolute_value",
    "compose",
]


@dataclass(frozen=True)
class MonotoneMap:
    """Continuous piecewise-linear map ``R -> R`` with rational data.

    Determined by knots ``xs`` (strictly increasing, at least one), the values
    ``ys`` at the knots and the slopes of the two unbounded rays.  The name is
    historical: the class also represents non-monotone maps such as ``|x|``;
    the flags below are computed from the data.
    """

    xs: tuple
    ys: tuple
    left_slope: Fraction
    right_slope: Fraction

    def __post_init__(self):
        xs = tuple(rational(x) for x in self.xs)
        ys = tuple(rational(y) for y in self.ys)
        if not xs or len(xs) != len(ys):
            raise InvariantError("a map needs at least one knot and one value per knot")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise InvariantError("knots must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "left_slope", rational(self.left_slope))
        object.__setattr__(self, "right_slope", rational(self.right_slope))

    def __call__(self, x) -> Fraction:
        x = rational(x)
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0] + self.left_slope * (x - xs[0])
        if x >= xs[-1]:
            return ys[-1] + self.right_slope * (x - xs[-1])
        k = bisect.bisect_right(xs, x) - 1
        return ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])

    @property
    def slopes(self) -> tuple:
        inner = [(b - a) / (q - p) for p, q, a, b in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]
        return (self.left_slope, *inner, self.right_slope)

    @property
    def is_increasing(self) -> bool:
        return all(s >= 0 for s in self.slopes)

    @property
    def is_nonexpansive(self) -> bool:
        return all(abs(s) <= 1 for s in self.slopes)

    @property
    def is_odd(self) -> bool:
        if self.left_slope != self.right_slope:
            return False
        pts = {Fraction(0)} | set(self.xs) | {-x for x in self.xs}
        return all(self(x) == -self(-x) for x in pts)

    def then(self, outer: "MonotoneMap") -> "MonotoneMap":
        """``outer o self`` (apply ``self`` first)."""
        pts = set(self.xs)
        segments = list(zip(self.xs, self.xs[1:]))
        for k in outer.xs:
            for p, q in segments:
                a, b = self(p), self(q)
                if a != b and min(a, b) <= k <= max(a, b):
                    pts.add(p + (k - a) * (q - p) / (b - a))
            lo, hi = self.xs[0], self.xs[-1]
            if self.left_slope != 0:
                x = lo + (k - self(lo)) / self.left_slope
                if x < lo:
                    pts.add(x)
            if self.right_slope != 0:
                x = hi + (k - self(hi)) / self.right_slope
                if x > hi:
                    pts.add(x)
        xs = sorted(pts)
        ys = [outer(self(x)) for x in xs]
        left = outer(self(xs[0])) - outer(self(xs[0] - 1))
        right = outer(self(xs[-1] + 1)) - outer(self(xs[-1]))
        return _simplify(xs, ys, left, right)


def _simplify(xs, ys, left, right) -> MonotoneMap:
    # drop knots where the map does not bend
    keep_x, keep_y = [], []
    n = len(xs)
    for i in range(n):
        sl = left if i == 0 else (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
        sr = right if i == n - 1 else (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        if sl != sr:
            keep_x.append(xs[i])
            keep_y.append(ys[i])
    if not keep_x:
        keep_x, keep_y = [xs[0]], [ys[0]]
    return MonotoneMap(tuple(keep_x), tuple(keep_y), left, right)


def _check_beta(beta) -> Fraction:
    beta = rational(beta)
    if beta <= 0:
        raise InvariantError("truncation level must be positive")
    return beta


def inner_truncation(beta) -> MonotoneMap:
    """``min(a_+, beta) - min(a_-, beta)``: clamp to ``[-beta, beta]``."""
    beta = _check_beta(beta)
    return MonotoneMap((-beta, beta), (-beta, beta), 0, 0)


def outer_truncation(beta) -> MonotoneMap:
    """``sign(a) (|a| - beta)_+``, the remainder after :func:`inner_truncation`."""
    beta = _check_beta(beta)
    return MonotoneMap((-beta, beta), (0, 0), 1, 1)


def outer_truncation_literal(beta) -> MonotoneMap:
    """``(a - beta)_+ - (a - beta)_-`` read literally, which is just ``a - beta``.

    Neither odd nor complementary to :func:`inner_truncation`; kept only so the
    discrepancy can be demonstrated.
    """
    beta = _check_beta(beta)
    return affine(1, -beta)


def identity() -> MonotoneMap:
    return affine(1, 0)


def affine(slope, intercept) -> MonotoneMap:
    return MonotoneMap((0,), (intercept,), slope, slope)


def positive_part() -> MonotoneMap:
    return MonotoneMap((0,), (0,), 0, 1)


def negative_part() -> MonotoneMap:
    """``a_- = max(-a, 0)`` (decreasing)."""
    return MonotoneMap((0,), (0,), -1, 0)


def absolute_value() -> MonotoneMap:
    return MonotoneMap((0,), (0,), -1, 1)


def compose(phi: MonotoneMap, f):
    """Apply ``phi`` value-wise; the result is of the same kind as ``f``."""
    if isinstance(f, MonotoneMap):
        return f.then(phi)
    if isinstance(f, (WeightedFunction, MassDistribution, StepFunction1D)):
        return f.map(phi)
    raise TypeError(f"cannot compose a map with {type(f).__name__}")
