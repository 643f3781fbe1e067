"""Finite metric measure spaces, closed balls, doubling constants and
Calderón–Zygmund decompositions.

On a finite space every radius-dependent quantity is a step function of the
radius with jumps at (scaled) pairwise distances, so suprema over ``r > 0``
reduce to finitely many exact evaluations.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from ._numbers import rational
from .errors import InvalidSpace, InvariantError, LevelTooLow, NegativeValues, NonpositiveLevel
from .oscillation import mean, mean_interval
from .rearrange import MeasureSpace, StepFunction1D, WeightedFunction

__all__ = [
    "FiniteMetricMeasureSpace",
    "Ball",
    "Interval",
    "CZDecomposition",
    "CZReport",
    "distinct_balls",
    "doubling_ratio",
    "c_star",
    "c_star_probe",
    "vitali_cover",
    "check_vitali",
    "cz_decompose",
    "verify_cz",
    "rising_sun_cz_1d",
]


@dataclass(frozen=True)
class FiniteMetricMeasureSpace(MeasureSpace):
    distances: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        n = len(self.ids)
        rows = tuple(tuple(rational(x) for x in row) for row in self.distances)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InvalidSpace(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if rows[i][i] != 0:
                raise InvalidSpace(f"d({self.ids[i]!r}, itself) must be 0")
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise InvalidSpace(f"distance matrix not symmetric at ({self.ids[i]!r}, {self.ids[j]!r})")
                if rows[i][j] <= 0:
                    raise InvalidSpace(f"distinct points {self.ids[i]!r}, {self.ids[j]!r} at distance <= 0")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if rows[i][k] > rows[i][j] + rows[j][k]:
                        raise InvalidSpace(
                            f"triangle inequality fails: d({self.ids[i]!r},{self.ids[k]!r}) > "
                            f"d({self.ids[i]!r},{self.ids[j]!r}) + d({self.ids[j]!r},{self.ids[k]!r})")
        object.__setattr__(self, "distances", rows)
        # per centre: sorted distances and cumulative weights, for mu(B(x, r))
        profiles = []
        for i in range(n):
            order = sorted(range(n), key=lambda j: rows[i][j])
            ds, cum, acc = [], [], Fraction(0)
            for j in order:
                acc += self.weights[j]
                if ds and ds[-1] == rows[i][j]:
                    cum[-1] = acc
                else:
                    ds.append(rows[i][j])
                    cum.append(acc)
            profiles.append((tuple(ds), tuple(cum)))
        object.__setattr__(self, "_profiles", tuple(profiles))

    def ball_measure(self, i: int, r) -> Fraction:
        ds, cum = self._profiles[i]
        return cum[bisect.bisect_right(ds, r) - 1]

    def center_distances(self, i: int) -> tuple:
        """Distinct positive distances from point index ``i``, ascending."""
        return self._profiles[i][0][1:]

    def ball(self, center: Hashable, radius) -> "Ball":
        i = self.index(center)
        radius = rational(radius)
        if radius <= 0:
            raise InvariantError("ball radius must be positive")
        row = self.distances[i]
        members = frozenset(self.ids[j] for j in range(len(self.ids)) if row[j] <= radius)
        return Ball(center, radius, members, self.ball_measure(i, radius))

    def dilate(self, b: "Ball", factor) -> "Ball":
        return self.ball(b.center, b.radius * rational(factor))


@dataclass(frozen=True)
class Ball:
    center: Hashable
    radius: Fraction
    members: frozenset
    measure: Fraction


@dataclass(frozen=True)
class Interval:
    a: Fraction
    b: Fraction

    @property
    def measure(self) -> Fraction:
        return self.b - self.a


@dataclass(frozen=True)
class CZDecomposition:
    level: Fraction
    pairs: tuple  # ((A_i, A~_i), ...)
    constant: Fraction
    dilation: Fraction | None = None
    radii: tuple = ()


def distinct_balls(X: FiniteMetricMeasureSpace) -> list[Ball]:
    """One ball per distinct member set: the basis of all closed balls."""
    seen, out = set(), []
    for i, x in enumerate(X.ids):
        ds = X.center_distances(i)
        radii = [ds[0] / 2 if ds else Fraction(1)] + list(ds)
        for r in radii:
            b = X.ball(x, r)
            if b.members not in seen:
                seen.add(b.members)
                out.append(b)
    return out


def doubling_ratio(X: FiniteMetricMeasureSpace, lam) -> Fraction:
    """``sup_{x, r>0} mu(B(x, lam r)) / mu(B(x, r))``, exactly."""
    lam = rational(lam)
    if lam <= 1:
        raise InvariantError("dilation must exceed 1")
    best = Fraction(1)
    for i in range(len(X.ids)):
        ds = X.center_distances(i)
        if not ds:
            continue
        # both balls are constant on [s_k, s_{k+1}); closed balls are right-continuous
        cuts = sorted(set(ds) | {d / lam for d in ds})
        for r in [cuts[0] / 2] + cuts:
            best = max(best, X.ball_measure(i, lam * r) / X.ball_measure(i, r))
    return best


def c_star_probe(X: FiniteMetricMeasureSpace) -> Fraction:
    """A dilation in ``(3, 4]`` below every distance ratio exceeding 3."""
    ds = sorted({d for row in X.distances for d in row if d > 0})
    above = [q / p for p in ds for q in ds if q / p > 3]
    b = min(above) if above else None
    if b is None or b >= 4:
        return Fraction(4)
    return (3 + b) / 2


def c_star(X: FiniteMetricMeasureSpace) -> Fraction:
    """``inf_{lam > 3}`` of the doubling ratio: its right limit at 3."""
    return doubling_ratio(X, c_star_probe(X))


def check_vitali(X: FiniteMetricMeasureSpace, family: Sequence[Ball], chosen: Sequence[Ball], lam) -> None:
    """Raise AssertionError unless ``chosen`` is disjoint and its dilates cover ``family``."""
    for p in range(len(chosen)):
        for q in range(p + 1, len(chosen)):
            assert not (chosen[p].members & chosen[q].members), "selected balls overlap"
    covered = set()
    for b in chosen:
        covered |= X.dilate(b, lam).members
    union = set().union(*(b.members for b in family)) if family else set()
    assert union <= covered, f"points {sorted(map(str, union - covered))} not covered by dilated balls"


def vitali_cover(X: FiniteMetricMeasureSpace, family: Sequence[Ball], lam, *, check: bool = False) -> list[Ball]:
    """Greedy disjoint subfamily: largest radius first, ties by centre id order."""
    lam = rational(lam)
    if lam <= 3:
        raise InvariantError("the greedy covering needs a dilation > 3")
    order = sorted(family, key=lambda b: (-b.radius, X.index(b.center)))
    chosen: list[Ball] = []
    used: set = set()
    for b in order:
        if not (b.members & used):
            chosen.append(b)
            used |= b.members
    if check:
        check_vitali(X, family, chosen, lam)
    return chosen


def cz_decompose(X: FiniteMetricMeasureSpace, g: WeightedFunction, gamma, lam, *,
                 check: bool = False) -> CZDecomposition | None:
    """Ball decomposition of ``g >= 0`` at level ``gamma``; None if ``g <= gamma``.

    For each ``x`` with ``g(x) > gamma``,
    ``r(x) = inf{r > 0 : mean of g on B(x, lam r) <= gamma}``, which is
    ``d / lam`` for the smallest distance ``d`` from ``x`` whose ball has mean at
    most ``gamma``.  The balls ``B(x, r(x))`` are thinned by
    :func:`vitali_cover` and paired with their ``lam``-dilates; the declared
    constant is ``doubling_ratio(X, lam)``.  Points with ``g(x) <= gamma`` have
    ``r(x) = 0`` and contribute nothing.
    """
    gamma, lam = rational(gamma), rational(lam)
    if any(v < 0 for v in g.values):
        raise NegativeValues("decomposition needs a nonnegative function")
    if gamma <= 0:
        raise NonpositiveLevel("decomposition level must be positive")
    if not (3 < lam <= 5):
        raise InvariantError("dilation must lie in (3, 5]")
    hot = [i for i, v in enumerate(g.values) if v > gamma]
    if not hot:
        return None
    family, radii = [], {}
    for i in hot:
        x = X.ids[i]
        r = None
        for d in X.center_distances(i):
            if mean(g, X.ball(x, d).members) <= gamma:
                r = d / lam
                break
        if r is None:
            raise LevelTooLow(f"no ball around {x!r} has mean <= {gamma}")
        family.append(X.ball(x, r))
        radii[x] = r
    chosen = vitali_cover(X, family, lam, check=check)
    pairs = tuple((b, X.dilate(b, lam)) for b in chosen)
    return CZDecomposition(gamma, pairs, doubling_ratio(X, lam), lam,
                           tuple(radii[b.center] for b in chosen))


@dataclass
class CZReport:
    overlapping: list = field(default_factory=list)
    cond_i: list = field(default_factory=list)
    cond_ii: list = field(default_factory=list)
    cond_iii: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.overlapping or self.cond_i or self.cond_ii or self.cond_iii)

    def as_dict(self) -> dict:
        return {"overlapping": self.overlapping, "cond_i": self.cond_i,
                "cond_ii": self.cond_ii, "cond_iii": self.cond_iii, "passed": self.passed}


def _verify_balls(dec: CZDecomposition, g: WeightedFunction, gamma: Fraction, rep: CZReport):
    space = g.space
    for p, (A, _) in enumerate(dec.pairs):
        for q in range(p + 1, len(dec.pairs)):
            if A.members & dec.pairs[q][0].members:
                rep.overlapping.append((p, q))
    union = set()
    for i, (A, At) in enumerate(dec.pairs):
        if not (A.members <= At.members) or space.measure(At.members) > dec.constant * space.measure(A.members):
            rep.cond_i.append(i)
        if not (mean(g, At.members) <= gamma <= mean(g, A.members)):
            rep.cond_ii.append(i)
        union |= At.members
    for x, v in zip(space.ids, g.values):
        if x not in union and v > gamma:
            rep.cond_iii.append(x)


def _verify_intervals(dec: CZDecomposition, f: StepFunction1D, gamma: Fraction, rep: CZReport):
    ivs = [A for A, _ in dec.pairs]
    for p in range(len(ivs)):
        for q in range(p + 1, len(ivs)):
            if ivs[p].a < ivs[q].b and ivs[q].a < ivs[p].b:
                rep.overlapping.append((p, q))
    for i, (A, At) in enumerate(dec.pairs):
        if not (At.a <= A.a and A.b <= At.b) or At.measure > dec.constant * A.measure:
            rep.cond_i.append(i)
        if not (mean_interval(f, At.a, At.b) <= gamma <= mean_interval(f, A.a, A.b)):
            rep.cond_ii.append(i)
    covers = sorted((At.a, At.b) for _, At in dec.pairs)
    for k, (left, right, v) in enumerate(f.cells()):
        if v <= gamma:
            continue
        # does the cell have positive-length part outside the union?
        x = left
        for a, b in covers:
            if a <= x < b:
                x = b
        if x < right:
            rep.cond_iii.append(k)


def verify_cz(dec: CZDecomposition, g, gamma) -> CZReport:
    """Exact check of disjointness and conditions (i)-(iii); lists every violation."""
    gamma = rational(gamma)
    rep = CZReport()
    if isinstance(g, StepFunction1D):
        _verify_intervals(dec, g, gamma, rep)
    else:
        _verify_balls(dec, g, gamma, rep)
    return rep


def rising_sun_cz_1d(f: StepFunction1D, gamma) -> CZDecomposition:
    """1-Calderón–Zygmund decomposition of ``f`` on ``(0, T)`` at ``gamma > f_X``.

    Works with ``H(x) = int_0^x (f - gamma)``.  The leading interval is
    ``(0, b)`` with ``b`` the last zero of ``H`` (when ``H`` becomes positive at
    all); after it, the "shadow" points having a higher value of ``H`` to their
    right form open intervals on which ``H`` takes equal values at both ends,
    i.e. the mean of ``f`` is exactly ``gamma``.  Off all intervals ``H`` is
    nonincreasing, so ``f <= gamma`` there.
    """
    if f.halfline:
        raise InvariantError("rising sun decomposition needs a bounded interval")
    gamma = rational(gamma)
    T = f.length
    if gamma <= mean_interval(f, 0, T):
        raise LevelTooLow("level must exceed the mean of f over the whole interval")
    cells = f.cells()
    H = [Fraction(0)]
    for left, right, v in cells:
        H.append(H[-1] + (right - left) * (v - gamma))
    xs = [c[0] for c in cells] + [T]

    start = Fraction(0)
    for k in range(len(cells), 0, -1):
        if H[k] >= 0:
            start = xs[k]
            break
        if H[k - 1] >= 0:
            slope = cells[k - 1][2] - gamma
            start = xs[k - 1] + H[k - 1] / (-slope)
            break

    def h(x):
        k = min(bisect.bisect_right(xs, x) - 1, len(cells) - 1)
        return H[k] + (x - xs[k]) * (cells[k][2] - gamma)

    shadow = []
    R = H[-1]
    for k in range(len(cells), 0, -1):
        lo, hi = max(xs[k - 1], start), xs[k]
        if hi <= start:
            break
        slope = cells[k - 1][2] - gamma
        if slope > 0:
            shadow.append((lo, hi))
        elif slope == 0:
            if H[k] < R:
                shadow.append((lo, hi))
        else:
            c = xs[k - 1] + (H[k - 1] - R) / (-slope)
            if c < hi:
                shadow.append((max(c, lo), hi))
        R = max(R, h(lo), H[k])
    merged: list = []
    for a, b in sorted(shadow):
        if merged and merged[-1][1] >= a:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    ivs = ([Interval(Fraction(0), start)] if start > 0 else []) + [Interval(a, b) for a, b in merged]
    return CZDecomposition(gamma, tuple((I, I) for I in ivs), Fraction(1))
