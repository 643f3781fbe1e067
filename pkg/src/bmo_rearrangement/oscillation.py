"""Means, mean oscillations and BMO seminorms, all in exact arithmetic.

Three seminorm routines:

* :func:`bmo_discrete` -- max of the mean oscillation over a finite basis.
* :func:`bmo_monotone_interval` -- monotone step functions, via the prefix and
  suffix families ``Omega(f, (0, t))`` and ``Omega(f, (t, T))``.
* :func:`bmo_step_exact` / :func:`bmo_interval_enclosure` -- arbitrary step
  functions on an interval.

One-parameter families.  Fix one endpoint of the interval and let its length
``t`` vary inside a cell of the step function.  As long as the set of pieces
lying above the running mean does not change (a *regime*), the oscillation has
the form ``(P t - Q) / t**2``, whose only stationary point is ``t = 2Q/P``.
Regime changes happen where the running mean crosses a piece value, which is a
linear equation in ``t``.  So the supremum of a family is the maximum over a
finite set of rational candidates.

Anchoring.  For a general step function, with both endpoints free inside a
fixed pair of cells and a fixed regime, the oscillation is affine along the
direction that slides the interval without changing its length.  A maximiser can
therefore be slid until one endpoint reaches a breakpoint (or the regime
changes, and on a regime boundary the oscillation is a ratio of affine functions,
hence monotone).  The supremum over all subintervals is thus attained by an
interval with an endpoint at ``0``, ``T`` or a jump point, and
:func:`bmo_step_exact` runs the one-parameter solver from each such anchor in
both directions.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ._numbers import INF, is_inf, rational
from .errors import EmptySet, NotMonotone, OutOfDomain
from .rearrange import MeasureSpace, StepFunction1D, WeightedFunction

__all__ = [
    "Basis",
    "Enclosure",
    "SeminormResult",
    "mean",
    "mean_interval",
    "oscillation",
    "oscillation_interval",
    "omega",
    "bmo_discrete",
    "bmo_monotone_interval",
    "bmo_step_exact",
    "bmo_interval_enclosure",
    "family_sup",
]

ZERO = Fraction(0)


def omega(segments: Iterable) -> Fraction:
    """Mean oscillation of a finite list of ``(weight, value)`` pairs.

    Computes both halves of the identity ``Omega = 2 avg (f - m)_+ =
    2 avg (f - m)_-`` and checks that they agree.
    """
    segs = list(segments)
    total = sum((w for w, _ in segs), ZERO)
    if total <= 0:
        raise EmptySet("mean oscillation needs a set of positive measure")
    m = sum((w * v for w, v in segs), ZERO) / total
    pos = neg = ZERO
    for w, v in segs:
        if v > m:
            pos += w * (v - m)
        elif v < m:
            neg += w * (m - v)
    assert pos == neg, "positive and negative deviations from the mean must balance"
    return (pos + neg) / total


def _atom_segments(f: WeightedFunction, A) -> list:
    idx = f.space.indices(A)
    if not idx:
        raise EmptySet("mean over an empty set")
    return [(f.space.weights[i], f.values[i]) for i in idx]


def mean_interval(f: StepFunction1D, a, b) -> Fraction:
    a, b = rational(a), rational(b)
    return f.integral(a, b) / (b - a)


def oscillation_interval(f: StepFunction1D, a, b) -> Fraction:
    return omega(f.segments(a, b))


def mean(f, A) -> Fraction:
    """Mean of ``f`` over an atom set, or over ``A = (a, b)`` for step functions."""
    if isinstance(f, StepFunction1D):
        return mean_interval(f, *A)
    segs = _atom_segments(f, A)
    return sum((w * v for w, v in segs), ZERO) / sum((w for w, _ in segs), ZERO)


def oscillation(f, A) -> Fraction:
    """``Omega(f, A)``: average of ``|f - f_A|`` over ``A``."""
    if isinstance(f, StepFunction1D):
        return oscillation_interval(f, *A)
    return omega(_atom_segments(f, A))


@dataclass(frozen=True)
class Basis:
    """Finite family of atom sets, each of positive measure, covering the space."""

    space: MeasureSpace
    sets: tuple

    def __post_init__(self):
        sets = tuple(frozenset(s) for s in self.sets)
        covered = set()
        for s in sets:
            if not s:
                raise EmptySet("basis sets must be nonempty")
            self.space.indices(s)
            covered |= s
        missing = set(self.space.ids) - covered
        if missing:
            raise EmptySet(f"basis does not cover atoms {sorted(map(str, missing))}")
        object.__setattr__(self, "sets", sets)


def bmo_discrete(f: WeightedFunction, basis) -> Fraction:
    """``sup`` of ``Omega(f, A)`` over the basis sets (or balls)."""
    sets = basis.sets if isinstance(basis, Basis) else basis
    best = ZERO
    for A in sets:
        members = getattr(A, "members", A)
        best = max(best, oscillation(f, members))
    return best


# ---------------------------------------------------------------------------
# one-parameter families


def _prefix_omega(segs: Sequence, t: Fraction) -> Fraction:
    out = []
    left = t
    for length, value in segs:
        if left <= 0:
            break
        take = left if is_inf(length) else min(length, left)
        out.append((take, value))
        left -= take
    return omega(out)


def family_sup(segs: Sequence) -> tuple[Fraction, Fraction]:
    """Exact ``sup_t Omega`` over the initial portions ``(0, t)`` of ``segs``.

    ``segs`` is a list of ``(length, value)`` read outward from the anchor; the
    last length may be INF.  Returns ``(sup, t)`` with the smallest maximising
    ``t``; the sup is always attained (at ``t -> inf`` the oscillation decays).
    """
    best, best_t = ZERO, None
    X = ZERO  # left end of current cell
    A = ZERO  # integral over (0, X)
    for k, (length, v) in enumerate(segs):
        hi_cell = INF if is_inf(length) else X + length
        if k > 0:
            C = A - v * X
            cuts = set()
            if C != 0:
                for _, vj in segs[:k]:
                    if vj != v:
                        tj = C / (vj - v)
                        if X < tj < hi_cell:
                            cuts.add(tj)
            bounds = [X] + sorted(cuts) + [hi_cell]
            cands = set(cuts)
            if not is_inf(hi_cell):
                cands.add(hi_cell)
            for lo, hi in zip(bounds, bounds[1:]):
                if is_inf(hi):
                    p1, p2 = lo + 1, lo + 2
                else:
                    p1, p2 = lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3
                g1 = p1 * p1 * _prefix_omega(segs, p1)
                g2 = p2 * p2 * _prefix_omega(segs, p2)
                P = (g2 - g1) / (p2 - p1)
                Q = P * p1 - g1
                if P != 0:
                    ts = 2 * Q / P
                    if lo < ts < hi:
                        cands.add(ts)
            for t in sorted(cands):
                val = _prefix_omega(segs, t)
                if val > best or best_t is None:
                    best, best_t = val, t
        if is_inf(length):
            break
        A += length * v
        X = hi_cell
    if best_t is None:
        # a single (constant) cell: every portion has zero oscillation
        first = segs[0][0]
        best_t = Fraction(1) if is_inf(first) else first
    return best, best_t


@dataclass(frozen=True)
class SeminormResult:
    """Exact seminorm with its lexicographically smallest witness interval.

    ``boundary_limit`` is set when the witness is the whole domain ``(0, T)``:
    the prefix/suffix families range over ``0 < t < T`` and reach that value
    only in the limit.
    """

    value: Fraction
    witness: tuple
    family: str
    boundary_limit: bool = False


def _pick(cands: list) -> tuple:
    best = max(c[0] for c in cands)
    return min((c for c in cands if c[0] == best), key=lambda c: c[1])


def bmo_monotone_interval(f: StepFunction1D) -> SeminormResult:
    """Exact BMO seminorm of a monotone step function on ``(0, T)`` or ``R_+``."""
    dec, inc = f.is_decreasing(), f.is_increasing()
    if not (dec or inc):
        raise NotMonotone("bmo_monotone_interval needs a weakly monotone step function")
    pieces = list(f.pieces)
    if f.halfline:
        val, t = family_sup(pieces)
        return SeminormResult(val, (ZERO, t), "prefix")
    T = f.length
    pv, pt = family_sup(pieces)
    sv, st = family_sup(pieces[::-1])
    val, witness, fam = _pick([(pv, (ZERO, pt), "prefix"), (sv, (T - st, T), "suffix")])
    return SeminormResult(val, witness, fam, witness == (ZERO, T))


def bmo_step_exact(f: StepFunction1D) -> SeminormResult:
    """Exact BMO seminorm of any step function (bounded interval or half-line).

    Runs :func:`family_sup` outward from every anchor (domain ends and jump
    points) in both directions and keeps the best.
    """
    pieces = list(f.pieces)
    lefts = [l for l, _, _ in f.cells()]
    cands = []
    n = len(pieces)
    for i in range(n + (0 if f.halfline else 1)):
        x = lefts[i] if i < n else f.length
        if i < n:
            v, t = family_sup(pieces[i:])
            cands.append((v, (x, x + t), "right"))
        if i > 0:
            v, t = family_sup(pieces[:i][::-1])
            cands.append((v, (x - t, x), "left"))
    val, witness, fam = _pick(cands)
    return SeminormResult(val, witness, fam,
                          (not f.halfline) and witness == (ZERO, f.length))


# ---------------------------------------------------------------------------
# certified enclosure


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction
    converged: bool
    witness: tuple | None = None
    evaluations: int = 0

    def __post_init__(self):
        assert self.lo <= self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


def _local_range(f: StepFunction1D, a, b) -> tuple[Fraction, Fraction, list]:
    segs = f.segments(a, b)
    vals = [v for _, v in segs]
    return min(vals), max(vals), vals


def _box_bounds(f: StepFunction1D, box) -> tuple[Fraction, Fraction | None, tuple | None]:
    """Upper bound for ``Omega`` over the box, plus the value at its centre."""
    a0, a1, b0, b1 = box
    lo_v, hi_v, vals = _local_range(f, a0, b1)
    osc = hi_v - lo_v
    ac, bc = (a0 + a1) / 2, (b0 + b1) / 2
    centre = oscillation_interval(f, ac, bc) if ac < bc else None
    if len(vals) <= 2:
        # at most one jump inside: two-valued intervals, Omega = 2w(1-w)|dv| <= |dv|/2
        return osc / 2, centre, (ac, bc) if centre is not None else None
    if b0 > a1:
        lip = Fraction(5, 2) * osc / (b0 - a1)
        ub = centre + lip * ((a1 - a0) + (b1 - b0)) / 2
        return min(ub, osc / 2), centre, (ac, bc)
    return osc / 2, centre, (ac, bc) if centre is not None else None


def _two_value_witnesses(f: StepFunction1D) -> list:
    out = []
    cells = f.cells()
    for (l0, r0, v0), (l1, r1, v1) in zip(cells, cells[1:]):
        h = min(r0 - l0, r1 - l1)
        out.append((abs(v0 - v1) / 2, (r0 - h, r0 + h)))
    return out


def bmo_interval_enclosure(f: StepFunction1D, tol, budget: int = 20000, *,
                           anchored: bool = True, stop_at=None) -> Enclosure:
    """Certified ``[lo, hi]`` around ``sup_I Omega(f, I)`` on a bounded interval.

    ``lo`` is always the oscillation of an explicit witness interval.  With
    ``anchored=True`` the witness comes from :func:`bmo_step_exact`; otherwise
    only from closed-form two-value intervals and box centres.  ``hi`` comes
    from a best-first dyadic branch and bound over endpoint pairs ``(a, b)``:
    boxes whose intervals meet at most one jump use the two-value bound, the
    others use a Lipschitz bound ``(5/2) osc / L_min`` on each endpoint.

    Stops when ``hi - lo <= tol``, when ``lo >= stop_at`` (if given), or when
    ``budget`` boxes have been evaluated; ``converged`` is False in the last
    two cases.
    """
    if f.halfline:
        raise OutOfDomain("enclosure is implemented for bounded intervals only")
    tol = rational(tol)
    T = f.length
    if len(f.pieces) == 1:
        return Enclosure(ZERO, ZERO, True, (ZERO, T), 0)
    cands = _two_value_witnesses(f)
    if anchored:
        exact = bmo_step_exact(f)
        cands.append((exact.value, exact.witness))
    lo, witness = max(cands, key=lambda c: c[0])
    if f.is_decreasing() or f.is_increasing():
        # the two families are exhaustive here; lo == hi
        mono = bmo_monotone_interval(f)
        if mono.value >= lo:
            lo, witness = mono.value, mono.witness
        return Enclosure(lo, lo, True, witness, 0)

    counter = itertools.count()
    heap: list = []
    evals = 0

    def push(box):
        nonlocal lo, witness, evals
        a0, a1, b0, b1 = box
        if a0 >= b1:
            return
        evals += 1
        ub, centre, at = _box_bounds(f, box)
        if centre is not None and centre > lo:
            lo, witness = centre, at
        if ub > lo:
            heapq.heappush(heap, (-ub, next(counter), box))

    push((ZERO, T, ZERO, T))
    while True:
        hi = max(lo, -heap[0][0]) if heap else lo
        if hi - lo <= tol:
            return Enclosure(lo, hi, True, witness, evals)
        if stop_at is not None and lo >= stop_at:
            return Enclosure(lo, hi, False, witness, evals)
        if evals >= budget:
            return Enclosure(lo, hi, False, witness, evals)
        neg_ub, _, box = heapq.heappop(heap)
        if -neg_ub <= lo:
            continue
        a0, a1, b0, b1 = box
        am, bm = (a0 + a1) / 2, (b0 + b1) / 2
        for child in ((a0, am, b0, bm), (a0, am, bm, b1), (am, a1, b0, bm), (am, a1, bm, b1)):
            push(child)
