"""Exact scalar helpers shared by every module.

Finite quantities are ``fractions.Fraction``; the only non-rational value
that ever appears is ``INF`` (``math.inf``), used for infinite masses and
half-line lengths.  ``Fraction`` compares correctly against ``math.inf`` so
ordinary ``<``/``max`` work across both.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

INF = math.inf

Scalar = Union[Fraction, float]


def is_inf(x: Scalar) -> bool:
    return isinstance(x, float) and math.isinf(x) and x > 0


def rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: they are a sign that inexact data leaked in.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


def mass(x) -> Scalar:
    """Like :func:`rational` but also accepts ``INF`` / ``"inf"``."""
    if is_inf(x) or (isinstance(x, str) and x.strip() == "inf"):
        return INF
    return rational(x)


def add_mass(a: Scalar, b: Scalar) -> Scalar:
    if is_inf(a) or is_inf(b):
        return INF
    return a + b


def fmt(x: Scalar) -> str:
    """Canonical string form: ``"p/q"`` always (``"3/1"``), or ``"inf"``."""
    if is_inf(x):
        return "inf"
    x = rational(x)
    return f"{x.numerator}/{x.denominator}"


def parse(s: str) -> Scalar:
    if not isinstance(s, str):
        raise TypeError(f"rationals are encoded as strings, got {s!r}")
    return mass(s)
