"""Number handling for the two arithmetic modes.

Exact mode uses :class:`gmpy2.mpq` (it compares equal to, and hashes like,
:class:`fractions.Fraction`, and is an order of magnitude faster on the hot
loops).  Float mode uses plain floats with a relative/absolute tolerance.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real

import gmpy2

from .errors import MalformedInput

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)
DEFAULT_TOL = 1e-9

mpq = gmpy2.mpq


def parse_number(value, mode: str):
    """Convert ``value`` (int, float, Fraction, mpq or ``"p/q"`` string) to the mode's type."""
    if mode == EXACT:
        if isinstance(value, str):
            try:
                return mpq(Fraction(value.strip()))
            except (ValueError, ZeroDivisionError) as exc:
                raise MalformedInput(f"not a rational number: {value!r}") from exc
        if isinstance(value, float):
            if not math.isfinite(value):
                raise MalformedInput(f"non-finite number {value!r}")
            return mpq(Fraction(value))
        if type(value).__name__ == "mpq":
            return value
        if isinstance(value, (int, Rational)):
            return mpq(int(value.numerator), int(value.denominator))
        raise MalformedInput(f"not a number: {value!r}")
    if mode == FLOAT:
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise MalformedInput(f"not a number: {value!r}") from exc
        if not isinstance(value, Real) and type(value).__name__ != "mpq":
            raise MalformedInput(f"not a number: {value!r}")
        out = float(value)
        if not math.isfinite(out):
            raise MalformedInput(f"non-finite number {value!r}")
        return out
    raise MalformedInput(f"unknown numeric mode {mode!r}")


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if type(value).__name__ == "mpq":
        return Fraction(int(value.numerator), int(value.denominator))
    return Fraction(value)


def to_json(value):
    """JSON-friendly form: ints stay ints, rationals become ``"p/q"``, floats stay floats."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if type(value).__name__ == "mpq" or isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return value


def le(a, b, mode: str, tol: float = DEFAULT_TOL) -> bool:
    """``a <= b``, exact in exact mode, with relative+absolute slack in float mode."""
    if mode == EXACT:
        return a <= b
    return a <= b + tol * max(1.0, abs(b))


def zero(mode: str):
    return mpq(0) if mode == EXACT else 0.0
