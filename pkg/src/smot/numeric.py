"""Scalar handling shared by every module.

Values are either exact (``int`` / ``fractions.Fraction``) or binary64
floats.  Comparisons between exact values are exact; as soon as a float is
involved they use a relative tolerance ``eps * max(1, |a|, |b|)``.  The
tolerance is process-wide and meant to be set once at startup.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[Fraction, float]

DEFAULT_EPS = 1e-9
_eps = DEFAULT_EPS

INF = float("inf")


def tolerance() -> float:
    return _eps


def set_tolerance(eps: float) -> None:
    global _eps
    if not eps > 0:
        raise ValueError(f"tolerance must be positive, got {eps!r}")
    _eps = float(eps)


def is_exact(*values) -> bool:
    return all(isinstance(v, Rational) for v in values)


def isclose(a, b, eps: float | None = None) -> bool:
    if is_exact(a, b):
        return a == b
    eps = _eps if eps is None else eps
    return abs(a - b) <= eps * max(1.0, abs(a), abs(b))


def le(a, b, eps: float | None = None) -> bool:
    """``a <= b`` up to tolerance."""
    return a <= b or isclose(a, b, eps)


def lt(a, b, eps: float | None = None) -> bool:
    """``a < b`` by more than the tolerance."""
    return a < b and not isclose(a, b, eps)


def is_zero(a, eps: float | None = None) -> bool:
    return isclose(a, 0, eps)


def to_scalar(value, mode: str = "rational") -> Scalar:
    """Convert user input (int, float, ``"p/q"`` or decimal string) to a Scalar.

    In rational mode floats are read through their decimal repr, so ``-2.5``
    becomes ``Fraction(-5, 2)`` rather than the binary expansion.
    """
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown numeric mode {mode!r}")
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, str):
        text = value.strip()
        frac = Fraction(text)
        return frac if mode == "rational" else float(frac)
    if isinstance(value, float):
        return Fraction(repr(value)) if mode == "rational" else value
    if isinstance(value, Rational):
        return Fraction(value) if mode == "rational" else float(value)
    raise TypeError(f"cannot interpret {value!r} as a number")


def as_float(value) -> float:
    return float(value)


def fmt(value) -> str:
    """Deterministic text form: ``p/q`` for exact values, 17 significant digits for floats."""
    if isinstance(value, Rational):
        v = Fraction(value)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    return format(float(value), ".17g")
