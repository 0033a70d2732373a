"""Exact rational arithmetic for valuations, taxes and utilities.

Every amount in the platform is a `fractions.Fraction`: replicated
computation across player processes requires bit-identical results, so
floating point is banned from anything that touches money. Fraction
already maintains the canonical invariants (lowest terms, positive
denominator); this module adds the canonical text codec used by the
wire encoding.
"""

from __future__ import annotations

import re
from fractions import Fraction

Rational = Fraction

_RATIONAL_RE = re.compile(r"^(-?\d+)/(\d+)$")


def rational(value) -> Fraction:
    """Coerce ints, 'num/den' strings and Fractions. Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational amount")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m:
            num, den = int(m.group(1)), int(m.group(2))
            if den == 0:
                raise ValueError("zero denominator: %r" % value)
            return Fraction(num, den)
        # plain integer strings are accepted for scenario convenience
        if re.match(r"^-?\d+$", value):
            return Fraction(int(value))
        raise ValueError("not a rational literal: %r" % value)
    raise TypeError("cannot make a Rational from %r" % (value,))


def encode_rational(value: Fraction) -> str:
    """Canonical 'num/den' form, lowest terms, denominator always written."""
    return "%d/%d" % (value.numerator, value.denominator)
