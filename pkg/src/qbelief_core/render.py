from __future__ import annotations

import math
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Union

from .types import RationalLike

Number = Union[int, float, Fraction]


def as_fraction(value: RationalLike) -> Fraction:
    """
    Exact rational for a user-supplied number.

    Floats go through their shortest repr, so ``0.8`` becomes ``4/5`` rather than
    the binary approximation ``3602879701896397/4503599627370496``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number: {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


def render_decimal(x: Fraction, places: int) -> str:
    """Decimal string of ``x`` rounded half-to-even at ``places`` decimals."""
    with localcontext() as ctx:
        ctx.prec = max(50, places + 30)
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


def sig(x: Number, digits: int) -> float:
    """``x`` as a float rounded to ``digits`` significant digits."""
    v = float(x)
    if v == 0.0:
        return 0.0
    return float(format(v, f".{digits}g"))


def exact(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
