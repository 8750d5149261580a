from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Callable, Literal, Union

Label = str

# Sign of rate_a - rate_b; 0 means tie (no direction).
Direction = Literal[-1, 0, 1]

# Anything that converts to an exact rational without binary rounding.
RationalLike = Union[int, Fraction, Decimal, str, float]


# Called once per analysis stage by cli.run (e.g. to emit trace events)
StageHook = Callable[[str], None]
