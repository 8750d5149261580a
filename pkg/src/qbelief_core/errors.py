from __future__ import annotations

from typing import Optional, Sequence


class QBeliefError(Exception):
    """Root of every error raised by qbelief-core."""


class InputError(QBeliefError, ValueError):
    """Input data or parameters violate a documented precondition."""


class InvalidCounts(InputError):
    pass


class InvalidProbability(InputError):
    pass


class DegenerateTable(InputError):
    """A 2x2 table has a zero margin, so no test statistic is defined."""


class AllZero(InputError):
    pass


class ZeroMarginal(InputError):
    def __init__(self, row: str):
        super().__init__(f"stage-1 marginal of row {row!r} is zero; its conditionals are undefined")
        self.row = row


class LabelMismatch(InputError):
    pass


class DimensionError(InputError):
    pass


class InvalidEffect(InputError):
    pass


class NoRoot(InputError):
    pass


class ConfigError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


class ArityError(InputError):
    pass


class InfeasibleCalibration(QBeliefError):
    """The calibrated effect operator falls outside 0 <= E <= I."""

    def __init__(self, eigenvalues: Sequence[float], off_diag: float):
        lo, hi = min(eigenvalues), max(eigenvalues)
        super().__init__(
            f"calibrated effect is not a valid effect: eigenvalues [{lo:.6g}, {hi:.6g}] "
            f"must lie in [0, 1] (off_diag={off_diag:.6g})"
        )
        self.eigenvalues = (lo, hi)
        self.off_diag = off_diag
