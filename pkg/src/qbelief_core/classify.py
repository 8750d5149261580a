from __future__ import annotations

import csv
import json
from typing import Optional

from .errors import InfeasibleCalibration, InputError

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2


def is_input_error(exc: BaseException) -> bool:
    """True when ``exc`` blames the user's input rather than the code."""
    if isinstance(exc, InputError):
        return True
    # unreadable or malformed files
    if isinstance(exc, (OSError, json.JSONDecodeError, csv.Error, UnicodeDecodeError)):
        return True
    return False


def exit_code_for(exc: BaseException, *, strict: bool = False) -> Optional[int]:
    """
    Exit status for an exception raised during a run.

    None means "not ours": the caller should let it propagate.
    """
    if isinstance(exc, InfeasibleCalibration):
        return EXIT_INFEASIBLE if strict else EXIT_OK
    if is_input_error(exc):
        return EXIT_INPUT_ERROR
    return None
