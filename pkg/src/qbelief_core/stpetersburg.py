from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from typing import Any, Dict, Iterator, Optional, Tuple

from scipy.optimize import bisect

from .errors import InputError, NoRoot
from .render import as_fraction, exact, sig
from .types import RationalLike


@dataclass(frozen=True)
class BisectionPolicy:
    xtol: float = 1e-9
    max_iter: int = 200
    # series terms below this are dropped
    term_floor: float = 1e-15


@dataclass(frozen=True)
class StPetersburgSpec:
    """
    The coin is flipped until heads; heads on flip k pays base * 2**(k - 1).

    ``max_rounds`` stops the game after n flips (the no-heads event pays 0, or the
    last offered amount when ``pay_final_on_truncation``). ``house_bankroll`` caps
    every payout.
    """

    base_payout: Fraction = Fraction(1)
    max_rounds: Optional[int] = None
    house_bankroll: Optional[Fraction] = None
    pay_final_on_truncation: bool = False

    def __post_init__(self) -> None:
        base = as_fraction(self.base_payout)
        if base <= 0:
            raise InputError(f"base_payout must be > 0, got {base}")
        object.__setattr__(self, "base_payout", base)
        if self.max_rounds is not None:
            n = self.max_rounds
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise InputError(f"max_rounds must be a positive integer, got {n!r}")
        if self.house_bankroll is not None:
            bank = as_fraction(self.house_bankroll)
            if bank <= 0:
                raise InputError(f"house_bankroll must be > 0, got {bank}")
            object.__setattr__(self, "house_bankroll", bank)

    def payout(self, k: int) -> Fraction:
        p = self.base_payout * 2 ** (k - 1)
        if self.house_bankroll is not None:
            return min(p, self.house_bankroll)
        return p

    def truncation_payout(self) -> Fraction:
        """What the no-heads event pays under ``max_rounds``."""
        if self.max_rounds is None or not self.pay_final_on_truncation:
            return Fraction(0)
        return self.payout(self.max_rounds)


def truncated_ev(spec: StPetersburgSpec) -> Fraction:
    """Expected payout of the uncapped game stopped after ``max_rounds`` flips: n * base / 2."""
    if spec.max_rounds is None:
        raise InputError("truncated_ev needs max_rounds")
    n = spec.max_rounds
    ev = sum(
        (Fraction(1, 2**k) * spec.base_payout * 2 ** (k - 1) for k in range(1, n + 1)),
        Fraction(0),
    )
    if spec.pay_final_on_truncation:
        ev += Fraction(1, 2**n) * spec.base_payout * 2 ** (n - 1)
    return ev


def _cap_round(base: Fraction, bankroll: Fraction) -> int:
    """First flip whose uncapped payout reaches the bankroll."""
    k = 1
    while base * 2 ** (k - 1) < bankroll:
        k += 1
    return k


def bankroll_capped_ev(spec: StPetersburgSpec) -> Fraction:
    """
    Expected payout when the house can pay at most its bankroll B.

    Flips before the cap contribute base / 2 each; from the cap round k on every
    payout is B and the tail sums to B * 2**-(k - 1) (or stops at max_rounds).
    """
    if spec.house_bankroll is None:
        raise InputError("bankroll_capped_ev needs house_bankroll")
    bank, base = spec.house_bankroll, spec.base_payout
    if bank < base:
        raise InputError(f"house_bankroll must be >= base_payout ({bank} < {base})")
    k_cap = _cap_round(base, bank)
    n = spec.max_rounds

    uncapped = k_cap - 1 if n is None else min(k_cap - 1, n)
    ev = uncapped * base / 2
    if n is None:
        ev += bank * Fraction(1, 2 ** (k_cap - 1))
    else:
        if n >= k_cap:
            ev += bank * (Fraction(1, 2 ** (k_cap - 1)) - Fraction(1, 2**n))
        ev += Fraction(1, 2**n) * spec.truncation_payout()
    return ev


def _rounds(spec: StPetersburgSpec) -> Iterator[Tuple[float, float]]:
    """(probability, payout) per heads round, as floats."""
    base = float(spec.base_payout)
    bank = None if spec.house_bankroll is None else float(spec.house_bankroll)
    flips = count(1) if spec.max_rounds is None else range(1, spec.max_rounds + 1)
    for k in flips:
        payout = math.ldexp(base, k - 1)
        if bank is not None:
            payout = min(payout, bank)
        yield math.ldexp(1.0, -k), payout


def _log_series(wealth: float, price: float, spec: StPetersburgSpec, floor: float) -> float:
    """Sum of p_k * [ln(w - c + payout_k) - ln w], dropping terms once they fall below floor."""
    log_w = math.log(wealth)
    total = 0.0
    finished = True
    for weight, payout in _rounds(spec):
        gain = math.log(wealth - price + payout) - log_w
        total += weight * gain
        if weight * max(1.0, abs(gain)) < floor:
            finished = spec.max_rounds is None
            break
    if finished and spec.max_rounds is not None:
        tail = wealth - price + float(spec.truncation_payout())
        total += math.ldexp(1.0, -spec.max_rounds) * (math.log(tail) - log_w)
    return total


def expected_log_gain(
    price: float, wealth: float, spec: StPetersburgSpec, policy: BisectionPolicy = BisectionPolicy()
) -> float:
    if wealth <= 0:
        raise InputError(f"wealth must be > 0, got {wealth!r}")
    if not 0 <= price < wealth:
        raise InputError(f"price must lie in [0, wealth), got {price!r}")
    return _log_series(float(wealth), float(price), spec, policy.term_floor)


def log_utility_fair_price(
    wealth: RationalLike, spec: StPetersburgSpec, policy: BisectionPolicy = BisectionPolicy()
) -> float:
    """
    Entry price c at which a log-utility player with wealth w is indifferent:
    E[ln(w - c + payout)] = ln(w), solved by bisection on (0, w).
    """
    w = float(as_fraction(wealth))
    if w <= 0:
        raise InputError(f"wealth must be > 0, got {w!r}")

    def f(c: float) -> float:
        return expected_log_gain(c, w, spec, policy)

    if f(0.0) <= 0:
        raise NoRoot("expected log gain is not positive at price 0")
    hi = w * (1.0 - 1e-12)
    if f(hi) >= 0:
        raise NoRoot(f"fair price is not below wealth {w!r}; no root in (0, w)")
    return float(bisect(f, 0.0, hi, xtol=policy.xtol, maxiter=policy.max_iter))


def log_utility_certainty_equivalent(
    wealth: RationalLike, spec: StPetersburgSpec, policy: BisectionPolicy = BisectionPolicy()
) -> float:
    """Sure amount worth as much as the free gamble: exp(E[ln(w + payout)]) - w."""
    w = float(as_fraction(wealth))
    if w <= 0:
        raise InputError(f"wealth must be > 0, got {w!r}")
    return math.exp(math.log(w) + _log_series(w, 0.0, spec, policy.term_floor)) - w


@dataclass(frozen=True)
class StPetersburgReport:
    spec: StPetersburgSpec
    wealth: Optional[float]
    truncated_ev: Optional[Fraction]
    bankroll_capped_ev: Optional[Fraction]
    fair_price: Optional[float]
    certainty_equivalent: Optional[float]

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        def rational(x: Optional[Fraction]) -> Any:
            return None if x is None else {"exact": exact(x), "decimal": sig(x, digits)}

        def real(x: Optional[float]) -> Any:
            return None if x is None else sig(x, digits)

        s = self.spec
        return {
            "base": sig(s.base_payout, digits),
            "max_rounds": s.max_rounds,
            "bankroll": None if s.house_bankroll is None else sig(s.house_bankroll, digits),
            "pay_final_on_truncation": s.pay_final_on_truncation,
            "wealth": real(self.wealth),
            "truncated_ev": rational(self.truncated_ev),
            "bankroll_capped_ev": rational(self.bankroll_capped_ev),
            "fair_price": real(self.fair_price),
            "certainty_equivalent": real(self.certainty_equivalent),
        }


def valuate(spec: StPetersburgSpec, wealth: Optional[RationalLike] = None) -> StPetersburgReport:
    """Every valuation that the game's configured fields make meaningful."""
    w = None if wealth is None else float(as_fraction(wealth))
    return StPetersburgReport(
        spec=spec,
        wealth=w,
        truncated_ev=truncated_ev(spec) if spec.max_rounds is not None else None,
        bankroll_capped_ev=bankroll_capped_ev(spec) if spec.house_bankroll is not None else None,
        fair_price=log_utility_fair_price(w, spec) if w is not None else None,
        certainty_equivalent=log_utility_certainty_equivalent(w, spec) if w is not None else None,
    )


__all__ = [
    "BisectionPolicy",
    "StPetersburgSpec",
    "StPetersburgReport",
    "truncated_ev",
    "bankroll_capped_ev",
    "expected_log_gain",
    "log_utility_fair_price",
    "log_utility_certainty_equivalent",
    "valuate",
]
