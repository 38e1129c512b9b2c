"""Exact rational helpers and power-of-r bookkeeping.

Every market quantity (utilities, prices, MBB ratios, bundle values) is a
:class:`fractions.Fraction`.  Floats only show up in human-facing reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Rat = Fraction
INF = math.inf

RatLike = Union[int, Fraction, str]


def as_rat(x: RatLike) -> Fraction:
    """Parse ``x`` into a Fraction.  Floats are rejected on purpose."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, float):
        raise TypeError(f"refusing float {x!r}; pass a rational literal like '1/4'")
    return Fraction(x)


def _log(q: Fraction) -> float:
    # math.log accepts arbitrarily large ints, which keeps huge powers finite
    return math.log(q.numerator) - math.log(q.denominator)


@dataclass(frozen=True)
class PowerOfR:
    """The number ``r**exponent`` for a fixed rational base ``r > 1``."""

    exponent: int
    r: Fraction

    @property
    def value(self) -> Fraction:
        return self.r ** self.exponent

    def __mul__(self, other: "PowerOfR") -> "PowerOfR":
        self._check_base(other)
        return PowerOfR(self.exponent + other.exponent, self.r)

    def __truediv__(self, other: "PowerOfR") -> "PowerOfR":
        self._check_base(other)
        return PowerOfR(self.exponent - other.exponent, self.r)

    def _check_base(self, other: "PowerOfR") -> None:
        if other.r != self.r:
            raise ValueError("powers of different bases")


def _check_base(r: Fraction) -> None:
    if r <= 1:
        raise ValueError(f"base must exceed 1, got {r}")


def next_power_up(u: RatLike, r: RatLike) -> PowerOfR:
    """Smallest power ``r**t`` with ``r**t >= u``.

    >>> next_power_up(3, Fraction(5, 4)).exponent
    5
    """
    u, r = as_rat(u), as_rat(r)
    _check_base(r)
    if u <= 0:
        raise ValueError(f"next_power_up needs a positive value, got {u}")
    t = math.ceil(_log(u) / _log(r))
    while r ** t < u:
        t += 1
    while r ** (t - 1) >= u:
        t -= 1
    return PowerOfR(t, r)


def floor_log(q: RatLike, r: RatLike) -> int:
    """Largest integer ``t`` with ``r**t <= q``."""
    q, r = as_rat(q), as_rat(r)
    _check_base(r)
    if q <= 0:
        raise ValueError(f"logarithm of non-positive value {q}")
    t = math.floor(_log(q) / _log(r))
    while r ** t > q:
        t -= 1
    while r ** (t + 1) <= q:
        t += 1
    return t


def floor_log_ratio(q: RatLike, r: RatLike) -> int:
    """The integer ``s`` with ``r**(s-1) <= q < r**s``."""
    return floor_log(q, r) + 1


def ceil_log(q: RatLike, r: RatLike) -> int:
    """Smallest integer ``t`` with ``r**t >= q``."""
    return next_power_up(q, r).exponent


def power_exponent(q: RatLike, r: RatLike) -> Optional[int]:
    """Return ``t`` if ``q == r**t`` exactly, else None."""
    q = as_rat(q)
    if q <= 0:
        return None
    t = floor_log(q, r)
    return t if as_rat(r) ** t == q else None


def is_power_of(q: RatLike, r: RatLike) -> bool:
    return power_exponent(q, r) is not None


def rat_to_float(q) -> float:
    """Float mirror for reports; saturates to +/-inf instead of raising."""
    if q == INF:
        return INF
    try:
        return float(q)
    except OverflowError:
        return INF if q > 0 else -INF


def rat_to_json(q) -> dict:
    if q == INF:
        return {"num": "1", "den": "0", "approx": None}
    q = Fraction(q)
    approx = rat_to_float(q)
    return {
        "num": str(q.numerator),
        "den": str(q.denominator),
        "approx": approx if math.isfinite(approx) else None,
    }


def rat_from_json(obj) -> Union[Fraction, float]:
    if isinstance(obj, dict):
        num, den = int(obj["num"]), int(obj["den"])
        if den == 0:
            return INF
        return Fraction(num, den)
    return as_rat(obj)


def geometric_mean(product: Fraction, n: int) -> float:
    """n-th root of an exact non-negative product, as a float."""
    if product < 0:
        raise ValueError("negative product")
    if product == 0:
        return 0.0
    return math.exp(_log(Fraction(product)) / n)


def rat_root_ratio(num: Fraction, den: Fraction, n: int) -> float:
    """``(num/den) ** (1/n)`` in floats, tolerant of huge operands."""
    if den == 0:
        return INF if num > 0 else 1.0
    if num == 0:
        return 0.0
    return math.exp((_log(Fraction(num)) - _log(Fraction(den))) / n)
