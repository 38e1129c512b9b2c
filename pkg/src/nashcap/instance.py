"""Problem model: validation, capping + rounding, stats, JSON format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .numerics import as_rat, ceil_log, next_power_up

Number = Union[int, Fraction]

MIN_EPS = Fraction(0)
MAX_EPS = Fraction(1, 4)


class InvalidInstance(ValueError):
    """Raised with the full list of violated invariants."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    """Agents with caps, goods with copy counts, decreasing per-copy utilities.

    ``utils[i][j][l]`` is agent ``i``'s utility for its ``l+1``-th copy of good
    ``j``.  ``caps[i] is None`` means agent ``i`` is uncapped.
    """

    copies: tuple[int, ...]
    caps: tuple[Optional[Number], ...]
    utils: tuple[tuple[tuple[Number, ...], ...], ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def n(self) -> int:
        return len(self.caps)

    @property
    def m(self) -> int:
        return len(self.copies)

    @property
    def M(self) -> int:
        return sum(self.copies)

    def bundle_utility(self, i: int, mult_row: Sequence[int]) -> Number:
        """Uncapped utility of a bundle (given as per-good multiplicities) for agent i."""
        return sum(
            (sum(self.utils[i][j][:c]) for j, c in enumerate(mult_row) if c),
            0,
        )

    def capped_utility(self, i: int, mult_row: Sequence[int]) -> Number:
        u = self.bundle_utility(i, mult_row)
        c = self.caps[i]
        return u if c is None else min(c, u)


@dataclass(frozen=True)
class RoundedInstance(Instance):
    """Instance whose utilities were capped then rounded up to powers of ``r``."""

    eps: Fraction = Fraction(1, 4)
    source: Optional[Instance] = field(default=None, compare=False, repr=False)

    @property
    def r(self) -> Fraction:
        return 1 + self.eps

    def positive_slots(self, j: int) -> int:
        """Total number of (agent, copy) slots of good j with nonzero utility."""
        return sum(sum(1 for u in self.utils[i][j] if u > 0) for i in range(self.n))

    @property
    def active_copies(self) -> tuple[int, ...]:
        """Copies of each good that somebody can value.

        Beyond this count every agent is saturated, so the remaining copies
        are worth zero to whoever holds them.
        """
        return tuple(min(k, self.positive_slots(j)) for j, k in enumerate(self.copies))

    @property
    def spare_copies(self) -> tuple[int, ...]:
        return tuple(k - a for k, a in zip(self.copies, self.active_copies))


def validation_errors(inst: Instance) -> list[str]:
    errs: list[str] = []
    if inst.n < 1:
        errs.append("n ≥ 1 required")
    if inst.m < 1:
        errs.append("m ≥ 1 required")
    for j, k in enumerate(inst.copies):
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            errs.append(f"copies must be a positive integer at good {j + 1}")
    for i, c in enumerate(inst.caps):
        if c is None:
            continue
        if not _is_number(c) or c <= 0:
            errs.append(f"cap must be positive at agent {i + 1}")
    if len(inst.utils) != inst.n:
        errs.append(f"utilities must list {inst.n} agents, got {len(inst.utils)}")
        return errs
    for i, row in enumerate(inst.utils):
        if len(row) != inst.m:
            errs.append(f"utilities of agent {i + 1} must list {inst.m} goods, got {len(row)}")
            continue
        for j, seq in enumerate(row):
            k = inst.copies[j]
            if len(seq) != k:
                errs.append(
                    f"utilities at (agent {i + 1}, good {j + 1}) must have {k} entries, got {len(seq)}"
                )
                continue
            if any(not _is_number(u) for u in seq):
                errs.append(f"non-rational utility at (agent {i + 1}, good {j + 1})")
                continue
            if any(u < 0 for u in seq):
                errs.append(f"negative utility at (agent {i + 1}, good {j + 1})")
            if any(a < b for a, b in zip(seq, seq[1:])):
                errs.append(f"utilities increasing at (agent {i + 1}, good {j + 1})")
    return errs


def _is_number(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def validate(inst: Instance) -> Instance:
    errs = validation_errors(inst)
    if errs:
        raise InvalidInstance(errs)
    return inst


def make_instance(copies, caps, utils, meta=None) -> Instance:
    """Build and validate an instance from plain nested sequences."""
    inst = Instance(
        copies=tuple(copies),
        caps=tuple(None if c is None else _num(c) for c in caps),
        utils=tuple(tuple(tuple(_num(u) for u in seq) for seq in row) for row in utils),
        meta=dict(meta or {}),
    )
    return validate(inst)


def _num(x) -> Number:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return x
    q = as_rat(x)
    return q.numerator if q.denominator == 1 else q


def check_eps(eps) -> Fraction:
    eps = as_rat(eps)
    if not (MIN_EPS < eps <= MAX_EPS):
        raise ParameterError(f"epsilon must lie in (0, 1/4], got {eps}")
    return eps


def cap_and_round(inst: Instance, eps) -> RoundedInstance:
    """Cap every utility at the agent's cap, then round nonzero values and caps up to powers of 1+eps."""
    eps = check_eps(eps)
    r = 1 + eps

    def up(x) -> Fraction:
        return next_power_up(x, r).value

    caps = tuple(None if c is None else up(c) for c in inst.caps)
    utils = []
    for i, row in enumerate(inst.utils):
        c = inst.caps[i]
        new_row = []
        for seq in row:
            capped = (u if c is None else min(c, u) for u in seq)
            new_row.append(tuple(up(u) if u > 0 else Fraction(0) for u in capped))
        utils.append(tuple(new_row))
    source = inst.source if isinstance(inst, RoundedInstance) else inst
    return RoundedInstance(
        copies=inst.copies,
        caps=caps,
        utils=tuple(utils),
        meta=dict(inst.meta),
        eps=eps,
        source=source,
    )


@dataclass(frozen=True)
class InstanceStats:
    M: int
    U: Fraction
    iteration_cap: int
    degenerate: bool = False


def stats(inst: RoundedInstance) -> InstanceStats:
    """Item count, utility spread and the iteration cap n³M²·log_r(M·U), rounded up."""
    nonzero = [u for row in inst.utils for seq in row for u in seq if u > 0]
    M, n, r = inst.M, inst.n, inst.r
    if not nonzero:
        U, degenerate = Fraction(1), True
    else:
        U, degenerate = Fraction(max(nonzero)) / min(nonzero), False
    base = M * U
    if base <= 1:
        return InstanceStats(M, U, 0, degenerate)
    power = n ** 3 * M ** 2
    return InstanceStats(M, U, _ceil_scaled_log(base, power, r), degenerate)


_EXACT_LOG_LIMIT = 50_000


def _ceil_scaled_log(base: Fraction, power: int, r: Fraction) -> int:
    """ceil(power * log_r(base)), i.e. the smallest c with r**c >= base**power."""
    estimate = power * math.log(base) / math.log(r)
    if estimate <= _EXACT_LOG_LIMIT:
        return ceil_log(base ** power, r)
    # exponents this large make the exact comparison impractical; log_r(base) is
    # irrational unless base is itself a power of r, so 80 digits settle the ceiling
    import mpmath

    with mpmath.workdps(80):
        def lg(q: Fraction):
            return mpmath.log(q.numerator) - mpmath.log(q.denominator)

        return int(mpmath.ceil(power * lg(base) / lg(r)))


# -- JSON ---------------------------------------------------------------------

def _util_to_json(u: Number):
    if isinstance(u, Fraction) and u.denominator != 1:
        return f"{u.numerator}/{u.denominator}"
    return int(u)


def _util_from_json(x) -> Number:
    if isinstance(x, bool) or isinstance(x, float):
        raise InvalidInstance([f"utility {x!r} is not an integer"])
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return _num(Fraction(x))
        except (ValueError, ZeroDivisionError):
            raise InvalidInstance([f"utility {x!r} is not a rational literal"]) from None
    raise InvalidInstance([f"utility {x!r} is not an integer"])


def instance_to_dict(inst: Instance) -> dict:
    out = {
        "agents": [{"cap": None if c is None else _util_to_json(c)} for c in inst.caps],
        "goods": [{"copies": k} for k in inst.copies],
        "utilities": [[[_util_to_json(u) for u in seq] for seq in row] for row in inst.utils],
    }
    if inst.meta:
        out["meta"] = inst.meta
    return out


def instance_from_dict(obj: dict) -> Instance:
    try:
        agents = obj["agents"]
        goods = obj["goods"]
        utils = obj["utilities"]
    except (KeyError, TypeError) as exc:
        raise InvalidInstance([f"missing field {exc}"]) from None
    try:
        caps = [None if a.get("cap") is None else _util_from_json(a["cap"]) for a in agents]
        copies = [g["copies"] for g in goods]
        parsed = [[[_util_from_json(u) for u in seq] for seq in row] for row in utils]
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvalidInstance([f"malformed instance: {exc}"]) from None
    inst = Instance(
        copies=tuple(copies),
        caps=tuple(caps),
        utils=tuple(tuple(tuple(seq) for seq in row) for row in parsed),
        meta=dict(obj.get("meta") or {}),
    )
    return validate(inst)


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def loads_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstance([f"malformed JSON: {exc}"]) from None
    if not isinstance(obj, dict):
        raise InvalidInstance(["instance JSON must be an object"])
    return instance_from_dict(obj)


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n")
