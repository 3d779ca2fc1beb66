"""Recursive weighted partitioning of the hashed key space [0, 1).

Elements are hashed to 64-bit keys and the unit interval is split into c
weighted subintervals, recursively.  All interval arithmetic is exact
(fractions), so membership is unambiguous: every key belongs to exactly
one child at every depth.  A partition is identified by its path word,
the sequence of child indices from the root.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

_KEY_BITS = 64
_KEY_SPACE = 1 << _KEY_BITS


class ScheduleError(ValueError):
    """Invalid partitioning schedule."""


@dataclass(frozen=True)
class PartitionSchedule:
    """Branching factor and child probabilities of every split."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.probs) < 2:
            raise ScheduleError("need at least 2 partitions per split")
        if any(p <= 0 for p in self.probs):
            raise ScheduleError("partition probabilities must be positive")
        if sum(self.probs) != 1:
            raise ScheduleError("partition probabilities must sum to 1")

    @property
    def c(self) -> int:
        return len(self.probs)

    def cumulative(self) -> tuple[Fraction, ...]:
        """Prefix sums F_0 = 0, F_1, ..., F_c = 1."""
        acc = Fraction(0)
        out = [acc]
        for p in self.probs:
            acc += p
            out.append(acc)
        return tuple(out)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(p) for p in self.probs)


def fair_probs(c: int) -> PartitionSchedule:
    """Equal-probability schedule p_j = 1/c."""
    if c < 2:
        raise ScheduleError("need c >= 2")
    return PartitionSchedule((Fraction(1, c),) * c)


def round_optimal_probs(c: int) -> PartitionSchedule:
    """Schedule p_j = 2^-j (last child 2^-(c-1)), which makes every
    residual binary branching fair and so minimizes expected rounds."""
    if c < 2:
        raise ScheduleError("need c >= 2")
    probs = [Fraction(1, 1 << j) for j in range(1, c)]
    probs.append(Fraction(1, 1 << (c - 1)))
    return PartitionSchedule(tuple(probs))


def schedule_from_strings(items) -> PartitionSchedule:
    """Parse probabilities given as decimal or fraction strings."""
    try:
        probs = tuple(Fraction(s) for s in items)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScheduleError(f"cannot parse probabilities: {exc}") from None
    return PartitionSchedule(probs)


def key_of(element: int, seed: int) -> Fraction:
    """Deterministic 64-bit hash of (element, seed) scaled into [0, 1)."""
    digest = hashlib.blake2b(b"%d:%d" % (element, seed), digest_size=8).digest()
    return Fraction(int.from_bytes(digest, "little"), _KEY_SPACE)


@dataclass(frozen=True)
class PartitionInterval:
    """Half-open subinterval [lo, hi) of the key space with its tree path."""

    lo: Fraction
    hi: Fraction
    path: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.lo < self.hi <= 1:
            raise ValueError("interval bounds must satisfy 0 <= lo < hi <= 1")

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, key: Fraction) -> bool:
        return self.lo <= key < self.hi

    def split(self, schedule: PartitionSchedule) -> tuple["PartitionInterval", ...]:
        """The c children, tiling this interval exactly."""
        width = self.measure
        cum = schedule.cumulative()
        return tuple(
            PartitionInterval(
                self.lo + cum[j] * width,
                self.lo + cum[j + 1] * width,
                self.path + (j,),
            )
            for j in range(schedule.c)
        )

    def locate(self, key: Fraction, schedule: PartitionSchedule):
        """Child index and child interval holding the key."""
        if not self.contains(key):
            raise ValueError("key outside interval")
        for j, child in enumerate(self.split(schedule)):
            if key < child.hi:
                return j, child
        raise AssertionError("children must tile the interval")


def root_interval() -> PartitionInterval:
    return PartitionInterval(Fraction(0), Fraction(1), ())


def interval_for_path(schedule: PartitionSchedule, path) -> PartitionInterval:
    """Interval reached by following the path word from the root."""
    node = root_interval()
    for j in path:
        if not 0 <= j < schedule.c:
            raise ValueError(f"child index {j} outside schedule")
        node = node.split(schedule)[j]
    return node


def _scaled_schedule(schedule: PartitionSchedule) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    """Common denominator D plus integer numerators and prefix sums."""
    denom = 1
    for p in schedule.probs:
        denom = denom * p.denominator // math.gcd(denom, p.denominator)
    nums = tuple(int(p * denom) for p in schedule.probs)
    cum = [0]
    for n in nums:
        cum.append(cum[-1] + n)
    return denom, nums, tuple(cum)


def word_of_key(schedule: PartitionSchedule, key: Fraction, depth: int) -> tuple[int, ...]:
    """First `depth` child indices of the key's root-to-leaf path.

    Exact integer arithmetic: the key r = num/den is located against the
    scaled child boundaries, then rescaled to the child's local
    coordinates, so no boundary leakage can occur at any depth.
    """
    denom, nums, cum = _scaled_schedule(schedule)
    num, den = key.numerator, key.denominator
    word = []
    for _ in range(depth):
        t = num * denom
        for j in range(schedule.c):
            if t < cum[j + 1] * den:
                word.append(j)
                num = t - cum[j] * den
                den = den * nums[j]
                break
    return tuple(word)
