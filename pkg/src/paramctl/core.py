"""Domain types shared across the package.

Parameter ranges, half-open interval partitions, experience tuples,
Q-tables and seeded random streams.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    min: float
    max: float

    def __post_init__(self) -> None:
        if not self.min < self.max:
            raise DomainError(f"parameter {self.name!r}: need min < max, got [{self.min}, {self.max}]")

    @property
    def width(self) -> float:
        return self.max - self.min


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo:g}, {self.hi:g}{']' if self.hi_closed else ')'}"


@dataclass(frozen=True)
class Partition:
    """Ordered, contiguous intervals covering ``[spec.min, spec.max]``.

    The first interval is closed at both ends; every later interval is
    open below and closed above, so each point belongs to exactly one
    interval.
    """

    spec: ParameterSpec
    intervals: tuple[Interval, ...]

    def __post_init__(self) -> None:
        ivs = self.intervals
        if not ivs:
            raise DomainError("partition needs at least one interval")
        if ivs[0].lo != self.spec.min or ivs[-1].hi != self.spec.max:
            raise DomainError("partition does not span the parameter range")
        if not (ivs[0].lo_closed and ivs[0].hi_closed):
            raise DomainError("first interval must be closed")
        for prev, cur in zip(ivs, ivs[1:]):
            if cur.lo != prev.hi:
                raise DomainError(f"gap or overlap between {prev} and {cur}")
            if cur.lo_closed or not cur.hi_closed:
                raise DomainError(f"interval {cur} must be open below and closed above")
            if not cur.lo < cur.hi:
                raise DomainError(f"empty interval {cur}")

    @classmethod
    def from_splits(cls, spec: ParameterSpec, splits: Iterable[float] = ()) -> "Partition":
        points = sorted(set(float(s) for s in splits))
        for s in points:
            if not spec.min < s < spec.max:
                raise DomainError(f"split {s} outside open range ({spec.min}, {spec.max})")
        edges = [spec.min, *points, spec.max]
        ivs = [Interval(edges[0], edges[1], True, True)]
        ivs += [Interval(a, b, False, True) for a, b in zip(edges[1:-1], edges[2:])]
        return cls(spec, tuple(ivs))

    @classmethod
    def uniform(cls, spec: ParameterSpec, count: int) -> "Partition":
        if count < 1:
            raise DomainError("interval count must be positive")
        step = spec.width / count
        return cls.from_splits(spec, [spec.min + step * i for i in range(1, count)])

    @property
    def splits(self) -> tuple[float, ...]:
        return tuple(iv.hi for iv in self.intervals[:-1])

    def __len__(self) -> int:
        return len(self.intervals)

    def __getitem__(self, i: int) -> Interval:
        return self.intervals[i]

    @property
    def is_trivial(self) -> bool:
        return len(self.intervals) == 1


def partition_lookup(p: Partition, x: float) -> int:
    """Index of the interval of ``p`` containing ``x``."""
    if not p.spec.min <= x <= p.spec.max or math.isnan(x):
        raise DomainError(f"{x} outside [{p.spec.min}, {p.spec.max}]")
    # intervals are (s_{i-1}, s_i]; bisect_left on the upper edges finds the owner
    return bisect_left(p.splits, x)


class RngStream:
    """Seeded random stream identified by ``(seed, stream_id)``.

    Backed by a counter-based Philox generator so streams with distinct
    ids are independent and reproducible across platforms.  Attribute
    access falls through to the underlying :class:`numpy.random.Generator`.
    """

    __slots__ = ("seed", "stream_id", "gen")

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def __getattr__(self, name: str) -> Any:
        return getattr(self.gen, name)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def uniform_in(interval: Interval, rng: RngStream | np.random.Generator) -> float:
    """Uniform draw over ``[lo, hi]``; endpoint openness is ignored."""
    if interval.lo == interval.hi:
        return float(interval.lo)
    return float(rng.uniform(interval.lo, interval.hi))


@dataclass(frozen=True)
class ExperienceTuple:
    """One controller transition: observables, action, next observables, reward."""

    observables_before: np.ndarray
    action: Any
    observables_after: np.ndarray
    reward: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.reward):
            raise DomainError(f"non-finite reward {self.reward}")
        if np.shape(self.observables_before) != np.shape(self.observables_after):
            raise DomainError("observable vectors differ in dimension")


@dataclass
class QTable:
    """Expected reward per action for one state."""

    entries: dict[Hashable, float] = field(default_factory=dict)

    @classmethod
    def zeros(cls, actions: Sequence[Hashable]) -> "QTable":
        return cls({a: 0.0 for a in actions})

    def __getitem__(self, a: Hashable) -> float:
        return self.entries[a]

    def __setitem__(self, a: Hashable, value: float) -> None:
        if not math.isfinite(value):
            raise DomainError(f"non-finite Q value {value} for action {a!r}")
        self.entries[a] = float(value)

    def __len__(self) -> int:
        return len(self.entries)

    def actions(self) -> list[Hashable]:
        return list(self.entries)

    def value(self) -> float:
        """V(s) = max over actions, 0 for an empty table."""
        return max(self.entries.values(), default=0.0)

    def spread(self) -> float:
        vals = self.entries.values()
        return max(vals) - min(vals) if vals else 0.0

    def copy(self) -> "QTable":
        return QTable(dict(self.entries))
