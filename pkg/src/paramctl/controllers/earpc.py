"""Entropy-based adaptive range parameter control.

Saved ``(v, q(v))`` pairs are clustered in two, each parameter range is
cut at the midpoint that best separates the clusters, and the side to
sample from is drawn with probability proportional to its mean quality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..core import ExperienceTuple, Interval, ParameterSpec, uniform_in
from ..stats import best_entropy_split, kmeans2
from .base import Controller, uniform_vector

CLUSTER_FEATURES = ("parameters", "reward")


@dataclass(frozen=True)
class RangeSplit:
    """Two-interval view of one parameter: ``[min, split]`` and ``(split, max]``."""

    split: float
    q1: float
    q2: float

    @property
    def expected_quality(self) -> float:
        """Mean quality when sides are drawn proportionally to ``q1``/``q2``."""
        total = self.q1 + self.q2
        return 0.0 if total <= 0 else (self.q1 * self.q1 + self.q2 * self.q2) / total


def earpc_analyze(
    values: np.ndarray,
    quality: np.ndarray,
    rng,
    cluster_on: str = "parameters",
    conventional_entropy: bool = False,
) -> list[RangeSplit | None]:
    """Per-parameter entropy split and side qualities; ``None`` where no split exists."""
    values = np.asarray(values, dtype=np.float64)
    quality = np.asarray(quality, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    n, n_params = values.shape
    if n < 2:
        return [None] * n_params
    features = values if cluster_on == "parameters" else quality[:, None]
    labels = kmeans2(features, rng).labels
    out: list[RangeSplit | None] = []
    for i in range(n_params):
        col = values[:, i]
        cand = best_entropy_split(zip(col, labels), conventional=conventional_entropy)
        if cand is None:
            out.append(None)
            continue
        left = col <= cand.split_value
        # quality is non-negative under elitism; clamp in case a caller feeds otherwise
        q1 = max(float(quality[left].mean()), 0.0)
        q2 = max(float(quality[~left].mean()), 0.0)
        out.append(RangeSplit(cand.split_value, q1, q2))
    return out


def choose_side(split: RangeSplit, rng) -> int:
    """0 for the lower interval, 1 for the upper, drawn proportionally to quality."""
    total = split.q1 + split.q2
    p_low = 0.5 if total <= 0 else split.q1 / total
    return 0 if rng.random() < p_low else 1


def side_interval(spec: ParameterSpec, split: RangeSplit, side: int) -> Interval:
    if side == 0:
        return Interval(spec.min, split.split, True, True)
    return Interval(split.split, spec.max, False, True)


def earpc_propose(
    buffer: Sequence[tuple[Sequence[float], float]] | tuple[np.ndarray, np.ndarray],
    specs: Sequence[ParameterSpec],
    rng,
    cluster_on: str = "parameters",
    conventional_entropy: bool = False,
) -> tuple[np.ndarray, list[RangeSplit | None]]:
    """Draw a parameter vector from saved ``(v, q(v))`` pairs.

    Parameters without a usable split (including an empty buffer) are
    drawn uniformly over their full range.
    """
    if isinstance(buffer, tuple) and len(buffer) == 2 and isinstance(buffer[0], np.ndarray):
        values, quality = buffer
    else:
        values = np.array([np.atleast_1d(v) for v, _ in buffer], dtype=np.float64).reshape(len(buffer), len(specs))
        quality = np.array([q for _, q in buffer], dtype=np.float64)
    if len(quality) == 0:
        return uniform_vector(specs, rng), [None] * len(specs)
    analysis = earpc_analyze(values, quality, rng, cluster_on, conventional_entropy)
    out = np.empty(len(specs))
    for i, (spec, split) in enumerate(zip(specs, analysis)):
        if split is None:
            out[i] = rng.uniform(spec.min, spec.max)
        else:
            out[i] = uniform_in(side_interval(spec, split, choose_side(split, rng)), rng)
    return out, analysis


class PairBuffer:
    """FIFO store of ``(v, q)`` pairs with a fixed capacity."""

    def __init__(self, n_params: int, capacity: int = 1000) -> None:
        self.capacity = capacity
        self.values = np.empty((capacity, n_params))
        self.quality = np.empty(capacity)
        self.size = 0
        self._head = 0

    def append(self, v: np.ndarray, q: float) -> None:
        i = (self._head + self.size) % self.capacity
        self.values[i] = v
        self.quality[i] = q
        if self.size < self.capacity:
            self.size += 1
        else:
            self._head = (self._head + 1) % self.capacity

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        # contents in arbitrary rotation order; every consumer sorts
        return self.values[: self.size], self.quality[: self.size]

    def clear(self) -> None:
        self.size = 0
        self._head = 0

    def __len__(self) -> int:
        return self.size


class EarpcController(Controller):
    """Range split re-derived from the saved pairs before every proposal.

    Uniform proposals are made until ``min_tuples`` pairs are saved.
    """

    name = "E"

    def __init__(
        self,
        specs: Sequence[ParameterSpec],
        min_tuples: int = 10,
        buffer_cap: int = 1000,
        cluster_on: str = "parameters",
        conventional_entropy: bool = False,
    ) -> None:
        super().__init__(specs)
        if cluster_on not in CLUSTER_FEATURES:
            raise ValueError(f"cluster_on must be one of {CLUSTER_FEATURES}")
        self.min_tuples = min_tuples
        self.cluster_on = cluster_on
        self.conventional_entropy = conventional_entropy
        self.buffer = PairBuffer(len(self.specs), buffer_cap)
        self.last_analysis: list[RangeSplit | None] = [None] * len(self.specs)

    def propose(self, observables: Any, rng) -> np.ndarray:
        if len(self.buffer) < self.min_tuples:
            return uniform_vector(self.specs, rng)
        v, self.last_analysis = earpc_propose(
            self.buffer.arrays(), self.specs, rng, self.cluster_on, self.conventional_entropy
        )
        return v

    def feedback(self, tup: ExperienceTuple) -> None:
        self.buffer.append(np.atleast_1d(np.asarray(tup.action, dtype=np.float64)), tup.reward)

    def snapshot(self) -> dict:
        return {
            "controller": self.name,
            "cluster_on": self.cluster_on,
            "buffer": len(self.buffer),
            "buffer_cap": self.buffer.capacity,
            "splits": [None if a is None else [a.split, a.q1, a.q2] for a in self.last_analysis],
        }

    def split_points(self) -> tuple[float, ...]:
        a = self.last_analysis[0]
        return () if a is None else (a.split,)
