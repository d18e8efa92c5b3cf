"""Q-learning with an adaptively re-discretised action set.

Each parameter has its own single-state agent whose actions are the
intervals of a partition.  The partition starts as the whole range; it
is rebuilt from stored ``(v, r)`` pairs by recursive KS splitting, first
once enough pairs exist and later whenever the agent's Q-values become
nearly equal.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..core import ExperienceTuple, ParameterSpec, Partition, QTable, partition_lookup, uniform_in
from ..stats import best_ks_split
from .base import Controller, RLParams, epsilon_greedy, q_update
from .earpc import PairBuffer
from .tree import SPLIT_CORRECTIONS, is_significant


def _split_points(
    v: np.ndarray, r: np.ndarray, depth: int, alpha: float, correction: str, min_side: int
) -> list[float]:
    if depth <= 0 or len(v) < 2 * min_side:
        return []
    cand = best_ks_split(v, r, min_side=min_side)
    if cand is None or not is_significant(cand.score, cand.candidates, alpha, correction):
        return []
    s = cand.split_value
    left = v <= s
    return (
        _split_points(v[left], r[left], depth - 1, alpha, correction, min_side)
        + [s]
        + _split_points(v[~left], r[~left], depth - 1, alpha, correction, min_side)
    )


def split_of_range(
    values: Sequence[float],
    rewards: Sequence[float],
    spec: ParameterSpec,
    depth_limit: int = 2,
    alpha: float = 0.05,
    correction: str = "none",
    min_side: int = 2,
) -> Partition | None:
    """Partition of ``spec``'s range from recursive KS splits of the rewards.

    The best split of the whole sample is accepted when significant, then
    each side is split the same way, ``depth_limit`` levels in total, so
    at most ``2 ** depth_limit`` intervals result.  ``None`` means no
    significant root split.
    """
    v = np.asarray(values, dtype=np.float64)
    r = np.asarray(rewards, dtype=np.float64)
    points = _split_points(v, r, depth_limit, alpha, correction, min_side)
    points = [s for s in points if spec.min < s < spec.max]
    if not points:
        return None
    return Partition.from_splits(spec, points)


class AdaptiveAgent:
    """Single-state Q-learner over the intervals of one parameter's partition."""

    def __init__(
        self,
        spec: ParameterSpec,
        params: RLParams,
        depth_limit: int = 2,
        delta_rel: float = 0.01,
        min_buffer: int = 100,
        buffer_cap: int = 1000,
        split_alpha: float = 0.05,
        split_correction: str = "none",
        min_side: int = 2,
    ) -> None:
        self.spec = spec
        self.params = params
        self.depth_limit = depth_limit
        self.delta_rel = delta_rel
        self.min_buffer = min_buffer
        self.split_alpha = split_alpha
        self.split_correction = split_correction
        self.min_side = min_side
        self.partition = Partition.from_splits(spec)
        self.q = QTable.zeros(range(1))
        self.buffer = PairBuffer(1, buffer_cap)
        self.rediscretizations = 0
        self.pending: int | None = None

    def delta(self) -> float:
        return self.delta_rel * max(1.0, self.q.value())

    def wants_split(self) -> bool:
        if len(self.buffer) < self.min_buffer:
            return False
        if self.partition.is_trivial:
            return True
        return self.q.spread() < self.delta()

    def maybe_rediscretize(self) -> bool:
        if not self.wants_split():
            return False
        values, rewards = self.buffer.arrays()
        new = split_of_range(
            values[:, 0],
            rewards,
            self.spec,
            self.depth_limit,
            self.split_alpha,
            self.split_correction,
            self.min_side,
        )
        if new is None:
            return False
        self.partition = new
        self.q = QTable.zeros(range(len(new)))
        self.buffer.clear()
        self.rediscretizations += 1
        return True

    def select(self, rng) -> tuple[int, float]:
        a = int(epsilon_greedy(self.q, self.params.epsilon, rng))
        self.pending = a
        return a, uniform_in(self.partition[a], rng)

    def learn(self, action: int, value: float, reward: float) -> None:
        self.buffer.append(np.array([value]), reward)
        q_update(self.q, action, reward, self.q.value(), self.params)
        self.pending = None


class AdaptiveController(Controller):
    """One :class:`AdaptiveAgent` per parameter, all credited with the joint reward."""

    name = "A"

    def __init__(
        self,
        specs: Sequence[ParameterSpec],
        params: RLParams = RLParams(),
        depth_limit: int = 2,
        delta_rel: float = 0.01,
        min_buffer: int = 100,
        buffer_cap: int = 1000,
        split_alpha: float = 0.05,
        split_correction: str = "none",
        min_side: int = 2,
    ) -> None:
        super().__init__(specs)
        if split_correction not in SPLIT_CORRECTIONS:
            raise ValueError(f"split_correction must be one of {SPLIT_CORRECTIONS}")
        self.agents = [
            AdaptiveAgent(
                s, params, depth_limit, delta_rel, min_buffer, buffer_cap, split_alpha, split_correction, min_side
            )
            for s in self.specs
        ]

    def propose(self, observables: Any, rng) -> np.ndarray:
        out = np.empty(len(self.agents))
        for i, agent in enumerate(self.agents):
            agent.maybe_rediscretize()
            _, out[i] = agent.select(rng)
        return out

    def feedback(self, tup: ExperienceTuple) -> None:
        values = np.atleast_1d(np.asarray(tup.action, dtype=np.float64))
        for agent, v in zip(self.agents, values):
            action = agent.pending
            if action is None:
                action = partition_lookup(agent.partition, float(v))
            agent.learn(action, float(v), tup.reward)

    def snapshot(self) -> dict:
        return {
            "controller": self.name,
            "agents": [
                {
                    "splits": list(a.partition.splits),
                    "q": [a.q[i] for i in a.q.actions()],
                    "buffer": len(a.buffer),
                    "rediscretizations": a.rediscretizations,
                }
                for a in self.agents
            ],
        }

    def split_points(self) -> tuple[float, ...]:
        return self.agents[0].partition.splits
