"""Single-state Q-learning over a fixed, equal-width discretisation."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..core import ExperienceTuple, ParameterSpec, Partition, QTable, uniform_in
from .base import Controller, RLParams, epsilon_greedy, q_update


class QLearningController(Controller):
    """Actions are joint choices of one interval per parameter.

    Each range is cut a priori into ``intervals`` equal pieces; the chosen
    interval is sampled uniformly for the actual value.
    """

    name = "Q"

    def __init__(self, specs: Sequence[ParameterSpec], params: RLParams = RLParams(), intervals: int = 5) -> None:
        super().__init__(specs)
        self.params = params
        self.partitions = [Partition.uniform(s, intervals) for s in self.specs]
        self._shape = tuple(len(p) for p in self.partitions)
        self.q = QTable.zeros(range(int(np.prod(self._shape))))
        self._pending: int | None = None

    def action_intervals(self, action: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(action, self._shape))

    def sample(self, action: int, rng) -> np.ndarray:
        idx = self.action_intervals(action)
        return np.array([uniform_in(p[i], rng) for p, i in zip(self.partitions, idx)])

    def select_action(self, rng) -> int:
        return int(epsilon_greedy(self.q, self.params.epsilon, rng))

    def propose(self, observables: Any, rng) -> np.ndarray:
        a = self.select_action(rng)
        self._pending = a
        return self.sample(a, rng)

    def feedback(self, tup: ExperienceTuple) -> None:
        action = tup.action if isinstance(tup.action, (int, np.integer)) else self._pending
        if action is None:
            raise RuntimeError("feedback without a preceding proposal")
        q_update(self.q, int(action), tup.reward, self.q.value(), self.params)
        self._pending = None

    def snapshot(self) -> dict:
        return {
            "controller": self.name,
            "splits": [list(p.splits) for p in self.partitions],
            "q": [self.q[a] for a in self.q.actions()],
        }

    def split_points(self) -> tuple[float, ...]:
        return self.partitions[0].splits
