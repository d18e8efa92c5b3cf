"""Controllers whose RL state is a leaf of a binary tree over EA observables.

A leaf is split when the estimated returns ``r + gamma * V(s')`` of its
stored tuples differ significantly (two-sample KS) on either side of
some observable threshold.
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

import numpy as np

from ..core import ExperienceTuple, ParameterSpec, Partition, QTable, uniform_in
from ..engine import N_OBSERVABLES
from ..stats import SplitCandidate, best_ks_split
from .base import Controller, RLParams, epsilon_greedy, obs_array, q_update, uniform_vector
from .earpc import CLUSTER_FEATURES, RangeSplit, earpc_propose

SPLIT_CORRECTIONS = ("none", "bonferroni")


def is_significant(p_value: float, n_tests: int, alpha: float, correction: str) -> bool:
    """``p < alpha``, or ``p * n_tests < alpha`` under Bonferroni."""
    if correction == "bonferroni":
        return p_value * max(n_tests, 1) < alpha
    return p_value < alpha


class TupleBuffer:
    """Fixed-capacity FIFO of experience tuples stored column-wise."""

    def __init__(self, n_obs: int, n_params: int, capacity: int = 1000) -> None:
        self.capacity = capacity
        self.before = np.empty((capacity, n_obs))
        self.after = np.empty((capacity, n_obs))
        self.values = np.empty((capacity, n_params))
        self.actions = np.empty(capacity, dtype=np.int64)
        self.rewards = np.empty(capacity)
        self.size = 0
        self._head = 0

    def append(self, before: np.ndarray, action: int, values: np.ndarray, after: np.ndarray, reward: float) -> None:
        i = (self._head + self.size) % self.capacity
        self.before[i] = before
        self.after[i] = after
        self.values[i] = values
        self.actions[i] = action
        self.rewards[i] = reward
        if self.size < self.capacity:
            self.size += 1
        else:
            self._head = (self._head + 1) % self.capacity

    def take(self, mask: np.ndarray) -> "TupleBuffer":
        sel = np.flatnonzero(mask)
        out = TupleBuffer(self.before.shape[1], self.values.shape[1], self.capacity)
        n = len(sel)
        out.before[:n] = self.before[sel]
        out.after[:n] = self.after[sel]
        out.values[:n] = self.values[sel]
        out.actions[:n] = self.actions[sel]
        out.rewards[:n] = self.rewards[sel]
        out.size = n
        return out

    def __len__(self) -> int:
        return self.size


class StateNode:
    """Internal node (``feature``/``threshold``/children) or leaf (Q-table, tuples)."""

    __slots__ = ("feature", "threshold", "left", "right", "q", "buffer", "value", "range_split")

    def __init__(self, buffer: TupleBuffer, q: QTable | None = None, value: float = 0.0) -> None:
        self.feature = -1
        self.threshold = 0.0
        self.left: StateNode | None = None
        self.right: StateNode | None = None
        self.q = q
        self.buffer: TupleBuffer | None = buffer
        self.value = value
        self.range_split: list[RangeSplit | None] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def route(self, obs: np.ndarray) -> "StateNode":
        node = self
        while node.left is not None:
            node = node.left if obs[node.feature] <= node.threshold else node.right
        return node

    def route_values(self, obs: np.ndarray, value_of: Callable[["StateNode"], float]) -> np.ndarray:
        """``value_of(leaf)`` for the leaf reached by each row of ``obs``."""
        out = np.empty(len(obs))
        stack = [(self, np.arange(len(obs)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.left is None:
                out[idx] = value_of(node)
                continue
            go_left = obs[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    def leaves(self) -> list["StateNode"]:
        if self.left is None:
            return [self]
        return self.left.leaves() + self.right.leaves()

    def depth(self) -> int:
        if self.left is None:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def describe(self) -> dict:
        if self.left is None:
            return {
                "leaf": True,
                "tuples": len(self.buffer),
                "value": self.value,
                "q": None if self.q is None else [self.q[a] for a in self.q.actions()],
            }
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.describe(),
            "right": self.right.describe(),
        }


class StateTreeController(Controller):
    """Shared tree bookkeeping and the split (processing) phase."""

    def __init__(
        self,
        specs: Sequence[ParameterSpec],
        params: RLParams = RLParams(),
        n_observables: int = N_OBSERVABLES,
        buffer_cap: int = 1000,
        split_alpha: float = 0.05,
        split_correction: str = "none",
        min_side: int = 2,
    ) -> None:
        super().__init__(specs)
        if split_correction not in SPLIT_CORRECTIONS:
            raise ValueError(f"split_correction must be one of {SPLIT_CORRECTIONS}")
        self.params = params
        self.n_observables = n_observables
        self.buffer_cap = buffer_cap
        self.split_alpha = split_alpha
        self.split_correction = split_correction
        self.min_side = min_side
        self.root = self._new_leaf(TupleBuffer(n_observables, len(self.specs), buffer_cap))
        self.splits_done = 0
        self._pending_leaf: StateNode | None = None
        self._pending_action = -1

    def _new_leaf(self, buffer: TupleBuffer, parent: StateNode | None = None) -> StateNode:
        raise NotImplementedError

    def leaf_value(self, leaf: StateNode) -> float:
        raise NotImplementedError

    def find_split(self, leaf: StateNode) -> tuple[int, SplitCandidate] | None:
        """Best (observable, threshold) for ``leaf`` if it passes the significance test."""
        buf = leaf.buffer
        n = len(buf)
        if n < 2 * self.min_side:
            return None
        after = buf.after[:n]
        q = buf.rewards[:n] + self.params.gamma * self.root.route_values(after, self.leaf_value)
        if np.all(q == q[0]):
            return None
        best: tuple[int, SplitCandidate] | None = None
        n_tests = 0
        for o in range(self.n_observables):
            cand = best_ks_split(buf.before[:n, o], q, min_side=self.min_side)
            if cand is None:
                continue
            n_tests += cand.candidates
            if best is None or cand.score < best[1].score:
                best = (o, cand)
        if best is None or not is_significant(best[1].score, n_tests, self.split_alpha, self.split_correction):
            return None
        return best

    def split_leaf(self, leaf: StateNode, feature: int, threshold: float) -> None:
        buf = leaf.buffer
        go_left = buf.before[: len(buf), feature] <= threshold
        left = self._new_leaf(buf.take(go_left), leaf)
        right = self._new_leaf(buf.take(~go_left), leaf)
        leaf.feature, leaf.threshold = feature, float(threshold)
        leaf.left, leaf.right = left, right
        leaf.buffer, leaf.q, leaf.range_split = None, None, None
        self.splits_done += 1

    def process(self, leaf: StateNode) -> bool:
        found = self.find_split(leaf)
        if found is None:
            return False
        self.split_leaf(leaf, found[0], found[1].split_value)
        return True

    def snapshot(self) -> dict:
        return {
            "controller": self.name,
            "leaves": len(self.root.leaves()),
            "depth": self.root.depth(),
            "splits": self.splits_done,
            "buffer_cap": self.buffer_cap,
            "split_correction": self.split_correction,
            "tree": self.root.describe(),
        }


class SegmentedStateController(StateTreeController):
    """Per-leaf Q-tables over a fixed equal-width discretisation.

    Q-values are updated with ``max_a Q(s', a)`` of the successor leaf;
    on a split both children inherit the parent's Q-table and value.
    """

    name = "K"

    def __init__(self, specs: Sequence[ParameterSpec], params: RLParams = RLParams(), intervals: int = 5, **kw) -> None:
        self.partitions = [Partition.uniform(s, intervals) for s in specs]
        self._shape = tuple(len(p) for p in self.partitions)
        self._n_actions = int(np.prod(self._shape))
        super().__init__(specs, params, **kw)

    def _new_leaf(self, buffer: TupleBuffer, parent: StateNode | None = None) -> StateNode:
        if parent is None:
            return StateNode(buffer, QTable.zeros(range(self._n_actions)), 0.0)
        return StateNode(buffer, parent.q.copy(), parent.value)

    def leaf_value(self, leaf: StateNode) -> float:
        return leaf.value

    def propose(self, observables: Any, rng) -> np.ndarray:
        leaf = self.root.route(obs_array(observables))
        a = int(epsilon_greedy(leaf.q, self.params.epsilon, rng))
        self._pending_leaf, self._pending_action = leaf, a
        idx = np.unravel_index(a, self._shape)
        return np.array([uniform_in(p[int(i)], rng) for p, i in zip(self.partitions, idx)])

    def feedback(self, tup: ExperienceTuple) -> None:
        before = np.asarray(tup.observables_before, dtype=np.float64)
        after = np.asarray(tup.observables_after, dtype=np.float64)
        if isinstance(tup.action, (int, np.integer)):
            action, values = int(tup.action), np.full(len(self.specs), np.nan)
        else:
            action, values = self._pending_action, np.atleast_1d(np.asarray(tup.action, dtype=np.float64))
        leaf = self.root.route(before)
        nxt = self.root.route(after)
        leaf.buffer.append(before, action, values, after, tup.reward)
        q_update(leaf.q, action, tup.reward, nxt.q.value(), self.params)
        leaf.value = leaf.q.value()
        self._pending_leaf = None
        self.process(leaf)

    def split_points(self) -> tuple[float, ...]:
        return self.partitions[0].splits


class CombinedController(StateTreeController):
    """Tree states whose actions are chosen by EARPC on the leaf's own tuples.

    Leaves keep no Q-table.  A leaf's value is the expected reward of
    sampling its last EARPC split proportionally, ``sum Q_i^2 / (Q_1+Q_2)``,
    or the mean stored reward while no split has been computed there.
    """

    name = "EK"

    def __init__(
        self,
        specs: Sequence[ParameterSpec],
        params: RLParams = RLParams(),
        min_tuples: int = 10,
        cluster_on: str = "parameters",
        conventional_entropy: bool = False,
        **kw,
    ) -> None:
        if cluster_on not in CLUSTER_FEATURES:
            raise ValueError(f"cluster_on must be one of {CLUSTER_FEATURES}")
        self.min_tuples = min_tuples
        self.cluster_on = cluster_on
        self.conventional_entropy = conventional_entropy
        self._last_split: float | None = None
        super().__init__(specs, params, **kw)

    def _new_leaf(self, buffer: TupleBuffer, parent: StateNode | None = None) -> StateNode:
        return StateNode(buffer)

    def leaf_value(self, leaf: StateNode) -> float:
        return expected_leaf_reward(leaf)

    def propose(self, observables: Any, rng) -> np.ndarray:
        leaf = self.root.route(obs_array(observables))
        self._pending_leaf = leaf
        buf = leaf.buffer
        if len(buf) < self.min_tuples:
            return uniform_vector(self.specs, rng)
        v, analysis = earpc_propose(
            (buf.values[: len(buf)], buf.rewards[: len(buf)]),
            self.specs,
            rng,
            self.cluster_on,
            self.conventional_entropy,
        )
        leaf.range_split = analysis
        self._last_split = None if analysis[0] is None else analysis[0].split
        return v

    def feedback(self, tup: ExperienceTuple) -> None:
        before = np.asarray(tup.observables_before, dtype=np.float64)
        after = np.asarray(tup.observables_after, dtype=np.float64)
        values = np.atleast_1d(np.asarray(tup.action, dtype=np.float64))
        leaf = self.root.route(before)
        leaf.buffer.append(before, -1, values, after, tup.reward)
        self._pending_leaf = None
        self.process(leaf)

    def snapshot(self) -> dict:
        snap = super().snapshot()
        snap["cluster_on"] = self.cluster_on
        return snap

    def split_points(self) -> tuple[float, ...]:
        return () if self._last_split is None else (self._last_split,)


def expected_leaf_reward(leaf: StateNode) -> float:
    splits = leaf.range_split
    if splits and all(s is not None for s in splits):
        return float(np.mean([s.expected_quality for s in splits]))
    n = len(leaf.buffer)
    return float(leaf.buffer.rewards[:n].mean()) if n else 0.0
