"""Controller interface and the Q-learning pieces the controllers share."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

from ..core import DomainError, ExperienceTuple, ParameterSpec, QTable


@dataclass(frozen=True)
class RLParams:
    """Learning-rate schedule, discount and exploration settings."""

    alpha: float = 0.9
    alpha0: float = 0.02
    gamma: float = 0.8
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        for name in ("alpha", "alpha0", "gamma", "epsilon"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")

    def learning_rate(self, reward: float) -> float:
        return self.alpha if reward > 0 else self.alpha0


def epsilon_greedy(q: QTable, epsilon: float, rng) -> Hashable:
    """Uniform random action with probability ``epsilon``, else argmax with random tie-breaking."""
    actions = q.actions()
    if rng.random() < epsilon:
        return actions[int(rng.integers(len(actions)))]
    best = q.value()
    top = [a for a in actions if q[a] == best]
    if len(top) == 1:
        return top[0]
    return top[int(rng.integers(len(top)))]


def q_update(q: QTable, action: Hashable, reward: float, next_value: float, params: RLParams) -> float:
    """``Q(s,a) += alpha(r) * (r + gamma * V(s') - Q(s,a))``; returns the new value."""
    old = q[action]
    q[action] = old + params.learning_rate(reward) * (reward + params.gamma * next_value - old)
    return q[action]


def obs_array(observables: Any) -> np.ndarray:
    if hasattr(observables, "as_array"):
        return observables.as_array()
    return np.asarray(observables, dtype=np.float64)


def uniform_vector(specs: Sequence[ParameterSpec], rng) -> np.ndarray:
    return np.array([float(rng.uniform(s.min, s.max)) for s in specs])


class Controller(ABC):
    """Proposes parameter values each generation and learns from the outcome."""

    name = "controller"

    def __init__(self, specs: Sequence[ParameterSpec]) -> None:
        if not specs:
            raise DomainError("a controller needs at least one parameter")
        self.specs = tuple(specs)

    @abstractmethod
    def propose(self, observables: Any, rng) -> np.ndarray:
        """Parameter vector for the next generation, one value per spec."""

    @abstractmethod
    def feedback(self, tup: ExperienceTuple) -> None:
        """Absorb the transition produced by the last proposal."""

    def snapshot(self) -> dict:
        return {"controller": self.name}

    def split_points(self) -> tuple[float, ...]:
        """Current interior boundaries of the first parameter's discretisation."""
        return ()


class ConstantController(Controller):
    """Always proposes the same values; a baseline and test double."""

    name = "const"

    def __init__(self, specs: Sequence[ParameterSpec], values: Sequence[float]) -> None:
        super().__init__(specs)
        v = np.asarray(values, dtype=np.float64)
        for x, s in zip(v, self.specs):
            if not s.min <= x <= s.max:
                raise DomainError(f"{x} outside range of {s.name}")
        self.values = v

    def propose(self, observables: Any, rng) -> np.ndarray:
        return self.values.copy()

    def feedback(self, tup: ExperienceTuple) -> None:
        pass
