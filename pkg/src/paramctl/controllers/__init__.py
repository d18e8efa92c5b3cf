"""Parameter controllers and a name-based factory."""

from __future__ import annotations

from typing import Sequence

from ..core import ParameterSpec
from .adaptive import AdaptiveAgent, AdaptiveController, split_of_range
from .base import ConstantController, Controller, RLParams, epsilon_greedy, q_update
from .earpc import EarpcController, RangeSplit, earpc_analyze, earpc_propose
from .qlearning import QLearningController
from .tree import CombinedController, SegmentedStateController, StateNode, expected_leaf_reward

CONTROLLERS: dict[str, type[Controller]] = {
    "A": AdaptiveController,
    "Q": QLearningController,
    "K": SegmentedStateController,
    "E": EarpcController,
    "EK": CombinedController,
}

# which options each controller accepts besides the parameter specs
_TAKES_RL = {"A", "Q", "K", "EK"}


def make_controller(
    name: str, specs: Sequence[ParameterSpec], params: RLParams | None = None, **options
) -> Controller:
    """Build controller ``name`` (one of ``A, Q, K, E, EK``)."""
    try:
        cls = CONTROLLERS[name]
    except KeyError:
        raise ValueError(f"unknown controller {name!r}; choose from {sorted(CONTROLLERS)}") from None
    if name in _TAKES_RL:
        return cls(specs, params or RLParams(), **options)
    return cls(specs, **options)


__all__ = [
    "AdaptiveAgent",
    "AdaptiveController",
    "CONTROLLERS",
    "CombinedController",
    "ConstantController",
    "Controller",
    "EarpcController",
    "SegmentedStateController",
    "QLearningController",
    "RLParams",
    "RangeSplit",
    "StateNode",
    "earpc_analyze",
    "earpc_propose",
    "epsilon_greedy",
    "expected_leaf_reward",
    "make_controller",
    "q_update",
    "split_of_range",
]
