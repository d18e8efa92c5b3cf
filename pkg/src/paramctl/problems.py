"""Benchmark objectives and the clamped Gaussian mutation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import DomainError

PROBLEM_NAMES = ("sphere", "rosenbrock", "levi", "rastrigin")

_DEFAULT_BOUNDS = {
    "sphere": (-5.0, 5.0),
    "rastrigin": (-5.0, 5.0),
    "rosenbrock": (-5.0, 10.0),
    "levi": (-10.0, 10.0),
}


@dataclass(frozen=True)
class ProblemInstance:
    """A minimisation benchmark on a box domain.

    ``lower``/``upper`` take one bound per coordinate or a single number
    for all of them; empty means the problem's default box.
    ``rosenbrock_form`` selects ``"printed"`` ``(a - x1^2)^2 + b(x2 - x1^2)^2``
    or the ``"canonical"`` ``(a - x1)^2 + b(x2 - x1^2)^2``.
    """

    name: str
    dimension: int = 2
    lower: tuple[float, ...] = field(default=())
    upper: tuple[float, ...] = field(default=())
    a: float = 1.0
    b: float = 100.0
    A: float = 10.0
    epsilon: float = 1e-5
    optimum_value: float = 0.0
    rosenbrock_form: str = "printed"

    def __post_init__(self) -> None:
        if self.name not in PROBLEM_NAMES:
            raise DomainError(f"unknown problem {self.name!r}")
        if self.dimension < 1:
            raise DomainError("dimension must be positive")
        if self.name in ("rosenbrock", "levi") and self.dimension != 2:
            raise DomainError(f"{self.name} is defined for dimension 2 only")
        if self.rosenbrock_form not in ("printed", "canonical"):
            raise DomainError(f"unknown rosenbrock form {self.rosenbrock_form!r}")
        defaults = _DEFAULT_BOUNDS[self.name]
        for attr, default in zip(("lower", "upper"), defaults):
            v = getattr(self, attr)
            if isinstance(v, (int, float)):
                v = (float(v),) * self.dimension
            elif len(v) == 0:
                v = (default,) * self.dimension
            object.__setattr__(self, attr, tuple(float(t) for t in v))
        if len(self.lower) != self.dimension or len(self.upper) != self.dimension:
            raise DomainError("bounds do not match dimension")
        if any(l >= u for l, u in zip(self.lower, self.upper)):
            raise DomainError("each lower bound must be below its upper bound")

    @cached_property
    def lower_arr(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=np.float64)

    @cached_property
    def upper_arr(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=np.float64)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.upper_arr - self.lower_arr))

    @property
    def optimizer(self) -> np.ndarray:
        if self.name == "rosenbrock":
            return np.array([self.a if self.rosenbrock_form == "canonical" else math.sqrt(self.a), self.a])
        if self.name == "levi":
            return np.ones(2)
        return np.zeros(self.dimension)


def _sin_pi(t: np.ndarray) -> np.ndarray:
    """sin(pi * t), exactly zero at integer t."""
    r = t - 2.0 * np.round(t / 2.0)
    return np.where(r == np.round(r), 0.0, np.sin(np.pi * r))


def evaluate_batch(p: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """Objective values for the rows of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.dimension:
        raise DomainError(f"expected shape (m, {p.dimension}), got {x.shape}")
    if p.name == "sphere":
        return np.sum(x * x, axis=1)
    if p.name == "rastrigin":
        # A*n + sum(x^2 - A cos 2 pi x), regrouped so rounding cannot go below 0
        return np.sum(x * x + p.A * (1.0 - np.cos(2.0 * np.pi * x)), axis=1)
    x1, x2 = x[:, 0], x[:, 1]
    if p.name == "rosenbrock":
        head = p.a - (x1 if p.rosenbrock_form == "canonical" else x1 * x1)
        return head * head + p.b * (x2 - x1 * x1) ** 2
    # Levi N.13 with x = x1, y = x2
    s3x = _sin_pi(3.0 * x1)
    s3y = _sin_pi(3.0 * x2)
    s2y = _sin_pi(2.0 * x2)
    return s3x * s3x + (x1 - 1.0) ** 2 * (1.0 + s3y * s3y) + (x2 - 1.0) ** 2 * (1.0 + s2y * s2y)


def evaluate(p: ProblemInstance, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.dimension,):
        raise DomainError(f"expected a vector of length {p.dimension}, got shape {x.shape}")
    return float(evaluate_batch(p, x[None, :])[0])


def mutate(x: np.ndarray, sigma: float, p: ProblemInstance, rng) -> np.ndarray:
    """``x + sigma * N(0, 1)`` per coordinate, clamped to the box.

    Accepts a single vector or a batch of row vectors.
    """
    if sigma < 0 or math.isnan(sigma):
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != p.dimension:
        raise DomainError("vector length does not match problem dimension")
    y = x + sigma * rng.standard_normal(x.shape)
    return np.clip(y, p.lower_arr, p.upper_arr)
