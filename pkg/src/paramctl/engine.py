"""(mu + lambda) evolution strategy driven by an external sigma controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from .core import DomainError, ExperienceTuple, ParameterSpec
from .problems import ProblemInstance, evaluate_batch, mutate

if TYPE_CHECKING:
    from .controllers.base import Controller

# guards divisions by best fitness values that reach 0 at the optimum
EPS_DIV = 1e-12

REWARD_FORMS = ("improvement", "ratio")


@dataclass(frozen=True)
class EaConfig:
    """EA settings.

    ``reward_form="improvement"`` gives ``c * (f_t - f_{t+1}) / f_{t+1}``;
    ``"ratio"`` gives ``c * (f_{t+1} / f_t - 1)``.
    """

    mu: int
    lam: int
    k: float
    c: float = 100.0
    max_generations: int = 100_000
    reward_form: str = "improvement"

    def __post_init__(self) -> None:
        # canonical types: k=3 and k=3.0 must describe (and seed) the same cell
        for name, conv in (("mu", int), ("lam", int), ("k", float), ("c", float), ("max_generations", int)):
            object.__setattr__(self, name, conv(getattr(self, name)))
        if self.mu < 1 or self.lam < 1:
            raise DomainError("mu and lambda must be at least 1")
        if not self.k > 0 or not self.c > 0:
            raise DomainError("k and c must be positive")
        if self.max_generations < 0:
            raise DomainError("max_generations must be non-negative")
        if self.reward_form not in REWARD_FORMS:
            raise DomainError(f"unknown reward form {self.reward_form!r}")

    def sigma_spec(self) -> ParameterSpec:
        return ParameterSpec("sigma", 0.0, float(self.k))


@dataclass(frozen=True)
class Population:
    members: np.ndarray
    fitness: np.ndarray
    generation: int
    best_fitness: float
    prev_best: float
    stagnation_counter: int
    evaluations: int
    diagonal: float


@dataclass(frozen=True)
class ObservableVector:
    genotypic_diversity: float
    fitness_stddev: float
    stagnation: float
    fitness_improvement: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.genotypic_diversity, self.fitness_stddev, self.stagnation, self.fitness_improvement]
        )


N_OBSERVABLES = 4


@dataclass
class RunRecord:
    """Outcome of one run plus optional per-generation traces.

    ``sigma_trace[t]`` and ``reward_trace[t]`` belong to generation
    ``t + 1``.  ``split_trace`` lists ``(generation, split points)`` only
    when the controller's discretisation changes; generation 0 holds the
    initial one.
    """

    controller: str
    problem: str
    k: float
    mu: int
    lam: int
    seed: int
    generations: int
    success: bool
    best_fitness: float
    evaluations: int
    sigma_trace: list[float] = field(default_factory=list)
    reward_trace: list[float] = field(default_factory=list)
    split_trace: list[tuple[int, tuple[float, ...]]] = field(default_factory=list)
    error: str | None = None
    run: int = 0
    options: dict = field(default_factory=dict)

    def summary_dict(self) -> dict:
        return {
            "controller": self.controller,
            "problem": self.problem,
            "k": self.k,
            "mu": self.mu,
            "lambda": self.lam,
            "seed": self.seed,
            "run": self.run,
            "generations": self.generations,
            "success": self.success,
            "best_fitness": self.best_fitness,
            "evaluations": self.evaluations,
            "error": self.error,
            "options": dict(self.options),
        }


def _population(members: np.ndarray, fitness: np.ndarray, diagonal: float, **kw) -> Population:
    return Population(members=members, fitness=fitness, best_fitness=float(fitness[0]), diagonal=diagonal, **kw)


def init_population(cfg: EaConfig, p: ProblemInstance, rng) -> Population:
    """``mu`` members drawn uniformly in the box, sorted by fitness."""
    x = rng.uniform(p.lower_arr, p.upper_arr, size=(cfg.mu, p.dimension))
    f = evaluate_batch(p, x)
    order = np.argsort(f, kind="stable")
    x, f = x[order], f[order]
    return _population(
        x, f, p.diagonal, generation=0, prev_best=float(f[0]), stagnation_counter=0, evaluations=cfg.mu
    )


def compute_reward(f_t: float, f_next: float, cfg: EaConfig) -> float:
    if cfg.reward_form == "improvement":
        return cfg.c * (f_t - f_next) / max(f_next, EPS_DIV)
    return cfg.c * (f_next / max(f_t, EPS_DIV) - 1.0)


def step(pop: Population, sigma: float, cfg: EaConfig, p: ProblemInstance, rng) -> tuple[Population, float]:
    """One elitist generation: lambda mutants of uniformly drawn parents, keep best mu."""
    if not 0.0 <= sigma <= cfg.k:
        raise DomainError(f"sigma {sigma} outside [0, {cfg.k}]")
    mu = len(pop.fitness)
    parents = rng.integers(mu, size=cfg.lam)
    children = mutate(pop.members[parents], sigma, p, rng)
    fc = evaluate_batch(p, children)
    pool_x = np.concatenate([pop.members, children])
    pool_f = np.concatenate([pop.fitness, fc])
    # stable sort keeps parents ahead of equally fit children
    keep = np.argsort(pool_f, kind="stable")[:mu]
    x, f = pool_x[keep], pool_f[keep]
    f_t, f_next = pop.best_fitness, float(f[0])
    improved = f_next < f_t
    reward = compute_reward(f_t, f_next, cfg)
    new = _population(
        x,
        f,
        pop.diagonal,
        generation=pop.generation + 1,
        prev_best=f_t,
        stagnation_counter=0 if improved else pop.stagnation_counter + 1,
        evaluations=pop.evaluations + cfg.lam,
    )
    return new, reward


def observe(pop: Population) -> ObservableVector:
    x = pop.members
    mu = len(x)
    if mu > 1:
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        diversity = float(dist.sum() / (mu * (mu - 1))) / pop.diagonal
        spread = float(np.std(pop.fitness))
    else:
        diversity, spread = 0.0, 0.0
    improvement = (pop.prev_best - pop.best_fitness) / max(abs(pop.prev_best), EPS_DIV)
    return ObservableVector(diversity, spread, float(pop.stagnation_counter), float(improvement))


def reached_optimum(pop: Population, p: ProblemInstance) -> bool:
    return pop.best_fitness - p.optimum_value <= p.epsilon


def run_to_optimum(
    cfg: EaConfig,
    p: ProblemInstance,
    controller: "Controller",
    rng,
    controller_rng=None,
    *,
    seed: int = 0,
    record_traces: bool = True,
    population: Population | None = None,
    on_generation: Callable[[Population, float, float], None] | None = None,
) -> RunRecord:
    """Evolve until the best fitness is within ``p.epsilon`` of the optimum or the budget ends.

    Each generation the controller proposes sigma from the current
    observables, the EA steps, and the controller receives the resulting
    experience tuple.
    """
    ctrl_rng = rng if controller_rng is None else controller_rng
    pop = init_population(cfg, p, rng) if population is None else population
    sigma_trace: list[float] = []
    reward_trace: list[float] = []
    split_trace: list[tuple[int, tuple[float, ...]]] = []
    last_splits = tuple(controller.split_points())
    if record_traces:
        split_trace.append((0, last_splits))
    obs = observe(pop)
    obs_arr = obs.as_array()
    while not reached_optimum(pop, p) and pop.generation < cfg.max_generations:
        values = controller.propose(obs, ctrl_rng)
        sigma = float(values[0])
        pop, reward = step(pop, sigma, cfg, p, rng)
        nxt = observe(pop)
        nxt_arr = nxt.as_array()
        controller.feedback(ExperienceTuple(obs_arr, values, nxt_arr, reward))
        if record_traces:
            sigma_trace.append(sigma)
            reward_trace.append(reward)
            splits = tuple(controller.split_points())
            if splits != last_splits:
                split_trace.append((pop.generation, splits))
                last_splits = splits
        if on_generation is not None:
            on_generation(pop, sigma, reward)
        obs, obs_arr = nxt, nxt_arr
    return RunRecord(
        controller=getattr(controller, "name", type(controller).__name__),
        problem=p.name,
        k=cfg.k,
        mu=cfg.mu,
        lam=cfg.lam,
        seed=seed,
        generations=pop.generation,
        success=reached_optimum(pop, p),
        best_fitness=pop.best_fitness,
        evaluations=pop.evaluations,
        sigma_trace=sigma_trace,
        reward_trace=reward_trace,
        split_trace=split_trace,
    )
