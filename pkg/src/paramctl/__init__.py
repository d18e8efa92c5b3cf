"""Online parameter controllers for a (mu+lambda) evolution strategy.

Five controllers (``A``, ``Q``, ``K``, ``E``, ``EK``) choose the mutation
step size each generation; :mod:`paramctl.harness` runs them over a grid
of benchmark problems and EA settings.
"""

from .controllers import CONTROLLERS, RLParams, make_controller
from .core import DomainError, ExperienceTuple, Interval, ParameterSpec, Partition, QTable, RngStream, partition_lookup
from .engine import EaConfig, ObservableVector, Population, RunRecord, init_population, observe, run_to_optimum, step
from .kernels import BACKEND
from .problems import PROBLEM_NAMES, ProblemInstance, evaluate, mutate
from .stats import best_entropy_split, best_ks_split, entropy_of_split, kmeans2, ks_two_sample

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CONTROLLERS",
    "DomainError",
    "EaConfig",
    "ExperienceTuple",
    "Interval",
    "ObservableVector",
    "PROBLEM_NAMES",
    "ParameterSpec",
    "Partition",
    "Population",
    "ProblemInstance",
    "QTable",
    "RLParams",
    "RngStream",
    "RunRecord",
    "best_entropy_split",
    "best_ks_split",
    "entropy_of_split",
    "evaluate",
    "init_population",
    "kmeans2",
    "ks_two_sample",
    "make_controller",
    "mutate",
    "observe",
    "partition_lookup",
    "run_to_optimum",
    "step",
]
