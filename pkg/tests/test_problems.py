import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramctl.core import DomainError, RngStream
from paramctl.problems import PROBLEM_NAMES, ProblemInstance, evaluate, evaluate_batch, mutate


def test_sphere_value():
    assert evaluate(ProblemInstance("sphere", dimension=3), [1, 2, 3]) == 14.0


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_optimum_is_exactly_zero(name):
    p = ProblemInstance(name)
    assert evaluate(p, p.optimizer) == 0.0


def test_rastrigin_origin():
    assert evaluate(ProblemInstance("rastrigin"), [0, 0]) == 0.0


def test_levi_optimum():
    assert evaluate(ProblemInstance("levi"), [1, 1]) == 0.0


def test_rosenbrock_both_forms_vanish_at_one_one():
    for form in ("printed", "canonical"):
        assert evaluate(ProblemInstance("rosenbrock", rosenbrock_form=form), [1, 1]) == 0.0


def test_rosenbrock_printed_form_has_mirrored_optimum():
    printed = ProblemInstance("rosenbrock")
    canonical = ProblemInstance("rosenbrock", rosenbrock_form="canonical")
    assert evaluate(printed, [-1, 1]) == 0.0
    assert evaluate(canonical, [-1, 1]) == 4.0


def test_hand_values():
    # levi at (0, 0): sin^2(0) + 1*(1+0) + 1*(1+0) = 2
    assert evaluate(ProblemInstance("levi"), [0, 0]) == pytest.approx(2.0, abs=1e-15)
    # rastrigin at (0.5, 0): 0.25 + 10 * (1 - cos(pi)) = 20.25
    assert evaluate(ProblemInstance("rastrigin"), [0.5, 0]) == pytest.approx(20.25, rel=1e-15)
    # printed rosenbrock at (0, 0): (1 - 0)^2 + 100 * 0 = 1
    assert evaluate(ProblemInstance("rosenbrock"), [0, 0]) == 1.0
    # printed rosenbrock at (2, 1): (1 - 4)^2 + 100 * (1 - 4)^2 = 909
    assert evaluate(ProblemInstance("rosenbrock"), [2, 1]) == 909.0


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        evaluate(ProblemInstance("sphere"), [1, 2, 3])


def test_two_dimensional_only_functions():
    for name in ("rosenbrock", "levi"):
        with pytest.raises(DomainError):
            ProblemInstance(name, dimension=3)


def test_default_domains():
    for name, (lo, hi) in {"sphere": (-5, 5), "rastrigin": (-5, 5), "rosenbrock": (-5, 10), "levi": (-10, 10)}.items():
        p = ProblemInstance(name)
        assert p.lower == (lo, lo) and p.upper == (hi, hi)
    assert ProblemInstance("sphere", lower=0, upper=(1, 2)).lower == (0.0, 0.0)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(PROBLEM_NAMES), st.integers(0, 2**32 - 1))
def test_objective_non_negative(name, seed):
    p = ProblemInstance(name)
    rng = np.random.default_rng(seed)
    x = rng.uniform(p.lower_arr, p.upper_arr, size=(64, p.dimension))
    assert np.all(evaluate_batch(p, x) >= 0.0)


def test_mutate_zero_sigma_is_identity():
    p = ProblemInstance("sphere")
    x = np.array([1.5, -2.0])
    assert np.array_equal(mutate(x, 0.0, p, RngStream(0)), x)


def test_mutate_upper_clamp():
    p = ProblemInstance("sphere")
    x = np.array([5.0, 5.0])
    for seed in range(20):
        y = mutate(x, 1.0, p, RngStream(seed))
        assert np.all(y <= 5.0)
        # a positive draw at the upper bound must stay exactly at the bound
        z = RngStream(seed).standard_normal(2)
        assert np.all(y[z > 0] == 5.0)


def test_mutate_negative_sigma():
    with pytest.raises(DomainError):
        mutate(np.zeros(2), -0.1, ProblemInstance("sphere"), RngStream(0))


def test_mutate_step_scale():
    # Monte-Carlo check of sigma * N(0, 1): sd of the sample sd ~ 0.5/sqrt(2e5) ~ 0.0011
    p = ProblemInstance("sphere", lower=-1e6, upper=1e6)
    x = np.zeros((100_000, 2))
    d = mutate(x, 0.5, p, RngStream(11)) - x
    assert np.all(np.abs(d.std(axis=0) - 0.5) < 0.01)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PROBLEM_NAMES), st.floats(0, 50), st.integers(0, 2**32 - 1))
def test_mutate_in_domain(name, sigma, seed):
    p = ProblemInstance(name)
    rng = RngStream(seed)
    x = rng.uniform(p.lower_arr, p.upper_arr, size=(16, p.dimension))
    y = mutate(x, sigma, p, rng)
    assert np.all((y >= p.lower_arr) & (y <= p.upper_arr))


def test_mutate_non_degenerate():
    p = ProblemInstance("sphere")
    x = np.array([0.1, 0.2])
    a = mutate(x, 0.3, p, RngStream(1))
    b = mutate(x, 0.3, p, RngStream(2))
    assert not np.array_equal(a, b)


def test_problem_diagonal():
    assert ProblemInstance("sphere").diagonal == pytest.approx(math.hypot(10, 10))
