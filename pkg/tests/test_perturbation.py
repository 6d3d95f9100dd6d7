import math

import numpy as np
import pytest

from fil.grids import GridFunction, MeasureError
from fil.perturbation import perturb, perturbation_check


def test_constant_tilt_is_identity(jacobi2001):
    u = GridFunction(jacobi2001.grid, np.full(jacobi2001.grid.n, 4.2))
    tilted, osc = perturb(jacobi2001, u)
    assert osc == 0.0
    assert np.max(np.abs(tilted.weights - jacobi2001.weights)) < 1e-14


def test_cosine_tilt_oscillation(jacobi2001):
    # grid endpoints sit 1e-3 of a half-width inside (-pi/2, pi/2), so the
    # range of cos(2x) over the nodes is 2 - O(1e-6), not exactly 2
    u = GridFunction.from_callable(jacobi2001.grid, lambda x: np.cos(2.0 * x))
    _, osc = perturb(jacobi2001, u)
    assert abs(osc - 2.0) < 1e-5


def test_exponential_tilt_density(uniform2001):
    u = GridFunction.from_callable(uniform2001.grid, lambda x: x)
    tilted, osc = perturb(uniform2001, u)
    assert abs(osc - 1.0) < 1e-12
    x = uniform2001.grid.nodes()
    expected = np.exp(-x) / (1.0 - math.exp(-1.0))
    assert np.max(np.abs(tilted.density() - expected)) < 1e-6


def test_tilt_roundtrip(jacobi2001):
    u = GridFunction.from_callable(jacobi2001.grid, lambda x: np.sin(3.0 * x))
    tilted, _ = perturb(jacobi2001, u)
    back, _ = perturb(tilted, GridFunction(jacobi2001.grid, -u.values))
    assert np.max(np.abs(back.weights - jacobi2001.weights)) < 1e-14


def test_tilt_rejects_nonfinite(jacobi2001):
    bad = np.zeros(jacobi2001.grid.n)
    bad[3] = np.inf
    with pytest.raises(MeasureError):
        perturb(jacobi2001, GridFunction(jacobi2001.grid, bad))


def test_perturbation_check_conclusive(jacobi2001):
    u = GridFunction.from_callable(jacobi2001.grid, lambda x: np.cos(2.0 * x))
    rep = perturbation_check(jacobi2001, u, 4.0, seeds=8, rng_seed=0)
    assert not rep.inconclusive
    assert rep.passed
    assert abs(rep.factor - math.exp(rep.osc)) < 1e-12
    assert rep.perturbed_emp <= rep.factor * rep.base_upper * 1.01


def test_perturbation_check_zero_tilt(jacobi2001):
    u = GridFunction(jacobi2001.grid, np.zeros(jacobi2001.grid.n))
    rep = perturbation_check(jacobi2001, u, 4.0, seeds=8, rng_seed=0)
    assert rep.passed
    assert rep.factor == 1.0


def test_perturbation_check_inconclusive_without_upper_bound(uniform2001):
    # p = 1 has no certified upper bound, so only empirical-vs-empirical
    u = GridFunction.from_callable(uniform2001.grid, lambda x: np.sin(2 * np.pi * x))
    rep = perturbation_check(uniform2001, u, 1.0, seeds=6, rng_seed=0)
    assert rep.inconclusive
    assert rep.passed


def test_large_bump_factor(uniform2001):
    x = uniform2001.grid.nodes()
    u = GridFunction(uniform2001.grid, 5.0 / (1.0 + np.exp(-40.0 * (x - 0.5))))
    rep = perturbation_check(uniform2001, u, 4.0, seeds=8, rng_seed=0)
    assert rep.passed
    assert abs(rep.factor - math.exp(rep.osc)) < 1e-9
    assert rep.osc <= 5.0 + 1e-9
