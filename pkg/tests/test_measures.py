import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson

from fil.grids import (
    GridFunction,
    GridSpec,
    Measure1D,
    MeasureError,
    build_measure,
    default_grid,
    integrate,
    median,
    tail_mass,
)


@pytest.fixture(scope="module")
def exp_measure():
    # density e^{-t} on [0, 30]
    grid = GridSpec(0.0, 30.0, 30001)
    return Measure1D.from_log_density(grid, -grid.nodes())


def test_uniform_trapezoid_weights(uniform2001):
    w = uniform2001.weights
    assert np.allclose(w[1:-1], 1.0 / 2000.0, rtol=0, atol=1e-15)
    assert np.allclose(w[[0, -1]], 0.5 / 2000.0, rtol=0, atol=1e-15)


def test_gaussian_weights_profile(gaussian4001):
    mu = gaussian4001
    assert abs(mu.weights.sum() - 1.0) < 1e-12
    x = mu.grid.nodes()
    interior = slice(1, -1)
    profile = mu.weights[interior] / np.exp(-x[interior] ** 2 / 2.0)
    assert np.max(np.abs(profile / profile[len(profile) // 2] - 1.0)) < 1e-10


def test_jacobi_density_normalization(jacobi4001):
    mu = jacobi4001
    assert abs(mu.weights.sum() - 1.0) < 1e-12
    x = mu.grid.nodes()
    dens = mu.density()
    ratio = dens / np.cos(x) ** 3
    assert np.max(np.abs(ratio / ratio[len(ratio) // 2] - 1.0)) < 1e-10
    # normalizer against an independent high-resolution Simpson quadrature
    xs = np.linspace(mu.grid.x_min, mu.grid.x_max, 200001)
    z = simpson(np.cos(xs) ** 3, x=xs)
    assert abs(ratio[len(ratio) // 2] - 1.0 / z) < 1e-8 / z


def test_integrate_constant(uniform2001, jacobi2001):
    for mu in (uniform2001, jacobi2001):
        f = GridFunction(mu.grid, np.full(mu.grid.n, 3.7))
        assert abs(integrate(mu, f) - 3.7) < 1e-12


def test_integrate_uniform_identity(uniform2001):
    f = GridFunction.from_callable(uniform2001.grid, lambda x: x)
    assert abs(integrate(uniform2001, f) - 0.5) < 1e-12


def test_integrate_gaussian_second_moment(gaussian4001):
    f = GridFunction.from_callable(gaussian4001.grid, lambda x: x**2)
    assert abs(integrate(gaussian4001, f) - 1.0) < 1e-8


def test_median_uniform(uniform2001):
    assert abs(median(uniform2001) - 0.5) < 1e-12


def test_median_gaussian(gaussian4001):
    assert abs(median(gaussian4001)) < 1e-10


def test_median_exponential(exp_measure):
    assert abs(median(exp_measure) - math.log(2.0)) < 1e-6


def test_tail_mass_uniform(uniform2001):
    assert abs(tail_mass(uniform2001, 0.75, "right") - 0.25) < 1e-12


def test_tail_mass_jacobi_symmetry(jacobi4001):
    assert abs(tail_mass(jacobi4001, 0.0, "right") - 0.5) < 1e-10


def test_tail_mass_exponential(exp_measure):
    assert abs(tail_mass(exp_measure, 1.0, "right") - math.exp(-1.0)) < 1e-6


def test_survival_matches_cdf_where_both_accurate(gaussian4001):
    mu = gaussian4001
    mid = slice(100, -100)
    assert np.max(np.abs((1.0 - mu.cdf[mid]) - mu.sf[mid])) < 1e-12


def test_survival_keeps_tiny_tail_precision(gaussian4001):
    # far-right tail ~ e^{-32}: 1 - cdf would lose all relative precision
    val = tail_mass(gaussian4001, 8.0, "right")
    exact = quad(lambda t: math.exp(-t * t / 2.0), 8.0, 8.5)[0] / math.sqrt(2 * math.pi)
    assert abs(val / exact - 1.0) < 1e-2


def test_tail_budget_enforced():
    with pytest.raises(MeasureError):
        build_measure("gaussian", GridSpec(-3.0, 3.0, 2001))


def test_truncation_note_recorded(gaussian4001, uniform2001):
    assert gaussian4001.truncation is not None
    assert "omitted" in gaussian4001.truncation
    assert uniform2001.truncation is None


def test_unknown_family_rejected():
    with pytest.raises(MeasureError):
        build_measure("nosuchfamily")


def test_malformed_descriptor_rejected():
    with pytest.raises(MeasureError):
        build_measure("jacobi:n")


def test_table_roundtrip(tmp_path):
    path = tmp_path / "m.csv"
    xs = np.linspace(0.0, 1.0, 101)
    lines = ["x,logdensity"] + [f"{x:.12g},0.0" for x in xs]
    path.write_text("\n".join(lines) + "\n")
    mu = build_measure(f"table:{path}")
    assert mu.grid.n == 101
    assert abs(integrate(mu, GridFunction.from_callable(mu.grid, lambda x: x)) - 0.5) < 1e-12


def test_table_rejects_nonuniform_spacing(tmp_path):
    path = tmp_path / "bad.csv"
    xs = np.concatenate((np.linspace(0, 0.5, 50, endpoint=False), np.linspace(0.5, 1.0, 100)))
    lines = ["x,logdensity"] + [f"{x:.12g},0.0" for x in xs]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MeasureError):
        build_measure(f"table:{path}")


def test_table_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n" + "\n".join(f"{x},0" for x in np.linspace(0, 1, 20)))
    with pytest.raises(MeasureError):
        build_measure(f"table:{path}")


def test_grid_validation():
    with pytest.raises(MeasureError):
        GridSpec(1.0, 0.0, 101)
    with pytest.raises(MeasureError):
        GridSpec(0.0, 1.0, 5)


def test_gradient_linear_exact(uniform2001):
    f = GridFunction.from_callable(uniform2001.grid, lambda x: 3.0 * x + 1.0)
    assert np.max(np.abs(f.gradient() - 3.0)) < 1e-10
