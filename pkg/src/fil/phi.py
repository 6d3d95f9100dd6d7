"""Phi families, Phi-entropies, weighted Dirichlet integrals and distances.

The convex function indexed by p:
    p = 0      : exp(x)
    0 < p < 2  : x^{2/p}
    p = 2      : x log x
    p > 2      : -x^{2/p}
All branches other than exp are used on (0, infinity) only.

Total variation follows the un-halved convention (sup over |test| <= 1, i.e.
the full L1 distance of densities); every bound in this package is stated in
that convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridFunction, Measure1D, MeasureError, integrate


@dataclass(frozen=True)
class PhiFamily:
    p: float

    def __post_init__(self) -> None:
        if self.p < 0:
            raise MeasureError("p must be >= 0")

    @property
    def branch(self) -> str:
        if self.p == 0:
            return "exp"
        if self.p < 2:
            return "power_low"
        if self.p == 2:
            return "xlogx"
        return "neg_power"


def phi(fam: PhiFamily, x, order: int = 0):
    """Phi, Phi' or Phi'' of the family, vectorized."""
    x = np.asarray(x, dtype=float)
    if order not in (0, 1, 2):
        raise MeasureError(f"order must be 0, 1 or 2, got {order}")
    branch = fam.branch
    if branch == "exp":
        return np.exp(x)
    if np.any(x <= 0.0):
        raise MeasureError("x must be positive for non-exponential branches")
    if branch == "xlogx":
        if order == 0:
            return x * np.log(x)
        if order == 1:
            return np.log(x) + 1.0
        return 1.0 / x
    s = 2.0 / fam.p
    sign = -1.0 if branch == "neg_power" else 1.0
    if order == 0:
        return sign * x**s
    if order == 1:
        return sign * s * x ** (s - 1.0)
    if order == 2:
        return sign * s * (s - 1.0) * x ** (s - 2.0)
    raise MeasureError(f"order must be 0, 1 or 2, got {order}")


def floor_positive(f: GridFunction, eps: float = 1e-12) -> GridFunction:
    """Clamp a nonnegative (indicator-like) function away from zero."""
    return GridFunction(f.grid, np.maximum(f.values, eps))


def _require_admissible(fam: PhiFamily, values: np.ndarray) -> None:
    if fam.branch != "exp" and np.any(values <= 0.0):
        raise MeasureError("f must be strictly positive for this Phi branch")


def entropy(mu: Measure1D, f: GridFunction, p: float) -> float:
    """Phi-entropy mu(Phi(f)) - Phi(mu(f)); nonnegative by Jensen."""
    fam = PhiFamily(p)
    _require_admissible(fam, f.values)
    mean = integrate(mu, f)
    return float(np.dot(mu.weights, phi(fam, f.values)) - phi(fam, mean))


def entropy_variational(mu: Measure1D, f: GridFunction, p: float) -> dict:
    """Minimize c -> mu(Phi(f) - Phi(c) - Phi'(c)(f - c)) by golden section.

    The minimum equals the Phi-entropy, attained at c* = mu(f).
    """
    fam = PhiFamily(p)
    _require_admissible(fam, f.values)
    lo = float(f.values.min())
    hi = float(f.values.max())
    mean_phi = float(np.dot(mu.weights, phi(fam, f.values)))
    mean_f = integrate(mu, f)

    def objective(c: float) -> float:
        return mean_phi - float(phi(fam, c)) - float(phi(fam, c, 1)) * (mean_f - c)

    if hi - lo < 1e-15:
        return {"value": 0.0, "c_star": lo}

    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - inv_phi * (b - a)
    c2 = a + inv_phi * (b - a)
    f1, f2 = objective(c1), objective(c2)
    for _ in range(80):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - inv_phi * (b - a)
            f1 = objective(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + inv_phi * (b - a)
            f2 = objective(c2)
    c_star, value = (c1, f1) if f1 <= f2 else (c2, f2)
    return {"value": float(value), "c_star": float(c_star)}


def phi_dirichlet(mu: Measure1D, f: GridFunction, p: float) -> float:
    """Weighted Dirichlet integral int Phi''(f) f'^2 dmu."""
    fam = PhiFamily(p)
    _require_admissible(fam, f.values)
    fp = f.gradient()
    return float(np.dot(mu.weights, phi(fam, f.values, 2) * fp * fp))


def distances(mu: Measure1D, f: GridFunction) -> dict:
    """TV (un-halved L1) and Hellinger distance of f*mu from mu.

    f must be a mu-probability density: f >= 0 and mu(f) = 1 within 1e-8.
    """
    if np.any(f.values < 0.0):
        raise MeasureError("density must be nonnegative")
    mean = integrate(mu, f)
    if abs(mean - 1.0) > 1e-8:
        raise MeasureError(f"f is not a probability density: mu(f) = {mean}")
    tv = float(np.dot(mu.weights, np.abs(f.values - 1.0)))
    hell_sq = 2.0 * (1.0 - float(np.dot(mu.weights, np.sqrt(f.values))))
    return {"tv": tv, "hellinger": float(np.sqrt(max(hell_sq, 0.0)))}
