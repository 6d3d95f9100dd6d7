"""Empirical lower estimates of the Sobolev constant and the spectral gap.

The Rayleigh quotient of the centered Sobolev inequality is maximized over
positive grid functions f = e^u by gradient ascent with backtracking line
search and multi-start seeding. Reported values are lower estimates of
C_S(p), never certified upper bounds (those come from :mod:`fil.hardy`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import hardy
from .grids import GridFunction, Measure1D, MeasureError, NuDensity, integrate, median
from .semigroup import edge_conductances


@dataclass(frozen=True)
class EmpiricalConstant:
    p: float
    value: float
    witness: GridFunction
    seed_label: str
    iterations: int
    converged: bool


def _stiffness_apply(a_over_delta: np.ndarray, values: np.ndarray) -> np.ndarray:
    """(A f)_i for the Dirichlet form f^T A f = sum_e a_e (df)^2 / delta."""
    df = np.diff(values)
    flux = a_over_delta * df
    out = np.zeros_like(values)
    out[:-1] -= flux
    out[1:] += flux
    return out


def _dirichlet(a_over_delta: np.ndarray, values: np.ndarray) -> float:
    df = np.diff(values)
    return float(np.sum(a_over_delta * df * df))


def rayleigh(mu: Measure1D, f: GridFunction, p: float) -> float:
    """Sobolev Rayleigh quotient of f (for p = 0, f carries g = 2 ln f)."""
    if f.grid != mu.grid:
        raise MeasureError("grid mismatch")
    a_over_delta = edge_conductances(mu) / mu.grid.delta
    w = mu.weights
    v = f.values
    if p == 0:
        h = np.exp(0.5 * v)
        den = 2.0 * _dirichlet(a_over_delta, h)
        if den <= 0:
            raise MeasureError("constant input: zero Dirichlet energy")
        num = float(np.dot(w, np.exp(v))) - math.exp(float(np.dot(w, v)))
        return num / den
    if np.any(v <= 0.0):
        raise MeasureError("f must be strictly positive")
    den = _dirichlet(a_over_delta, v)
    if den <= 0:
        raise MeasureError("constant input: zero Dirichlet energy")
    if p == 2:
        f2 = v * v
        m2 = float(np.dot(w, f2))
        ent = float(np.dot(w, f2 * np.log(f2))) - m2 * math.log(m2)
        return ent / (2.0 * den)
    mp = float(np.dot(w, v**p))
    m2 = float(np.dot(w, v * v))
    return (mp ** (2.0 / p) - m2) / ((p - 2.0) * den)


def spectral_gap(mu: Measure1D) -> float:
    """Smallest nonzero eigenvalue of -L; the Poincare constant is 1/gap."""
    return _gap_eigenpair(mu)[0]


def _gap_eigenpair(mu: Measure1D) -> tuple[float, np.ndarray]:
    # Symmetrize -L with W^{1/2}: same spectrum, symmetric tridiagonal.
    a = edge_conductances(mu)
    w = mu.weights
    delta = mu.grid.delta
    diag = np.zeros(mu.grid.n)
    diag[:-1] += a / (w[:-1] * delta)
    diag[1:] += a / (w[1:] * delta)
    off = -a / (delta * np.sqrt(w[:-1] * w[1:]))
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))
    lam1 = float(vals[1])
    vec = vecs[:, 1] / np.sqrt(w)  # un-symmetrize back to function space
    return lam1, vec / np.max(np.abs(vec))


def hardy_witness(mu: Measure1D, nu: NuDensity, x0: float, side: str) -> GridFunction:
    """Resistance-profile test function: 0 up to the median, then the running
    integral of 1/n capped at x0 (mirrored for the minus side)."""
    m = median(mu)
    nodes = mu.grid.nodes()
    table = hardy.inv_density_cumulative(nu, m)
    if side == "plus":
        if x0 <= m:
            raise MeasureError("x0 must lie strictly right of the median")
        cap = float(np.interp(x0, nodes, table))
        vals = np.clip(np.minimum(table, cap), 0.0, None)
    elif side == "minus":
        if x0 >= m:
            raise MeasureError("x0 must lie strictly left of the median")
        cap = -float(np.interp(x0, nodes, table))
        vals = np.clip(np.minimum(-table, cap), 0.0, None)
    else:
        raise MeasureError(f"unknown side {side!r}")
    return GridFunction(mu.grid, vals)


# ---------------------------------------------------------------------------
# Rayleigh-quotient gradients (in the u-variable, f = e^u; g-variable for p=0)


def _quotient_and_gradient(
    mu: Measure1D, a_over_delta: np.ndarray, u: np.ndarray, p: float
) -> tuple[float, np.ndarray]:
    w = mu.weights
    if p == 0:
        g = u
        h = np.exp(0.5 * g)
        den = 2.0 * _dirichlet(a_over_delta, h)
        mean_g = float(np.dot(w, g))
        num = float(np.dot(w, np.exp(g))) - math.exp(mean_g)
        q = num / den
        dnum = w * (np.exp(g) - math.exp(mean_g))
        dden = 2.0 * _stiffness_apply(a_over_delta, h) * h
        return q, (dnum - q * dden) / den
    f = np.exp(u)
    den = _dirichlet(a_over_delta, f)
    af = _stiffness_apply(a_over_delta, f)
    if p == 2:
        f2 = f * f
        m2 = float(np.dot(w, f2))
        num = (float(np.dot(w, f2 * np.log(f2))) - m2 * math.log(m2)) / 2.0
        q = num / den
        dnum_df = f * w * (np.log(f2) - math.log(m2))
        dq_df = (dnum_df - q * 2.0 * af) / den
        return q, dq_df * f
    mp = float(np.dot(w, f**p))
    m2 = float(np.dot(w, f * f))
    num = (mp ** (2.0 / p) - m2) / (p - 2.0)
    q = num / den
    dnum_df = 2.0 * w * (mp ** ((2.0 - p) / p) * f ** (p - 1.0) - f) / (p - 2.0)
    dq_df = (dnum_df - q * 2.0 * af) / den
    return q, dq_df * f


def rayleigh_gradient(mu: Measure1D, u: GridFunction, p: float) -> np.ndarray:
    """Analytic gradient of the quotient w.r.t. u (f = e^u; g itself for p=0)."""
    a_over_delta = edge_conductances(mu) / mu.grid.delta
    return _quotient_and_gradient(mu, a_over_delta, u.values, p)[1]


def _is_degenerate(u: np.ndarray) -> bool:
    return float(np.ptp(u)) < 1e-13


def _seed_fields(
    mu: Measure1D, p: float, seeds: int, rng_seed: int, nu: NuDensity | None
) -> list[tuple[str, np.ndarray]]:
    nodes = mu.grid.nodes()
    xi = (nodes - mu.grid.x_min) / (mu.grid.x_max - mu.grid.x_min)
    out: list[tuple[str, np.ndarray]] = []
    _, gap_vec = _gap_eigenpair(mu)
    f = 1.0 + 0.3 * gap_vec
    out.append(("gap-eigenfunction", np.log(np.maximum(f, 1e-6))))
    if p > 2:
        if nu is None:
            nu = NuDensity.from_measure(mu)
        m = median(mu)
        for quant in (0.75, 0.9, 0.95, 0.99):
            x0 = float(np.interp(quant, mu.cdf, nodes))
            if x0 <= m:
                continue
            wit = hardy_witness(mu, nu, x0, "plus")
            scale = max(float(wit.values.max()), 1e-12)
            out.append((f"hardy-witness-q{quant}", np.log(wit.values / scale + 1e-9)))
    rng = np.random.default_rng(rng_seed)
    i = 0
    while len(out) < seeds:
        u = np.zeros_like(nodes)
        for k in range(1, 5):
            u += (rng.normal() * np.cos(k * math.pi * xi) + rng.normal() * np.sin(k * math.pi * xi)) * 0.5 / k
        out.append((f"random-{i}", u))
        i += 1
    return out[:seeds]


def maximize_constant(
    mu: Measure1D,
    p: float,
    seeds: int = 16,
    max_iter: int = 500,
    rng_seed: int = 0,
    nu: NuDensity | None = None,
) -> EmpiricalConstant:
    """Multi-start gradient ascent on the Rayleigh quotient over f = e^u."""
    if p < 0:
        raise MeasureError("p must be >= 0")
    a_over_delta = edge_conductances(mu) / mu.grid.delta
    best: tuple[float, np.ndarray, str, int, bool] | None = None
    for label, u0 in _seed_fields(mu, p, seeds, rng_seed, nu):
        if _is_degenerate(u0):
            continue
        u = u0.copy()
        q, grad = _quotient_and_gradient(mu, a_over_delta, u, p)
        step = 1.0
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            # Precondition by the node masses: mesh-independent ascent in L^2(mu).
            natural = grad / mu.weights
            gnorm = float(np.max(np.abs(natural)))
            if gnorm == 0.0:
                converged = True
                break
            direction = natural / gnorm
            accepted = False
            for _ in range(40):
                trial = u + step * direction
                try:
                    q_new, grad_new = _quotient_and_gradient(mu, a_over_delta, trial, p)
                except (MeasureError, FloatingPointError, OverflowError):
                    q_new = -math.inf
                    grad_new = grad
                if np.isfinite(q_new) and q_new > q:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                converged = True
                break
            improvement = (q_new - q) / max(abs(q), 1e-300)
            u, q, grad = trial, q_new, grad_new
            step = min(step * 2.0, 1.0)
            if improvement < 1e-9:
                converged = True
                break
        if best is None or q > best[0]:
            best = (q, u, label, it, converged)
    if best is None:
        zero = GridFunction(mu.grid, np.ones(mu.grid.n))
        return EmpiricalConstant(p, 0.0, zero, "degenerate", 0, False)
    q, u, label, iters, converged = best
    witness = GridFunction(mu.grid, u if p == 0 else np.exp(u))
    value = rayleigh(mu, witness, p)
    return EmpiricalConstant(p, value, witness, label, iters, converged)


# ---------------------------------------------------------------------------
# cross-p consistency report


@dataclass(frozen=True)
class TheoremACheck:
    assertions: list
    p_times_value: list
    c_p_exact: float


def theorem_a_check(
    mu: Measure1D,
    ps,
    seeds: int = 16,
    max_iter: int = 500,
    rng_seed: int = 0,
) -> TheoremACheck:
    """Testable consequences of the monotonicity/equivalence relations.

    (i) for p > 2 with finite sandwich: cs_upper >= C_P * (1 - 1e-3);
    (ii) for p in (0,1): emp(p) <= C_P/p * 1.01; for p in (1,2):
         emp(p) <= C_P/(2-p) * 1.01;
    (iii) report-only table of p * emp(p).
    """
    ps = sorted(float(p) for p in ps)
    if any(p < 0 for p in ps):
        raise MeasureError("p values must be >= 0")
    c_p = 1.0 / spectral_gap(mu)
    nu = NuDensity.from_measure(mu)
    assertions = []
    table = []
    for p in ps:
        emp = maximize_constant(mu, p, seeds=seeds, max_iter=max_iter, rng_seed=rng_seed, nu=nu)
        table.append((p, p * emp.value))
        if p > 2:
            sandwich = hardy.sobolev_sandwich(mu, nu, p)
            if not sandwich.diverged:
                assertions.append(
                    {
                        "name": f"upper-bound-dominates-poincare:p={p}",
                        "passed": sandwich.cs_upper >= c_p * (1.0 - 1e-3),
                        "lhs": sandwich.cs_upper,
                        "rhs": c_p * (1.0 - 1e-3),
                    }
                )
        elif 0 < p < 1:
            bound = c_p / p * (1.0 + 1e-2)
            assertions.append(
                {
                    "name": f"poincare-equivalence-low:p={p}",
                    "passed": emp.value <= bound,
                    "lhs": emp.value,
                    "rhs": bound,
                }
            )
        elif 1 < p < 2:
            bound = c_p / (2.0 - p) * (1.0 + 1e-2)
            assertions.append(
                {
                    "name": f"poincare-equivalence-high:p={p}",
                    "passed": emp.value <= bound,
                    "lhs": emp.value,
                    "rhs": bound,
                }
            )
    return TheoremACheck(assertions, table, c_p)
