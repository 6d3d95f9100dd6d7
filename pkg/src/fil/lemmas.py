"""Brute-force oracles for the standalone inequalities on small atom sets.

All maximizations here are lower bounds on suprema, so assertions against
closed forms are one-sided with tolerance, never exact-equality claims.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from .grids import Measure1D, MeasureError

MAX_ATOMS = 8


@dataclass(frozen=True)
class DiscreteInstance:
    atom_masses: np.ndarray
    f_values: np.ndarray
    rng_seed: int = 0

    def __post_init__(self) -> None:
        m = np.asarray(self.atom_masses, dtype=float)
        f = np.asarray(self.f_values, dtype=float)
        object.__setattr__(self, "atom_masses", m)
        object.__setattr__(self, "f_values", f)
        if np.any(m <= 0):
            raise MeasureError("atom masses must be positive")
        if f.shape != m.shape:
            raise MeasureError("inconsistent instance sizes")


def lemma25_check(instance: DiscreteInstance, a: float) -> dict:
    """Slacks of 1 - mu(f^a) against (1/2) int|f-1| above and
    (a(1-a)/8) (int|f-1|)^2 below, for a in (0,1) and mu(f) = 1."""
    if not (0.0 < a < 1.0):
        raise MeasureError("a must lie in (0,1)")
    m = instance.atom_masses
    f = instance.f_values
    if np.any(f < 0):
        raise MeasureError("f must be nonnegative")
    if abs(float(np.dot(m, f)) - 1.0) > 1e-10:
        raise MeasureError("f must integrate to 1")
    lhs = 1.0 - float(np.dot(m, f**a))
    tv_int = float(np.dot(m, np.abs(f - 1.0)))
    return {
        "lhs": lhs,
        "upper_slack": 0.5 * tv_int - lhs,
        "lower_slack": lhs - (a * (1.0 - a) / 8.0) * tv_int**2,
    }


def lemma32_check(mu, f, a: float, p: float) -> float:
    """Slack of the recentering inequality: shifting by any a costs at most a
    factor (p-1) on the L^p term. Nonnegative up to roundoff."""
    if p <= 2:
        raise MeasureError("need p > 2")
    if isinstance(mu, Measure1D):
        masses = mu.weights
    elif isinstance(mu, DiscreteInstance):
        masses = mu.atom_masses
    else:
        masses = np.asarray(mu, dtype=float)
    f = np.asarray(f, dtype=float)

    def centered(vals: np.ndarray, factor: float) -> float:
        lp = float(np.dot(masses, np.abs(vals) ** p)) ** (2.0 / p)
        return factor * lp - float(np.dot(masses, vals * vals))

    return centered(f - a, p - 1.0) - centered(f, 1.0)


def _feasibility_rescale(g: np.ndarray, masses: np.ndarray, q: float, budget: float) -> np.ndarray:
    """Scale g toward 0 until the (g+1)^q moment constraint holds."""
    def excess(t: float) -> float:
        return float(np.dot(masses, (t * g + 1.0) ** q)) - budget

    if excess(1.0) <= 0.0:
        return g
    t = brentq(excess, 0.0, 1.0, xtol=1e-15)
    return t * g


def lemma45_bruteforce(
    atom_masses,
    subset,
    a: float,
    big_k: float,
    restarts: int = 8,
    rng_seed: int = 0,
) -> float:
    """Maximize sum_A g*mass over g >= 0 with sum (g+1)^{a/(a-1)} mass <= K.

    SLSQP with random restarts; the returned value is certified feasible and
    is therefore a lower bound on the supremum.
    """
    masses = np.asarray(atom_masses, dtype=float)
    if masses.size > MAX_ATOMS:
        raise MeasureError(f"at most {MAX_ATOMS} atoms")
    if a <= 1.0:
        raise MeasureError("need a > 1")
    total = float(masses.sum())
    if big_k < total:
        raise MeasureError("infeasible constraint set: K < total mass")
    q = a / (a - 1.0)
    sel = np.zeros(masses.size)
    sel[np.asarray(list(subset), dtype=int)] = 1.0
    obj_coeff = sel * masses

    def neg_obj(g):
        return -float(np.dot(obj_coeff, g))

    constraint = {
        "type": "ineq",
        "fun": lambda g: big_k - float(np.dot(masses, (g + 1.0) ** q)),
        "jac": lambda g: -q * masses * (g + 1.0) ** (q - 1.0),
    }
    rng = np.random.default_rng(rng_seed)
    best = 0.0
    starts = [np.zeros(masses.size)] + [
        rng.uniform(0.0, 1.0, masses.size) for _ in range(restarts - 1)
    ]
    for g0 in starts:
        g0 = _feasibility_rescale(g0, masses, q, big_k)
        res = minimize(
            neg_obj,
            g0,
            jac=lambda g: -obj_coeff,
            method="SLSQP",
            bounds=[(0.0, None)] * masses.size,
            constraints=[constraint],
            options={"maxiter": 300, "ftol": 1e-14},
        )
        g = np.maximum(res.x, 0.0)
        g = _feasibility_rescale(g, masses, q, big_k)
        best = max(best, float(np.dot(obj_coeff, g)))
    return best


def lemma44_bruteforce(
    masses,
    phi_vals,
    big_a: float,
    a: float,
    restarts: int = 8,
    rng_seed: int = 0,
) -> float:
    """Maximize int phi*g over g >= -1 with int (g+1)^{a/(a-1)} <= A^{a/(a-1)}.

    The closed form is A (int phi^a)^{1/a} - int phi.
    """
    masses = np.asarray(masses, dtype=float)
    phi_vals = np.asarray(phi_vals, dtype=float)
    if a <= 1.0 or big_a <= 1.0:
        raise MeasureError("need a > 1 and A > 1 (so that g = 0 is feasible)")
    q = a / (a - 1.0)
    budget = big_a**q

    def neg_obj(g):
        return -float(np.dot(masses * phi_vals, g))

    constraint = {
        "type": "ineq",
        "fun": lambda g: budget - float(np.dot(masses, (g + 1.0) ** q)),
        "jac": lambda g: -q * masses * (g + 1.0) ** (q - 1.0),
    }
    rng = np.random.default_rng(rng_seed)
    best = -np.inf
    starts = [np.full(masses.size, min(big_a - 1.0, 0.0))] + [
        rng.uniform(-1.0, max(big_a - 1.0, 0.5), masses.size) for _ in range(restarts - 1)
    ]
    for g0 in starts:
        shifted = _feasibility_rescale(g0, masses, q, budget)
        res = minimize(
            neg_obj,
            shifted,
            jac=lambda g: -masses * phi_vals,
            method="SLSQP",
            bounds=[(-1.0, None)] * masses.size,
            constraints=[constraint],
            options={"maxiter": 300, "ftol": 1e-14},
        )
        g = np.maximum(res.x, -1.0)
        if constraint["fun"](g) < 0:
            g = _feasibility_rescale(g, masses, q, budget)
        best = max(best, float(np.dot(masses * phi_vals, g)))
    return best


# ---------------------------------------------------------------------------
# Discrete half-line sandwich


@dataclass(frozen=True)
class HalfLineInstance:
    """Half-line with node masses (beyond the median node, where f = 0),
    edge conductances between consecutive nodes, and a budgeted moment
    constraint family parametrized by exponent a and budget K > total mass."""

    node_masses: np.ndarray
    edge_conductances: np.ndarray
    a: float
    budget: float

    def __post_init__(self) -> None:
        m = np.asarray(self.node_masses, dtype=float)
        c = np.asarray(self.edge_conductances, dtype=float)
        object.__setattr__(self, "node_masses", m)
        object.__setattr__(self, "edge_conductances", c)
        if m.size == 0 or m.size > 6:
            raise MeasureError("between 1 and 6 interior nodes")
        if c.shape != m.shape:
            raise MeasureError("one conductance per node (edge from its left neighbor)")
        if np.any(m <= 0) or np.any(c <= 0):
            raise MeasureError("degenerate masses or conductances")
        if self.a <= 1.0:
            raise MeasureError("need a > 1")
        if self.budget <= float(m.sum()):
            raise MeasureError("budget must exceed total mass")


@dataclass(frozen=True)
class Prop42Result:
    a_const: float
    b_const: float
    passed: bool


def _phi_functional(weights: np.ndarray, masses: np.ndarray, q: float, budget: float) -> float:
    """sup_g sum w_i g_i m_i over g >= 0, sum (g+1)^q m_i <= budget (exact via
    the 1-D dual: g_i = max((w_i/(lambda q))^{1/(q-1)} - 1, 0))."""
    if np.all(weights <= 0.0):
        return 0.0

    def g_of(lam: float) -> np.ndarray:
        base = np.maximum(weights, 0.0) / (lam * q)
        return np.maximum(base ** (1.0 / (q - 1.0)) - 1.0, 0.0)

    def excess(log_lam: float) -> float:
        g = g_of(np.exp(log_lam))
        return float(np.dot(masses, (g + 1.0) ** q)) - budget

    lo, hi = -40.0, 40.0
    while excess(hi) > 0:
        hi += 40.0
    while excess(lo) < 0:
        lo -= 40.0
    log_lam = brentq(excess, lo, hi, xtol=1e-13)
    g = g_of(np.exp(log_lam))
    return float(np.dot(weights * masses, g))


def prop42_sandwich_bruteforce(
    instance: HalfLineInstance, restarts: int = 1, rng_seed: int = 0
) -> Prop42Result:
    """Estimate A = sup_f phi(f^2)/E(f) (multi-start local search from the
    harmonic resistance profiles) and B = sup_x phi(1_{[x,oo)}) R(x); check
    B <= A <= 4B."""
    m = instance.node_masses
    nu = instance.edge_conductances
    q = instance.a / (instance.a - 1.0)
    budget = instance.budget
    k = m.size
    resistance = np.cumsum(1.0 / nu)

    def energy(f: np.ndarray) -> float:
        prev = np.concatenate(([0.0], f[:-1]))
        d = f - prev
        return float(np.dot(nu, d * d))

    def quotient(f: np.ndarray) -> float:
        e = energy(f)
        if e <= 0:
            return 0.0
        return _phi_functional(f * f, m, q, budget) / e

    b_terms = [
        _phi_functional((np.arange(k) >= j).astype(float), m, q, budget) * resistance[j]
        for j in range(k)
    ]
    b_const = float(max(b_terms))

    seeds = [np.minimum(resistance, resistance[j]) for j in range(k)]
    rng = np.random.default_rng(rng_seed)
    seeds += [rng.uniform(0.1, 1.0, k) for _ in range(restarts)]
    a_const = 0.0
    for f0 in seeds:
        a_const = max(a_const, quotient(f0))
        res = minimize(
            lambda f: -quotient(f),
            f0,
            method="Nelder-Mead",
            options={"maxiter": 80 * k, "xatol": 1e-8, "fatol": 1e-11},
        )
        a_const = max(a_const, quotient(res.x))
    passed = b_const <= a_const * (1.0 + 1e-6) and a_const <= 4.0 * b_const * (1.0 + 1e-6)
    return Prop42Result(a_const, b_const, passed)
