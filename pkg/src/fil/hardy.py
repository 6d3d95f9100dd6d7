"""Two-sided Hardy-type bounds on the optimal Sobolev constant (p > 2).

The raw constant C in (mu f^p)^{2/p} - mu f^2 <= C * int f'^2 dnu is
sandwiched between max(b-, b+) and 4*max(B-, B+), where each one-sided bound
is a supremum over x of  tail * [(1 + K/tail)^{(p-2)/p} - 1] * int_m^x dt/n(t)
with K = 1/2 for the b-variant and K = (p-1)^{p/(p-2)} for the B-variant.
The centered Sobolev constant is C_S(p) = C/(p-2); both normalizations are
stored so downstream code never re-derives the factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grids import Measure1D, MeasureError, NuDensity, median

DIVERGENCE_CAP = 1e6
_TINY_TAIL = 1e-300
_GOLDEN_ITERS = 40


@dataclass(frozen=True)
class HardyBound:
    value: float
    argmax: float
    diverged: bool


@dataclass(frozen=True)
class SobolevSandwich:
    p: float
    c_raw_lower: float
    c_raw_upper: float
    cs_lower: float
    cs_upper: float
    argmax_lower: float
    argmax_upper: float
    diverged: bool


def inv_density_cumulative(nu: NuDensity, m: float) -> np.ndarray:
    """Signed trapezoid values of int_m^x dt/n(t) at every node (one sweep)."""
    if m < nu.grid.x_min or m > nu.grid.x_max:
        raise MeasureError(f"median {m} outside grid range")
    nodes = nu.grid.nodes()
    recip = 1.0 / nu.values
    table = cumulative_trapezoid(recip, nodes, initial=0.0)
    return table - float(np.interp(m, nodes, table))


def _bracket(tail: np.ndarray, k: float, p: float) -> np.ndarray:
    """tail * [(1 + K/tail)^{(p-2)/p} - 1], with an asymptotic form for
    underflowing tails to avoid overflow in K/tail."""
    q = (p - 2.0) / p
    tail = np.asarray(tail, dtype=float)
    safe = np.maximum(tail, _TINY_TAIL)
    exact = safe * ((1.0 + k / safe) ** q - 1.0)
    asymptotic = k**q * safe ** (2.0 / p)
    return np.where(tail < _TINY_TAIL, asymptotic, exact)


def _variant_k(variant: str, p: float) -> float:
    if variant == "b":
        return 0.5
    if variant == "B":
        return (p - 1.0) ** (p / (p - 2.0))
    raise MeasureError(f"unknown variant {variant!r}")


def hardy_bound(
    mu: Measure1D, nu: NuDensity, p: float, side: str, variant: str
) -> HardyBound:
    """One of b+/b-/B+/B-: grid scan plus golden-section refinement."""
    if p <= 2.0:
        raise MeasureError("hardy bounds require p > 2")
    if mu.grid != nu.grid:
        raise MeasureError("grid mismatch between mu and nu")
    k = _variant_k(variant, p)
    m = median(mu)
    nodes = mu.grid.nodes()
    resist = inv_density_cumulative(nu, m)
    cdf = mu.cdf

    if side == "plus":
        mask = nodes > m
        tail_nodes = mu.sf
        signed = 1.0
    elif side == "minus":
        mask = nodes < m
        tail_nodes = cdf
        signed = -1.0
    else:
        raise MeasureError(f"unknown side {side!r}")

    if not mask.any():
        return HardyBound(0.0, m, False)

    idx = np.nonzero(mask)[0]
    vals = _bracket(tail_nodes[idx], k, p) * (signed * resist[idx])
    j = int(np.argmax(vals))
    best_node = idx[j]
    if vals[j] >= DIVERGENCE_CAP:
        return HardyBound(math.inf, float(nodes[best_node]), True)

    def objective(x: float) -> float:
        tail = float(np.interp(x, nodes, tail_nodes))
        r = signed * float(np.interp(x, nodes, resist))
        return float(_bracket(np.array([tail]), k, p)[0] * r)

    lo = nodes[max(best_node - 1, idx[0])]
    hi = nodes[min(best_node + 1, idx[-1])]
    # Golden-section maximization on [lo, hi].
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(_GOLDEN_ITERS):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(d)
    x_best, v_best = (c, fc) if fc >= fd else (d, fd)
    if vals[j] > v_best:
        x_best, v_best = float(nodes[best_node]), float(vals[j])
    if v_best >= DIVERGENCE_CAP:
        return HardyBound(math.inf, x_best, True)
    return HardyBound(float(v_best), float(x_best), False)


def sobolev_sandwich(mu: Measure1D, nu: NuDensity, p: float) -> SobolevSandwich:
    """Assemble the four one-sided bounds into lower/upper constants."""
    b_plus = hardy_bound(mu, nu, p, "plus", "b")
    b_minus = hardy_bound(mu, nu, p, "minus", "b")
    big_plus = hardy_bound(mu, nu, p, "plus", "B")
    big_minus = hardy_bound(mu, nu, p, "minus", "B")

    lower = max((b_plus, b_minus), key=lambda h: h.value)
    upper = max((big_plus, big_minus), key=lambda h: h.value)
    diverged = any(h.diverged for h in (b_plus, b_minus, big_plus, big_minus))

    c_raw_lower = lower.value
    c_raw_upper = 4.0 * upper.value
    return SobolevSandwich(
        p=p,
        c_raw_lower=c_raw_lower,
        c_raw_upper=c_raw_upper,
        cs_lower=c_raw_lower / (p - 2.0),
        cs_upper=c_raw_upper / (p - 2.0),
        argmax_lower=lower.argmax,
        argmax_upper=upper.argmax,
        diverged=diverged,
    )


def lemma45_closed_form(atom_masses, subset, a: float, big_k: float) -> float:
    """Closed-form supremum of int_A g dmu over g >= 0 with
    int (g+1)^{a/(a-1)} dmu <= K."""
    masses = np.asarray(atom_masses, dtype=float)
    if np.any(masses <= 0):
        raise MeasureError("atom masses must be positive")
    if a <= 1.0:
        raise MeasureError("need a > 1")
    subset = np.asarray(list(subset), dtype=int)
    if subset.size == 0:
        raise MeasureError("subset must be nonempty")
    mu_x = float(masses.sum())
    mu_a = float(masses[subset].sum())
    if big_k <= mu_x:
        raise MeasureError("need K > total mass")
    return mu_a * ((1.0 + (big_k - mu_x) / mu_a) ** ((a - 1.0) / a) - 1.0)


def defective_to_tight(a_const: float, b_const: float, c_p: float, p: float) -> float:
    """Tight-Sobolev constant (p-1)A + C_P[(p-1)B - 1]^+ from a defective one."""
    if a_const < 0 or b_const < 0:
        raise MeasureError("defective constants must be nonnegative")
    if c_p <= 0:
        raise MeasureError("Poincare constant must be positive")
    if p <= 2:
        raise MeasureError("conversion applies for p > 2")
    return (p - 1.0) * a_const + c_p * max((p - 1.0) * b_const - 1.0, 0.0)
