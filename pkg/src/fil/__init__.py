"""fil: a one-dimensional functional-inequality laboratory.

Computes two-sided Hardy-type bounds and empirical estimates of the centered
Sobolev constant for measures on an interval, and verifies the equivalence
with exponential Phi-entropy / Hellinger / total-variation decay by
simulating the associated reversible diffusion semigroup.
"""

__version__ = "0.1.0"

from .grids import (
    GridFunction,
    GridSpec,
    Measure1D,
    MeasureError,
    NuDensity,
    build_measure,
    default_grid,
    integrate,
    median,
    tail_mass,
)
from .hardy import (
    HardyBound,
    SobolevSandwich,
    defective_to_tight,
    hardy_bound,
    inv_density_cumulative,
    lemma45_closed_form,
    sobolev_sandwich,
)
from .phi import PhiFamily, distances, entropy, entropy_variational, phi, phi_dirichlet
from .semigroup import (
    DecayCurve,
    Generator,
    build_generator,
    decay_curve,
    dirichlet_form,
    evolve,
    verify_decay_bounds,
)
from .variational import (
    EmpiricalConstant,
    hardy_witness,
    maximize_constant,
    rayleigh,
    spectral_gap,
    theorem_a_check,
)
from .perturbation import PerturbationReport, perturb, perturbation_check

__all__ = [name for name in dir() if not name.startswith("_")]
