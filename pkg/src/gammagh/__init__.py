"""Simulation and verification tools for the gamma generalized-hyperbolic Levy process."""

from .distributions import (
    DivergentIntegral,
    DomainError,
    GammaGhParams,
    GigParams,
    IgParams,
    charfn_gamma_gh,
    gig_norm_constant,
    moment_transform_gamma,
    pdf_gamma_gh,
    pdf_gig_gh,
    pdf_ig_gh,
    sample_gamma,
    sample_gamma_gh,
)
from .paths import IncrementSet, Path, center_path, sample_increments, simulate_brownian, simulate_path
from .rng import make_stream
from .variation import (
    MismatchedHorizon,
    Partition,
    expected_abs_increment,
    qv_moment_theory,
    quadratic_variation,
    superpose,
    theory_constants,
    total_variation,
    uniform_partition,
    variation_moment_theory,
)

__version__ = "0.1.0"
