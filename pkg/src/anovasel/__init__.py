"""Adaptive exact selection of sparse ANOVA components in the Gaussian sequence model."""

from .lattice import (
    EllipsoidSpec,
    binom,
    enumerate_ball,
    enumerate_subsets,
    log_binom,
    sobolev_coefficient,
    support_radius,
)
from .extremal import (
    ExtremalSolution,
    WeightProfile,
    a_asymptotic_fixed_k,
    a_asymptotic_growing_k,
    a_exact,
    asymptotic_solution,
    profile_weights,
    solve_extremal_exact,
    solve_r_star,
    theta_star_asymptotic,
    weights,
)
from .rng import RandomSource
from .model import (
    ObservationSet,
    SparsityPattern,
    active_count,
    fixed_pattern,
    observe,
    sample_pattern,
    sparsity_index,
    vector_observe,
)
from .selector import (
    SelectionResult,
    SelectorConfig,
    build_grid_profiles,
    hamming,
    select_adaptive,
    select_known_beta,
    statistic,
    threshold,
    vector_select,
)

__version__ = "0.1.0"

__all__ = [
    "EllipsoidSpec",
    "ExtremalSolution",
    "ObservationSet",
    "RandomSource",
    "SelectionResult",
    "SelectorConfig",
    "SparsityPattern",
    "WeightProfile",
    "a_asymptotic_fixed_k",
    "a_asymptotic_growing_k",
    "a_exact",
    "active_count",
    "asymptotic_solution",
    "profile_weights",
    "binom",
    "build_grid_profiles",
    "enumerate_ball",
    "enumerate_subsets",
    "fixed_pattern",
    "hamming",
    "log_binom",
    "observe",
    "sample_pattern",
    "select_adaptive",
    "select_known_beta",
    "sobolev_coefficient",
    "solve_extremal_exact",
    "solve_r_star",
    "sparsity_index",
    "statistic",
    "support_radius",
    "theta_star_asymptotic",
    "threshold",
    "vector_observe",
    "vector_select",
    "weights",
]
