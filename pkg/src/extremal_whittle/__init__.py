"""Whittle estimation of extremal dependence for max-stable lattice fields."""

from .estimators import ExtremalPeriodogram, PairwiseLikelihoodEstimator, WhittleEstimator
from .experiment import ExperimentConfig, run_experiment, summarize
from .extremal import (
    choose_threshold,
    empirical_extremogram,
    extremal_periodogram,
    indicators,
)
from .models import (
    BrownResnickFamily,
    BrownResnickModel,
    MMADiamondFamily,
    MMADiamondModel,
    positivity_check,
    spectral_density,
    spectral_density_grid,
)
from .simulate import LatticeField, simulate
from .stats import RandomStream, derive_stream
from .whittle import pairwise_estimate, whittle_estimate, whittle_objective

__version__ = "0.1.0"

__all__ = [
    "BrownResnickFamily",
    "BrownResnickModel",
    "ExperimentConfig",
    "ExtremalPeriodogram",
    "LatticeField",
    "MMADiamondFamily",
    "MMADiamondModel",
    "PairwiseLikelihoodEstimator",
    "RandomStream",
    "WhittleEstimator",
    "choose_threshold",
    "derive_stream",
    "empirical_extremogram",
    "extremal_periodogram",
    "indicators",
    "pairwise_estimate",
    "positivity_check",
    "run_experiment",
    "simulate",
    "spectral_density",
    "spectral_density_grid",
    "summarize",
    "whittle_estimate",
    "whittle_objective",
]
