"""Homogeneous time evolution, Picard iteration and decay fits."""

from .dynamics import (
    ContractionReport,
    DecaySeries,
    DiscreteOperator,
    EvolutionConfig,
    context_label,
    evolve,
    picard_iterate,
)
from .fit import RateFit, fit_decay, fit_decay_arrays, regime_model
from .oracle import maxwell_eigenvalue, spectral_gap
from .radial import ChannelField, RadialGrid, weighted_norm

__all__ = [
    "ChannelField", "ContractionReport", "DecaySeries", "DiscreteOperator", "EvolutionConfig",
    "RadialGrid", "RateFit", "context_label", "evolve", "fit_decay", "fit_decay_arrays",
    "maxwell_eigenvalue", "picard_iterate", "regime_model", "spectral_gap", "weighted_norm",
]
