"""Numerical laboratory for the quantitative bounds used by the decay analysis."""

from .fitting import EnvelopeFit, fit_envelope, power_law_exponent
from .identities import IDENTITIES, IdentityCheck, run_identity
from .registry import REGISTRY, BoundRegistryEntry, Claim, Resolution, entry_ids, feasible_p
from .report import FitReport, RegistryReport, dumps, probe_bound, registry_report, rows_to_csv

__all__ = [
    "BoundRegistryEntry", "Claim", "EnvelopeFit", "FitReport", "IDENTITIES", "IdentityCheck",
    "REGISTRY", "RegistryReport", "Resolution", "dumps", "entry_ids", "feasible_p",
    "fit_envelope", "power_law_exponent", "probe_bound", "registry_report", "rows_to_csv",
    "run_identity",
]
