"""Resurrected Lévy processes: models, path simulation, resurrection,
absorption criteria and Monte Carlo verification."""
from .analytics import ClassificationVerdict, Verdict, classify, criteria_map, stable_mean_xi
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalMethodError,
    ParameterError,
    PreconditionError,
    ReslevyError,
    UnsupportedOperationError,
)
from .levy_models import Family, LevyModel, LongRun, PropertyFlags, make_model
from .path_engine import SimParams, first_passage_below, killed_batch, sample_path
from .renewal import hinf_supremum, kernel_cdf, kernel_density, renewal_function, renewal_value
from .resurrection import AbsorptionPolicy, Status, resurrect_batch, resurrect_path, simulate_lifetimes
from .reporting import VERSION as __version__

__all__ = [
    "AbsorptionPolicy",
    "ClassificationVerdict",
    "ConfigurationError",
    "DomainError",
    "Family",
    "LevyModel",
    "LongRun",
    "NumericalMethodError",
    "ParameterError",
    "PreconditionError",
    "PropertyFlags",
    "ReslevyError",
    "SimParams",
    "Status",
    "UnsupportedOperationError",
    "Verdict",
    "classify",
    "criteria_map",
    "first_passage_below",
    "hinf_supremum",
    "kernel_cdf",
    "kernel_density",
    "killed_batch",
    "make_model",
    "renewal_function",
    "renewal_value",
    "resurrect_batch",
    "resurrect_path",
    "sample_path",
    "simulate_lifetimes",
    "stable_mean_xi",
    "__version__",
]
