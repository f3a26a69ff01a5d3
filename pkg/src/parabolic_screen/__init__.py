"""Plane-wave scattering by a periodic array of thin screens in the parabolic approximation.

Two pipelines produce Floquet scattering coefficients: closed-form small-gap
asymptotics fed through the embedding formulas, and a spectral simulator on
the two-sheeted surface used as an independent oracle.
"""

__version__ = "0.1.0"

from .config import IncidenceSpec, RunConfig, ScreenGeometry, floquet_angle, load_config, parse_config
from .core import ComplexAngle, MediumParams, green_function, sqrt_upper
from .directivity import DirectivitySet, directivity_set
from .embedding import CoefficientTable, FluxAudit, asymptotic_table, build_table, flux_audit
from .errors import (ConfigError, DomainError, NumericalError, ParabolicScreenError,
                     ValidityWarning)
from .special import polylog

__all__ = [
    "__version__", "IncidenceSpec", "RunConfig", "ScreenGeometry", "floquet_angle",
    "load_config", "parse_config", "ComplexAngle", "MediumParams", "green_function",
    "sqrt_upper", "DirectivitySet", "directivity_set", "CoefficientTable", "FluxAudit",
    "asymptotic_table", "build_table", "flux_audit", "ConfigError", "DomainError",
    "NumericalError", "ParabolicScreenError", "ValidityWarning", "polylog",
]
