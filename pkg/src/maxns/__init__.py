"""Spectral analysis and control of the linearized compressible flow with Maxwell's law."""

from .errors import (
    ConfigurationError,
    GeometryError,
    MaxnsError,
    NumericalError,
    ValidationError,
)
from .params import P_STAR, PhysicalParams, derive_constants
from .spectrum import ModeSpectrum, Multiplicity, asymptotic_prediction, charpoly_eval, solve_mode

__version__ = "0.1.0"
