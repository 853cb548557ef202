"""Modeling and parameter estimation for a kinetic-inductance parametric converter."""

__version__ = "0.1.0"

from .core import (
    DeviceModes,
    DriveState,
    FitResult,
    GainSet,
    ModePair,
    QuadratureSample,
    RingGeometry,
    ScatteringParams,
    TuningModel,
)
from .errors import (
    ConfigError,
    DataError,
    KiparcError,
    NumericError,
    OutputError,
)
from .resonance import mode_profile, solve_mode_frequencies, tuning_curve
from .scattering import (
    amplitude_gains,
    bogoliubov_matrix,
    extinction_ratio,
    gain_map,
    interference_fringe,
    noise_figure,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DeviceModes",
    "DriveState",
    "FitResult",
    "GainSet",
    "KiparcError",
    "ModePair",
    "NumericError",
    "OutputError",
    "QuadratureSample",
    "RingGeometry",
    "ScatteringParams",
    "TuningModel",
    "__version__",
    "amplitude_gains",
    "bogoliubov_matrix",
    "extinction_ratio",
    "gain_map",
    "interference_fringe",
    "mode_profile",
    "noise_figure",
    "solve_mode_frequencies",
    "tuning_curve",
]
