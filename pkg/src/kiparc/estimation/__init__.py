from .dataset import KINDS, SCHEMAS, Dataset
from .fitters import (
    fit_fringe,
    fit_gain_map,
    fit_noise,
    fit_tuning_curve,
    fringe_extinction_db,
    snr_improvement_db,
    tuning_frequency,
    tuning_model_from_fit,
)
from .lm import LeastSquaresResult, levenberg_marquardt

__all__ = [
    "KINDS",
    "SCHEMAS",
    "Dataset",
    "LeastSquaresResult",
    "fit_fringe",
    "fit_gain_map",
    "fit_noise",
    "fit_tuning_curve",
    "fringe_extinction_db",
    "levenberg_marquardt",
    "snr_improvement_db",
    "tuning_frequency",
    "tuning_model_from_fit",
]
