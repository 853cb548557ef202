"""Measured or synthetic data to be fitted."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

KINDS = ("gain_map", "gain_slice", "tuning", "fringe", "noise")

# column layout per kind: (coordinate columns, value columns that may appear)
SCHEMAS = {
    "gain_map": (("x", "y"), ("Gs_dB", "Gi_dB")),
    "gain_slice": (("x", "y"), ("Gs_dB", "Gi_dB")),
    "tuning": (("I_A",), ("f_a_Hz", "f_b_Hz")),
    "fringe": (("phase_rad",), ("Gs_dB", "Gi_dB")),
    "noise": (("G_linear",), ("NF_linear",)),
}


@dataclass(frozen=True)
class Dataset:
    """Columns of one experiment.

    ``coordinates`` and ``values`` map column names (see ``SCHEMAS``) to
    equal-length arrays. Gain-map coordinates are in Hz, currents in A,
    phases in rad; gains in dB. ``weights`` are optional inverse variances
    applied to every value column.
    """

    kind: str
    coordinates: dict
    values: dict
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown dataset kind {self.kind!r}")
        coord_names, value_names = SCHEMAS[self.kind]
        missing = [c for c in coord_names if c not in self.coordinates]
        if missing:
            raise DataError(f"{self.kind} dataset missing coordinate columns: {', '.join(missing)}")
        if not any(v in self.values for v in value_names):
            raise DataError(f"{self.kind} dataset needs one of the value columns: {', '.join(value_names)}")
        unknown = set(self.values) - set(value_names)
        if unknown:
            raise DataError(f"unexpected value columns for {self.kind}: {', '.join(sorted(unknown))}")
        coords = {k: np.asarray(v, dtype=float) for k, v in self.coordinates.items()}
        values = {k: np.asarray(v, dtype=float) for k, v in self.values.items()}
        lengths = {a.shape for a in (*coords.values(), *values.values())}
        if len(lengths) != 1 or len(next(iter(lengths))) != 1:
            raise DataError("coordinates and values must be 1-D arrays of equal length")
        for name, arr in coords.items():
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite entries in coordinate {name}")
        object.__setattr__(self, "coordinates", coords)
        object.__setattr__(self, "values", values)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != next(iter(lengths)):
                raise DataError("weights must match the number of points")
            if not np.all(w > 0):
                raise DataError("weights must be strictly positive")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return next(iter(self.coordinates.values())).size

    @property
    def weight_vector(self):
        return np.ones(len(self)) if self.weights is None else self.weights
