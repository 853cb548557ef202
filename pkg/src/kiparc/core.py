"""Domain types and rotating-frame conversions.

All frequencies handled here are angular (rad/s). Files and the command line
speak Hz; convert with :func:`hz_to_rad` / :func:`rad_to_hz` (factor 2*pi).
Coupling and pump rates quoted in "MHz" are taken to be rate/2*pi, i.e.
``kappa = 2*pi * 4.597e6`` rad/s for a quoted 4.597 MHz. Every gain depends
only on ratios of rates, so the choice does not change reproduced numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * math.pi


def hz_to_rad(f):
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def rad_to_hz(w):
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def _require_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")


@dataclass(frozen=True)
class RingGeometry:
    """Four-section transmission-line ring.

    Sections 1 and 3 (around ports 1/3) have capacitance density ``cap_a``;
    sections 2 and 4 (around ports 2/4) have ``cap_b``. The inductance density
    is common to all sections and each section is ``total_length / 4`` long.

    Parameters
    ----------
    total_length : float
        Ring circumference in m.
    inductance_per_length : float
        H/m.
    cap_a, cap_b : float
        F/m.
    """

    total_length: float
    inductance_per_length: float
    cap_a: float
    cap_b: float

    def __post_init__(self):
        for name in ("total_length", "inductance_per_length", "cap_a", "cap_b"):
            _require_positive(name, getattr(self, name))

    @classmethod
    def from_impedances(cls, total_length, inductance_per_length, z_a, z_b):
        """Build a ring from section impedances ``Z_j = sqrt(L / C_j)``."""
        _require_positive("z_a", z_a)
        _require_positive("z_b", z_b)
        L = inductance_per_length
        return cls(total_length, L, L / z_a**2, L / z_b**2)

    @property
    def section_length(self):
        return self.total_length / 4.0

    @property
    def z_a(self):
        return math.sqrt(self.inductance_per_length / self.cap_a)

    @property
    def z_b(self):
        return math.sqrt(self.inductance_per_length / self.cap_b)

    @property
    def v_a(self):
        return 1.0 / math.sqrt(self.inductance_per_length * self.cap_a)

    @property
    def v_b(self):
        return 1.0 / math.sqrt(self.inductance_per_length * self.cap_b)

    def scaled_inductance(self, factor):
        return replace(self, inductance_per_length=self.inductance_per_length * factor)


@dataclass(frozen=True)
class RingLines:
    """Electrical description of the four sections: velocities and impedances.

    :class:`RingGeometry` ties both to one inductance density, which forces
    ``Z_a / Z_b = v_a / v_b``. This form drops that link (for example equal
    velocities with unequal impedances); the resonance solver accepts either.
    """

    total_length: float
    v_a: float
    v_b: float
    z_a: float
    z_b: float

    def __post_init__(self):
        for name in ("total_length", "v_a", "v_b", "z_a", "z_b"):
            _require_positive(name, getattr(self, name))

    @classmethod
    def from_geometry(cls, geom):
        return cls(geom.total_length, geom.v_a, geom.v_b, geom.z_a, geom.z_b)

    @property
    def section_length(self):
        return self.total_length / 4.0


@dataclass(frozen=True)
class ModePair:
    """Fundamental resonance frequencies in Hz.

    ``f_a`` belongs to the mode with voltage antinodes at ports 1/3, ``f_b`` to
    the mode with antinodes at ports 2/4.
    """

    f_a: float
    f_b: float

    def __post_init__(self):
        _require_positive("f_a", self.f_a)
        _require_positive("f_b", self.f_b)


@dataclass(frozen=True)
class TuningModel:
    """Current dependence of the two mode frequencies.

    ``L(I)/L0 = 1 + (I/2I*)**2 + alpha*(I/2I*)**4`` per mode, with the bias
    current split evenly between the two ring branches.
    """

    f0_a: float
    f0_b: float
    i_star_a: float
    i_star_b: float
    alpha_a: float = 0.0
    alpha_b: float = 0.0

    def __post_init__(self):
        for name in ("f0_a", "f0_b", "i_star_a", "i_star_b"):
            _require_positive(name, getattr(self, name))
        for name in ("alpha_a", "alpha_b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def for_mode(self, mode):
        if mode == "a":
            return self.f0_a, self.i_star_a, self.alpha_a
        if mode == "b":
            return self.f0_b, self.i_star_b, self.alpha_b
        raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")


@dataclass(frozen=True)
class ScatteringParams:
    """Linearized two-mode response parameters, all in rad/s.

    ``xi`` is complex; the fitted quantity is its magnitude. Detunings are
    measured from half the pump frequency.
    """

    kappa_a: float
    kappa_b: float
    xi: complex
    delta_a: float = 0.0
    delta_b: float = 0.0

    def __post_init__(self):
        _require_positive("kappa_a", self.kappa_a)
        _require_positive("kappa_b", self.kappa_b)
        object.__setattr__(self, "xi", complex(self.xi))
        if not (math.isfinite(self.delta_a) and math.isfinite(self.delta_b)):
            raise ValueError("detunings must be finite")

    @property
    def threshold(self):
        """|xi| at which the zero-detuning response diverges."""
        return 2.0 * math.sqrt(self.kappa_a * self.kappa_b)

    def scaled(self, factor):
        """Every rate multiplied by ``factor`` (gains are invariant)."""
        return ScatteringParams(
            self.kappa_a * factor,
            self.kappa_b * factor,
            self.xi * factor,
            self.delta_a * factor,
            self.delta_b * factor,
        )


@dataclass(frozen=True)
class DeviceModes:
    """Lab-frame mode frequencies (rad/s) plus a coupling/pump template."""

    omega_a: float
    omega_b: float
    params: ScatteringParams

    def __post_init__(self):
        if not (self.omega_b > self.omega_a > 0):
            raise ValueError("DeviceModes requires omega_b > omega_a > 0")


@dataclass(frozen=True)
class DriveState:
    """Coherent drive: ``alpha`` into port 1 (idler), ``beta`` into port 2 (signal).

    Ports 3 and 4 always receive vacuum.
    """

    alpha: complex = 0j
    beta: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))


@dataclass(frozen=True)
class GainSet:
    """Complex amplitude gains at one Fourier argument.

    The first letter of each index is the input (s: port 2/4, i: port 1/3),
    the second the output. ``d_s`` and ``d_i`` are the response denominators.
    """

    g_ss: complex
    g_si: complex
    g_ii: complex
    g_is: complex
    d_s: complex
    d_i: complex

    def __post_init__(self):
        if self.d_s == 0 or self.d_i == 0:
            raise ValueError("GainSet denominators must be nonzero")


@dataclass(frozen=True)
class QuadratureSample:
    i_s: float
    q_s: float
    i_i: float
    q_i: float

    @property
    def signal(self):
        return complex(self.i_s, self.q_s)

    @property
    def idler(self):
        return complex(self.i_i, self.q_i)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares fit.

    ``parameters`` and ``standard_errors`` share keys; ``units`` documents
    each entry. ``cost_history`` lists the cost after every accepted step.
    """

    parameters: dict
    standard_errors: dict
    residual_norm: float
    iterations: int
    converged: bool
    units: dict = field(default_factory=dict)
    gradient_norm: float = 0.0
    condition_number: float = 1.0
    cost_history: tuple = ()

    def __post_init__(self):
        if set(self.parameters) != set(self.standard_errors):
            raise ValueError("parameters and standard_errors must share names")
        if any(not (se >= 0) for se in self.standard_errors.values()):
            raise ValueError("standard errors must be nonnegative")


def lab_to_frame(modes, omega_s, omega_p):
    """Rotating-frame detunings for a signal at ``omega_s`` and pump at ``omega_p``.

    Returns
    -------
    delta : float
        ``omega_s - omega_p/2``.
    params : ScatteringParams
        Copy of ``modes.params`` with ``delta_a = omega_a - omega_p/2`` and
        ``delta_b = omega_b - omega_p/2``.
    """
    if not (omega_s > 0 and omega_p > 0):
        raise ValueError("omega_s and omega_p must be positive")
    half = 0.5 * omega_p
    sp = replace(modes.params, delta_a=modes.omega_a - half, delta_b=modes.omega_b - half)
    return omega_s - half, sp


def axes_to_lab(modes, x, y):
    """Signal and pump frequencies for map axes ``x = w_s - w_b``, ``y = w_i - w_a``."""
    omega_s = modes.omega_b + x
    omega_p = modes.omega_a + modes.omega_b + x + y
    return omega_s, omega_p


def axes_detunings(modes, x, y):
    """Array form of :func:`map_axes_to_frame`: ``(delta, Delta_a, Delta_b)``."""
    omega_s, omega_p = axes_to_lab(modes, x, y)
    half = 0.5 * omega_p
    return omega_s - half, modes.omega_a - half, modes.omega_b - half


def map_axes_to_frame(modes, x, y):
    """Detunings for a gain-map cell at signal offset ``x`` and idler offset ``y``."""
    omega_s, omega_p = axes_to_lab(modes, x, y)
    return lab_to_frame(modes, omega_s, omega_p)


def frame_to_axes(delta, params):
    """Inverse of :func:`map_axes_to_frame`: ``x = delta - Delta_b``, ``y = -(delta + Delta_a)``."""
    return delta - params.delta_b, -(delta + params.delta_a)
