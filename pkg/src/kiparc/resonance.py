"""Ring resonance frequencies, standing-wave profiles and DC-current tuning.

Each mode obeys ``tan(w l / 8 v_a) * tan(w l / 8 v_b) = R`` with ``R = Z_a/Z_b``
for mode a and ``Z_b/Z_a`` for mode b. Between zero and the first tangent pole
the left-hand side rises monotonically from 0 to infinity, so the fundamental
is the unique root below ``2 min(v_a, v_b) / l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import ModePair, TWO_PI
from .errors import (
    InconsistentModesError,
    MultipleRootsError,
    NoRootError,
    PoleProximityError,
)

POLE_GUARD = 1e-9
ROOT_RTOL = 1e-14
MODES = ("a", "b")


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")


def _impedance_ratio(geom, mode):
    return geom.z_a / geom.z_b if mode == "a" else geom.z_b / geom.z_a


def _arguments(f, geom):
    w = TWO_PI * np.asarray(f, dtype=float)
    scale = geom.total_length / 8.0
    return w * scale / geom.v_a, w * scale / geom.v_b


def characteristic_residual(f, geom, mode):
    """Residual of the resonance condition at frequency ``f`` (Hz).

    Raises
    ------
    PoleProximityError
        If either tangent argument lies within the guard band of a pole.
    """
    _check_mode(mode)
    if not f > 0:
        raise ValueError("frequency must be positive")
    ua, ub = _arguments(f, geom)
    if abs(math.cos(ua)) <= POLE_GUARD or abs(math.cos(ub)) <= POLE_GUARD:
        raise PoleProximityError(f"f = {f:.6g} Hz sits on a tangent pole")
    return math.tan(ua) * math.tan(ub) - _impedance_ratio(geom, mode)


def pole_frequencies(geom, f_max):
    """All tangent-pole frequencies (Hz) of either section type up to ``f_max``."""
    poles = []
    for v in (geom.v_a, geom.v_b):
        spacing = 4.0 * v / geom.total_length
        f = 2.0 * v / geom.total_length
        while f <= f_max:
            poles.append(f)
            f += spacing
    return np.sort(np.array(poles))


def fundamental_band(geom):
    """Default search band: from far below the fundamentals up to the first pole."""
    first_pole = 2.0 * min(geom.v_a, geom.v_b) / geom.total_length
    return 1e-3 * first_pole, first_pole * (1.0 - 1e-9)


def find_roots(geom, mode, band):
    """All roots of the characteristic equation inside ``band`` (Hz), ascending.

    The band is scanned on a grid of at least 128 points per pole spacing.
    Sign changes whose bracket contains a tangent pole are discarded; the
    remaining brackets are refined with Brent's method.
    """
    _check_mode(mode)
    f_min, f_max = band
    if not (0 < f_min < f_max):
        raise ValueError("band must satisfy 0 < f_min < f_max")
    step = min(geom.v_a, geom.v_b) / (32.0 * geom.total_length)
    n = max(int(math.ceil((f_max - f_min) / step)) + 1, 257)
    grid = np.linspace(f_min, f_max, n)
    ratio = _impedance_ratio(geom, mode)
    ua, ub = _arguments(grid, geom)
    with np.errstate(all="ignore"):
        res = np.tan(ua) * np.tan(ub) - ratio
    poles = pole_frequencies(geom, f_max)

    def g(f):
        a, b = _arguments(f, geom)
        return math.tan(a) * math.tan(b) - ratio

    roots = []
    for i in np.nonzero(res == 0.0)[0]:
        roots.append(float(grid[i]))
    crossings = np.nonzero(np.sign(res[:-1]) * np.sign(res[1:]) < 0)[0]
    for i in crossings:
        lo, hi = grid[i], grid[i + 1]
        if np.any((poles >= lo) & (poles <= hi)):
            continue
        roots.append(brentq(g, lo, hi, xtol=1e-300, rtol=ROOT_RTOL, maxiter=200))
    return sorted(roots)


def solve_mode_frequencies(geom, band=None):
    """Fundamental resonance frequencies of both modes.

    Parameters
    ----------
    geom : RingGeometry or RingLines
    band : tuple of float, optional
        ``(f_min, f_max)`` in Hz. Defaults to :func:`fundamental_band`.

    Returns
    -------
    ModePair

    Raises
    ------
    NoRootError, MultipleRootsError
        If the band holds no root, or more than one, for either mode.
    """
    band = fundamental_band(geom) if band is None else band
    found = {}
    for mode in MODES:
        roots = find_roots(geom, mode, band)
        if not roots:
            raise NoRootError(f"no mode-{mode} root in band {band[0]:.6g}..{band[1]:.6g} Hz")
        if len(roots) > 1:
            raise MultipleRootsError(
                f"{len(roots)} mode-{mode} roots in band; narrow the band "
                f"(roots at {', '.join(f'{r:.6g}' for r in roots)} Hz)"
            )
        found[mode] = roots[0]
    return ModePair(found["a"], found["b"])


@dataclass(frozen=True)
class ModeProfile:
    """Standing-wave voltage and current along the ring.

    ``positions`` is arc length from the centre of section 1 (port 1), in m.
    Each section contributes ``samples_per_section`` points including both
    end points, so boundaries appear twice (once per side). ``section``
    holds the 1-based section index of each sample. ``amplitudes`` and
    ``phases`` are the per-section ansatz coefficients after normalization.
    """

    mode: str
    frequency: float
    positions: np.ndarray
    section: np.ndarray
    voltage: np.ndarray
    current: np.ndarray
    amplitudes: tuple
    phases: tuple
    boundary_mismatch: float

    @property
    def section_amplitudes(self):
        return tuple(zip(self.amplitudes, self.phases))


def _section_terms(geom, mode, f):
    w = TWO_PI * f
    k = []
    z = []
    phi = []
    for j in range(1, 5):
        v, zj = (geom.v_a, geom.z_a) if j % 2 == 1 else (geom.v_b, geom.z_b)
        k.append(w / v)
        z.append(zj)
        phi.append((j - 1) * math.pi / 2 if mode == "a" else j * math.pi / 2)
    return k, z, phi


def mode_profile(geom, modes, mode, samples_per_section=101, tol=1e-7):
    """Voltage and current profile of one resonance, max |voltage| = 1.

    Amplitudes are propagated around the ring from section 1 by current
    continuity (or voltage continuity where that is better conditioned); the
    other condition, including the closing 4 -> 1 boundary, is then checked.

    Raises
    ------
    InconsistentModesError
        If the boundary conditions disagree by more than ``tol`` (relative),
        which happens when the frequency is not a resonance of ``geom``.
    """
    _check_mode(mode)
    if samples_per_section < 3:
        raise ValueError("samples_per_section must be at least 3")
    f = modes.f_a if mode == "a" else modes.f_b
    k, z, phi = _section_terms(geom, mode, f)
    half = geom.total_length / 8.0

    def cur(j, amp, x):
        return amp * math.sin(k[j] * x + phi[j])

    def vol(j, amp, x):
        return z[j] * amp * math.cos(k[j] * x + phi[j])

    amps = [1.0]
    mismatch = 0.0
    for j in range(4):
        nxt = (j + 1) % 4
        i_left, v_left = cur(j, amps[j], half), vol(j, amps[j], half)
        i_unit, v_unit = cur(nxt, 1.0, -half), vol(nxt, 1.0, -half)
        scale = max(abs(i_left), abs(v_left) / z[j])
        if abs(i_unit) >= abs(v_unit) / z[nxt]:
            amp = i_left / i_unit
            err = abs(vol(nxt, amp, -half) - v_left) / (z[j] * scale)
        else:
            amp = v_left / v_unit
            err = abs(cur(nxt, amp, -half) - i_left) / scale
        mismatch = max(mismatch, err)
        if nxt == 0:
            mismatch = max(mismatch, abs(amp - amps[0]) / abs(amps[0]))
        else:
            amps.append(amp)
    if mismatch > tol:
        raise InconsistentModesError(
            f"boundary conditions violated by {mismatch:.3g} at f = {f:.6g} Hz; "
            "frequency is not a resonance of this ring"
        )

    xs = np.linspace(-half, half, samples_per_section)
    pos, sec, volt, curr = [], [], [], []
    for j in range(4):
        arg = k[j] * xs + phi[j]
        pos.append(j * geom.section_length + xs)
        sec.append(np.full(xs.size, j + 1))
        volt.append(z[j] * amps[j] * np.cos(arg))
        curr.append(amps[j] * np.sin(arg))
    volt = np.concatenate(volt)
    norm = np.max(np.abs(volt))
    return ModeProfile(
        mode=mode,
        frequency=f,
        positions=np.concatenate(pos),
        section=np.concatenate(sec),
        voltage=volt / norm,
        current=np.concatenate(curr) / norm,
        amplitudes=tuple(float(a / norm) for a in amps),
        phases=tuple(phi),
        boundary_mismatch=mismatch,
    )


def inductance_factor(i_dc, tuning, mode):
    """``L(I)/L0`` for bias current ``i_dc`` (A); half the current flows per branch."""
    _check_mode(mode)
    if i_dc < 0:
        raise ValueError("i_dc must be nonnegative")
    _, i_star, alpha = tuning.for_mode(mode)
    u2 = (0.5 * i_dc / i_star) ** 2
    factor = 1.0 + u2 + alpha * u2 * u2
    if factor < 1.0:
        raise ValueError(f"L(I)/L0 = {factor:.6g} < 1: quartic coefficient too negative")
    return factor


def tuning_curve(tuning, currents):
    """Mode frequencies at each bias current.

    A uniform inductance rescaling leaves the impedance ratio unchanged and
    scales both velocities alike, so ``f(I) = f0 / sqrt(L(I)/L0)`` exactly.
    """
    currents = np.asarray(currents, dtype=float)
    if np.any(currents < 0):
        raise ValueError("currents must be nonnegative")
    if np.any(np.diff(currents) < 0):
        raise ValueError("currents must be ascending")
    out = []
    for i in currents:
        out.append(
            ModePair(
                tuning.f0_a / math.sqrt(inductance_factor(i, tuning, "a")),
                tuning.f0_b / math.sqrt(inductance_factor(i, tuning, "b")),
            )
        )
    return out
