"""Four-port input-output response of the pumped two-mode ring.

Conventions
-----------
Port 2 (input) and port 4 (output) carry the signal near mode b; port 1
(input) and port 3 (output) carry the idler near mode a. Gains are written
``g_xy`` with x the input and y the output. At Fourier argument ``d``::

    D_s(d) = [i(d + Da) - ka][i(d - Db) - kb] - |xi|^2/4
    D_i(d) = [i(d - Da) - ka][i(d + Db) - kb] - |xi|^2/4
    g_ss = kb [i(d + Da) - ka] / D_s      g_is = i sqrt(ka kb) xi / (2 D_s)
    g_ii = ka [i(d + Db) - kb] / D_i      g_si = i sqrt(ka kb) xi / (2 D_i)

A signal at ``w_p/2 + delta`` produces an idler at ``w_p/2 - delta``, so the
signal port sees the gains at ``+delta`` and the idler port those at
``-delta``. With vacuum at ports 3 and 4::

    out4 = g_ss(delta) beta + g_is(delta) alpha*
    out3 = g_ii(-delta) alpha + g_si(-delta) beta*
    out2 = beta + out4,   out1 = alpha + out3

Free-propagation phases between input and output reference times are set
to one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GainSet, QuadratureSample, axes_detunings
from .errors import DegenerateError, PoleError, ZeroPumpError

DB_FLOOR = -300.0
POLE_RTOL = 1e-12
ETA = np.diag([1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0])


def power_db(p):
    """``10 log10(p)`` with zero power mapped to the -300 dB floor."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(p > 0, 10.0 * np.log10(np.where(p > 0, p, 1.0)), DB_FLOOR)
    out = np.maximum(out, DB_FLOOR)
    return float(out) if out.ndim == 0 else out


def _raw_gains(ka, kb, xi, da, db, d):
    """Elementwise gains; works on scalars and numpy arrays alike."""
    xa_s = 1j * (d + da) - ka
    xb_s = 1j * (d - db) - kb
    xa_i = 1j * (d - da) - ka
    xb_i = 1j * (d + db) - kb
    q = 0.25 * abs(xi) ** 2
    d_s = np.asarray(xa_s * xb_s - q, dtype=complex)
    d_i = np.asarray(xa_i * xb_i - q, dtype=complex)
    conv = 0.5j * math.sqrt(ka * kb) * xi
    with np.errstate(all="ignore"):
        g_ss = kb * xa_s / d_s
        g_is = conv / d_s
        g_ii = ka * xb_i / d_i
        g_si = conv / d_i
    return g_ss, g_si, g_ii, g_is, d_s, d_i


def _pole_floor(sp):
    return POLE_RTOL * (sp.kappa_a + sp.kappa_b) ** 2


def amplitude_gains(sp, delta):
    """All four amplitude gains at Fourier argument ``delta`` (rad/s).

    Raises
    ------
    PoleError
        If either denominator is within ``1e-12 (ka + kb)^2`` of zero, i.e.
        the device sits at or beyond the parametric oscillation threshold.
    """
    g_ss, g_si, g_ii, g_is, d_s, d_i = _raw_gains(
        sp.kappa_a, sp.kappa_b, sp.xi, sp.delta_a, sp.delta_b, float(delta)
    )
    floor = _pole_floor(sp)
    if abs(d_s) <= floor or abs(d_i) <= floor:
        raise PoleError(
            f"response denominator vanishes at delta = {delta:.6g} rad/s "
            f"(|xi| = {abs(sp.xi):.6g}, threshold {sp.threshold:.6g})"
        )
    return GainSet(complex(g_ss), complex(g_si), complex(g_ii), complex(g_is), complex(d_s), complex(d_i))


def power_gains_db(gs):
    """``(10 log10 |g_ss|^2, 10 log10 |g_si|^2)``, floored at -300 dB.

    For the measured single-input idler gain pass the set evaluated at
    ``-delta`` (or use :func:`measured_gains_db`).
    """
    return power_db(abs(gs.g_ss) ** 2), power_db(abs(gs.g_si) ** 2)


def measured_gains_db(sp, delta):
    """Signal gain at ``+delta`` and idler gain at ``-delta`` for a signal-only drive."""
    g_sig = amplitude_gains(sp, delta)
    g_idl = amplitude_gains(sp, -delta)
    return power_db(abs(g_sig.g_ss) ** 2), power_db(abs(g_idl.g_si) ** 2)


@dataclass(frozen=True)
class GainMap:
    """Signal and idler power gains on a (w_s - w_b, w_i - w_a) grid.

    ``x`` and ``y`` are the axis vectors in rad/s; ``gs_db`` and ``gi_db``
    have shape ``(len(y), len(x))``. Cells at a response pole are NaN and
    flagged in ``mask``.
    """

    x: np.ndarray
    y: np.ndarray
    gs_db: np.ndarray
    gi_db: np.ndarray
    mask: np.ndarray


def gain_map(modes, x_grid, y_grid):
    """Evaluate the single-input gains over a detuning grid."""
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("grid values must be finite")
    X, Y = np.meshgrid(x, y)
    delta, da, db = axes_detunings(modes, X, Y)
    p = modes.params
    g_ss, _, _, _, d_s, _ = _raw_gains(p.kappa_a, p.kappa_b, p.xi, da, db, delta)
    _, g_si_m, _, _, _, d_i_m = _raw_gains(p.kappa_a, p.kappa_b, p.xi, da, db, -delta)
    floor = _pole_floor(p)
    mask = (np.abs(d_s) <= floor) | (np.abs(d_i_m) <= floor)
    gs = np.where(mask, np.nan, power_db(np.where(mask, 1.0, np.abs(g_ss) ** 2)))
    gi = np.where(mask, np.nan, power_db(np.where(mask, 1.0, np.abs(g_si_m) ** 2)))
    return GainMap(x, y, gs, gi, mask)


def gain_map_cells(modes, x, y, channel="signal"):
    """Gain in dB at scattered ``(x, y)`` points (rad/s); NaN at poles."""
    delta, da, db = axes_detunings(modes, np.asarray(x, float), np.asarray(y, float))
    p = modes.params
    if channel == "signal":
        g, _, _, _, d, _ = _raw_gains(p.kappa_a, p.kappa_b, p.xi, da, db, delta)
    elif channel == "idler":
        _, g, _, _, _, d = _raw_gains(p.kappa_a, p.kappa_b, p.xi, da, db, -delta)
    else:
        raise ValueError(f"channel must be 'signal' or 'idler', got {channel!r}")
    bad = np.abs(d) <= _pole_floor(p)
    return np.where(bad, np.nan, power_db(np.where(bad, 1.0, np.abs(g) ** 2)))


@dataclass(frozen=True)
class BogoliubovMatrix:
    """8x8 map from input to output field stacks.

    Both stacks are ordered ``(c1, c3, c2+, c4+, c2, c4, c1+, c3+)`` where
    ``c+`` stands for the adjoint field at the mirrored Fourier argument.
    """

    entries: np.ndarray

    def canonical_deviation(self):
        """Max-norm of ``M eta M^H - eta``; zero for a canonical transform."""
        m = self.entries
        return float(np.max(np.abs(m @ ETA @ m.conj().T - ETA)))

    def apply(self, stack):
        return self.entries @ np.asarray(stack, dtype=complex)


def _check_poles(sp, dets):
    floor = _pole_floor(sp)
    for d in dets:
        if abs(d) <= floor:
            raise PoleError("response denominator vanishes")


def bogoliubov_matrix(sp, delta):
    """Full four-port scattering transform at Fourier argument ``delta``.

    Built by inverting the two coupled-mode matrices of the Fourier
    transformed equations of motion, independently of the closed-form gains:
    the first block maps ``(c1+c3, c2+ + c4+)`` through mode ``a`` and the
    adjoint of mode ``b``, the second ``(c2+c4, c1+ + c3+)`` through mode
    ``b`` and the adjoint of mode ``a``.
    """
    ka, kb, xi = sp.kappa_a, sp.kappa_b, sp.xi
    da, db = sp.delta_a, sp.delta_b
    a_ab = np.array(
        [[ka - 1j * (delta - da), 0.5j * xi], [-0.5j * np.conj(xi), kb - 1j * (delta + db)]]
    )
    a_ba = np.array(
        [[kb - 1j * (delta - db), 0.5j * xi], [-0.5j * np.conj(xi), ka - 1j * (delta + da)]]
    )
    _check_poles(sp, (np.linalg.det(a_ab), np.linalg.det(a_ba)))
    blocks = []
    for amat, (k1, k2) in ((a_ab, (ka, kb)), (a_ba, (kb, ka))):
        kvec = np.sqrt([k1, k2])
        resp = -np.outer(kvec, kvec) * np.linalg.inv(amat)
        # each port pair shares one mode: expand 2x2 mode response to 4x4 port response
        spread = np.kron(resp, np.ones((2, 2)))
        blocks.append(np.eye(4) + spread)
    m = np.zeros((8, 8), dtype=complex)
    m[:4, :4] = blocks[0]
    m[4:, 4:] = blocks[1]
    return BogoliubovMatrix(m)


@dataclass(frozen=True)
class PortOutputs:
    """Mean output amplitudes: idler frequency at ports 1/3, signal at 2/4."""

    out1: complex
    out2: complex
    out3: complex
    out4: complex


def output_fields(sp, delta, drive):
    """Output amplitudes for coherent inputs at ports 1 and 2, vacuum at 3 and 4."""
    sig = amplitude_gains(sp, delta)
    idl = amplitude_gains(sp, -delta)
    a, b = drive.alpha, drive.beta
    out4 = sig.g_ss * b + sig.g_is * a.conjugate()
    out3 = idl.g_ii * a + idl.g_si * b.conjugate()
    return PortOutputs(out1=a + out3, out2=b + out4, out3=out3, out4=out4)


def quadratures(sp, delta, drive):
    """Output quadratures at ports 4 (signal) and 3 (idler)."""
    out = output_fields(sp, delta, drive)
    return QuadratureSample(out.out4.real, out.out4.imag, out.out3.real, out.out3.imag)


@dataclass(frozen=True)
class QuadratureSweep:
    """Quadratures versus input signal phase ``phi`` (rad)."""

    phi: np.ndarray
    i_s: np.ndarray
    q_s: np.ndarray
    i_i: np.ndarray
    q_i: np.ndarray

    @property
    def signal(self):
        return self.i_s + 1j * self.q_s

    @property
    def idler(self):
        return self.i_i + 1j * self.q_i

    def samples(self):
        return [QuadratureSample(*v) for v in zip(self.i_s, self.q_s, self.i_i, self.q_i)]

    def correlations(self):
        """Pearson correlations ``(corr(I_s, I_i), corr(Q_s, Q_i))``."""
        return float(np.corrcoef(self.i_s, self.i_i)[0, 1]), float(np.corrcoef(self.q_s, self.q_i)[0, 1])


def quadrature_sweep(sp, delta, phases, beta_mag=1.0, alpha=0j):
    """Quadratures for ``beta = beta_mag exp(i phi)`` at each phase."""
    phases = np.asarray(phases, dtype=float)
    sig = amplitude_gains(sp, delta)
    idl = amplitude_gains(sp, -delta)
    beta = beta_mag * np.exp(1j * phases)
    alpha = complex(alpha)
    s = sig.g_ss * beta + sig.g_is * alpha.conjugate()
    i = idl.g_ii * alpha + idl.g_si * np.conj(beta)
    return QuadratureSweep(phases, s.real, s.imag, i.real, i.imag)


def align_quadratures(sweep, atol=1e-12):
    """Rotate and rescale each channel so its ``phi = -pi`` sample sits at (-1, 0).

    Raises
    ------
    ValueError
        If the sweep has no sample at ``phi = -pi``.
    DegenerateError
        If a channel has zero amplitude at the reference sample.
    """
    idx = np.nonzero(np.abs(sweep.phi + math.pi) <= atol)[0]
    if idx.size == 0:
        raise ValueError("sweep must contain phi = -pi")
    k = idx[0]
    out = []
    for z in (sweep.signal, sweep.idler):
        ref = z[k]
        if abs(ref) == 0:
            raise DegenerateError("channel has zero amplitude at phi = -pi")
        out.append(-z / ref)
    s, i = out
    return QuadratureSweep(sweep.phi.copy(), s.real, s.imag, i.real, i.imag)


def extinction_ratio(sp, delta, target):
    """Drive ratio ``beta / conj(alpha)`` that nulls the chosen output.

    ``target`` is ``"signal"`` (port 4) or ``"idler"`` (port 3).

    Raises
    ------
    ZeroPumpError
        For the idler target when ``xi == 0``.
    """
    amplitude_gains(sp, delta)
    amplitude_gains(sp, -delta)
    root = math.sqrt(sp.kappa_a / sp.kappa_b)
    if target == "signal":
        return -1j * root * sp.xi / (2.0 * (1j * (delta + sp.delta_a) - sp.kappa_a))
    if target == "idler":
        if sp.xi == 0:
            raise ZeroPumpError("idler extinction needs a nonzero pump rate")
        return -1j * root * 2.0 * (1j * (delta - sp.delta_b) - sp.kappa_b) / sp.xi.conjugate()
    raise ValueError(f"target must be 'signal' or 'idler', got {target!r}")


@dataclass(frozen=True)
class FringeResult:
    """Gains versus input signal phase, both relative to the signal input power."""

    phases: np.ndarray
    g_s_db: np.ndarray
    g_i_db: np.ndarray


def fringe_powers(sp, delta, alpha, beta_mag, phases):
    """Linear ``(|out4|^2, |out3|^2) / |beta|^2`` for each signal phase."""
    phases = np.asarray(phases, dtype=float)
    if not beta_mag > 0:
        raise ValueError("beta_mag must be positive")
    sig = amplitude_gains(sp, delta)
    idl = amplitude_gains(sp, -delta)
    beta = beta_mag * np.exp(1j * phases)
    alpha = complex(alpha)
    out4 = sig.g_ss * beta + sig.g_is * alpha.conjugate()
    out3 = idl.g_ii * alpha + idl.g_si * np.conj(beta)
    norm = beta_mag**2
    return np.abs(out4) ** 2 / norm, np.abs(out3) ** 2 / norm


def interference_fringe(sp, delta, alpha, beta_mag, phases):
    """Two-tone interference: drive ``beta = beta_mag exp(i phi)`` with fixed ``alpha``."""
    gs, gi = fringe_powers(sp, delta, alpha, beta_mag, phases)
    return FringeResult(np.asarray(phases, dtype=float), power_db(gs), power_db(gi))


def noise_figure(gain, n_ratio):
    """Noise figure (linear) of the converter followed by a noisier amplifier.

    ``NF = (1 + (G - 1) n_ratio) / G`` where ``n_ratio`` is the converter's
    input-referred added noise over the following stage's noise.
    """
    gain = np.asarray(gain, dtype=float)
    if np.any(gain < 1):
        raise ValueError("gain must be >= 1")
    if n_ratio < 0:
        raise ValueError("n_ratio must be nonnegative")
    nf = (1.0 + (gain - 1.0) * n_ratio) / gain
    return float(nf) if nf.ndim == 0 else nf
