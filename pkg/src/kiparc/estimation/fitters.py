"""Parameter estimation for gain maps, tuning curves, fringes and noise figures.

Every fitter works in an internal coordinate system where strictly positive
quantities (rates, currents, frequencies, ratios) are log-transformed, then
reports natural values with delta-method standard errors. Residuals are in
dB unless stated otherwise. After convergence the condition number of the
normal matrix is checked; above ``COND_LIMIT`` the data do not constrain the
free parameters and :class:`IllConditionedError` is raised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import TWO_PI, FitResult, ScatteringParams, TuningModel
from ..errors import ConvergenceError, DataError, DegenerateError, IllConditionedError, ThresholdError
from ..resonance import inductance_factor
from ..scattering import amplitude_gains, fringe_powers, gain_map_cells, noise_figure, power_db
from .lm import covariance, jacobian_fd, levenberg_marquardt

COND_LIMIT = 1e8


@dataclass(frozen=True)
class _Param:
    name: str
    transform: str  # "log", "linear" or "scaled"
    scale: float = 1.0
    unit: str = ""

    def to_internal(self, value):
        if self.transform == "log":
            if not value > 0:
                raise ValueError(f"initial {self.name} must be positive")
            return math.log(value)
        return value / self.scale

    def to_natural(self, u):
        if self.transform == "log":
            return math.exp(u) if u < 700.0 else math.inf
        return u * self.scale

    def derivative(self, u):
        return math.exp(u) if self.transform == "log" else self.scale


def _check_conditioning(params, cond):
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            f"normal matrix condition number {cond:.3g} exceeds {COND_LIMIT:.0e}; "
            "the data do not constrain " + ", ".join(p.name for p in params)
        )


def _finish(params, lsq, extra_units=None):
    cov, cond = covariance(lsq.jacobian, lsq.residuals)
    _check_conditioning(params, cond)
    values, errors, units = {}, {}, {}
    for k, p in enumerate(params):
        values[p.name] = float(p.to_natural(lsq.x[k]))
        errors[p.name] = float(abs(p.derivative(lsq.x[k])) * math.sqrt(max(cov[k, k], 0.0)))
        units[p.name] = p.unit
    if extra_units:
        units.update(extra_units)
    return FitResult(
        parameters=values,
        standard_errors=errors,
        residual_norm=float(np.linalg.norm(lsq.residuals)),
        iterations=lsq.iterations,
        converged=lsq.converged,
        units=units,
        gradient_norm=lsq.gradient_norm,
        condition_number=cond,
        cost_history=lsq.history,
    )


def _value_column(data, channel):
    key = {"signal": "Gs_dB", "idler": "Gi_dB"}.get(channel)
    if key is None:
        raise ValueError(f"channel must be 'signal' or 'idler', got {channel!r}")
    if key not in data.values:
        raise DataError(f"dataset has no {key} column")
    return data.values[key]


def _infer_channel(data):
    present = [c for c, k in (("signal", "Gs_dB"), ("idler", "Gi_dB")) if k in data.values]
    if len(present) != 1:
        raise DataError("dataset holds both gain columns; pass channel explicitly")
    return present[0]


def fit_gain_map(data, modes, init=None, *, channel=None, fit_modes=False, space="db", max_iter=200):
    """Fit ``|xi|``, ``kappa_a``, ``kappa_b`` (and optionally the mode frequencies) to a gain map.

    Parameters
    ----------
    data : Dataset
        ``gain_map`` or ``gain_slice`` with ``x``/``y`` in Hz and either a
        ``Gs_dB`` or ``Gi_dB`` column.
    modes : DeviceModes
        Nominal mode frequencies defining the map axes (and the default guess).
    init : ScatteringParams, optional
        Starting rates; defaults to ``modes.params``.
    fit_modes : bool
        Also fit ``omega_a`` and ``omega_b`` (reported in rad/s).
    space : {"db", "linear"}
        Residual space.

    Raises
    ------
    ThresholdError
        If the starting point is at or above the oscillation threshold.
    """
    if data.kind not in ("gain_map", "gain_slice"):
        raise DataError(f"expected a gain_map or gain_slice dataset, got {data.kind}")
    if space not in ("db", "linear"):
        raise ValueError("space must be 'db' or 'linear'")
    channel = channel or _infer_channel(data)
    observed = _value_column(data, channel)
    x = TWO_PI * data.coordinates["x"]
    y = TWO_PI * data.coordinates["y"]
    sw = np.sqrt(data.weight_vector)
    init = init or modes.params
    if abs(init.xi) >= init.threshold:
        raise ThresholdError(
            f"initial |xi| = {abs(init.xi):.6g} is at or above threshold {init.threshold:.6g}"
        )
    scale = init.kappa_b
    params = [
        _Param("xi", "log", unit="rad/s"),
        _Param("kappa_a", "log", unit="rad/s"),
        _Param("kappa_b", "log", unit="rad/s"),
    ]
    start = [abs(init.xi), init.kappa_a, init.kappa_b]
    if fit_modes:
        params += [_Param("omega_a", "scaled", scale, "rad/s"), _Param("omega_b", "scaled", scale, "rad/s")]
        start += [modes.omega_a, modes.omega_b]
    u0 = np.array([p.to_internal(v) for p, v in zip(params, start)])
    phase = np.exp(1j * np.angle(init.xi)) if init.xi != 0 else 1.0
    target = observed if space == "db" else 10.0 ** (observed / 10.0)

    def unpack(u):
        xi, ka, kb = (params[k].to_natural(u[k]) for k in range(3))
        if fit_modes:
            wa, wb = params[3].to_natural(u[3]), params[4].to_natural(u[4])
        else:
            wa, wb = modes.omega_a, modes.omega_b
        return xi, ka, kb, wa, wb

    def admissible(u):
        xi, ka, kb, wa, wb = unpack(u)
        return xi < 2.0 * math.sqrt(ka * kb) and wb > wa > 0

    def resid(u):
        xi, ka, kb, wa, wb = unpack(u)
        dev = replace(modes, omega_a=wa, omega_b=wb, params=ScatteringParams(ka, kb, xi * phase))
        # the map axes are referred to the nominal modes
        model = gain_map_cells(dev, x + modes.omega_b - wb, y + modes.omega_a - wa, channel)
        if space == "linear":
            model = 10.0 ** (model / 10.0)
        return sw * (model - target)

    lsq = levenberg_marquardt(resid, u0, admissible=admissible, max_iter=max_iter)
    return _finish(params, lsq)


def tuning_frequency(currents, f0, i_star, alpha=0.0):
    u2 = (0.5 * np.asarray(currents, dtype=float) / i_star) ** 2
    with np.errstate(all="ignore"):
        return f0 / np.sqrt(1.0 + u2 + alpha * u2 * u2)


def fit_tuning_curve(data, init, *, fit_alpha=False, max_iter=200):
    """Fit ``f0``, ``I*`` (and optionally ``alpha``) for each mode column present.

    Residuals are relative frequency deviations. Parameter names carry the
    mode suffix: ``f0_a``, ``i_star_a``, ``alpha_a``, ...

    Raises
    ------
    DataError
        Fewer than four distinct currents for a mode.
    IllConditionedError
        The current span is too small to separate the parameters.
    """
    if data.kind != "tuning":
        raise DataError(f"expected a tuning dataset, got {data.kind}")
    currents = data.coordinates["I_A"]
    if np.any(currents < 0):
        raise DataError("currents must be nonnegative")
    sw = np.sqrt(data.weight_vector)
    blocks = []
    for mode in ("a", "b"):
        col = f"f_{mode}_Hz"
        if col not in data.values:
            continue
        f = data.values[col]
        ok = np.isfinite(f)
        if np.unique(currents[ok]).size < 4:
            raise DataError(f"mode {mode}: need at least 4 distinct currents")
        blocks.append((mode, ok, f))
    params, start = [], []
    for mode, _, _ in blocks:
        f0, i_star, alpha = init.for_mode(mode)
        params += [_Param(f"f0_{mode}", "log", unit="Hz"), _Param(f"i_star_{mode}", "log", unit="A")]
        start += [f0, i_star]
        if fit_alpha:
            params.append(_Param(f"alpha_{mode}", "linear"))
            start.append(alpha)
    u0 = np.array([p.to_internal(v) for p, v in zip(params, start)])
    per = 3 if fit_alpha else 2

    def resid(u):
        out = []
        for k, (mode, ok, f) in enumerate(blocks):
            vals = [params[k * per + j].to_natural(u[k * per + j]) for j in range(per)]
            alpha = vals[2] if fit_alpha else 0.0
            model = tuning_frequency(currents[ok], vals[0], vals[1], alpha)
            out.append(sw[ok] * (model / f[ok] - 1.0))
        return np.concatenate(out)

    def admissible(u):
        if not fit_alpha:
            return True
        imax = currents.max()
        for k, (mode, _, _) in enumerate(blocks):
            i_star = params[k * per + 1].to_natural(u[k * per + 1])
            u2 = (0.5 * imax / i_star) ** 2
            if 1.0 + u2 + u[k * per + 2] * u2 * u2 < 1.0:
                return False
        return True

    r0 = resid(u0)
    _check_conditioning(params, np.linalg.cond(_jtj(jacobian_fd(resid, u0, r0))))
    lsq = levenberg_marquardt(resid, u0, admissible=admissible, max_iter=max_iter)
    return _finish(params, lsq)


def _jtj(jac):
    return jac.T @ jac


def tuning_model_from_fit(result, template):
    """Merge fitted tuning parameters into ``template`` (unfitted fields kept)."""
    fields = {k: v for k, v in result.parameters.items() if hasattr(template, k)}
    return replace(template, **fields)


def _fringe_visible(gain_db, phases):
    """Relative first-harmonic amplitude of a fringe in linear power."""
    p = 10.0 ** (np.asarray(gain_db) / 10.0)
    c = np.abs(np.mean(p * np.exp(-1j * phases)))
    return 2.0 * c / np.mean(p)


FRINGE_FREE_DEFAULT = ("xi", "power_ratio", "phase_offset")


def fit_fringe(
    data,
    init,
    power_ratio_guess,
    *,
    delta=0.0,
    channel=None,
    free=FRINGE_FREE_DEFAULT,
    phase_offset_guess=None,
    max_iter=200,
):
    """Fit a two-tone interference fringe.

    The drive is ``beta = exp(i phi)`` and ``alpha = sqrt(P_i/P_s) exp(i theta)``
    with ``theta`` the fitted ``phase_offset``. At fixed detuning a fringe is
    described by three numbers (level, visibility, phase), so by default the
    couplings are held at ``init`` (typically a gain-map fit) and only
    ``|xi|``, ``P_i/P_s`` and ``theta`` are free. Adding ``"kappa_a"`` or
    ``"kappa_b"`` to ``free`` is allowed; unidentifiable combinations raise
    :class:`IllConditionedError`.

    Parameters
    ----------
    data : Dataset
        ``fringe`` with ``phase_rad`` and ``Gs_dB`` and/or ``Gi_dB``.
    init : ScatteringParams
        Couplings, starting ``|xi|`` and the detunings used for the model.
    power_ratio_guess : float
        Starting ``P_i/P_s``.
    delta : float
        Signal detuning from half the pump (rad/s).
    channel : {"signal", "idler", "both"}, optional
        Defaults to ``"both"`` when both gain columns are present. A single
        signal fringe at fixed couplings is matched equally well by a second
        ``(|xi|, P_i/P_s)`` pair (the roles of ``|g_ss|^2`` and
        ``P_i/P_s |g_is|^2`` swap), so prefer ``"both"`` when available.

    Raises
    ------
    DegenerateError
        If the data show no fringe (single-input data) or span less than 2 pi.
    """
    if data.kind != "fringe":
        raise DataError(f"expected a fringe dataset, got {data.kind}")
    phases = data.coordinates["phase_rad"]
    order = np.sort(phases)
    step = np.max(np.diff(order)) if order.size > 1 else TWO_PI
    if order[-1] - order[0] + step < TWO_PI * (1 - 1e-9):
        raise DegenerateError("fringe data must span a full 2 pi of signal phase")
    if channel is None:
        channel = "both" if {"Gs_dB", "Gi_dB"} <= set(data.values) else _infer_channel(data)
    channels = ("signal", "idler") if channel == "both" else (channel,)
    observed = [_value_column(data, c) for c in channels]
    for c, obs in zip(channels, observed):
        if _fringe_visible(obs, phases) < 0.02:
            raise DegenerateError(f"no interference fringe in the {c} data")
    unknown = set(free) - {"kappa_a", "kappa_b", "xi", "power_ratio", "phase_offset"}
    if unknown:
        raise ValueError(f"unknown free parameters: {', '.join(sorted(unknown))}")
    if abs(init.xi) >= init.threshold:
        raise ThresholdError("initial |xi| is at or above threshold")
    sw = np.sqrt(data.weight_vector)
    base = {
        "kappa_a": init.kappa_a,
        "kappa_b": init.kappa_b,
        "xi": abs(init.xi),
        "power_ratio": float(power_ratio_guess),
    }
    xi_phase = np.exp(1j * np.angle(init.xi)) if init.xi != 0 else 1.0
    order_names = [n for n in ("kappa_a", "kappa_b", "xi", "power_ratio", "phase_offset") if n in free]
    params = [
        _Param(n, "linear", unit="rad") if n == "phase_offset"
        else _Param(n, "log", unit="" if n == "power_ratio" else "rad/s")
        for n in order_names
    ]

    def unpack(u, theta_fixed=0.0):
        vals = dict(base, phase_offset=theta_fixed)
        for k, p in enumerate(params):
            vals[p.name] = p.to_natural(u[k])
        return vals

    def model_db(vals):
        sp = replace(init, kappa_a=vals["kappa_a"], kappa_b=vals["kappa_b"], xi=vals["xi"] * xi_phase)
        alpha = math.sqrt(vals["power_ratio"]) * np.exp(1j * vals["phase_offset"])
        gs, gi = fringe_powers(sp, delta, alpha, 1.0, phases)
        lookup = {"signal": gs, "idler": gi}
        return [power_db(lookup[c]) for c in channels]

    def admissible(u):
        v = unpack(u)
        return v["xi"] < 2.0 * math.sqrt(v["kappa_a"] * v["kappa_b"])

    def scan_theta(vals):
        # the cost is multimodal in the phase offset
        best = None
        for theta in np.linspace(-math.pi, math.pi, 48, endpoint=False):
            m = model_db(dict(vals, phase_offset=theta))
            c = sum(float(np.sum((sw * (mm - o)) ** 2)) for mm, o in zip(m, observed))
            if best is None or c < best[0]:
                best = (c, theta)
        return best[1]

    # multi-start over (|xi|, P_i/P_s): the cost has separate basins
    xi_cap = 0.999 * init.threshold
    starts = []
    for fx in (1.0, 0.85, 1.15) if "xi" in free else (1.0,):
        for fr in (1.0, 0.5, 2.0) if "power_ratio" in free else (1.0,):
            starts.append(dict(base, xi=min(base["xi"] * fx, xi_cap), power_ratio=base["power_ratio"] * fr))
    lsq = None
    for start in starts:
        theta0 = phase_offset_guess if phase_offset_guess is not None else scan_theta(start)
        start = dict(start, phase_offset=theta0)
        u0 = np.array([p.to_internal(start[p.name]) for p in params])

        def resid(u, theta0=theta0):
            vals = unpack(u, theta0)
            return np.concatenate([sw * (m - o) for m, o in zip(model_db(vals), observed)])

        trial = levenberg_marquardt(
            resid, u0, admissible=admissible, max_iter=max_iter, raise_on_failure=False
        )
        if lsq is None or (trial.converged, -trial.cost) > (lsq.converged, -lsq.cost):
            lsq = trial
    if not lsq.converged:
        raise ConvergenceError(f"fringe fit did not converge ({lsq.message})")
    result = _finish(params, lsq)
    if "phase_offset" in result.parameters:
        wrapped = dict(result.parameters)
        wrapped["phase_offset"] = float(np.angle(np.exp(1j * wrapped["phase_offset"])))
        result = replace(result, parameters=wrapped)
    return result


def fringe_extinction_db(result, init, *, delta=0.0, channel="signal"):
    """Deepest point of the fitted fringe, in dB relative to the signal input.

    Over a full turn of signal phase ``|A exp(i phi) + B|^2`` bottoms out at
    ``(|A| - |B|)^2``, so no phase sampling is needed.
    """
    vals = {"kappa_a": init.kappa_a, "kappa_b": init.kappa_b, "xi": abs(init.xi)}
    vals.update(result.parameters)
    xi_phase = np.exp(1j * np.angle(init.xi)) if init.xi != 0 else 1.0
    sp = replace(init, kappa_a=vals["kappa_a"], kappa_b=vals["kappa_b"], xi=vals["xi"] * xi_phase)
    amp = math.sqrt(vals["power_ratio"])
    if channel == "signal":
        g = amplitude_gains(sp, delta)
        low = (abs(g.g_ss) - abs(g.g_is) * amp) ** 2
    elif channel == "idler":
        g = amplitude_gains(sp, -delta)
        low = (abs(g.g_ii) * amp - abs(g.g_si)) ** 2
    else:
        raise ValueError(f"channel must be 'signal' or 'idler', got {channel!r}")
    return float(power_db(low))


def fit_noise(data, init=None, *, space="db", max_iter=100):
    """Fit the added-noise ratio ``n_ratio`` of the noise-figure model.

    Raises
    ------
    DataError
        If the gains span less than a decade or include values below one.
    """
    if data.kind != "noise":
        raise DataError(f"expected a noise dataset, got {data.kind}")
    if space not in ("db", "linear"):
        raise ValueError("space must be 'db' or 'linear'")
    g = data.coordinates["G_linear"]
    nf = data.values["NF_linear"]
    if np.any(g < 1):
        raise DataError("gains must be >= 1")
    if g.max() < 10.0 * g.min():
        raise DataError("gains must span at least a decade")
    if np.any(nf <= 0):
        raise DataError("noise figures must be positive")
    sw = np.sqrt(data.weight_vector)
    if init is None:
        k = int(np.argmax(g))
        init = max((nf[k] * g[k] - 1.0) / (g[k] - 1.0), 1e-3)
    params = [_Param("n_ratio", "log")]
    target = power_db(nf) if space == "db" else nf

    def resid(u):
        model = noise_figure(g, math.exp(u[0]))
        return sw * ((power_db(model) if space == "db" else model) - target)

    lsq = levenberg_marquardt(resid, np.array([math.log(init)]), max_iter=max_iter)
    return _finish(params, lsq)


def snr_improvement_db(n_ratio):
    """High-gain limit of ``-10 log10(NF)``."""
    return -10.0 * math.log10(n_ratio)
