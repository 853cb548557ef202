"""Named scenarios: compute result tables from a validated config and export them."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import __version__
from .core import TWO_PI, map_axes_to_frame
from .errors import DataError, NumericError
from .estimation import fit_fringe, fit_gain_map, fit_noise, fit_tuning_curve, fringe_extinction_db, snr_improvement_db
from .io import RunManifest, Table, export_artifacts, format_number, format_params, load_dataset, sha256_file
from .resonance import characteristic_residual, mode_profile, solve_mode_frequencies, tuning_curve
from .scattering import (
    align_quadratures,
    amplitude_gains,
    extinction_ratio,
    gain_map,
    interference_fringe,
    noise_figure,
    power_db,
    quadrature_sweep,
)


def _geometry_params(g):
    return {
        "total_length_m": g.total_length,
        "inductance_per_length_H_per_m": g.inductance_per_length,
        "z_a_ohm": g.z_a,
        "z_b_ohm": g.z_b,
    }


def _modes_params(m):
    p = m.params
    return {
        "f_a_Hz": m.omega_a / TWO_PI,
        "f_b_Hz": m.omega_b / TWO_PI,
        "kappa_a_Hz": p.kappa_a / TWO_PI,
        "kappa_b_Hz": p.kappa_b / TWO_PI,
        "xi_Hz": abs(p.xi) / TWO_PI,
        "xi_phase_rad": float(np.angle(p.xi)),
    }


def _header(cfg, units, params, **extra):
    head = {"scenario": cfg.scenario, "units": units}
    head.update(extra)
    head["params"] = format_params(params)
    head["seed"] = cfg.seed
    return head


def _resonances(cfg):
    g, sw = cfg.geometry, cfg.sweep
    pair = solve_mode_frequencies(g, tuple(sw["band_Hz"]) if "band_Hz" in sw else None)
    freqs = {"a": pair.f_a, "b": pair.f_b}
    params = _geometry_params(g)
    summary = Table(
        "resonances.csv",
        ("mode", "f_Hz", "residual"),
        (("a", "b"), (pair.f_a, pair.f_b), tuple(characteristic_residual(freqs[m], g, m) for m in "ab")),
        _header(cfg, "f_Hz in Hz; residual of the characteristic equation (dimensionless)", params),
    )
    cols = {k: [] for k in ("mode", "position_m", "section", "voltage", "current")}
    for m in "ab":
        prof = mode_profile(g, pair, m, samples_per_section=sw["samples_per_section"])
        cols["mode"] += [m] * prof.positions.size
        cols["position_m"] += list(prof.positions)
        cols["section"] += [str(int(s)) for s in prof.section]
        cols["voltage"] += list(prof.voltage)
        cols["current"] += list(prof.current)
    profiles = Table(
        "profiles.csv",
        tuple(cols),
        tuple(cols.values()),
        _header(cfg, "position in m along the ring; voltage normalized to max |V| = 1; current in matching units", params),
    )
    return [summary, profiles]


def _tuning(cfg, rng):
    sw, t = cfg.sweep, cfg.tuning
    if "currents_A" in sw:
        currents = np.asarray(sw["currents_A"], dtype=float)
    else:
        currents = np.linspace(sw["current_start_A"], sw["current_stop_A"], sw["points"])
    pairs = tuning_curve(t, currents)
    fa = np.array([p.f_a for p in pairs])
    fb = np.array([p.f_b for p in pairs])
    if sw["noise_rel"] > 0:
        fa = fa * (1.0 + rng.normal(0.0, sw["noise_rel"], fa.size))
        fb = fb * (1.0 + rng.normal(0.0, sw["noise_rel"], fb.size))
    params = {
        "f0_a_Hz": t.f0_a,
        "f0_b_Hz": t.f0_b,
        "i_star_a_A": t.i_star_a,
        "i_star_b_A": t.i_star_b,
        "alpha_a": t.alpha_a,
        "alpha_b": t.alpha_b,
        "noise_rel": sw["noise_rel"],
    }
    return [Table("tuning.csv", ("I_A", "f_a_Hz", "f_b_Hz"), (currents, fa, fb), _header(cfg, "A, Hz", params))]


def _gain_map(cfg, rng):
    sw, m = cfg.sweep, cfg.modes
    x = np.linspace(-sw["x_span_Hz"], sw["x_span_Hz"], sw["points_x"])
    y = np.linspace(-sw["y_span_Hz"], sw["y_span_Hz"], sw["points_y"])
    gm = gain_map(m, TWO_PI * x, TWO_PI * y)
    X, Y = np.meshgrid(x, y)
    params = {**_modes_params(m), "noise_dB": sw["noise_dB"]}
    tables = []
    for name, col, grid in (("gain_map_signal.csv", "Gs_dB", gm.gs_db), ("gain_map_idler.csv", "Gi_dB", gm.gi_db)):
        values = grid.ravel()
        if sw["noise_dB"] > 0:
            values = values + rng.normal(0.0, sw["noise_dB"], values.size)
        head = {
            "scenario": cfg.scenario,
            "units": "x and y in Hz; gain in dB",
            "axis_x": "omega_s_minus_omega_b_Hz",
            "axis_y": "omega_i_minus_omega_a_Hz",
            "params": format_params(params),
            "seed": cfg.seed,
        }
        tables.append(Table(name, ("x", "y", col), (X.ravel(), Y.ravel(), values), head))
    return tables


def _frame(cfg, block):
    return map_axes_to_frame(cfg.modes, TWO_PI * block["signal_offset_Hz"], TWO_PI * block["idler_offset_Hz"])


def _phases(n):
    return np.linspace(-math.pi, math.pi, n, endpoint=False)


def _quadratures(cfg, rng):
    sw = cfg.sweep
    delta, sp = _frame(cfg, sw)
    phases = _phases(sw["points"])
    alpha = math.sqrt(sw["power_ratio"]) * sw["beta_mag"] * np.exp(1j * sw["idler_phase_rad"])
    sweep = quadrature_sweep(sp, delta, phases, sw["beta_mag"], alpha)
    if sw["align"]:
        sweep = align_quadratures(sweep)
    cols = [sweep.i_s, sweep.q_s, sweep.i_i, sweep.q_i]
    if sw["noise"] > 0:
        cols = [c + rng.normal(0.0, sw["noise"], c.size) for c in cols]
    c_i = float(np.corrcoef(cols[0], cols[2])[0, 1])
    c_q = float(np.corrcoef(cols[1], cols[3])[0, 1])
    params = {**_modes_params(cfg.modes), **{k: sw[k] for k in ("beta_mag", "power_ratio", "signal_offset_Hz", "idler_offset_Hz", "noise")}}
    head = _header(
        cfg,
        "phase in rad; quadratures in input amplitude units" + ("; aligned so phi_s = -pi maps to (-1, 0)" if sw["align"] else ""),
        params,
        correlations=f"corr_I={format_number(c_i)}; corr_Q={format_number(c_q)}",
    )
    return [Table("quadratures.csv", ("phi_s_rad", "Is", "Qs", "Ii", "Qi"), (phases, *cols), head)]


def _fringe(cfg, rng):
    sw = cfg.sweep
    delta, sp = _frame(cfg, sw)
    phases = _phases(sw["points"])
    if "null_target" in sw:
        ratio = abs(extinction_ratio(sp, delta, sw["null_target"]))
        # mismatch = |idler term| / |signal term| in the nulled output
        power_ratio = (sw["amplitude_mismatch"] / ratio) ** 2
    else:
        power_ratio = sw["power_ratio"]
    alpha = math.sqrt(power_ratio) * np.exp(1j * sw["idler_phase_rad"])
    fr = interference_fringe(sp, delta, alpha, 1.0, phases)
    gs, gi = fr.g_s_db, fr.g_i_db
    if sw["noise_dB"] > 0:
        gs = gs + rng.normal(0.0, sw["noise_dB"], gs.size)
        gi = gi + rng.normal(0.0, sw["noise_dB"], gi.size)
    sig = amplitude_gains(sp, delta)
    idl = amplitude_gains(sp, -delta)
    params = {
        **_modes_params(cfg.modes),
        "power_ratio": power_ratio,
        "idler_phase_rad": sw["idler_phase_rad"],
        "signal_offset_Hz": sw["signal_offset_Hz"],
        "idler_offset_Hz": sw["idler_offset_Hz"],
        "noise_dB": sw["noise_dB"],
    }
    head = _header(
        cfg,
        "phase in rad; gains in dB relative to the input signal power",
        params,
        single_input=format_params(
            {"Gs_dB": float(power_db(abs(sig.g_ss) ** 2)), "Gi_dB": float(power_db(abs(idl.g_si) ** 2))}
        ),
    )
    return [Table("fringe.csv", ("phase_rad", "Gs_dB", "Gi_dB"), (phases, gs, gi), head)]


def _noise(cfg, rng):
    sw = cfg.sweep
    gain = 10.0 ** (np.linspace(sw["gain_start_dB"], sw["gain_stop_dB"], sw["points"]) / 10.0)
    nf = noise_figure(gain, sw["n_ratio"])
    if sw["noise_rel"] > 0:
        nf = nf * (1.0 + rng.normal(0.0, sw["noise_rel"], nf.size))
    head = _header(
        cfg,
        "linear power ratios",
        {k: sw[k] for k in ("n_ratio", "noise_rel")},
        asymptote_dB=format_number(10.0 * math.log10(sw["n_ratio"])),
    )
    return [Table("noise.csv", ("G_linear", "NF_linear"), (gain, nf), head)]


_UNIT_SUFFIX = {"Hz": "_Hz", "A": "_A", "rad/s": "_Hz", "rad": "_rad", "": ""}


def _fit_table(cfg, result, dataset_path, derived):
    names, values, errors = [], [], []
    for name, value in result.parameters.items():
        unit = result.units.get(name, "")
        scale = TWO_PI if unit == "rad/s" else 1.0
        names.append(name + _UNIT_SUFFIX.get(unit, ""))
        values.append(value / scale)
        errors.append(result.standard_errors[name] / scale)
    head = {
        "scenario": cfg.scenario,
        "kind": cfg.fit["kind"],
        "dataset": dataset_path.name,
        "units": "rates in Hz (rad/s divided by 2 pi); currents in A; phases in rad",
        "residual_norm": format_number(result.residual_norm),
        "iterations": result.iterations,
        "condition_number": format_number(result.condition_number),
    }
    if derived:
        head["derived"] = format_params(derived)
    head["seed"] = cfg.seed
    return Table("fit_parameters.csv", ("name", "value", "standard_error"), (names, values, errors), head)


def _fit(cfg):
    f = cfg.fit
    path = Path(f["dataset"])
    if not path.is_absolute():
        path = cfg.base_dir / path
    try:
        data = load_dataset(path, f["kind"])
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc
    kind, derived = f["kind"], {}
    if kind in ("gain_map", "gain_slice"):
        result = fit_gain_map(
            data, cfg.modes, channel=f.get("channel") if f.get("channel") != "both" else None,
            fit_modes=f["fit_modes"], space=f["space"], max_iter=f["max_iter"],
        )
    elif kind == "tuning":
        result = fit_tuning_curve(data, cfg.tuning, fit_alpha=f["fit_alpha"], max_iter=f["max_iter"])
    elif kind == "fringe":
        delta, sp = _frame(cfg, f)
        kwargs = {"free": tuple(f["free"])} if "free" in f else {}
        result = fit_fringe(
            data, sp, f["power_ratio_guess"], delta=delta, channel=f.get("channel"),
            phase_offset_guess=f.get("phase_offset_guess"), max_iter=f["max_iter"], **kwargs,
        )
        for ch in ("signal", "idler"):
            derived[f"min_G{ch[0]}_dB"] = fringe_extinction_db(result, sp, delta=delta, channel=ch)
    else:
        result = fit_noise(data, f.get("n_ratio_guess"), space=f["space"], max_iter=f["max_iter"])
        derived["snr_improvement_dB"] = snr_improvement_db(result.parameters["n_ratio"])
    inputs = [{"name": str(path), "sha256": sha256_file(path)}]
    return [_fit_table(cfg, result, path, derived)], inputs


def compute_scenario(cfg):
    """Result tables for a validated :class:`ScenarioConfig` without writing anything.

    Returns
    -------
    tables : list of Table
    inputs : list of dict
        Input files read (name and sha256), for the manifest.
    """
    rng = np.random.default_rng(cfg.seed)
    try:
        if cfg.scenario == "resonances":
            return _resonances(cfg), []
        if cfg.scenario == "tuning":
            return _tuning(cfg, rng), []
        if cfg.scenario == "gain-map":
            return _gain_map(cfg, rng), []
        if cfg.scenario == "quadratures":
            return _quadratures(cfg, rng), []
        if cfg.scenario == "fringe":
            return _fringe(cfg, rng), []
        if cfg.scenario == "noise":
            return _noise(cfg, rng), []
        if cfg.scenario == "fit":
            return _fit(cfg)
    except NumericError as exc:
        raise type(exc)(f"scenario {cfg.scenario}: {exc}") from exc
    raise ValueError(f"unknown scenario {cfg.scenario!r}")


def run_scenario(cfg, *, force=False):
    """Compute a scenario, write its CSV files and finish with ``manifest.json``.

    Returns
    -------
    RunManifest
    """
    tables, inputs = compute_scenario(cfg)
    provenance = {
        "scenario": cfg.scenario,
        "config": {**cfg.raw, "seed": cfg.seed, "output_dir": str(cfg.output_dir)},
        "tool_version": __version__,
        "seed": cfg.seed,
        "inputs": inputs,
    }
    paths = export_artifacts(tables, cfg.output_dir, force=force, provenance=provenance)
    return RunManifest.read(paths[-1])
