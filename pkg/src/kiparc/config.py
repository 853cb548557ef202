"""Scenario configuration: one JSON document per run.

Units at this boundary are Hz, A, ohm and dB. Structural checks (types,
ranges, unknown keys) use a JSON schema per scenario; the device blocks are
then turned into domain objects so that their own invariants are enforced
before any computation starts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .core import TWO_PI, DeviceModes, RingGeometry, ScatteringParams, TuningModel
from .errors import ConfigError

SCENARIOS = {
    "resonances": "mode frequencies and standing-wave profiles of the ring",
    "tuning": "mode frequencies versus DC bias current",
    "gain-map": "signal and idler gain maps over signal/idler detuning",
    "quadratures": "output quadratures versus input signal phase",
    "fringe": "two-tone interference fringes and deamplification",
    "noise": "noise figure versus signal gain",
    "fit": "parameter estimation from a CSV dataset",
}

FIT_KINDS = ("gain_map", "gain_slice", "tuning", "fringe", "noise")

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_NUM = {"type": "number"}
_COUNT = {"type": "integer", "minimum": 2, "maximum": 100000}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


GEOMETRY = _obj(
    {
        "total_length_m": _POS,
        "inductance_per_length_H_per_m": _POS,
        "z_a_ohm": _POS,
        "z_b_ohm": _POS,
        "cap_a_F_per_m": _POS,
        "cap_b_F_per_m": _POS,
    },
    ("total_length_m", "inductance_per_length_H_per_m"),
)
MODES = _obj(
    {
        "f_a_Hz": _POS,
        "f_b_Hz": _POS,
        "kappa_a_Hz": _POS,
        "kappa_b_Hz": _POS,
        "xi_Hz": _NONNEG,
        "xi_phase_rad": _NUM,
    },
    ("f_a_Hz", "f_b_Hz", "kappa_a_Hz", "kappa_b_Hz", "xi_Hz"),
)
TUNING = _obj(
    {
        "f0_a_Hz": _POS,
        "f0_b_Hz": _POS,
        "i_star_a_A": _POS,
        "i_star_b_A": _POS,
        "alpha_a": _NUM,
        "alpha_b": _NUM,
    },
    ("f0_a_Hz", "f0_b_Hz", "i_star_a_A", "i_star_b_A"),
)

_OFFSETS = {"signal_offset_Hz": _NUM, "idler_offset_Hz": _NUM}

SWEEPS = {
    "resonances": _obj(
        {
            "samples_per_section": {"type": "integer", "minimum": 3, "maximum": 100000},
            "band_Hz": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        }
    ),
    "tuning": _obj(
        {
            "currents_A": {"type": "array", "items": _NONNEG, "minItems": 1},
            "current_start_A": _NONNEG,
            "current_stop_A": _NONNEG,
            "points": _COUNT,
            "noise_rel": _NONNEG,
        }
    ),
    "gain-map": _obj(
        {
            "x_span_Hz": _POS,
            "y_span_Hz": _POS,
            "points_x": _COUNT,
            "points_y": _COUNT,
            "noise_dB": _NONNEG,
        }
    ),
    "quadratures": _obj(
        {
            "points": _COUNT,
            "beta_mag": _POS,
            "power_ratio": _NONNEG,
            "idler_phase_rad": _NUM,
            "align": {"type": "boolean"},
            "noise": _NONNEG,
            **_OFFSETS,
        }
    ),
    "fringe": _obj(
        {
            "points": _COUNT,
            "power_ratio": _POS,
            "null_target": {"enum": ["signal", "idler"]},
            "amplitude_mismatch": _POS,
            "idler_phase_rad": _NUM,
            "noise_dB": _NONNEG,
            **_OFFSETS,
        }
    ),
    "noise": _obj(
        {
            "n_ratio": _POS,
            "gain_start_dB": _NONNEG,
            "gain_stop_dB": _NONNEG,
            "points": _COUNT,
            "noise_rel": _NONNEG,
        }
    ),
}

FIT = _obj(
    {
        "dataset": {"type": "string", "minLength": 1},
        "kind": {"enum": list(FIT_KINDS)},
        "channel": {"enum": ["signal", "idler", "both"]},
        "space": {"enum": ["db", "linear"]},
        "fit_modes": {"type": "boolean"},
        "fit_alpha": {"type": "boolean"},
        "power_ratio_guess": _POS,
        "phase_offset_guess": _NUM,
        "free": {
            "type": "array",
            "items": {"enum": ["kappa_a", "kappa_b", "xi", "power_ratio", "phase_offset"]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "n_ratio_guess": _POS,
        "max_iter": {"type": "integer", "minimum": 1, "maximum": 100000},
        **_OFFSETS,
    },
    ("dataset", "kind"),
)

# device blocks each scenario needs
DEVICE_BLOCKS = {
    "resonances": ("geometry",),
    "tuning": ("tuning",),
    "gain-map": ("modes",),
    "quadratures": ("modes",),
    "fringe": ("modes",),
    "noise": (),
}
FIT_DEVICE_BLOCKS = {
    "gain_map": ("modes",),
    "gain_slice": ("modes",),
    "tuning": ("tuning",),
    "fringe": ("modes",),
    "noise": (),
}
_BLOCK_SCHEMAS = {"geometry": GEOMETRY, "modes": MODES, "tuning": TUNING}

SWEEP_DEFAULTS = {
    "resonances": {"samples_per_section": 101},
    "tuning": {"current_start_A": 0.0, "current_stop_A": 370e-6, "points": 38, "noise_rel": 0.0},
    "gain-map": {"x_span_Hz": 15e6, "y_span_Hz": 15e6, "points_x": 201, "points_y": 201, "noise_dB": 0.0},
    "quadratures": {
        "points": 360,
        "beta_mag": 1.0,
        "power_ratio": 0.0,
        "idler_phase_rad": 0.0,
        "align": True,
        "noise": 0.0,
        "signal_offset_Hz": 0.0,
        "idler_offset_Hz": 0.0,
    },
    "fringe": {
        "points": 360,
        "amplitude_mismatch": 1.0,
        "idler_phase_rad": 0.0,
        "noise_dB": 0.0,
        "signal_offset_Hz": 0.0,
        "idler_offset_Hz": 0.0,
    },
    "noise": {"n_ratio": 0.167, "gain_start_dB": 0.0, "gain_stop_dB": 40.0, "points": 81, "noise_rel": 0.0},
}
FIT_DEFAULTS = {"space": "db", "fit_modes": False, "fit_alpha": False, "max_iter": 200, "signal_offset_Hz": 0.0, "idler_offset_Hz": 0.0}


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated run description.

    ``raw`` is the document as loaded (echoed into the manifest); the other
    fields are the parsed domain objects and sweep settings with defaults
    filled in.
    """

    scenario: str
    seed: int
    output_dir: Path
    geometry: RingGeometry | None = None
    modes: DeviceModes | None = None
    tuning: TuningModel | None = None
    sweep: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    base_dir: Path = Path(".")


def _key_path(parts):
    return ".".join(str(p) for p in parts) or "<root>"


def _validate(doc, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    err = errors[0]
    parts = list(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        raise ConfigError("unknown key", _key_path(parts + extra[:1]))
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        raise ConfigError("required key is missing", _key_path(parts + missing[:1]))
    raise ConfigError(err.message, _key_path(parts))


def _top_schema(scenario, fit_kind=None):
    blocks = DEVICE_BLOCKS.get(scenario) if scenario != "fit" else FIT_DEVICE_BLOCKS.get(fit_kind, ())
    props = {
        "scenario": {"enum": [scenario]},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string", "minLength": 1},
    }
    required = []
    if blocks:
        props["device"] = _obj({b: _BLOCK_SCHEMAS[b] for b in blocks}, blocks)
        required.append("device")
    if scenario == "fit":
        props["fit"] = FIT
        required.append("fit")
    else:
        props["sweep"] = SWEEPS[scenario]
    return _obj(props, required)


def _build_geometry(block):
    caps = [k in block for k in ("cap_a_F_per_m", "cap_b_F_per_m")]
    imps = [k in block for k in ("z_a_ohm", "z_b_ohm")]
    base = "device.geometry"
    if any(caps) and any(imps):
        raise ConfigError("give either impedances or capacitances, not both", base)
    if not (all(caps) or all(imps)):
        raise ConfigError("needs z_a_ohm and z_b_ohm (or cap_a_F_per_m and cap_b_F_per_m)", base)
    length, ind = block["total_length_m"], block["inductance_per_length_H_per_m"]
    try:
        if all(imps):
            return RingGeometry.from_impedances(length, ind, block["z_a_ohm"], block["z_b_ohm"])
        return RingGeometry(length, ind, block["cap_a_F_per_m"], block["cap_b_F_per_m"])
    except ValueError as exc:
        raise ConfigError(str(exc), base) from exc


def _build_modes(block):
    base = "device.modes"
    if not block["f_b_Hz"] > block["f_a_Hz"]:
        raise ConfigError("f_b_Hz must exceed f_a_Hz", f"{base}.f_b_Hz")
    phase = block.get("xi_phase_rad", 0.0)
    xi = TWO_PI * block["xi_Hz"] * complex(math.cos(phase), math.sin(phase))
    try:
        params = ScatteringParams(TWO_PI * block["kappa_a_Hz"], TWO_PI * block["kappa_b_Hz"], xi)
    except ValueError as exc:
        raise ConfigError(str(exc), base) from exc
    if abs(params.xi) >= params.threshold:
        limit = params.threshold / TWO_PI
        raise ConfigError(f"at or above the oscillation threshold {limit:.6g} Hz", f"{base}.xi_Hz")
    return DeviceModes(TWO_PI * block["f_a_Hz"], TWO_PI * block["f_b_Hz"], params)


def _build_tuning(block):
    try:
        return TuningModel(
            block["f0_a_Hz"],
            block["f0_b_Hz"],
            block["i_star_a_A"],
            block["i_star_b_A"],
            block.get("alpha_a", 0.0),
            block.get("alpha_b", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "device.tuning") from exc


def _check_sweep(scenario, sweep):
    if scenario == "tuning":
        if "currents_A" in sweep and any(k in sweep for k in ("current_start_A", "current_stop_A", "points")):
            raise ConfigError("give either currents_A or a start/stop/points range", "sweep.currents_A")
        if "currents_A" in sweep:
            cur = sweep["currents_A"]
            if any(b <= a for a, b in zip(cur, cur[1:])):
                raise ConfigError("currents must be strictly ascending", "sweep.currents_A")
        elif sweep.get("current_stop_A", 370e-6) <= sweep.get("current_start_A", 0.0):
            raise ConfigError("must exceed current_start_A", "sweep.current_stop_A")
    elif scenario == "resonances" and "band_Hz" in sweep:
        lo, hi = sweep["band_Hz"]
        if hi <= lo:
            raise ConfigError("upper band edge must exceed the lower", "sweep.band_Hz")
    elif scenario == "fringe":
        if ("power_ratio" in sweep) == ("null_target" in sweep):
            raise ConfigError("give exactly one of power_ratio or null_target", "sweep")
        if "amplitude_mismatch" in sweep and "null_target" not in sweep:
            raise ConfigError("only meaningful with null_target", "sweep.amplitude_mismatch")
    elif scenario == "noise":
        if sweep.get("gain_stop_dB", 40.0) <= sweep.get("gain_start_dB", 0.0):
            raise ConfigError("must exceed gain_start_dB", "sweep.gain_stop_dB")
    elif scenario == "quadratures" and sweep.get("align", True) and sweep.get("power_ratio", 0.0) > 0:
        raise ConfigError("alignment assumes no idler input; set align to false", "sweep.power_ratio")


def parse_config(doc, scenario, *, base_dir=".", seed=None, output_dir=None):
    """Validate a config document for ``scenario`` and build the domain objects.

    ``seed`` and ``output_dir`` override the document's values (command-line
    flags). Raises :class:`ConfigError` naming the offending key path.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "scenario" in doc and doc["scenario"] != scenario:
        raise ConfigError(f"config is for {doc['scenario']!r}, not {scenario!r}", "scenario")
    fit_kind = None
    if scenario == "fit" and isinstance(doc.get("fit"), dict):
        fit_kind = doc["fit"].get("kind")
    _validate(doc, _top_schema(scenario, fit_kind))

    device = doc.get("device", {})
    geometry = _build_geometry(device["geometry"]) if "geometry" in device else None
    modes = _build_modes(device["modes"]) if "modes" in device else None
    tuning = _build_tuning(device["tuning"]) if "tuning" in device else None

    sweep, fit = {}, {}
    if scenario == "fit":
        fit = {**FIT_DEFAULTS, **doc["fit"]}
        if fit_kind != "fringe" and any(k in doc["fit"] for k in ("power_ratio_guess", "phase_offset_guess", "free")):
            raise ConfigError("only valid for fringe datasets", "fit")
        if fit_kind == "fringe" and "power_ratio_guess" not in fit:
            raise ConfigError("required key is missing", "fit.power_ratio_guess")
    else:
        _check_sweep(scenario, doc.get("sweep", {}))
        sweep = {**SWEEP_DEFAULTS[scenario], **doc.get("sweep", {})}

    if seed is None:
        seed = doc.get("seed", 0)
    if not (isinstance(seed, int) and seed >= 0):
        raise ConfigError("must be a nonnegative integer", "seed")
    out = output_dir if output_dir is not None else doc.get("output_dir", f"kiparc-{scenario}")
    return ScenarioConfig(
        scenario=scenario,
        seed=seed,
        output_dir=Path(out),
        geometry=geometry,
        modes=modes,
        tuning=tuning,
        sweep=sweep,
        fit=fit,
        raw=doc,
        base_dir=Path(base_dir),
    )


def load_config(path, scenario, *, seed=None, output_dir=None):
    """Read and validate a JSON config file (see :func:`parse_config`)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(doc, scenario, base_dir=path.parent, seed=seed, output_dir=output_dir)
