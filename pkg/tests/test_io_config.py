import json
import locale

import numpy as np
import pytest

from kiparc.config import SCENARIOS, load_config, parse_config
from kiparc.errors import ConfigError, DataError, OutputError
from kiparc.io import MANIFEST_NAME, RunManifest, Table, export_artifacts, format_number, load_dataset, sha256_file

MODES = {"f_a_Hz": 5.5e9, "f_b_Hz": 6.3e9, "kappa_a_Hz": 4.597e6, "kappa_b_Hz": 3.21e6, "xi_Hz": 7.408e6}
GEOMETRY = {"total_length_m": 2.2e-3, "inductance_per_length_H_per_m": 1e-4, "z_a_ohm": 940, "z_b_ohm": 1320}


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------- load_dataset

def test_three_line_tuning_csv(tmp_path):
    p = write(tmp_path / "t.csv", "I_A,f_a_Hz,f_b_Hz\n0,5.5e9,6.3e9\n1e-4,5.49e9,6.29e9\n")
    data = load_dataset(p, "tuning")
    assert len(data) == 2
    assert data.values["f_b_Hz"][1] == 6.29e9


def test_metadata_and_weights(tmp_path):
    p = write(tmp_path / "n.csv", "# units: linear\n# seed: 3\nG_linear,NF_linear,weight\n1,1,2\n10,0.3,1\n")
    data = load_dataset(p, "noise")
    assert data.meta == {"units": "linear", "seed": "3"}
    assert list(data.weights) == [2.0, 1.0]


def test_negative_weight_names_line(tmp_path):
    p = write(tmp_path / "n.csv", "G_linear,NF_linear,weight\n1,1,1\n10,0.3,-1\n")
    with pytest.raises(DataError, match="line 3"):
        load_dataset(p, "noise")


@pytest.mark.parametrize(
    "text, match",
    [
        ("I_A,f_a_Hz\n0,1\n1,2,3\n", "line 3"),
        ("# c\nI_A,f_a_Hz\n0,abc\n", "line 3"),
        ("f_a_Hz\n1\n", "missing columns for tuning: I_A"),
        ("I_A,f_a_Hz,temp\n0,1,2\n", "unexpected columns"),
        ("I_A\n0\n", "needs one of"),
        ("I_A,I_A\n0,0\n", "duplicate"),
        ("# only comments\n", "no column header"),
        ("I_A,f_a_Hz\n", "no data rows"),
    ],
)
def test_parse_errors(tmp_path, text, match):
    p = write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError, match=match):
        load_dataset(p, "tuning")


def test_unknown_kind(tmp_path):
    with pytest.raises(DataError):
        load_dataset(tmp_path / "x.csv", "spectrum")


# ---------------------------------------------------------------- tables

def test_number_format_is_fixed_and_locale_free():
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(-0.0) == "0"
    assert format_number(float("nan")) == "nan"
    assert format_number(6.3e9) == "6300000000"
    assert format_number("a") == "a"
    try:
        locale.setlocale(locale.LC_NUMERIC, "de_DE.UTF-8")
    except locale.Error:
        pytest.skip("de_DE locale not installed")
    try:
        assert format_number(0.5) == "0.5"
    finally:
        locale.setlocale(locale.LC_NUMERIC, "C")


def test_table_render():
    t = Table("t.csv", ("a", "b"), ([1, 2], [0.5, 1e-20]), {"units": "none"})
    assert t.render() == "# units: none\na,b\n1,0.5\n2,1e-20\n"
    with pytest.raises(ValueError):
        Table("t.csv", ("a",), ([1], [2]))
    with pytest.raises(ValueError):
        Table("t.csv", ("a", "b"), ([1], [2, 3]))


def _tables():
    return [Table("a.csv", ("x",), ([1.0, 2.0],)), Table("b.csv", ("y",), ([3.0],))]


def test_export_writes_manifest_with_digests(tmp_path):
    paths = export_artifacts(_tables(), tmp_path / "out", provenance={"scenario": "noise", "seed": 4})
    assert [p.name for p in paths] == ["a.csv", "b.csv", MANIFEST_NAME]
    man = RunManifest.read(paths[-1])
    assert man.seed == 4 and man.scenario == "noise"
    for entry, path in zip(man.files, paths):
        assert entry["sha256"] == sha256_file(path)
        assert entry["bytes"] == path.stat().st_size
    assert paths[-1].stat().st_mtime_ns >= max(p.stat().st_mtime_ns for p in paths[:-1])


def test_export_refuses_overwrite(tmp_path):
    export_artifacts(_tables(), tmp_path)
    with pytest.raises(OutputError, match="--force"):
        export_artifacts(_tables(), tmp_path)
    export_artifacts(_tables(), tmp_path, force=True)


def test_export_cleans_up_on_failure(tmp_path):
    (tmp_path / "b.csv").mkdir()  # a directory blocks the second file
    with pytest.raises(OutputError):
        export_artifacts(_tables(), tmp_path, force=True)
    assert not (tmp_path / "a.csv").exists()
    assert not (tmp_path / MANIFEST_NAME).exists()


def test_export_input_checks(tmp_path):
    with pytest.raises(ValueError):
        export_artifacts([], tmp_path)
    with pytest.raises(ValueError):
        export_artifacts([Table("a.csv", ("x",), ([1],))] * 2, tmp_path)


# ---------------------------------------------------------------- config

def test_every_scenario_has_a_description():
    assert set(SCENARIOS) == {"resonances", "tuning", "gain-map", "fringe", "quadratures", "noise", "fit"}


def test_parse_fills_defaults():
    cfg = parse_config({"device": {"modes": MODES}}, "gain-map")
    assert cfg.sweep["points_x"] == 201 and cfg.seed == 0
    assert cfg.modes.params.kappa_a == pytest.approx(2 * np.pi * 4.597e6)
    assert str(cfg.output_dir) == "kiparc-gain-map"


@pytest.mark.parametrize(
    "doc, scenario, path",
    [
        ({"device": {"modes": {**MODES, "kapa_a_Hz": 1}}}, "gain-map", "device.modes.kapa_a_Hz"),
        ({"device": {"modes": MODES}, "swep": {}}, "gain-map", "swep"),
        ({"device": {"modes": MODES, "geometry": GEOMETRY}}, "gain-map", "device.geometry"),
        ({"device": {"modes": {k: v for k, v in MODES.items() if k != "xi_Hz"}}}, "gain-map", "device.modes.xi_Hz"),
        ({}, "gain-map", "device"),
        ({"device": {"modes": {**MODES, "kappa_a_Hz": -1}}}, "gain-map", "device.modes.kappa_a_Hz"),
        ({"device": {"modes": {**MODES, "xi_Hz": 9e6}}}, "gain-map", "device.modes.xi_Hz"),
        ({"device": {"modes": {**MODES, "f_b_Hz": 5e9}}}, "gain-map", "device.modes.f_b_Hz"),
        ({"device": {"modes": MODES}, "sweep": {"points_x": 1}}, "gain-map", "sweep.points_x"),
        ({"device": {"modes": MODES}, "seed": -1}, "gain-map", "seed"),
        ({"device": {"modes": MODES}, "scenario": "noise"}, "gain-map", "scenario"),
        ({"device": {"geometry": {**GEOMETRY, "cap_a_F_per_m": 1e-10}}}, "resonances", "device.geometry"),
        ({"device": {"geometry": {"total_length_m": 1, "inductance_per_length_H_per_m": 1, "z_a_ohm": 1}}}, "resonances", "device.geometry"),
        ({"device": {"modes": MODES}, "sweep": {"power_ratio": 1, "null_target": "signal"}}, "fringe", "sweep"),
        ({"device": {"modes": MODES}, "sweep": {"power_ratio": 1, "amplitude_mismatch": 0.9}}, "fringe", "sweep.amplitude_mismatch"),
        ({"sweep": {"gain_start_dB": 10, "gain_stop_dB": 5}}, "noise", "sweep.gain_stop_dB"),
        ({"sweep": {"n_ratio": 0.1}, "fit": {}}, "noise", "fit"),
        ({"fit": {"dataset": "x.csv", "kind": "fringe"}, "device": {"modes": MODES}}, "fit", "fit.power_ratio_guess"),
        ({"fit": {"dataset": "x.csv", "kind": "noise", "free": ["xi"]}}, "fit", "fit"),
        ({"fit": {"dataset": "x.csv", "kind": "tuning"}}, "fit", "device"),
        ({"device": {"tuning": {"f0_a_Hz": 1, "f0_b_Hz": 2, "i_star_a_A": 1, "i_star_b_A": 1}}, "sweep": {"currents_A": [0, 2, 1]}}, "tuning", "sweep.currents_A"),
        ({"device": {"modes": MODES}, "sweep": {"power_ratio": 1.0}}, "quadratures", "sweep.power_ratio"),
    ],
)
def test_config_errors_name_the_key(doc, scenario, path):
    with pytest.raises(ConfigError) as info:
        parse_config(doc, scenario)
    assert info.value.path == path


def test_unknown_scenario_and_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        parse_config({}, "spectrum")
    with pytest.raises(ConfigError):
        parse_config([], "noise")
    p = write(tmp_path / "c.json", "{ not json")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(p, "noise")


def test_overrides_and_base_dir(tmp_path):
    p = write(tmp_path / "c.json", json.dumps({"seed": 3, "output_dir": "o"}))
    cfg = load_config(p, "noise", seed=9, output_dir="elsewhere")
    assert cfg.seed == 9 and str(cfg.output_dir) == "elsewhere"
    assert cfg.base_dir == tmp_path
    assert load_config(p, "noise").seed == 3
