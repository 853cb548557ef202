import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kiparc.core import TWO_PI, DriveState, ScatteringParams
from kiparc.errors import DegenerateError, PoleError, ZeroPumpError
from kiparc.scattering import (
    DB_FLOOR,
    align_quadratures,
    amplitude_gains,
    bogoliubov_matrix,
    extinction_ratio,
    fringe_powers,
    gain_map,
    gain_map_cells,
    interference_fringe,
    measured_gains_db,
    noise_figure,
    output_fields,
    power_db,
    power_gains_db,
    quadrature_sweep,
    quadratures,
)

from conftest import FRINGE_IDLER, FRINGE_SIGNAL, MAP_PARAMS, MHZ, modes_for, random_params

# frozen from a direct complex evaluation of the response at zero detuning
GS_DB = 23.066076
GI_DB = 22.749701


def test_on_resonance_gain_oracle():
    gs = amplitude_gains(MAP_PARAMS, 0.0)
    c = abs(MAP_PARAMS.xi) ** 2 / (4 * MAP_PARAMS.kappa_a * MAP_PARAMS.kappa_b)
    assert abs(gs.g_ss) ** 2 == pytest.approx(1 / (1 - c) ** 2, rel=1e-13)
    assert abs(gs.g_is) ** 2 == pytest.approx(c / (1 - c) ** 2, rel=1e-13)
    g_s, g_i = measured_gains_db(MAP_PARAMS, 0.0)
    assert g_s == pytest.approx(GS_DB, abs=1e-6)
    assert g_i == pytest.approx(GI_DB, abs=1e-6)
    assert power_gains_db(gs) == pytest.approx((g_s, g_i), abs=1e-12)


def test_gains_invariant_under_rate_scaling(rng):
    sp = random_params(rng)
    d = 0.3 * MHZ
    a, b = amplitude_gains(sp, d), amplitude_gains(sp.scaled(7.0), 7.0 * d)
    assert a.g_ss == pytest.approx(b.g_ss, rel=1e-12)
    assert a.g_is == pytest.approx(b.g_is, rel=1e-12)


def test_matrix_entries_match_closed_form(rng):
    for _ in range(50):
        sp = random_params(rng)
        d = rng.uniform(-4, 4) * MHZ
        m = bogoliubov_matrix(sp, d).entries
        p, q = amplitude_gains(sp, d), amplitude_gains(sp, -d)
        # signal block, order (c2, c4, c1+, c3+)
        assert m[5, 4] == pytest.approx(p.g_ss, abs=1e-12)
        assert m[4, 4] == pytest.approx(1 + p.g_ss, abs=1e-12)
        assert m[5, 6] == pytest.approx(p.g_is, abs=1e-12)
        assert m[6, 4] == pytest.approx(np.conj(q.g_si), abs=1e-12)
        assert m[6, 7] == pytest.approx(np.conj(q.g_ii), abs=1e-12)
        # idler block, order (c1, c3, c2+, c4+)
        assert m[1, 0] == pytest.approx(p.g_ii, abs=1e-12)
        assert m[1, 2] == pytest.approx(p.g_si, abs=1e-12)
        assert m[2, 3] == pytest.approx(np.conj(q.g_ss), abs=1e-12)
        assert m[2, 0] == pytest.approx(np.conj(q.g_is), abs=1e-12)


def test_scalar_symplectic_identities(rng):
    worst = 0.0
    for _ in range(1000):
        sp = random_params(rng)
        g = amplitude_gains(sp, rng.uniform(-5, 5) * MHZ)
        worst = max(
            worst,
            abs(abs(g.g_ss) ** 2 + abs(1 + g.g_ss) ** 2 - 2 * abs(g.g_is) ** 2 - 1),
            abs(abs(g.g_ii) ** 2 + abs(1 + g.g_ii) ** 2 - 2 * abs(g.g_si) ** 2 - 1),
        )
    assert worst < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matrix_is_canonical(seed):
    r = np.random.default_rng(seed)
    sp = random_params(r)
    m = bogoliubov_matrix(sp, r.uniform(-5, 5) * MHZ)
    assert m.canonical_deviation() < 1e-10


def test_matrix_apply_matches_output_fields(rng):
    sp = random_params(rng)
    d = 1.1 * MHZ
    alpha, beta = 0.3 - 0.2j, 0.7 + 0.4j
    m = bogoliubov_matrix(sp, d)
    # inputs (c1, c3, c2+, c4+, c2, c4, c1+, c3+): beta at port 2, alpha at port 1
    sig = m.apply([0, 0, 0, 0, beta, 0, np.conj(alpha), 0])
    out = output_fields(sp, d, DriveState(alpha, beta))
    assert sig[5] == pytest.approx(out.out4, abs=1e-12)
    assert sig[4] == pytest.approx(out.out2, abs=1e-12)


def test_conversion_gain_symmetry(rng):
    for _ in range(500):
        sp = random_params(rng)
        d = rng.uniform(-5, 5) * MHZ
        p, q = amplitude_gains(sp, d), amplitude_gains(sp, -d)
        assert abs(q.g_si) == pytest.approx(abs(p.g_is), abs=1e-12 * max(1.0, abs(p.g_is)))
        assert q.d_i == pytest.approx(np.conj(p.d_s), rel=1e-13)


def test_pole_at_threshold():
    sp = ScatteringParams(MHZ, MHZ, 2 * MHZ)
    with pytest.raises(PoleError):
        amplitude_gains(sp, 0.0)
    with pytest.raises(PoleError):
        bogoliubov_matrix(sp, 0.0)


def test_power_db_floor():
    assert power_db(0.0) == DB_FLOOR
    assert power_db(10.0) == pytest.approx(10.0)


def test_gain_map_center_and_corners():
    modes = modes_for(MAP_PARAMS)
    x = np.linspace(-15, 15, 31) * MHZ
    gm = gain_map(modes, x, x)
    assert gm.gs_db.shape == (31, 31)
    assert gm.gs_db[15, 15] == pytest.approx(GS_DB, abs=1e-6)
    assert gm.gi_db[15, 15] == pytest.approx(GI_DB, abs=1e-6)
    assert not gm.mask.any()
    # far from both resonances the transmitted signal falls off
    assert gm.gs_db[0, 0] < 0.0
    assert np.all(np.isfinite(gm.gs_db))


def test_gain_map_agrees_with_cells_and_ordering(rng):
    modes = modes_for(MAP_PARAMS)
    x = np.linspace(-9, 9, 13) * MHZ
    y = np.linspace(-7, 7, 11) * MHZ
    gm = gain_map(modes, x, y)
    X, Y = np.meshgrid(x, y)
    perm = rng.permutation(X.size)
    cells = gain_map_cells(modes, X.ravel()[perm], Y.ravel()[perm], "idler")
    assert np.allclose(cells, gm.gi_db.ravel()[perm], atol=1e-12)
    with pytest.raises(ValueError):
        gain_map_cells(modes, X, Y, "pump")
    with pytest.raises(ValueError):
        gain_map(modes, [np.nan], [0.0])


def test_gain_map_pole_cells_are_nan():
    sp = ScatteringParams(MHZ, MHZ, 2 * MHZ)
    gm = gain_map(modes_for(sp), [0.0, MHZ], [0.0])
    assert gm.mask[0, 0] and np.isnan(gm.gs_db[0, 0])
    assert np.isfinite(gm.gs_db[0, 1])


@pytest.mark.parametrize("sp", [FRINGE_SIGNAL, FRINGE_IDLER])
def test_extinction_nulls_output(sp):
    d = 0.4 * MHZ
    for target in ("signal", "idler"):
        ratio = extinction_ratio(sp, d, target)
        alpha = 0.8 * np.exp(0.3j)
        beta = ratio * np.conj(alpha)
        out = output_fields(sp, d, DriveState(alpha, beta))
        value = out.out4 if target == "signal" else out.out3
        assert power_db(abs(value) ** 2 / abs(beta) ** 2) < -240


def test_extinction_errors():
    sp = ScatteringParams(MHZ, MHZ, 0.0)
    with pytest.raises(ZeroPumpError):
        extinction_ratio(sp, 0.0, "idler")
    with pytest.raises(ValueError):
        extinction_ratio(MAP_PARAMS, 0.0, "pump")


def test_extinction_power_ratios():
    p_sig = 1 / abs(extinction_ratio(FRINGE_SIGNAL, 0.0, "signal")) ** 2
    p_idl = 1 / abs(extinction_ratio(FRINGE_IDLER, 0.0, "idler")) ** 2
    assert p_sig == pytest.approx(1.326, abs=1e-3)
    assert p_idl == pytest.approx(0.8204, abs=1e-4)


def _matched_alpha(sp, r=1.0):
    ratio = abs(extinction_ratio(sp, 0.0, "signal"))
    return 1.0 / (ratio * r)


def test_matched_fringe_quadruples_power():
    phases = np.linspace(-math.pi, math.pi, 3600, endpoint=False)
    fr = interference_fringe(FRINGE_SIGNAL, 0.0, _matched_alpha(FRINGE_SIGNAL), 1.0, phases)
    single = 10 * math.log10(abs(amplitude_gains(FRINGE_SIGNAL, 0.0).g_ss) ** 2)
    assert fr.g_s_db.max() - single == pytest.approx(20 * math.log10(2), abs=1e-5)
    assert fr.g_s_db.min() < single - 60


def test_mismatched_fringe_contrast():
    phases = np.linspace(-math.pi, math.pi, 3600, endpoint=False)
    fr = interference_fringe(FRINGE_SIGNAL, 0.0, _matched_alpha(FRINGE_SIGNAL, 0.986), 1.0, phases)
    contrast = fr.g_s_db.max() - fr.g_s_db.min()
    assert contrast == pytest.approx(20 * math.log10(1.986 / 0.014), abs=1e-3)
    assert contrast == pytest.approx(43.037, abs=1e-3)


def test_no_idler_no_fringe():
    phases = np.linspace(-math.pi, math.pi, 90, endpoint=False)
    fr = interference_fringe(MAP_PARAMS, 0.5 * MHZ, 0.0, 2.0, phases)
    assert np.ptp(fr.g_s_db) < 1e-12 and np.ptp(fr.g_i_db) < 1e-12
    with pytest.raises(ValueError):
        fringe_powers(MAP_PARAMS, 0.0, 1.0, 0.0, phases)


def test_quadrature_alignment_correlations(rng):
    phases = np.linspace(-math.pi, math.pi, 360, endpoint=False)
    for _ in range(20):
        sp = random_params(rng)
        sweep = align_quadratures(quadrature_sweep(sp, rng.uniform(-3, 3) * MHZ, phases, 0.7))
        c_i, c_q = sweep.correlations()
        assert c_i == pytest.approx(1.0, abs=1e-9)
        assert c_q == pytest.approx(-1.0, abs=1e-9)
        assert sweep.signal[0] == pytest.approx(-1.0)
        assert sweep.idler[0] == pytest.approx(-1.0)


def test_single_drive_quadrature_matches_sweep():
    phases = np.array([-math.pi, 0.3])
    sweep = quadrature_sweep(MAP_PARAMS, 0.2 * MHZ, phases)
    q = quadratures(MAP_PARAMS, 0.2 * MHZ, DriveState(0.0, np.exp(0.3j)))
    assert sweep.samples()[1].signal == pytest.approx(q.signal)
    assert sweep.samples()[1].idler == pytest.approx(q.idler)


def test_alignment_errors():
    with pytest.raises(ValueError):
        align_quadratures(quadrature_sweep(MAP_PARAMS, 0.0, [0.0, 1.0]))
    zero = ScatteringParams(MHZ, MHZ, 0.0)
    with pytest.raises(DegenerateError):
        align_quadratures(quadrature_sweep(zero, 0.0, [-math.pi, 0.0]))


def test_noise_figure_limits():
    assert noise_figure(1.0, 0.167) == 1.0
    assert 10 * math.log10(noise_figure(1e12, 0.167)) == pytest.approx(10 * math.log10(0.167), abs=1e-9)
    g = np.array([1.0, 10.0, 100.0])
    assert np.all(np.diff(noise_figure(g, 0.167)) < 0)
