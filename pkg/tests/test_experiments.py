import numpy as np
import pytest

from irsradar import BareRcs
from irsradar.experiments import (DetectorSettings, SweepResult, baseline_crossing_db,
                                  baseline_scenario, curve_kind, detection_probability_sweep,
                                  evaluate_map, parse_gamma_grid, rcs_curve, run_trial, sir_curve)
from irsradar.processing import CfarConfig

GRID = np.arange(0.0, 41.0, 5.0)


def test_parse_gamma_grid():
    np.testing.assert_allclose(parse_gamma_grid("20:40:1"), np.arange(20, 41))
    np.testing.assert_allclose(parse_gamma_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_allclose(parse_gamma_grid("7"), [7.0])
    for bad in ["1:0:1", "0:10:0", "0:10", "a:b:c"]:
        with pytest.raises(ValueError):
            parse_gamma_grid(bad)


def test_sir_slope_and_range_offset(make_scenario):
    near = sir_curve(make_scenario("similar", R_I=50.0), GRID)
    far = sir_curve(make_scenario("similar", R_I=100.0), GRID)
    np.testing.assert_allclose(np.diff(near.values) / np.diff(GRID), 1.0, rtol=1e-9)
    np.testing.assert_allclose(far.values - near.values, 20 * np.log10(2), rtol=1e-9)
    assert near.values[GRID == 30.0][0] == pytest.approx(5.78, abs=0.01)


def test_printed_form_slope_also_one(make_scenario):
    c = sir_curve(make_scenario("similar"), GRID, printed_form=True)
    np.testing.assert_allclose(np.diff(c.values) / np.diff(GRID), 1.0, rtol=1e-9)


def test_sir_requires_active_irs_and_interferer(make_scenario):
    with pytest.raises(TypeError):
        sir_curve(make_scenario("similar", reflector="bare"), GRID)
    with pytest.raises(ValueError):
        sir_curve(make_scenario(), GRID)


def test_rcs_curve(irs256):
    c = rcs_curve(irs256, GRID)
    np.testing.assert_allclose(c.values, GRID - 1.0774838, atol=1e-6)
    assert c.extra["passive_dbsm"] == pytest.approx(-1.0775, abs=1e-4)
    assert baseline_crossing_db(irs256) == pytest.approx(11.0775, abs=1e-4)
    assert "gamma_db,rcs_dbsm,baseline_dbsm,passive_dbsm" in c.to_csv_text()


def test_baseline_scenario(make_scenario):
    b = baseline_scenario(make_scenario())
    assert b.target.reflector == BareRcs(10.0)
    assert (b.target.R, b.target.nu) == (180.0, 25.0)


def test_curve_kind(make_scenario):
    assert curve_kind(make_scenario()) == "Pd"
    assert curve_kind(make_scenario("similar")) == "PdSimilar"
    assert curve_kind(make_scenario("sweeping")) == "PdSweeping"


def test_noise_free_active_target_always_hit(make_scenario):
    s = make_scenario(noise=False)
    out = run_trial(s, 10.0, seed=1)
    assert out.hit and out.detected_bin is not None


def test_degenerate_sweep_no_target_signal(make_scenario):
    # a target far below the noise floor: P_D sits near zero at every gain
    s = make_scenario(reflector=1e-6)
    r = detection_probability_sweep(s, [0.0, 10.0], 40)
    assert r.kind == "Pd"
    assert r.hits.max() <= 2


def test_sweep_independent_of_workers_and_chunking(make_scenario):
    s = make_scenario("similar", R_I=50.0)
    a = detection_probability_sweep(s, [20.0, 40.0], 12, workers=1, chunk=5)
    b = detection_probability_sweep(s, [20.0, 40.0], 12, workers=2, chunk=3)
    np.testing.assert_array_equal(a.hits, b.hits)
    assert a.to_csv_text() == b.to_csv_text()


def test_sweep_rejects_bad_input(make_scenario):
    with pytest.raises(ValueError):
        detection_probability_sweep(make_scenario(), [0.0], 0)
    with pytest.raises(ValueError):
        detection_probability_sweep(make_scenario(R=300.0), [0.0], 1)


def test_sweep_result_statistics():
    r = SweepResult("Pd", [0, 1, 2, 3], trials=np.full(4, 100), hits=np.array([10, 60, 50, 100]))
    sm = r.smoothed_pd()
    assert np.all(np.diff(sm) >= 0)
    assert sm[1] == sm[2] == pytest.approx(0.55)
    assert r.threshold_db() == 3.0
    assert r.threshold_db(0.5, smooth=False) == 1.0
    lo, hi = r.ci
    assert np.all(lo <= r.pd) and np.all(r.pd <= hi)
    assert hi[-1] == 1.0
    with pytest.raises(ValueError):
        SweepResult("Pd", [1, 0])


def test_evaluate_map_wraps_doppler():
    power = np.ones((60, 32))
    power[30, 31] = 1e5
    s = DetectorSettings(CfarConfig(4, 2, 1, 1, 1e-3))
    assert evaluate_map(power, (30, 0), s) == (30, 31)
    assert evaluate_map(power, (30, 5), s) is None
