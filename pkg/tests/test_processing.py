import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from irsradar import (CaCfarDetector, CfarConfig, RangeDopplerMap, RangeDopplerProcessor,
                      compose_beat_frame, range_doppler_map)
from irsradar.processing import bin_to_physical, ca_cfar_detect, cfar_scale, rd_power


def brute_cfar(power, tr, td, gr, gd, pfa):
    # per-cell loop over the reference window; Doppler wraps, range is truncated
    n_r, n_d = power.shape
    thr = np.empty_like(power)
    for r in range(n_r):
        for d in range(n_d):
            total, count = 0.0, 0
            for dr in range(-(tr + gr), tr + gr + 1):
                rr = r + dr
                if not 0 <= rr < n_r:
                    continue
                for dd in range(-(td + gd), td + gd + 1):
                    if abs(dr) <= gr and abs(dd) <= gd:
                        continue
                    total += power[rr, (d + dd) % n_d]
                    count += 1
            alpha = count * (pfa ** (-1 / count) - 1)
            thr[r, d] = alpha * total / count
    return thr


def test_cfar_scale_oracle():
    assert cfar_scale(16, 1e-5) == pytest.approx(16 * (10 ** (5 / 16) - 1), rel=1e-12)
    assert cfar_scale(16, 1e-5) == pytest.approx(16.856, abs=1e-3)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2**31))
def test_threshold_matches_brute_force(tr, td, gr, gd, seed):
    if tr + td == 0:
        return
    power = np.random.default_rng(seed).exponential(size=(20, 16))
    det = CaCfarDetector(tr, td, gr, gd, 1e-3).fit(power)
    np.testing.assert_allclose(det.threshold(power), brute_cfar(power, tr, td, gr, gd, 1e-3), rtol=1e-10)


def test_interior_training_count():
    det = CaCfarDetector().fit(np.ones((200, 128)))
    # (2*10+1)*(2*6+1) - (2*2+1)*(2*2+1)
    assert det.n_train_[100, 64] == 21 * 13 - 25
    assert det.n_train_[0, 0] == 11 * 13 - 3 * 5
    assert det.n_train_[100, 0] == det.n_train_[100, 64]


def test_single_peak_single_detection():
    power = np.ones((200, 128))
    power[90, 30] = 1e4
    rd = RangeDopplerMap(power, 1.0, 2.0)
    dets = ca_cfar_detect(rd)
    assert [(d.range_bin, d.doppler_bin) for d in dets] == [(90, 30)]
    assert dets[0].R == 90.0 and dets[0].nu == (30 - 64) * 2.0


@given(st.floats(1e-20, 1e20))
@settings(max_examples=20, deadline=None)
def test_scale_invariance(c):
    power = np.random.default_rng(0).exponential(size=(40, 32))
    power[10, 5] = 200.0
    det = CaCfarDetector(4, 2, 1, 1, 1e-2).fit(power)
    np.testing.assert_array_equal(det.predict(power), det.predict(c * power))


def test_empirical_false_alarm_rate():
    rng = np.random.default_rng(1)
    maps = rng.exponential(size=(20, 200, 128))
    det = CaCfarDetector(pfa=1e-2).fit(maps[0])
    rate = det.predict(maps).mean()
    assert rate == pytest.approx(1e-2, rel=0.15)


def test_parseval(make_scenario):
    f = compose_beat_frame(make_scenario("similar"), seed=4)
    power = rd_power(f.data[None])[0]
    assert power.shape == (200, 128)
    assert power.sum() == pytest.approx(f.data.size * np.sum(np.abs(f.data) ** 2), rel=1e-10)


def test_tone_peak_location():
    n_f, n_s = 128, 200
    l, t = np.arange(n_f)[:, None], np.arange(n_s)[None, :]
    x = np.exp(2j * np.pi * (37 * t / n_s + 10 * l / n_f))
    power = rd_power(x[None])[0]
    assert np.unravel_index(np.argmax(power), power.shape) == (37, 64 + 10)
    assert power.max() == pytest.approx((n_f * n_s) ** 2)


@pytest.mark.parametrize("R", [10.0, 50.0, 100.0, 180.0])
@pytest.mark.parametrize("nu", [-25.0, 0.0, 25.0])
def test_target_detected_at_true_bin(make_scenario, m, R, nu):
    s = make_scenario(reflector=100.0, R=R, nu=nu)
    rd = range_doppler_map(compose_beat_frame(s, seed=3), metrics=m)
    dets = ca_cfar_detect(rd)
    assert dets
    best = dets[0]
    assert abs(best.R - R) <= m.delta_R + m.range_per_bin
    assert abs(best.nu - nu) <= m.delta_nu


def test_map_axes(m):
    rd = RangeDopplerMap(np.zeros((200, 128)), m.range_per_bin, m.delta_nu)
    assert rd.doppler_axis[64] == 0.0
    assert rd.range_axis[-1] == pytest.approx(199 * m.range_per_bin)
    with pytest.raises(IndexError):
        bin_to_physical(rd, (200, 0))


def test_sklearn_api(make_scenario):
    frames = [compose_beat_frame(make_scenario(), seed=k) for k in range(2)]
    det = CaCfarDetector(train_range=6, pfa=1e-4)
    assert det.get_params()["train_range"] == 6
    c = clone(det)
    assert c.get_params() == det.get_params() and c is not det
    with pytest.raises(NotFittedError):
        det.predict(np.ones((200, 128)))
    with pytest.raises(NotFittedError):
        RangeDopplerProcessor().transform(frames)
    pipe = make_pipeline(RangeDopplerProcessor(window="hann"), CaCfarDetector())
    masks = pipe.fit(frames).predict(frames)
    assert masks.shape == (2, 200, 128) and masks.dtype == bool
    pipe.set_params(cacfardetector__pfa=1e-2)
    assert pipe.fit(frames).predict(frames).sum() >= masks.sum()


def test_bad_estimator_params():
    with pytest.raises(ValueError):
        CaCfarDetector(pfa=1.5).fit(np.ones((50, 50)))
    with pytest.raises(ValueError):
        CaCfarDetector(train_range=30).fit(np.ones((50, 50)))
    with pytest.raises(ValueError):
        RangeDopplerProcessor(window="kaiser").fit(np.ones((4, 8), complex))


def test_from_config_round_trip():
    cfg = CfarConfig(6, 3, 1, 1, 1e-4)
    assert CaCfarDetector.from_config(cfg).get_params() == {
        "train_range": 6, "train_doppler": 3, "guard_range": 1, "guard_doppler": 1, "pfa": 1e-4}


def test_map_csv(tmp_path, m):
    rd = RangeDopplerMap(np.arange(12.0).reshape(3, 4), m.range_per_bin, m.delta_nu)
    rd.to_csv(tmp_path / "rd.csv")
    np.testing.assert_allclose(np.loadtxt(tmp_path / "rd.csv", delimiter=","), rd.power)
    assert (tmp_path / "rd.csv.json").exists()
