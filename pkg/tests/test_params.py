import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irsradar import FmcwParams, derive_waveform_metrics, physical_to_bin, validate_scenario
from irsradar.params import C0, beat_frequency


def test_default_metrics(m):
    assert m.S_V == pytest.approx(20.45e12, rel=1e-3)
    assert m.R_max == pytest.approx(200.0, rel=5e-3)
    assert round(m.delta_R, 2) == 1.0
    assert m.delta_nu == pytest.approx(2.075, rel=5e-3)
    assert m.N_s == 200
    assert m.f_s == 27.27e6


def test_processing_gain(m):
    # 7.33 us * 27.27 MHz * 128 chirps
    assert m.G_P == pytest.approx(25587.6, rel=1e-4)
    assert 10 * math.log10(m.G_P) == pytest.approx(44.1, abs=0.05)


def test_nu_max_follows_formula_not_table(m):
    assert m.nu_max == pytest.approx(132.9, rel=2e-3)
    assert m.nu_max == pytest.approx(m.wavelength / (4 * 7.33e-6))


def test_doubling_bandwidth_halves_range_resolution(p, m):
    m2 = derive_waveform_metrics(dataclasses.replace(p, B_s=2 * p.B_s))
    assert m2.delta_R == pytest.approx(m.delta_R / 2)


def test_doubling_chirps_scales_doppler_and_gain(p, m):
    m2 = derive_waveform_metrics(dataclasses.replace(p, N_f=2 * p.N_f))
    assert m2.delta_nu == pytest.approx(m.delta_nu / 2)
    assert m2.G_P == pytest.approx(2 * m.G_P)
    assert (m2.delta_R, m2.R_max) == (m.delta_R, m.R_max)


def test_range_bins_tile_max_range(m):
    assert abs(m.delta_R * m.N_s - m.R_max) <= m.delta_R


@pytest.mark.parametrize("field,value", [
    ("f_c", 0.0), ("B_s", -1.0), ("T_r", math.inf), ("N_f", 1), ("N_f", 2.5),
    ("B_c", 200e6), ("P_t", math.nan), ("F_n", 0.0),
])
def test_rejects_bad_params(field, value):
    with pytest.raises(ValueError):
        FmcwParams(**{field: value})


@given(st.floats(min_value=1e-3, max_value=199.7))
def test_range_bin_round_trip(R):
    m = derive_waveform_metrics(FmcwParams())
    r_bin, _ = physical_to_bin(m, R, 0.0, 128)
    assert abs(r_bin * m.range_per_bin - R) <= m.delta_R / 2


def test_validate_accepts_default_target(make_scenario, p):
    s = make_scenario()
    assert beat_frequency(p, 180.0) == pytest.approx(24.57e6, rel=1e-3)
    report = validate_scenario(s)
    assert report.ok and len(report) == 0


def test_validate_rejects_beyond_max_range(make_scenario):
    report = validate_scenario(make_scenario(R=250.0))
    assert not report.ok
    assert any("beyond R_max" in d.message for d in report.errors)


def test_validate_zero_velocity_clean(make_scenario):
    assert len(validate_scenario(make_scenario(nu=0.0))) == 0


def test_validate_rejects_fast_target(make_scenario):
    report = validate_scenario(make_scenario(nu=150.0))
    assert [d.field for d in report.errors] == ["target.velocity_mps"]


def test_validate_warns_on_unmodeled_slope(make_scenario, m):
    from irsradar import InterfererSpec

    s = make_scenario().replace(interferers=(InterfererSpec(50.0, 1.3 * m.S_V),))
    report = validate_scenario(s)
    assert report.ok
    assert len(report.warnings) == 1


def test_beat_frequency_matches_wavelength_identity(p):
    assert beat_frequency(p, 1.0) == pytest.approx(2 * p.B_s / p.T_r / C0)
    assert np.isclose(p.wavelength, C0 / 77e9)
