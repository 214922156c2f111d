import pytest

from irsradar import (ActiveIrs, BareRcs, FmcwParams, InterfererSpec, IrsSpec, Scenario, TargetSpec,
                      derive_waveform_metrics)


@pytest.fixture(scope="session")
def p():
    return FmcwParams()


@pytest.fixture(scope="session")
def m(p):
    return derive_waveform_metrics(p)


@pytest.fixture(scope="session")
def irs256():
    return IrsSpec.half_wavelength(256, 256)


@pytest.fixture(scope="session")
def make_scenario(p, m, irs256):
    def make(interference=None, R_I=50.0, reflector="irs", noise=True, seed=7, R=180.0, nu=25.0):
        if interference == "similar":
            intf = (InterfererSpec(R_I, (0.9 * m.S_V, 1.1 * m.S_V)),)
        elif interference == "sweeping":
            intf = (InterfererSpec(R_I, 40.90e12, period=p.T_r),)
        else:
            intf = ()
        if reflector == "irs":
            refl = ActiveIrs(irs256, 1.0)
        elif isinstance(reflector, float):
            refl = BareRcs(reflector)
        else:
            refl = BareRcs(10.0)
        return Scenario(p, TargetSpec(R, nu, refl), interferers=intf, noise_enabled=noise,
                        master_seed=seed)

    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
