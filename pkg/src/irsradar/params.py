"""Victim FMCW waveform description, derived metrics and scenario checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .synth import Scenario

C0 = 2.998e8
BOLTZMANN = 1.380649e-23

# interferer/victim slope ratios: |ratio - 1| <= SIMILAR_BAND is similar slope,
# >= SWEEPING_BAND is sweeping slope, anything between is not modeled
SIMILAR_BAND = 0.10
SWEEPING_BAND = 0.5


def db_to_lin(x_db):
    return 10.0 ** (x_db / 10.0)


def lin_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class FmcwParams:
    """Waveform and RF front-end of the victim radar (SI units, linear gains)."""

    f_c: float = 77e9
    B_s: float = 150e6
    T_r: float = 7.33e-6
    N_f: int = 128
    B_c: float = 27.27e6
    P_t: float = 1e-3
    G_t: float = 100.0
    G_r: float = 100.0
    F_n: float = db_to_lin(15.0)
    T_0: float = 296.0

    def __post_init__(self):
        for name in ("f_c", "B_s", "T_r", "B_c", "P_t", "G_t", "G_r", "F_n", "T_0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if int(self.N_f) != self.N_f or self.N_f < 2:
            raise ValueError(f"N_f must be an integer >= 2, got {self.N_f!r}")
        if self.B_c > self.B_s:
            raise ValueError("B_c must not exceed B_s")

    @property
    def slope(self) -> float:
        return self.B_s / self.T_r

    @property
    def wavelength(self) -> float:
        return C0 / self.f_c


@dataclass(frozen=True)
class WaveformMetrics:
    S_V: float
    wavelength: float
    R_max: float
    delta_R: float
    nu_max: float
    delta_nu: float
    G_P: float
    N_s: int
    f_s: float

    @property
    def range_per_bin(self) -> float:
        return self.R_max / self.N_s


def derive_waveform_metrics(p: FmcwParams) -> WaveformMetrics:
    """Compute range/velocity limits and resolutions, processing gain and sampling grid.

    The receiver samples complex baseband at ``f_s = B_c`` so the fast-time
    FFT spans exactly ``[0, R_max)``.
    """
    if not isinstance(p, FmcwParams):
        raise TypeError("expected FmcwParams")
    S_V = p.slope
    lam = p.wavelength
    f_s = p.B_c
    N_s = int(round(p.T_r * f_s))
    if N_s < 2:
        raise ValueError("chirp too short for B_c: fewer than 2 samples per chirp")
    return WaveformMetrics(
        S_V=S_V,
        wavelength=lam,
        R_max=p.B_c * C0 / (2.0 * S_V),
        delta_R=C0 / (2.0 * p.B_s),
        nu_max=lam / (4.0 * p.T_r),
        delta_nu=lam / (2.0 * p.N_f * p.T_r),
        G_P=p.T_r * p.B_c * p.N_f,
        N_s=N_s,
        f_s=f_s,
    )


def beat_frequency(p: FmcwParams, R: float) -> float:
    return 2.0 * p.slope * R / C0


def doppler_frequency(p: FmcwParams, nu: float) -> float:
    return 2.0 * p.f_c * nu / C0


def physical_to_bin(m: WaveformMetrics, R: float, nu: float, N_f: int) -> tuple[int, int]:
    """Nearest (range bin, fft-shifted Doppler bin) for a physical target state."""
    return int(round(R / m.range_per_bin)), int(round(nu / m.delta_nu)) + N_f // 2


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.field}: {self.message}"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.level == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __iter__(self):
        return iter(self.diagnostics)

    def __len__(self):
        return len(self.diagnostics)


def classify_slope_ratio(ratio: float) -> str | None:
    """Return 'similar', 'sweeping' or None when the ratio sits between the two families."""
    dev = abs(ratio - 1.0)
    if dev <= SIMILAR_BAND + 1e-12:
        return "similar"
    if dev >= SWEEPING_BAND:
        return "sweeping"
    return None


def validate_scenario(s: Scenario, m: WaveformMetrics | None = None) -> ValidationReport:
    """Check a parsed scenario against the victim waveform limits.

    Never raises for a schema-valid scenario; problems are collected as
    :class:`Diagnostic` entries.
    """
    if m is None:
        m = derive_waveform_metrics(s.fmcw)
    report = ValidationReport()
    add = report.diagnostics.append
    target = s.target

    if target.R > m.R_max:
        add(Diagnostic("error", "target.range_m",
                       f"target at {target.R:g} m is beyond R_max = {m.R_max:.2f} m"))
    f_b = beat_frequency(s.fmcw, target.R)
    if f_b > s.fmcw.B_c:
        add(Diagnostic("error", "target.range_m",
                       f"beat frequency {f_b / 1e6:.3f} MHz exceeds B_c = {s.fmcw.B_c / 1e6:.3f} MHz"))
    if abs(target.nu) > m.nu_max:
        add(Diagnostic("error", "target.velocity_mps",
                       f"|velocity| {abs(target.nu):g} m/s exceeds nu_max = {m.nu_max:.2f} m/s"))

    for i, intf in enumerate(s.interferers):
        lo, hi = intf.slope_bounds()
        kinds = {classify_slope_ratio(lo / m.S_V), classify_slope_ratio(hi / m.S_V)}
        if None in kinds or len(kinds) > 1:
            add(Diagnostic("warning", f"interferers[{i}].slope",
                           f"slope range [{lo / 1e12:.3f}, {hi / 1e12:.3f}] MHz/us is outside the "
                           "similar-slope / sweeping-slope families"))
    return report
