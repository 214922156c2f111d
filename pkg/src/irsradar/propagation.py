"""Link-budget powers at the victim receiver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .params import BOLTZMANN, FmcwParams

if TYPE_CHECKING:
    from .irs import ActiveIrs, PassiveIrs


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class BareRcs:
    sigma: float  # m^2

    def __post_init__(self):
        _positive("sigma", self.sigma)


Reflector = Union[BareRcs, "PassiveIrs", "ActiveIrs"]


@dataclass(frozen=True)
class TargetSpec:
    R: float
    nu: float
    reflector: Reflector

    def __post_init__(self):
        _positive("R", self.R)
        if not math.isfinite(self.nu):
            raise ValueError("nu must be finite")


@dataclass(frozen=True)
class InterfererSpec:
    """One-way interfering FMCW transmitter.

    ``slope`` is either a fixed value in Hz/s or a ``(lo, hi)`` pair drawn
    uniformly per trial. The chirp repeats every ``B_sI / slope`` seconds
    unless ``period`` pins the repetition interval (the sweep bandwidth then
    follows from the slope). ``tau`` is a fixed offset of the interferer
    chirp train relative to the victim frame start, or ``None`` for a uniform
    draw in ``[0, T_r)`` per trial.
    """

    R_I: float
    slope: float | tuple[float, float]
    B_sI: float = 150e6
    P_tI: float = 1e-3
    G_tI: float = 100.0
    tau: float | None = None
    period: float | None = None

    def __post_init__(self):
        _positive("R_I", self.R_I)
        _positive("B_sI", self.B_sI)
        if self.period is not None:
            _positive("period", self.period)
        _positive("P_tI", self.P_tI)
        _positive("G_tI", self.G_tI)
        lo, hi = self.slope_bounds()
        _positive("slope", lo)
        if hi < lo:
            raise ValueError("slope range must be (lo, hi) with lo <= hi")
        if self.tau is not None and not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValueError("tau must be a finite non-negative offset")

    def slope_bounds(self) -> tuple[float, float]:
        if isinstance(self.slope, (tuple, list)):
            return float(self.slope[0]), float(self.slope[1])
        return float(self.slope), float(self.slope)

    def chirp_period(self, slope: float) -> float:
        return self.period if self.period is not None else self.B_sI / slope

    def draw(self, rng: np.random.Generator, T_r: float) -> tuple[float, float]:
        """Realize (S_I, tau_I) for one trial."""
        lo, hi = self.slope_bounds()
        S_I = lo if lo == hi else rng.uniform(lo, hi)
        tau = rng.uniform(0.0, T_r) if self.tau is None else self.tau
        return S_I, tau


def echo_power(p: FmcwParams, sigma: float, R: float) -> float:
    """Two-way radar-equation power returned by a point target of RCS ``sigma``."""
    _positive("sigma", sigma)
    _positive("R", R)
    out = p.P_t * p.G_t * p.G_r * sigma * p.wavelength ** 2 / ((4 * math.pi) ** 3 * R ** 4)
    if not math.isfinite(out):
        raise OverflowError("echo power is not finite")
    return out


def interference_power(p: FmcwParams, i: InterfererSpec) -> float:
    """One-way free-space power from an interferer at range ``R_I``."""
    _positive("R_I", i.R_I)
    out = i.P_tI * i.G_tI * p.G_r * p.wavelength ** 2 / (4 * math.pi * i.R_I) ** 2
    if not math.isfinite(out):
        raise OverflowError("interference power is not finite")
    return out


def receiver_noise_power(p: FmcwParams) -> float:
    """Thermal noise k*T0*B_c*F_n at the output of the receiver low-pass filter."""
    return BOLTZMANN * p.T_0 * p.B_c * p.F_n


def irs_element_noise_power(p: FmcwParams) -> float:
    """Noise generated at each active IRS element; uses the full sweep bandwidth."""
    return BOLTZMANN * p.T_0 * p.B_s * p.F_n


def interference_crossover_range(p: FmcwParams, sigma: float, R: float,
                                 P_tI: float, G_tI: float) -> float:
    """Interferer range at which its one-way power equals the target echo power."""
    _positive("sigma", sigma)
    _positive("R", R)
    return math.sqrt(P_tI * G_tI * 4 * math.pi * R ** 4 / (p.P_t * p.G_t * sigma))
