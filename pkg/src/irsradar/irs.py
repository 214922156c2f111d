"""Onboard intelligent reflective surface: geometry, phase control and effective RCS.

The coherent sum over elements is evaluated once per configuration and
folded into a single complex echo amplitude, so synthesis cost does not
grow with the element count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import C0, FmcwParams
from .propagation import echo_power, irs_element_noise_power


@dataclass(frozen=True)
class Optimal:
    """Phase-conjugate each element toward the victim radar."""


@dataclass(frozen=True)
class Uniform:
    delta: float = 0.0


@dataclass(frozen=True)
class Custom:
    deltas: tuple[float, ...]

    def __post_init__(self):
        if not np.all(np.isfinite(self.deltas)):
            raise ValueError("custom phases must be finite")


PhaseProfile = Optimal | Uniform | Custom


@dataclass(frozen=True)
class IrsSpec:
    rows: int
    cols: int
    pitch: float
    G_e: float = math.pi
    phase_profile: PhaseProfile = Optimal()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("IRS needs at least one element")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError("pitch must be positive")
        if not (math.isfinite(self.G_e) and self.G_e > 0):
            raise ValueError("G_e must be positive")
        if isinstance(self.phase_profile, Custom) and len(self.phase_profile.deltas) != self.n_elements:
            raise ValueError("custom phase profile length must equal rows*cols")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @classmethod
    def half_wavelength(cls, rows, cols, f_c=77e9, **kw):
        return cls(rows, cols, C0 / f_c / 2.0, **kw)


@dataclass(frozen=True)
class Geometry:
    """Direction of the victim radar seen from the IRS (radians)."""

    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi"):
            v = getattr(self, name)
            if not (math.isfinite(v) and abs(v) <= math.pi / 2 + 1e-12):
                raise ValueError(f"{name} must lie in [-pi/2, pi/2]")


@dataclass(frozen=True)
class PassiveIrs:
    irs: IrsSpec


@dataclass(frozen=True)
class ActiveIrs:
    irs: IrsSpec
    gamma: float = 1.0  # linear reflection gain

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 1.0):
            raise ValueError(f"active IRS reflection gain must be >= 1 (0 dB), got {self.gamma!r}")


@dataclass(frozen=True)
class IrsReturn:
    amplitude: complex
    effective_rcs: float
    element_noise_power_at_rx: float


def element_positions(spec: IrsSpec) -> np.ndarray:
    """(N, 2) array of element coordinates, element 0 at the origin, row-major."""
    r, c = np.divmod(np.arange(spec.n_elements), spec.cols)
    return np.column_stack([c * spec.pitch, r * spec.pitch]).astype(float)


def element_delay(pos, g: Geometry) -> np.ndarray | float:
    """Path delay of element(s) at ``pos`` relative to the reference element."""
    pos = np.asarray(pos, dtype=float)
    x, y = pos[..., 0], pos[..., 1]
    tau = (x * math.sin(g.theta) * math.cos(g.phi) + y * math.sin(g.theta) * math.sin(g.phi)) / C0
    return float(tau) if tau.ndim == 0 else tau


def _wrap(phase):
    # into (-pi, pi]
    return -np.remainder(-np.asarray(phase) + np.pi, 2 * np.pi) + np.pi


def optimal_phases(spec: IrsSpec, g: Geometry, f_c: float) -> np.ndarray:
    tau = element_delay(element_positions(spec), g)
    return _wrap(-4 * np.pi * f_c * np.asarray(tau))


def resolve_phases(spec: IrsSpec, g: Geometry, f_c: float) -> np.ndarray:
    prof = spec.phase_profile
    if isinstance(prof, Optimal):
        return optimal_phases(spec, g, f_c)
    if isinstance(prof, Uniform):
        return np.full(spec.n_elements, float(prof.delta))
    return np.asarray(prof.deltas, dtype=float)


def array_factor(spec: IrsSpec, g: Geometry, f_c: float, phases=None) -> complex:
    """Complex two-way coherent sum over elements; magnitude is at most N."""
    if phases is None:
        return _configured_array_factor(spec, g, f_c)
    tau = element_delay(element_positions(spec), g)
    return complex(np.sum(np.exp(1j * (4 * np.pi * f_c * np.asarray(tau) + phases))))


@lru_cache(maxsize=64)
def _configured_array_factor(spec: IrsSpec, g: Geometry, f_c: float) -> complex:
    return array_factor(spec, g, f_c, resolve_phases(spec, g, f_c))


def element_rcs(wavelength: float, G_e: float = math.pi) -> float:
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    return wavelength ** 2 * G_e ** 2 / (4 * math.pi)


def passive_array_rcs(spec: IrsSpec, g: Geometry, f_c: float, phases=None) -> float:
    """Effective RCS of the whole surface: element RCS times |array factor|."""
    sigma_e = element_rcs(C0 / f_c, spec.G_e)
    return sigma_e * abs(array_factor(spec, g, f_c, phases))


def active_array_rcs(spec: IrsSpec, gamma: float, f_c: float = 77e9) -> float:
    """Effective RCS of a phase-optimized active surface with reflection gain ``gamma``."""
    if gamma < 1:
        raise ValueError("reflection gain must be >= 1")
    return gamma * spec.n_elements * element_rcs(C0 / f_c, spec.G_e)


def irs_return(spec: IrsSpec, g: Geometry, gamma: float | None, p: FmcwParams, R: float) -> IrsReturn:
    """Echo amplitude, effective RCS and receiver-referred element noise of an IRS target.

    ``gamma=None`` selects a passive surface (no amplification, no element
    noise). Element noise is each element's k*T0*B_s*F_n amplified by
    ``gamma``, re-radiated with gain G_e and propagated one way to the radar,
    summed incoherently over elements.
    """
    active = gamma is not None
    if active and not gamma >= 1:
        raise ValueError(f"active IRS reflection gain must be >= 1, got {gamma!r}")
    gain = float(gamma) if active else 1.0
    af = array_factor(spec, g, p.f_c)
    sigma = gain * element_rcs(p.wavelength, spec.G_e) * abs(af)
    if sigma > 0:
        amp = math.sqrt(echo_power(p, sigma, R))
    else:
        amp = 0.0
    phase = 4 * math.pi * p.f_c * R / C0 + np.angle(af)
    noise = 0.0
    if active:
        noise = (spec.n_elements * gain * irs_element_noise_power(p) * p.G_r * spec.G_e
                 * (p.wavelength / (4 * math.pi * R)) ** 2)
    return IrsReturn(amp * complex(np.exp(1j * phase)), sigma, noise)


def printed_signal_strength(spec: IrsSpec, gamma: float, p: FmcwParams, R: float) -> float:
    """Signal strength N*gamma*g**2 with g the per-element two-way power gain.

    Kept only to compare curve shapes; it falls off as R**-8 and is not
    consistent with the RCS-based echo power used everywhere else.
    """
    g = p.P_t * p.G_t * p.G_r * spec.G_e ** 2 * p.wavelength ** 4 / (4 * math.pi * R) ** 4
    return spec.n_elements * gamma * g ** 2
