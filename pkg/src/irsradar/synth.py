"""De-chirped baseband synthesis of one FMCW frame at the victim receiver.

Everything is generated directly after the mixer and low-pass filter: the
target as a 2-D complex exponential, each interferer as the residual chirp
that survives the filter only while its instantaneous frequency offset from
the victim reference stays within B_c.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_write_bytes, atomic_write_json, atomic_write_text
from .irs import ActiveIrs, Geometry, PassiveIrs, irs_return
from .params import (C0, FmcwParams, WaveformMetrics, beat_frequency, derive_waveform_metrics,
                     doppler_frequency, validate_scenario)
from .propagation import (BareRcs, InterfererSpec, TargetSpec, echo_power, interference_power,
                          receiver_noise_power)


@dataclass(frozen=True)
class Scenario:
    fmcw: FmcwParams
    target: TargetSpec
    geometry: Geometry = Geometry()
    interferers: tuple[InterfererSpec, ...] = ()
    noise_enabled: bool = True
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "interferers", tuple(self.interferers))

    def replace(self, **changes) -> Scenario:
        return dataclasses.replace(self, **changes)


@dataclass
class BeatFrame:
    data: np.ndarray  # (N_f, N_s) complex
    f_s: float
    T_r: float
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.data.shape

    def to_csv(self, path):
        """One row per chirp, columns re0, im0, re1, im1, ..."""
        inter = np.empty((self.data.shape[0], 2 * self.data.shape[1]))
        inter[:, 0::2] = self.data.real
        inter[:, 1::2] = self.data.imag
        buf = io.StringIO()
        header = ",".join(f"re{n},im{n}" for n in range(self.data.shape[1]))
        np.savetxt(buf, inter, delimiter=",", header=header, comments="", fmt="%.9e")
        return atomic_write_text(path, buf.getvalue())

    def to_raw(self, path):
        """Little-endian float32 interleaved re/im, row-major, plus ``<path>.json`` sidecar."""
        path = str(path)
        arr = np.empty(self.data.shape + (2,), dtype="<f4")
        arr[..., 0] = self.data.real
        arr[..., 1] = self.data.imag
        atomic_write_bytes(path, arr.tobytes())
        atomic_write_json(path + ".json", {
            "format": "complex64-interleaved-le",
            "n_chirps": int(self.data.shape[0]),
            "n_samples": int(self.data.shape[1]),
            "f_s": self.f_s,
            "T_r": self.T_r,
            "meta": self.meta,
        })
        return path

    @classmethod
    def from_raw(cls, path):
        path = str(path)
        with open(path + ".json") as fh:
            side = json.load(fh)
        raw = np.fromfile(path, dtype="<f4").reshape(side["n_chirps"], side["n_samples"], 2)
        data = raw[..., 0].astype(np.float64) + 1j * raw[..., 1]
        return cls(data, side["f_s"], side["T_r"], side.get("meta", {}))


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        d = {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        d["__type__"] = type(obj).__name__
        return d
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return repr(obj)
    return obj


def scenario_digest(s: Scenario) -> str:
    blob = json.dumps(_jsonable(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def trial_seed(master_seed: int, gamma_index: int, trial_index: int) -> int:
    """Per-trial seed; depends only on its three coordinates, never on execution order."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(gamma_index), int(trial_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _grid(p: FmcwParams, m: WaveformMetrics):
    t = np.arange(m.N_s) / m.f_s
    l = np.arange(p.N_f)
    return t, l


def target_beat_samples(p: FmcwParams, m: WaveformMetrics, amplitude: complex, R: float,
                        nu: float) -> np.ndarray:
    f_b = beat_frequency(p, R)
    if f_b > p.B_c:
        raise ValueError(f"beat frequency {f_b:.4g} Hz exceeds the LPF cutoff {p.B_c:.4g} Hz")
    f_D = doppler_frequency(p, nu)
    t, l = _grid(p, m)
    fast = np.exp(2j * np.pi * f_b * t)
    slow = np.exp(2j * np.pi * f_D * l * p.T_r)
    carrier = np.exp(4j * np.pi * p.f_c * R / C0)
    return (amplitude * carrier) * np.outer(slow, fast)


def interference_gate(p: FmcwParams, m: WaveformMetrics, slope: float, tau: float, T_I: float):
    """Time grids and pass mask of an interferer chirp train over one victim frame.

    Returns ``(t, u, delta_f, gate)``, all shaped (N_f, N_s): victim local
    time, interferer local time, instantaneous frequency difference, and the
    boolean mask where the difference lies within the LPF cutoff.
    """
    t, l = _grid(p, m)
    T = l[:, None] * p.T_r + t[None, :]
    u = np.mod(T - tau, T_I)
    tt = np.broadcast_to(t, T.shape)
    delta_f = m.S_V * tt - slope * u
    gate = np.abs(delta_f) <= p.B_c
    return tt, u, delta_f, gate


def interference_beat_samples(p: FmcwParams, m: WaveformMetrics, i: InterfererSpec, tau: float,
                              slope: float | None = None) -> np.ndarray:
    if slope is None:
        lo, hi = i.slope_bounds()
        if lo != hi:
            raise ValueError("interferer has a random slope; pass the realized slope")
        slope = lo
    T_I = i.chirp_period(slope)
    if not 0 <= tau < T_I:
        raise ValueError("tau must lie within one interferer chirp period")
    t, u, _, gate = interference_gate(p, m, slope, tau, T_I)
    amp = math.sqrt(interference_power(p, i))
    x = np.zeros(gate.shape, dtype=np.complex128)
    tg, ug = t[gate], u[gate]
    x[gate] = amp * np.exp(1j * np.pi * (m.S_V * tg * tg - slope * ug * ug))
    return x


def target_amplitude(s: Scenario, gamma: float | None = None) -> tuple[complex, float]:
    """Complex echo amplitude (without the carrier term) and receiver-referred IRS noise power."""
    refl = s.target.reflector
    p, R = s.fmcw, s.target.R
    if isinstance(refl, BareRcs):
        return complex(math.sqrt(echo_power(p, refl.sigma, R))), 0.0
    if isinstance(refl, PassiveIrs):
        ret = irs_return(refl.irs, s.geometry, None, p, R)
    elif isinstance(refl, ActiveIrs):
        ret = irs_return(refl.irs, s.geometry, refl.gamma if gamma is None else gamma, p, R)
    else:
        raise TypeError(f"unknown reflector {refl!r}")
    # target_beat_samples applies the carrier term itself
    amp = ret.amplitude * np.exp(-4j * np.pi * p.f_c * R / C0)
    return complex(amp), ret.element_noise_power_at_rx


def compose_beat_frame(s: Scenario, gamma: float | None = None, seed: int = 0, *,
                       include_target: bool = True, include_interference: bool = True,
                       metrics: WaveformMetrics | None = None, validate: bool = True) -> BeatFrame:
    """Synthesize one frame: target/IRS echo + gated interference + noise.

    ``gamma`` is the linear reflection gain of an active IRS target (ignored
    for other reflectors). The output depends only on ``(s, gamma, seed)``.
    """
    p = s.fmcw
    m = metrics or derive_waveform_metrics(p)
    if validate:
        report = validate_scenario(s, m)
        if not report.ok:
            raise ValueError("invalid scenario: " + "; ".join(str(d) for d in report.errors))
    rng = np.random.default_rng(seed)
    data = np.zeros((p.N_f, m.N_s), dtype=np.complex128)

    amp, irs_noise = target_amplitude(s, gamma)
    if include_target:
        data += target_beat_samples(p, m, amp, s.target.R, s.target.nu)

    realized = []
    for intf in s.interferers:
        S_I, tau = intf.draw(rng, p.T_r)
        tau = math.fmod(tau, intf.chirp_period(S_I))
        realized.append((S_I, tau))
        if include_interference:
            data += interference_beat_samples(p, m, intf, tau, slope=S_I)

    if s.noise_enabled:
        var = receiver_noise_power(p) + irs_noise
        noise = rng.standard_normal((2, p.N_f, m.N_s))
        data += math.sqrt(var / 2) * (noise[0] + 1j * noise[1])

    meta = {"seed": int(seed), "gamma": None if gamma is None else float(gamma),
            "range_per_bin": m.range_per_bin, "velocity_per_bin": m.delta_nu,
            "interferers": [{"slope": a, "tau": b} for a, b in realized]}
    return BeatFrame(data, m.f_s, p.T_r, meta)
