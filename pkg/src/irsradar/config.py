"""JSON scenario files (schema version 1).

Layout, all blocks optional except ``target``; omitted values take the
Table-II victim radar defaults::

    {
      "schema_version": 1,
      "waveform": {"carrier_hz": 77e9, "sweep_bandwidth_hz": 150e6,
                   "chirp_duration_s": 7.33e-6, "chirps_per_frame": 128,
                   "lpf_cutoff_hz": 27.27e6},
      "rf": {"tx_power_dbm": 0, "tx_gain_db": 20, "rx_gain_db": 20,
             "noise_figure_db": 15, "temperature_k": 296},
      "target": {"range_m": 180, "velocity_mps": 25,
                 "reflector": {"kind": "active_irs", "rows": 256, "cols": 256,
                               "reflection_gain_db": 0}},
      "geometry": {"azimuth_deg": 0, "elevation_deg": 0},
      "interferers": [{"range_m": 50, "slope_factor": [0.9, 1.1],
                       "time_offset_s": "random"}],
      "noise_enabled": true,
      "master_seed": 7,
      "detector": {"pfa": 1e-5, "train_range": 8, "guard_range": 2,
                   "train_doppler": 4, "guard_doppler": 2,
                   "window": "rect", "hit_tolerance_bins": 1}
    }

Reflector kinds: ``bare`` (``rcs_dbsm``), ``passive_irs`` and ``active_irs``
(``rows``, ``cols``, ``pitch_m`` default half wavelength, ``element_gain``
linear default pi, ``phase_profile`` one of ``"optimal"``,
``{"uniform": rad}``, ``{"custom": [rad, ...]}``).

Interferer slope is ``slope_hz_per_s`` (fixed), ``slope_factor`` (fixed
multiple of the victim slope) or ``slope_factor: [lo, hi]`` (uniform per
trial). The repetition interval comes from ``sweep_bandwidth_hz`` (default
150 MHz) unless ``chirp_duration_s`` is given.
"""

from __future__ import annotations

import json
import logging
import math
from importlib import resources
from pathlib import Path

from .experiments import DetectorSettings
from .irs import ActiveIrs, Custom, Geometry, IrsSpec, Optimal, PassiveIrs, Uniform
from .params import C0, FmcwParams, db_to_lin, validate_scenario
from .processing import CfarConfig
from .propagation import BareRcs, InterfererSpec, TargetSpec
from .synth import Scenario

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TABLE2 = FmcwParams()


class ScenarioError(ValueError):
    """Malformed or invalid scenario file."""

    def __init__(self, message, field=None, line=None, diagnostics=()):
        self.field = field
        self.line = line
        self.diagnostics = list(diagnostics)
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _block(doc, key, path=""):
    val = doc.get(key)
    if val is None:
        return None
    if not isinstance(val, dict):
        raise ScenarioError("expected an object", f"{path}{key}")
    return val


def _num(d, key, default, path, *, integer=False):
    if key not in d:
        if default is None:
            raise ScenarioError("required field missing", f"{path}{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"expected a finite number, got {v!r}", f"{path}{key}")
    if integer:
        if int(v) != v:
            raise ScenarioError(f"expected an integer, got {v!r}", f"{path}{key}")
        return int(v)
    return float(v)


def _fmcw(doc) -> FmcwParams:
    w = _block(doc, "waveform") or {}
    rf = _block(doc, "rf")
    if rf is None:
        log.warning("scenario has no 'rf' block; using the default transmitter/receiver values")
        rf = {}
    p = "waveform."
    q = "rf."
    try:
        return FmcwParams(
            f_c=_num(w, "carrier_hz", TABLE2.f_c, p),
            B_s=_num(w, "sweep_bandwidth_hz", TABLE2.B_s, p),
            T_r=_num(w, "chirp_duration_s", TABLE2.T_r, p),
            N_f=_num(w, "chirps_per_frame", TABLE2.N_f, p, integer=True),
            B_c=_num(w, "lpf_cutoff_hz", TABLE2.B_c, p),
            P_t=db_to_lin(_num(rf, "tx_power_dbm", 0.0, q)) * 1e-3,
            G_t=db_to_lin(_num(rf, "tx_gain_db", 20.0, q)),
            G_r=db_to_lin(_num(rf, "rx_gain_db", 20.0, q)),
            F_n=db_to_lin(_num(rf, "noise_figure_db", 15.0, q)),
            T_0=_num(rf, "temperature_k", TABLE2.T_0, q),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc), "waveform/rf") from exc


def _phase_profile(v, path):
    if v is None or v == "optimal":
        return Optimal()
    if isinstance(v, dict) and len(v) == 1:
        (k, x), = v.items()
        if k == "uniform":
            return Uniform(_num(v, "uniform", None, path))
        if k == "custom" and isinstance(x, list):
            return Custom(tuple(float(a) for a in x))
    raise ScenarioError("expected 'optimal', {\"uniform\": rad} or {\"custom\": [...]}", path)


def _reflector(d, f_c, path):
    kind = d.get("kind")
    if kind == "bare":
        return BareRcs(db_to_lin(_num(d, "rcs_dbsm", 10.0, path)))
    if kind not in ("passive_irs", "active_irs"):
        raise ScenarioError(f"unknown reflector kind {kind!r}", path + "kind")
    spec = IrsSpec(
        rows=_num(d, "rows", 256, path, integer=True),
        cols=_num(d, "cols", 256, path, integer=True),
        pitch=_num(d, "pitch_m", C0 / f_c / 2, path),
        G_e=_num(d, "element_gain", math.pi, path),
        phase_profile=_phase_profile(d.get("phase_profile"), path + "phase_profile"),
    )
    if kind == "passive_irs":
        return PassiveIrs(spec)
    return ActiveIrs(spec, db_to_lin(_num(d, "reflection_gain_db", 0.0, path)))


def _interferer(d, fmcw, path):
    if not isinstance(d, dict):
        raise ScenarioError("expected an object", path.rstrip("."))
    if "slope_hz_per_s" in d:
        slope = _num(d, "slope_hz_per_s", None, path)
    elif "slope_factor" in d:
        f = d["slope_factor"]
        if isinstance(f, list):
            if len(f) != 2:
                raise ScenarioError("slope_factor range must be [lo, hi]", path + "slope_factor")
            slope = (float(f[0]) * fmcw.slope, float(f[1]) * fmcw.slope)
        else:
            slope = _num(d, "slope_factor", None, path) * fmcw.slope
    else:
        raise ScenarioError("give slope_hz_per_s or slope_factor", path + "slope")
    off = d.get("time_offset_s", "random")
    tau = None if off == "random" else _num(d, "time_offset_s", None, path)
    period = _num(d, "chirp_duration_s", 0.0, path) or None
    return InterfererSpec(
        R_I=_num(d, "range_m", None, path),
        slope=slope,
        B_sI=_num(d, "sweep_bandwidth_hz", 150e6, path),
        P_tI=db_to_lin(_num(d, "tx_power_dbm", 0.0, path)) * 1e-3,
        G_tI=db_to_lin(_num(d, "tx_gain_db", 20.0, path)),
        tau=tau,
        period=period,
    )


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    fmcw = _fmcw(doc)
    t = _block(doc, "target")
    if t is None:
        raise ScenarioError("required block missing", "target")
    refl = _block(t, "reflector", "target.") or {"kind": "bare", "rcs_dbsm": 10.0}
    try:
        target = TargetSpec(
            R=_num(t, "range_m", None, "target."),
            nu=_num(t, "velocity_mps", None, "target."),
            reflector=_reflector(refl, fmcw.f_c, "target.reflector."),
        )
        g = _block(doc, "geometry") or {}
        geometry = Geometry(math.radians(_num(g, "azimuth_deg", 0.0, "geometry.")),
                            math.radians(_num(g, "elevation_deg", 0.0, "geometry.")))
        raw_intf = doc.get("interferers", [])
        if not isinstance(raw_intf, list):
            raise ScenarioError("expected a list", "interferers")
        interferers = tuple(_interferer(d, fmcw, f"interferers[{k}].") for k, d in enumerate(raw_intf))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    noise = doc.get("noise_enabled", True)
    if not isinstance(noise, bool):
        raise ScenarioError("expected true/false", "noise_enabled")
    seed = _num(doc, "master_seed", 0, "", integer=True)
    return Scenario(fmcw, target, geometry, interferers, noise, seed)


def detector_from_dict(doc: dict) -> DetectorSettings:
    d = _block(doc, "detector") or {}
    p = "detector."
    base = CfarConfig()
    cfg = CfarConfig(
        train_range=_num(d, "train_range", base.train_range, p, integer=True),
        train_doppler=_num(d, "train_doppler", base.train_doppler, p, integer=True),
        guard_range=_num(d, "guard_range", base.guard_range, p, integer=True),
        guard_doppler=_num(d, "guard_doppler", base.guard_doppler, p, integer=True),
        pfa=_num(d, "pfa", base.pfa, p),
    )
    window = d.get("window", "rect")
    if window not in ("rect", "hann"):
        raise ScenarioError("expected 'rect' or 'hann'", p + "window")
    return DetectorSettings(cfg, window, _num(d, "hit_tolerance_bins", 1, p, integer=True))


def read_document(path) -> tuple[dict, bytes]:
    """Parse a scenario file or bundled scenario name; returns (document, raw bytes)."""
    raw = resolve_scenario_path(path).read_bytes()
    text = raw.decode("utf-8")
    if not text.strip():
        raise ScenarioError("file is empty", line=1)
    try:
        return json.loads(text), raw
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, line=exc.lineno) from exc


def resolve_scenario_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("irsradar") / "scenarios" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    if not p.suffix:
        bundled = resources.files("irsradar") / "scenarios" / (p.name + ".json")
        if bundled.is_file():
            return Path(str(bundled))
    raise FileNotFoundError(f"scenario file not found: {path}")


def bundled_scenarios() -> list[str]:
    return sorted(f.name for f in (resources.files("irsradar") / "scenarios").iterdir()
                  if f.name.endswith(".json"))


def load_scenario(path) -> Scenario:
    """Read, parse and validate a scenario; raises :class:`ScenarioError` on any problem."""
    doc, _ = read_document(path)
    s = scenario_from_dict(doc)
    report = validate_scenario(s)
    for w in report.warnings:
        log.warning("%s", w)
    if not report.ok:
        raise ScenarioError("scenario failed validation", diagnostics=report.errors)
    return s
