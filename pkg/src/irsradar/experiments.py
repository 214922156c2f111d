"""Monte-Carlo detection-probability sweeps and analytic SIR / RCS curves."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import binomtest
from sklearn.isotonic import IsotonicRegression

from .irs import ActiveIrs, IrsSpec, active_array_rcs, element_rcs, printed_signal_strength
from .params import (C0, classify_slope_ratio, derive_waveform_metrics, lin_to_db, physical_to_bin,
                     validate_scenario)
from .processing import CaCfarDetector, CfarConfig, rd_power
from .propagation import BareRcs, echo_power, interference_power
from .synth import Scenario, compose_beat_frame, scenario_digest, trial_seed

BASELINE_RCS_DBSM = 10.0
THREADS_ENV = "IRSRADAR_THREADS"


@dataclass(frozen=True)
class DetectorSettings:
    cfar: CfarConfig = CfarConfig()
    window: str = "rect"
    hit_tolerance: int = 1  # bins, both axes


@dataclass(frozen=True)
class TrialOutcome:
    hit: bool
    detected_bin: tuple[int, int] | None
    gamma: float | None
    seed: int


@dataclass
class SweepResult:
    kind: str  # "PdSimilar", "PdSweeping", "Pd", "Sir", "Rcs"
    gamma_db: np.ndarray
    digest: str = ""
    trials: np.ndarray | None = None
    hits: np.ndarray | None = None
    values: np.ndarray | None = None  # SIR in dB or RCS in dBsm
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gamma_db = np.asarray(self.gamma_db, dtype=float)
        if np.any(np.diff(self.gamma_db) <= 0):
            raise ValueError("gamma grid must be strictly increasing")

    @property
    def pd(self) -> np.ndarray:
        return self.hits / self.trials

    @property
    def ci(self) -> tuple[np.ndarray, np.ndarray]:
        """Exact (Clopper-Pearson) 95% intervals per point."""
        lo, hi = [], []
        for k, n in zip(self.hits, self.trials):
            iv = binomtest(int(k), int(n)).proportion_ci(0.95, method="exact")
            lo.append(iv.low)
            hi.append(iv.high)
        return np.array(lo), np.array(hi)

    def smoothed_pd(self) -> np.ndarray:
        iso = IsotonicRegression(increasing=True, y_min=0.0, y_max=1.0)
        return iso.fit_transform(self.gamma_db, self.pd, sample_weight=self.trials)

    def threshold_db(self, level: float = 0.99, smooth: bool = True) -> float | None:
        """Smallest grid gain whose (isotonic-smoothed) P_D reaches ``level``."""
        pd = self.smoothed_pd() if smooth else self.pd
        idx = np.flatnonzero(pd >= level - 1e-12)
        return float(self.gamma_db[idx[0]]) if idx.size else None

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        if self.hits is not None:
            lo, hi = self.ci
            buf.write("gamma_db,trials,hits,pd,ci_lo,ci_hi\n")
            for row in zip(self.gamma_db, self.trials, self.hits, self.pd, lo, hi):
                buf.write("{:.4f},{:d},{:d},{:.6f},{:.6f},{:.6f}\n".format(
                    row[0], int(row[1]), int(row[2]), *row[3:]))
        elif self.kind == "Rcs":
            buf.write("gamma_db,rcs_dbsm,baseline_dbsm,passive_dbsm\n")
            for g, v in zip(self.gamma_db, self.values):
                buf.write(f"{g:.4f},{v:.6f},{self.extra['baseline_dbsm']:.6f},"
                          f"{self.extra['passive_dbsm']:.6f}\n")
        else:
            buf.write("gamma_db,sir_db\n")
            for g, v in zip(self.gamma_db, self.values):
                buf.write(f"{g:.4f},{v:.6f}\n")
        return buf.getvalue()

    def to_csv(self, path):
        from ._io import atomic_write_text

        return atomic_write_text(path, self.to_csv_text())


def parse_gamma_grid(text: str) -> np.ndarray:
    """``"start:stop:step"`` in dB, stop inclusive; a single number gives one point."""
    parts = [float(x) for x in str(text).split(":")]
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise ValueError(f"gamma grid must be start:stop:step with step > 0, got {text!r}")
    start, stop, step = parts
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 10)


@lru_cache(maxsize=16)
def _detector(cfar: CfarConfig, shape: tuple[int, int]) -> CaCfarDetector:
    return CaCfarDetector.from_config(cfar).fit(np.ones(shape))


def _true_cell(s: Scenario):
    m = derive_waveform_metrics(s.fmcw)
    return physical_to_bin(m, s.target.R, s.target.nu, s.fmcw.N_f)


def evaluate_map(power: np.ndarray, truth, settings: DetectorSettings):
    """Hit test on one map: strongest CFAR crossing within tolerance of ``truth``, or None."""
    det = _detector(settings.cfar, power.shape)
    mask = det.predict(power)
    r0, d0 = truth
    tol = settings.hit_tolerance
    n_r, n_d = power.shape
    rows = np.arange(max(r0 - tol, 0), min(r0 + tol, n_r - 1) + 1)
    cols = np.mod(np.arange(d0 - tol, d0 + tol + 1), n_d)
    sub = np.where(mask[np.ix_(rows, cols)], power[np.ix_(rows, cols)], -np.inf)
    if not np.isfinite(sub).any():
        return None
    i, j = np.unravel_index(np.argmax(sub), sub.shape)
    return int(rows[i]), int(cols[j])


def run_trial(s: Scenario, gamma: float | None, seed: int,
              settings: DetectorSettings = DetectorSettings()) -> TrialOutcome:
    """Synthesize, transform and detect one frame; a hit is a detection near the true cell."""
    frame = compose_beat_frame(s, gamma, seed, validate=False)
    power = rd_power(frame.data[None], settings.window)[0]
    found = evaluate_map(power, _true_cell(s), settings)
    return TrialOutcome(found is not None, found, gamma, seed)


def _gamma_lin(s: Scenario, g_db: float) -> float | None:
    return 10 ** (g_db / 10) if isinstance(s.target.reflector, ActiveIrs) else None


def _run_chunk(args):
    s, settings, g_idx, g_db, start, stop = args
    gamma = _gamma_lin(s, g_db)
    hits = 0
    for t in range(start, stop):
        hits += run_trial(s, gamma, trial_seed(s.master_seed, g_idx, t), settings).hit
    return hits


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def curve_kind(s: Scenario) -> str:
    if not s.interferers:
        return "Pd"
    m = derive_waveform_metrics(s.fmcw)
    kinds = {classify_slope_ratio(b / m.S_V) for i in s.interferers for b in i.slope_bounds()}
    if kinds == {"similar"}:
        return "PdSimilar"
    if kinds == {"sweeping"}:
        return "PdSweeping"
    return "Pd"


def detection_probability_sweep(s: Scenario, gamma_grid_db, trials_per_point: int,
                                settings: DetectorSettings = DetectorSettings(),
                                workers: int | None = None, chunk: int = 50) -> SweepResult:
    """P_D versus active-IRS reflection gain.

    Each (gain index, trial index) pair owns a fixed seed, so the result is
    identical for any ``workers`` value. For targets that are not active
    IRS the gain has no effect and the curve is flat up to Monte-Carlo noise.
    """
    if trials_per_point < 1:
        raise ValueError("trials_per_point must be >= 1")
    report = validate_scenario(s)
    if not report.ok:
        raise ValueError("invalid scenario: " + "; ".join(str(d) for d in report.errors))
    grid = np.asarray(gamma_grid_db, dtype=float)
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(s, settings, gi, float(g), a, min(a + chunk, trials_per_point))
            for gi, g in enumerate(grid) for a in range(0, trials_per_point, chunk)]
    if workers == 1:
        counts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counts = list(ex.map(_run_chunk, jobs))
    hits = np.zeros(len(grid), dtype=int)
    for job, c in zip(jobs, counts):
        hits[job[2]] += c
    return SweepResult(curve_kind(s), grid, scenario_digest(s),
                       trials=np.full(len(grid), trials_per_point), hits=hits)


def baseline_scenario(s: Scenario, rcs_dbsm: float = BASELINE_RCS_DBSM) -> Scenario:
    """Same world with the IRS replaced by a plain vehicle of the given RCS."""
    t = s.target
    return s.replace(target=type(t)(t.R, t.nu, BareRcs(10 ** (rcs_dbsm / 10))))


def sir_db(s: Scenario, gamma: float, printed_form: bool = False) -> float:
    refl = s.target.reflector
    if not isinstance(refl, ActiveIrs):
        raise TypeError("SIR curve needs an active-IRS target")
    if not s.interferers:
        raise ValueError("SIR curve needs at least one interferer")
    p = s.fmcw
    m = derive_waveform_metrics(p)
    if printed_form:
        p_a = printed_signal_strength(refl.irs, gamma, p, s.target.R)
    else:
        p_a = echo_power(p, active_array_rcs(refl.irs, gamma, p.f_c), s.target.R)
    p_i = sum(interference_power(p, i) for i in s.interferers)
    return 10 * math.log10(m.G_P * p_a / p_i)


def sir_curve(s: Scenario, gamma_grid_db, printed_form: bool = False) -> SweepResult:
    """Post-integration SIR versus reflection gain (analytic, no Monte Carlo)."""
    grid = np.asarray(gamma_grid_db, dtype=float)
    vals = np.array([sir_db(s, 10 ** (g / 10), printed_form) for g in grid])
    return SweepResult("Sir", grid, scenario_digest(s), values=vals,
                       extra={"printed_form": printed_form})


def rcs_curve(irs_spec: IrsSpec, gamma_grid_db, f_c: float = 77e9,
              baseline_dbsm: float = BASELINE_RCS_DBSM) -> SweepResult:
    grid = np.asarray(gamma_grid_db, dtype=float)
    vals = np.array([lin_to_db(active_array_rcs(irs_spec, 10 ** (g / 10), f_c)) for g in grid])
    passive = lin_to_db(irs_spec.n_elements * element_rcs(C0 / f_c, irs_spec.G_e))
    return SweepResult("Rcs", grid, values=vals,
                       extra={"baseline_dbsm": baseline_dbsm, "passive_dbsm": passive})


def baseline_crossing_db(irs_spec: IrsSpec, f_c: float = 77e9,
                         baseline_dbsm: float = BASELINE_RCS_DBSM) -> float:
    """Reflection gain at which the active surface matches the baseline vehicle RCS."""
    passive = irs_spec.n_elements * element_rcs(C0 / f_c, irs_spec.G_e)
    return baseline_dbsm - lin_to_db(passive)
