"""Range-Doppler processing and cell-averaging CFAR detection.

Both stages are scikit-learn estimators so they can be tuned with
``get_params``/``set_params`` and chained in a ``Pipeline``::

    pipe = make_pipeline(RangeDopplerProcessor(), CaCfarDetector(pfa=1e-5))
    masks = pipe.fit(frames).predict(frames)

Map layout is ``(range bin, Doppler bin)`` with the Doppler axis fft-shifted
so column ``N_f // 2`` is zero velocity. Forward transforms are
unnormalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_frames, check_is_fitted, check_positive_int, check_power_maps
from .params import WaveformMetrics

_WINDOWS = ("rect", "hann")


@dataclass
class RangeDopplerMap:
    power: np.ndarray  # (N_s, N_f) linear power
    range_per_bin: float  # m
    velocity_per_bin: float  # m/s

    @property
    def shape(self):
        return self.power.shape

    @property
    def range_axis(self) -> np.ndarray:
        return np.arange(self.power.shape[0]) * self.range_per_bin

    @property
    def doppler_axis(self) -> np.ndarray:
        n_f = self.power.shape[1]
        return (np.arange(n_f) - n_f // 2) * self.velocity_per_bin

    def to_csv(self, path):
        """Dump the power matrix as CSV plus a JSON sidecar ``<path>.json`` with the axes."""
        import io

        from ._io import atomic_write_json, atomic_write_text

        buf = io.StringIO()
        np.savetxt(buf, self.power, delimiter=",", fmt="%.9e")
        atomic_write_text(path, buf.getvalue())
        atomic_write_json(str(path) + ".json", {
            "rows": "range_bin", "cols": "doppler_bin",
            "n_range": int(self.power.shape[0]), "n_doppler": int(self.power.shape[1]),
            "range_per_bin_m": self.range_per_bin,
            "velocity_per_bin_mps": self.velocity_per_bin,
            "zero_doppler_col": int(self.power.shape[1] // 2),
            "range_axis_m": self.range_axis.tolist(),
            "doppler_axis_mps": self.doppler_axis.tolist(),
        })
        return path


@dataclass(frozen=True)
class CfarConfig:
    train_range: int = 8
    train_doppler: int = 4
    guard_range: int = 2
    guard_doppler: int = 2
    pfa: float = 1e-5


@dataclass(frozen=True)
class Detection:
    range_bin: int
    doppler_bin: int
    R: float
    nu: float
    snr_est: float  # dB over the local noise estimate


def _window(kind, n):
    if kind == "rect":
        return np.ones(n)
    if kind == "hann":
        return np.hanning(n)
    raise ValueError(f"window must be one of {_WINDOWS}, got {kind!r}")


def rd_power(frames: np.ndarray, window: str = "rect") -> np.ndarray:
    """(n, N_f, N_s) complex frames -> (n, N_s, N_f) power maps."""
    n_f, n_s = frames.shape[-2:]
    w = np.outer(_window(window, n_f), _window(window, n_s))
    spec = np.fft.fft(np.fft.fft(frames * w, axis=-1), axis=-2)
    spec = np.fft.fftshift(spec, axes=-2)
    return np.swapaxes(np.abs(spec) ** 2, -1, -2)


class RangeDopplerProcessor(TransformerMixin, BaseEstimator):
    """2-D FFT of beat frames into range-Doppler power maps.

    Parameters
    ----------
    window : {"rect", "hann"}
        Taper applied along both fast and slow time before the transforms.
    """

    def __init__(self, window="rect"):
        self.window = window

    def fit(self, X, y=None):
        if self.window not in _WINDOWS:
            raise ValueError(f"window must be one of {_WINDOWS}, got {self.window!r}")
        X, _ = check_frames(X)
        self.n_chirps_, self.n_samples_ = X.shape[1:]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_chirps_")
        X, squeeze = check_frames(X)
        if X.shape[1:] != (self.n_chirps_, self.n_samples_):
            raise ValueError(f"frames have shape {X.shape[1:]}, fitted on "
                             f"{(self.n_chirps_, self.n_samples_)}")
        out = rd_power(X, self.window)
        return out[0] if squeeze else out


def range_doppler_map(frame, window: str = "rect", metrics: WaveformMetrics | None = None) -> RangeDopplerMap:
    X, _ = check_frames(frame)
    power = rd_power(X, window)[0]
    if metrics is not None:
        if (metrics.N_s,) != power.shape[:1]:
            raise ValueError("frame length does not match the waveform metrics")
        dr, dv = metrics.range_per_bin, metrics.delta_nu
    else:
        meta = getattr(frame, "meta", {})
        dr, dv = meta.get("range_per_bin", 1.0), meta.get("velocity_per_bin", 1.0)
    return RangeDopplerMap(power, dr, dv)


def cfar_scale(n_train, pfa):
    """CA-CFAR multiplier for exponential (square-law) noise with ``n_train`` reference cells."""
    n_train = np.asarray(n_train, dtype=float)
    return n_train * (pfa ** (-1.0 / n_train) - 1.0)


def _box_sum(a, half_r, half_d):
    k_r = np.ones(2 * half_r + 1)
    k_d = np.ones(2 * half_d + 1)
    s = ndimage.correlate1d(a, k_r, axis=-2, mode="constant")
    return ndimage.correlate1d(s, k_d, axis=-1, mode="constant")


class CaCfarDetector(BaseEstimator):
    """Two-dimensional cell-averaging CFAR on square-law range-Doppler maps.

    The reference window is the rectangle of ``train + guard`` cells per
    side minus the inner guard rectangle (which holds the cell under test).
    Doppler wraps around; in range the window is truncated at the map edges
    and the scale factor uses the number of cells actually available.

    Parameters
    ----------
    train_range, train_doppler : int
        Training cells per side along each axis.
    guard_range, guard_doppler : int
        Guard cells per side along each axis.
    pfa : float
        Design false-alarm probability per cell.
    """

    def __init__(self, train_range=8, train_doppler=4, guard_range=2, guard_doppler=2, pfa=1e-5):
        self.train_range = train_range
        self.train_doppler = train_doppler
        self.guard_range = guard_range
        self.guard_doppler = guard_doppler
        self.pfa = pfa

    @classmethod
    def from_config(cls, cfg: CfarConfig):
        return cls(cfg.train_range, cfg.train_doppler, cfg.guard_range, cfg.guard_doppler, cfg.pfa)

    def _check_config(self):
        for name in ("train_range", "train_doppler", "guard_range", "guard_doppler"):
            check_positive_int(name, getattr(self, name))
        if self.train_range + self.train_doppler == 0:
            raise ValueError("training window is empty")
        if not 0 < self.pfa < 1:
            raise ValueError(f"pfa must lie in (0, 1), got {self.pfa!r}")

    @property
    def footprint(self):
        return (2 * (self.train_range + self.guard_range) + 1,
                2 * (self.train_doppler + self.guard_doppler) + 1)

    def fit(self, X, y=None):
        self._check_config()
        X, _ = check_power_maps(X)
        n_r, n_d = X.shape[1:]
        fr, fd = self.footprint
        if fr > n_r or fd > n_d:
            raise ValueError(f"CFAR window {self.footprint} is larger than the map {(n_r, n_d)}")
        self.map_shape_ = (n_r, n_d)
        ones = np.ones((1, n_r, n_d))
        self.n_train_ = self._training_sums(ones)[0]
        self.scale_ = cfar_scale(self.n_train_, self.pfa)
        return self

    def _training_sums(self, X):
        pr = self.train_range + self.guard_range
        pd = self.train_doppler + self.guard_doppler
        # wrap Doppler explicitly; zero padding in range truncates the window
        padded = np.pad(X, ((0, 0), (0, 0), (pd, pd)), mode="wrap")
        outer = _box_sum(padded, pr, pd)
        inner = _box_sum(padded, self.guard_range, self.guard_doppler)
        return (outer - inner)[:, :, pd:pd + X.shape[2]]

    def noise_estimate(self, X):
        check_is_fitted(self, "n_train_")
        X, squeeze = check_power_maps(X)
        self._check_shape(X)
        est = self._training_sums(X) / self.n_train_
        return est[0] if squeeze else est

    def threshold(self, X):
        est = self.noise_estimate(X)
        return self.scale_ * est

    def _check_shape(self, X):
        if X.shape[1:] != self.map_shape_:
            raise ValueError(f"map shape {X.shape[1:]} differs from fitted {self.map_shape_}")

    def predict(self, X):
        """Boolean detection mask(s), same shape as ``X``."""
        X = getattr(X, "power", X)
        check_is_fitted(self, "n_train_")
        Xc, squeeze = check_power_maps(X)
        self._check_shape(Xc)
        est = self._training_sums(Xc) / self.n_train_
        mask = Xc > self.scale_ * est
        return mask[0] if squeeze else mask

    def detect(self, rdmap: RangeDopplerMap) -> list[Detection]:
        """All threshold crossings of one map, ordered by decreasing power."""
        power = rdmap.power
        est = self.noise_estimate(power)
        mask = power > self.scale_ * est
        rows, cols = np.nonzero(mask)
        order = np.argsort(-power[rows, cols], kind="stable")
        out = []
        for r, c in zip(rows[order], cols[order]):
            R, nu = bin_to_physical(rdmap, (r, c))
            with np.errstate(divide="ignore"):
                snr = 10 * np.log10(power[r, c] / est[r, c]) if est[r, c] > 0 else np.inf
            out.append(Detection(int(r), int(c), R, nu, float(snr)))
        return out


def ca_cfar_detect(rdmap: RangeDopplerMap, cfg: CfarConfig = CfarConfig()) -> list[Detection]:
    det = CaCfarDetector.from_config(cfg).fit(rdmap.power)
    return det.detect(rdmap)


def bin_to_physical(rdmap: RangeDopplerMap, bins) -> tuple[float, float]:
    r, d = bins
    n_r, n_d = rdmap.power.shape
    if not (0 <= r < n_r and 0 <= d < n_d):
        raise IndexError(f"bin {(r, d)} outside map of shape {(n_r, n_d)}")
    return float(r * rdmap.range_per_bin), float((d - n_d // 2) * rdmap.velocity_per_bin)
