"""Input checks shared by the estimators (sklearn's check_array rejects complex data)."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.exceptions import NotFittedError


def check_frames(X, *, min_shape=(2, 2)):
    """Return ``(stack, squeeze)``: a (n_frames, N_f, N_s) complex array and whether input was 2-D."""
    from .synth import BeatFrame

    if isinstance(X, BeatFrame):
        X = X.data
    elif isinstance(X, (list, tuple)) and X and isinstance(X[0], BeatFrame):
        X = np.stack([f.data for f in X])
    X = np.asarray(X)
    if X.ndim not in (2, 3):
        raise ValueError(f"expected a (N_f, N_s) frame or a stack of frames, got shape {X.shape}")
    if not (np.issubdtype(X.dtype, np.complexfloating) or np.issubdtype(X.dtype, np.floating)
            or np.issubdtype(X.dtype, np.integer)):
        raise TypeError(f"frame data must be numeric, got {X.dtype}")
    squeeze = X.ndim == 2
    X = X[None] if squeeze else X
    if X.shape[1] < min_shape[0] or X.shape[2] < min_shape[1]:
        raise ValueError(f"frame dimensions {X.shape[1:]} are smaller than {min_shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("frame contains non-finite samples")
    return X.astype(np.complex128, copy=False), squeeze


def check_power_maps(X):
    X = np.asarray(X, dtype=float)
    squeeze = X.ndim == 2
    X = X[None] if squeeze else X
    if X.ndim != 3:
        raise ValueError(f"expected a 2-D map or a stack of maps, got shape {X.shape}")
    if np.any(X < 0) or not np.all(np.isfinite(X)):
        raise ValueError("power maps must be finite and non-negative")
    return X, squeeze


def check_positive_int(name, value, minimum=0):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")


def check_is_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")
