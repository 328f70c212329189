"""Small statistics helpers: log-log regression and sample moments."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from mashumaro import DataClassDictMixin
from scipy import stats

from fracvol.helpers.errors import InsufficientDataError


@dataclass
class SlopeFit(DataClassDictMixin):
    """Result of a straight-line fit in log-log coordinates."""

    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int


def loglog_slope(
    x: Sequence[float], y: Sequence[float], confidence: float = 0.95
) -> SlopeFit:
    """Fit log|y| = intercept + slope * log x and return the slope with its interval."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if x.size < 3 or x.size != y.size:
        raise InsufficientDataError(
            f"log-log regression needs at least 3 paired points, got {x.size}"
        )
    if np.any(x <= 0) or np.any(y <= 0):
        raise InsufficientDataError("log-log regression needs positive values")
    fit = stats.linregress(np.log(x), np.log(y))
    quantile = stats.t.ppf(0.5 + 0.5 * confidence, x.size - 2)
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        ci_low=float(fit.slope - quantile * fit.stderr),
        ci_high=float(fit.slope + quantile * fit.stderr),
        n_points=int(x.size),
    )


def sample_autocovariance(values: np.ndarray, lag: int) -> np.ndarray:
    """Return per-path autocovariance estimates at an integer lag (known zero mean)."""
    values = np.atleast_2d(values)
    if lag == 0:
        return np.mean(values * values, axis=1)
    return np.mean(values[:, :-lag] * values[:, lag:], axis=1)


def mean_and_stderr(samples: np.ndarray):
    """Return the sample mean and its standard error."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise InsufficientDataError("standard error needs at least 2 samples")
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(samples.size))
