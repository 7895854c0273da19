"""Subsequence width selection from a stream prefix.

The default picks the lag of the highest autocorrelation peak; if the
autocorrelation shows no clear peak the dominant Fourier period is tried, and
failing that the lower bound is returned with a warning.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import StateError

# A peak must reach this autocorrelation to count as a temporal pattern.
ACF_MIN_PEAK = 0.2
# The dominant frequency must carry this many times the mean spectral power.
FFT_MIN_POWER_RATIO = 20.0

WIDTH_METHODS = ("acf", "fft")


class NoPeriodicityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WidthEstimate:
    width: int
    source: str  # "acf", "fft", "lower-bound" or "override"
    periodic: bool = True


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Biased sample autocorrelation for lags 0..n-1, normalised to 1 at lag 0."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    x = x - x.mean()
    spec = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(spec * np.conj(spec), 2 * n)[:n]
    if acf[0] <= 0.0:
        return np.zeros(n)
    return acf / acf[0]


def acf_width(x: np.ndarray, lower: int, upper: int) -> int | None:
    acf = autocorrelation(x)
    hi = min(upper, acf.size - 2)
    if hi < lower:
        return None
    lags = np.arange(lower, hi + 1)
    vals = acf[lags]
    peaks = (vals > acf[lags - 1]) & (vals > acf[lags + 1]) & (vals >= ACF_MIN_PEAK)
    if not peaks.any():
        return None
    return int(lags[peaks][np.argmax(vals[peaks])])


def fft_width(x: np.ndarray, lower: int, upper: int) -> int | None:
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    power = np.abs(np.fft.rfft(x - x.mean())) ** 2
    freqs = np.arange(power.size)
    with np.errstate(divide="ignore"):
        periods = np.where(freqs > 0, n / np.maximum(freqs, 1), np.inf)
    band = (periods >= lower) & (periods <= upper)
    mean_power = power[1:].mean() if power.size > 1 else 0.0
    if not band.any() or mean_power <= 0.0:
        return None
    idx = np.flatnonzero(band)[np.argmax(power[band])]
    if power[idx] < FFT_MIN_POWER_RATIO * mean_power:
        return None
    return int(np.clip(round(periods[idx]), lower, upper))


def learn_subsequence_width(prefix, lower: int, upper: int,
                            method: str = "acf") -> WidthEstimate:
    """Estimate the dominant temporal pattern length of ``prefix``.

    Requires ``2 <= lower < upper <= len(prefix) / 4``.
    """
    x = np.asarray(prefix, dtype=np.float64)
    if method not in WIDTH_METHODS:
        raise ValueError(f"unknown width method {method!r}, expected one of {WIDTH_METHODS}")
    if not 2 <= lower < upper:
        raise ValueError(f"width bounds must satisfy 2 <= lower < upper, got [{lower}, {upper}]")
    if 4 * upper > x.size:
        raise StateError(f"prefix of {x.size} values is too short for upper bound {upper}")
    if not np.isfinite(x).all():
        raise ValueError("prefix contains non-finite values")

    if method == "acf":
        w = acf_width(x, lower, upper)
        if w is not None:
            return WidthEstimate(w, "acf")
    w = fft_width(x, lower, upper)
    if w is not None:
        return WidthEstimate(w, "fft")
    warnings.warn(f"no periodicity found in [{lower}, {upper}]; using width {lower}",
                  NoPeriodicityWarning, stacklevel=2)
    return WidthEstimate(lower, "lower-bound", periodic=False)
