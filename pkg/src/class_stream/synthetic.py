"""Seeded synthetic streams with known change points."""

import numpy as np

FAMILIES = ("sine", "square", "sawtooth", "triangle")


def waveform(family: str, n: int, period: float, phase: float = 0.0) -> np.ndarray:
    t = (np.arange(n) / period + phase) % 1.0
    if family == "sine":
        return np.sin(2 * np.pi * t)
    if family == "square":
        return np.where(t < 0.5, 1.0, -1.0)
    if family == "sawtooth":
        return 2.0 * t - 1.0
    if family == "triangle":
        return 1.0 - 4.0 * np.abs(t - 0.5)
    raise ValueError(f"unknown waveform family {family!r}")


def two_regime_stream(seed: int, n_per_regime: int = 3000, noise: float = 0.1,
                      period_range: tuple[int, int] = (30, 70)
                      ) -> tuple[np.ndarray, int, dict]:
    """Two noisy periodic regimes from distinct waveform families.

    Returns the values, the 1-based timestamp of the first point of the
    second regime, and a description of the regimes.
    """
    rng = np.random.default_rng(seed)
    fam_a, fam_b = rng.choice(len(FAMILIES), size=2, replace=False)
    p_a, p_b = rng.integers(period_range[0], period_range[1] + 1, size=2)
    a = waveform(FAMILIES[fam_a], n_per_regime, p_a, rng.random())
    b = waveform(FAMILIES[fam_b], n_per_regime, p_b, rng.random())
    x = np.concatenate([a, b]) + noise * rng.standard_normal(2 * n_per_regime)
    info = {"families": (FAMILIES[fam_a], FAMILIES[fam_b]), "periods": (int(p_a), int(p_b))}
    return x, n_per_regime + 1, info


def sine_then_square(n_per_regime: int = 3000, noise: float = 0.1, seed: int = 0,
                     sine_period: int = 40, square_period: int = 60) -> tuple[np.ndarray, int]:
    rng = np.random.default_rng(seed)
    x = np.concatenate([waveform("sine", n_per_regime, sine_period),
                        waveform("square", n_per_regime, square_period)])
    return x + noise * rng.standard_normal(x.size), n_per_regime + 1


def regime_stream(n: int, seed: int = 0, regime_len: int = 10_000, noise: float = 0.1,
                  period_range: tuple[int, int] = (30, 70)) -> tuple[np.ndarray, list[int]]:
    """Long stream cycling through random waveform regimes of ``regime_len`` points.

    Consecutive regimes always differ in family. Returns the values and the
    1-based timestamps where each new regime starts.
    """
    rng = np.random.default_rng(seed)
    parts, starts, fam = [], [], -1
    for start in range(0, n, regime_len):
        fam = int(rng.choice([f for f in range(len(FAMILIES)) if f != fam]))
        period = rng.integers(period_range[0], period_range[1] + 1)
        parts.append(waveform(FAMILIES[fam], min(regime_len, n - start), period, rng.random()))
        if start:
            starts.append(start + 1)
    x = np.concatenate(parts) + noise * rng.standard_normal(n)
    return x, starts
