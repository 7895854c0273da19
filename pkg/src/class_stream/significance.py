"""Resampled Wilcoxon rank-sum test on the labels either side of a split."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtri
from scipy.stats import rankdata

from .clasp import ClaspProfile
from .errors import StateError


@dataclass(frozen=True)
class SignificanceConfig:
    alpha: float = 1e-50
    sample_size: int = 1000
    rng_seed: int | None = 0
    directional: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.sample_size < 2:
            raise ValueError(f"sample_size must be at least 2, got {self.sample_size}")


def z_threshold(alpha: float) -> float:
    """Critical |z| of a two-sided test at level ``alpha``."""
    return float(-ndtri(alpha / 2.0))


def log_p_value(z: float) -> float:
    """Natural log of the two-sided normal p-value; finite far into the tail."""
    if z == 0.0:
        return 0.0
    return min(0.0, math.log(2.0) + float(log_ndtr(-abs(z))))


def rank_sum_z(left, right) -> float:
    """Normal-approximation z of the rank-sum statistic with tie correction.

    Returns 0 when every observation is tied.
    """
    left = np.asarray(left, dtype=np.float64).ravel()
    right = np.asarray(right, dtype=np.float64).ravel()
    n1, n2 = left.size, right.size
    if n1 == 0 or n2 == 0:
        raise StateError("rank-sum test needs two non-empty groups")
    data = np.concatenate([left, right])
    n = n1 + n2
    ranks = rankdata(data)
    _, counts = np.unique(data, return_counts=True)
    ties = float(np.sum(counts.astype(np.float64) ** 3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    if var <= 0.0:
        return 0.0
    r1 = ranks[:n1].sum()
    return float((r1 - n1 * (n + 1) / 2.0) / math.sqrt(var))


def rank_sum_test(left, right) -> float:
    """Two-sided p-value of the Wilcoxon rank-sum test (1.0 if all values tie)."""
    return math.exp(log_p_value(rank_sum_z(left, right)))


def binary_rank_sum_z(n1: int, ones1: int, n2: int, ones2: int) -> float:
    """:func:`rank_sum_z` for 0/1 labels, from group sizes and counts of ones."""
    if n1 <= 0 or n2 <= 0:
        raise StateError("rank-sum test needs two non-empty groups")
    n = n1 + n2
    t1 = ones1 + ones2
    t0 = n - t1
    if t0 == 0 or t1 == 0:
        return 0.0
    rank0 = (t0 + 1) / 2.0
    rank1 = t0 + (t1 + 1) / 2.0
    r1 = (n1 - ones1) * rank0 + ones1 * rank1
    ties = float(t0) ** 3 - t0 + float(t1) ** 3 - t1
    var = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    return (r1 - n1 * (n + 1) / 2.0) / math.sqrt(var)


def resample_quota(n_left: int, n_total: int, sample_size: int) -> int:
    """Left-group share of the resample, rounded half up, both groups non-empty."""
    quota = math.floor(sample_size * n_left / n_total + 0.5)
    return min(max(quota, 1), sample_size - 1)


def split_is_significant(y_pred: np.ndarray, split: int, cfg: SignificanceConfig,
                         rng: np.random.Generator) -> bool:
    """Resampled rank-sum test of ``y_pred[:split]`` against ``y_pred[split:]``."""
    n = y_pred.shape[0]
    n_left = split
    n_right = n - split
    if n_left <= 0 or n_right <= 0:
        return False
    s_left = resample_quota(n_left, n, cfg.sample_size)
    s_right = cfg.sample_size - s_left
    # drawing with replacement and counting ones is a binomial draw
    p_left = np.count_nonzero(y_pred[:split]) / n_left
    p_right = np.count_nonzero(y_pred[split:]) / n_right
    ones_left = int(rng.binomial(s_left, p_left))
    ones_right = int(rng.binomial(s_right, p_right))
    z = binary_rank_sum_z(s_left, ones_left, s_right, ones_right)
    if cfg.directional and z >= 0.0:
        # a change point predicts class 0 on the left and class 1 on the right
        return False
    return log_p_value(z) < math.log(cfg.alpha)


def has_significant_cp(profile: ClaspProfile, y_pred: np.ndarray,
                       cfg: SignificanceConfig,
                       rng: np.random.Generator) -> int | None:
    """Index of the profile's global maximum if that split is significant.

    ``y_pred`` are the predicted labels of the slice at the maximising split.
    The labels are divided at slice position ``j + width + 1``, i.e. the
    split's time index within the slice.
    """
    if len(profile) == 0:
        return None
    j = int(np.argmax(profile.scores))
    split = j + profile.width + 1
    if split_is_significant(y_pred, split, cfg, rng):
        return j
    return None
