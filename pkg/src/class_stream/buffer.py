"""Sliding window over the newest observations with running sums.

Values live in a buffer of twice the window capacity.  Pushes append at the
tail and evict by advancing the head, so every logical view is a contiguous
numpy slice.  When the tail reaches the end of the buffer the window is copied
back to the front and the cumulative sums are rebuilt from the raw values,
which bounds their rounding drift to one window's worth of accumulation.
"""

import math

import numpy as np

from .errors import InputError, StateError


class SlidingWindow:
    """Fixed-capacity window of the latest ``capacity`` measurements.

    Besides the values, the window keeps three prefix arrays aligned with
    them: cumulative sums, cumulative squared sums and a cumulative count of
    value changes.  The latter identifies constant subsequences exactly, which
    the squared sums cannot do under cancellation.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        size = 2 * self.capacity
        self._values = np.zeros(size, dtype=np.float64)
        # prefix arrays hold one extra leading entry: _csum[start] is the base
        self._csum = np.zeros(size + 1, dtype=np.float64)
        self._csum2 = np.zeros(size + 1, dtype=np.float64)
        self._changes = np.zeros(size + 1, dtype=np.int64)
        self._start = 0
        self.length = 0
        self.total = 0
        self.compactions = 0

    def __len__(self) -> int:
        return self.length

    @property
    def start_index(self) -> int:
        """Absolute 0-based stream index of the oldest value in the window."""
        return self.total - self.length

    @property
    def values(self) -> np.ndarray:
        return self._values[self._start:self._start + self.length]

    @property
    def R(self) -> np.ndarray:
        """Cumulative sums aligned with :attr:`values` (inclusive)."""
        return self._csum[self._start + 1:self._start + self.length + 1]

    @property
    def R2(self) -> np.ndarray:
        """Cumulative squared sums aligned with :attr:`values` (inclusive)."""
        return self._csum2[self._start + 1:self._start + self.length + 1]

    @property
    def nbytes(self) -> int:
        return (self._values.nbytes + self._csum.nbytes + self._csum2.nbytes
                + self._changes.nbytes)

    def push(self, x: float) -> None:
        x = float(x)
        if not math.isfinite(x):
            raise InputError(f"non-finite measurement {x!r} at index {self.total}")

        end = self._start + self.length
        if end == self._values.shape[0]:
            self._compact()
            end = self.length

        changed = 1 if self.length and self._values[end - 1] != x else 0
        self._values[end] = x
        self._csum[end + 1] = self._csum[end] + x
        self._csum2[end + 1] = self._csum2[end] + x * x
        self._changes[end + 1] = self._changes[end] + changed

        self.total += 1
        if self.length == self.capacity:
            self._start += 1
        else:
            self.length += 1

    def _compact(self) -> None:
        n = self.length
        vals = self._values[self._start:self._start + n].copy()
        self._values[:n] = vals
        self._csum[0] = 0.0
        self._csum2[0] = 0.0
        self._changes[0] = 0
        np.cumsum(vals, out=self._csum[1:n + 1])
        np.cumsum(vals * vals, out=self._csum2[1:n + 1])
        if n:
            diff = np.zeros(n, dtype=np.int64)
            diff[1:] = vals[1:] != vals[:-1]
            np.cumsum(diff, out=self._changes[1:n + 1])
        self._start = 0
        self.compactions += 1

    def _check_width(self, w: int) -> None:
        if w < 1:
            raise ValueError(f"subsequence width must be positive, got {w}")
        if self.length < w:
            raise StateError(f"window holds {self.length} values, need at least {w}")

    def means_stds(self, w: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and population std of every length-``w`` subsequence.

        Constant subsequences get a standard deviation of exactly 0.
        """
        self._check_width(w)
        s = self._start
        m = self.length - w + 1
        inv_w = 1.0 / w
        mu = (self._csum[s + w:s + w + m] - self._csum[s:s + m]) * inv_w
        var = (self._csum2[s + w:s + w + m] - self._csum2[s:s + m]) * inv_w - mu * mu
        np.maximum(var, 0.0, out=var)
        sigma = np.sqrt(var)
        sigma[self.constant_mask(w)] = 0.0
        return mu, sigma

    def constant_mask(self, w: int) -> np.ndarray:
        """True for every subsequence whose ``w`` values are all equal."""
        self._check_width(w)
        s = self._start
        m = self.length - w + 1
        # changes within a subsequence are counted at positions i+1 .. i+w-1
        return self._changes[s + w:s + w + m] == self._changes[s + 1:s + 1 + m]
