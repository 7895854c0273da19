"""Exact streaming k-nearest-neighbour profile under Pearson correlation.

For every subsequence in the sliding window the profile keeps the offsets and
correlations of its ``k`` most correlated subsequences.  When a value arrives
only the newest subsequence is new, so one O(d) pass suffices:

* the dot products between every subsequence and the newest one are obtained
  from the previous step's (w-1)-length products by adding a single term,
* the newest subsequence's neighbours are picked from those correlations,
* existing rows that rank the newest subsequence above their weakest
  neighbour adopt it.

Neighbour offsets are stored as absolute stream positions.  Shifting the
window therefore never touches them; converting to window offsets happens on
read, and references to evicted subsequences simply turn negative.

Conventions shared with the brute-force reference in the tests:

* candidates must satisfy ``|i - j| >= ceil(1.5 * w)``;
* constant subsequences never become neighbours and get padded rows;
* ties on correlation go to the older (smaller) offset;
* rows with fewer than ``k`` candidates are padded with ``PAD_OFFSET`` and
  ``-inf`` correlation.
"""

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .buffer import SlidingWindow
from .errors import StateError

PAD_OFFSET = -(1 << 62)


def exclusion_radius(w: int) -> int:
    return (3 * w + 1) // 2


def pearson(q: float, mu_i: float, mu_j: float, sigma_i: float, sigma_j: float,
            w: int) -> float:
    """Pearson correlation of two length-``w`` subsequences from their dot product."""
    if w < 2:
        raise ValueError(f"width must be at least 2, got {w}")
    if sigma_i == 0.0 or sigma_j == 0.0:
        return -1.0
    c = (q - w * mu_i * mu_j) / (w * sigma_i * sigma_j)
    return min(1.0, max(-1.0, c))


@njit(cache=True)
def _correlations(T, mu, sigma, const, Q, w, corr):
    """Extend Q to w-length products, then turn them into Pearson correlations."""
    L = T.shape[0]
    e = L - w
    t_last = T[L - 1]
    mu_e = mu[e]
    sig_e = sigma[e]
    const_e = const[e]
    for i in range(e + 1):
        Q[i] += T[i + w - 1] * t_last
        if const_e or const[i]:
            corr[i] = -1.0
        else:
            c = (Q[i] - w * mu[i] * mu_e) / (w * sigma[i] * sig_e)
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            corr[i] = c


@njit(cache=True)
def _restore_dots(T, Q, w):
    """Drop the leading term so Q holds (w-1)-length products again."""
    e = T.shape[0] - w
    t_e = T[e]
    for i in range(e + 1):
        Q[i] -= T[i] * t_e


@njit(cache=True)
def _select_knn(corr, const, e, excl, k, start_abs, knn_abs, knn_corr):
    """Top-k admissible offsets for the newest subsequence, written in place."""
    for j in range(k):
        knn_abs[j] = -(1 << 62)
        knn_corr[j] = -np.inf
    if const[e]:
        return
    for i in range(e - excl + 1):
        if const[i]:
            continue
        c = corr[i]
        if c <= knn_corr[k - 1]:
            continue
        # scanning in ascending offset order with a strict comparison keeps
        # older offsets ahead of newer ones on equal correlation
        p = k - 1
        while p > 0 and knn_corr[p - 1] < c:
            knn_corr[p] = knn_corr[p - 1]
            knn_abs[p] = knn_abs[p - 1]
            p -= 1
        knn_corr[p] = c
        knn_abs[p] = start_abs + i


@njit(cache=True)
def _adopt_newest(corr, const, e, excl, k, newest_abs, N, C):
    """Insert the newest subsequence into every row it now belongs to."""
    if const[e]:
        return 0
    changed = 0
    for i in range(e - excl + 1):
        if const[i]:
            continue
        c = corr[i]
        if c <= C[i, k - 1]:
            continue
        p = k - 1
        while p > 0 and C[i, p - 1] < c:
            C[i, p] = C[i, p - 1]
            N[i, p] = N[i, p - 1]
            p -= 1
        C[i, p] = c
        N[i, p] = newest_abs
        changed += 1
    return changed


def fresh_dots(T: np.ndarray, w: int) -> np.ndarray:
    """(w-1)-length dot products of every subsequence prefix with the newest one."""
    e = T.shape[0] - w
    prefixes = sliding_window_view(T[:-1], w - 1)
    return prefixes @ T[e:e + w - 1]


class StreamingKNN:
    """k-NN profile for all subsequences of a :class:`SlidingWindow`.

    Call :meth:`update` once after every push to the window.  Rows only
    appear once the window holds ``w + k`` values; at that point the rows of
    the already present subsequences are built by replaying the updates.
    """

    def __init__(self, window_size: int, width: int, k: int = 3,
                 refresh_every: int | None = None):
        if width < 2:
            raise ValueError(f"width must be at least 2, got {width}")
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        if window_size < width + k:
            raise ValueError(f"window size {window_size} is smaller than width + k")
        self.d = int(window_size)
        self.w = int(width)
        self.k = int(k)
        self.excl = exclusion_radius(self.w)
        self.m_max = self.d - self.w + 1
        # Q is right-aligned: a growing window prepends, a full one keeps its length
        self._Q = np.zeros(self.m_max, dtype=np.float64)
        self._corr = np.zeros(self.m_max, dtype=np.float64)
        cap = 2 * self.m_max
        self._N = np.full((cap, self.k), PAD_OFFSET, dtype=np.int64)
        self._C = np.full((cap, self.k), -np.inf, dtype=np.float64)
        self._row0 = 0
        self._rows = 0
        self._m = 0
        self._last_total = 0
        self._since_refresh = 0
        self.refresh_every = int(refresh_every or self.d)
        self.ready = False
        self.start_abs = 0
        self.last_knn = np.full(self.k, PAD_OFFSET, dtype=np.int64)

    @property
    def n_rows(self) -> int:
        return self._rows

    @property
    def abs_neighbours(self) -> np.ndarray:
        """Neighbour offsets as absolute stream positions (pads: ``PAD_OFFSET``)."""
        return self._N[self._row0:self._row0 + self._rows]

    @property
    def neighbours(self) -> np.ndarray:
        """Neighbour offsets relative to the window; negative means out of window."""
        rel = self.abs_neighbours - self.start_abs
        rel[self.abs_neighbours == PAD_OFFSET] = -1
        return rel

    @property
    def correlations(self) -> np.ndarray:
        return self._C[self._row0:self._row0 + self._rows]

    @property
    def last_correlations(self) -> np.ndarray:
        """Correlations of every subsequence with the newest one (latest update)."""
        return self._corr[:self._m]

    @property
    def dots(self) -> np.ndarray:
        """Current (w-1)-length dot products, one per subsequence."""
        return self._Q[self.m_max - self._m:]

    @property
    def nbytes(self) -> int:
        return self._Q.nbytes + self._corr.nbytes + self._N.nbytes + self._C.nbytes

    def _drop_rows(self, keep: int) -> None:
        extra = self._rows - keep
        if extra > 0:
            self._row0 += extra
            self._rows = keep

    def _append_row(self) -> int:
        if self._row0 + self._rows == self._N.shape[0]:
            n = self._rows
            self._N[:n] = self._N[self._row0:self._row0 + n]
            self._C[:n] = self._C[self._row0:self._row0 + n]
            self._row0 = 0
        r = self._row0 + self._rows
        self._rows += 1
        return r

    def calc_knn(self, T: np.ndarray, mu: np.ndarray, sigma: np.ndarray,
                 const: np.ndarray, Q: np.ndarray, corr: np.ndarray,
                 start_abs: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Correlations to the newest subsequence plus its k-NN offsets and scores.

        Neighbour offsets are absolute stream positions.

        ``Q`` must hold the (w-1)-length products on entry; it is restored to
        that state for the next call before returning.
        """
        e = T.shape[0] - self.w
        _correlations(T, mu, sigma, const, Q, self.w, corr)
        knn_abs = np.empty(self.k, dtype=np.int64)
        knn_corr = np.empty(self.k, dtype=np.float64)
        _select_knn(corr, const, e, self.excl, self.k, start_abs, knn_abs, knn_corr)
        _restore_dots(T, Q, self.w)
        return corr, knn_abs, knn_corr

    def _insert_newest(self, T, mu, sigma, const, Q, corr, start_abs):
        e = T.shape[0] - self.w
        corr, knn_abs, knn_corr = self.calc_knn(T, mu, sigma, const, Q, corr, start_abs)
        r = self._append_row()
        self._N[r] = knn_abs
        self._C[r] = knn_corr
        rows = slice(self._row0, self._row0 + self._rows)
        _adopt_newest(corr, const, e, self.excl, self.k, start_abs + e,
                      self._N[rows], self._C[rows])
        self.last_knn = knn_abs

    def update(self, window: SlidingWindow) -> None:
        """Bring the profile up to date with the window's newest value."""
        L = len(window)
        w = self.w
        if window.total != self._last_total + 1:
            raise StateError("StreamingKNN.update must be called after every push")
        self._last_total = window.total
        if window.capacity != self.d:
            raise StateError("window capacity does not match the k-NN profile")
        if L < w + self.k:
            return

        T = window.values
        mu, sigma = window.means_stds(w)
        const = window.constant_mask(w)
        start_abs = window.start_index
        m = L - w + 1
        e = m - 1

        if not self.ready:
            # replay the subsequences that arrived before the profile existed
            for s in range(e):
                Ts = T[:s + w]
                Qs = fresh_dots(Ts, w)
                self._insert_newest(Ts, mu[:s + 1], sigma[:s + 1], const[:s + 1],
                                    Qs, self._corr[:s + 1], start_abs)
            self.ready = True
            self._m = m
            self._Q[self.m_max - m:] = fresh_dots(T, w)
            self._since_refresh = 0
        else:
            self._drop_rows(e)
            grew = m > self._m
            self._m = m
            self._since_refresh += 1
            if self._since_refresh >= self.refresh_every:
                # rebuild the recurrence from raw values to bound rounding drift
                self._Q[self.m_max - m:] = fresh_dots(T, w)
                self._since_refresh = 0
            elif grew:
                self._Q[self.m_max - m] = np.dot(T[:w - 1], T[e:e + w - 1])

        self.start_abs = start_abs
        self._insert_newest(T, mu, sigma, const, self.dots, self._corr[:m], start_abs)
