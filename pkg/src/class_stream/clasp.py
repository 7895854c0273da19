"""Incremental cross-validation scores over all splits of a k-NN slice.

Every subsequence in the scored slice starts with ground-truth label 1.  Each
split moves one more subsequence, the next one from the left, to class 0.
Only the rows that list the moved subsequence as a neighbour can change their
majority vote, and the reverse-neighbour lists that index those rows have
``k * m`` entries in total.  So the whole profile costs O(k * m) instead of
O(k * m^2).

Neighbour offsets are given relative to the slice.  Negative offsets point
before the slice or out of the window, and they always count as class 0.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import StateError

SCORE_F1 = 0
SCORE_ACCURACY = 1
SCORE_KINDS = {"f1": SCORE_F1, "accuracy": SCORE_ACCURACY}


@njit(cache=True)
def _macro_f1(tn, fp, fn, tp):
    # class 1 as positive: (tp, fp, fn); class 0 swaps roles
    score = 0.0
    denom = 2 * tp + fp + fn
    if denom > 0:
        score += 2.0 * tp / denom
    denom = 2 * tn + fn + fp
    if denom > 0:
        score += 2.0 * tn / denom
    return score / 2.0


@njit(cache=True)
def _macro_accuracy(tn, fp, fn, tp):
    total = tn + fp + fn + tp
    # one-vs-rest accuracy is the same for both classes of a binary problem
    return (tp + tn) / total


@njit(cache=True)
def _score(conf, kind):
    if kind == 0:
        return _macro_f1(conf[0, 0], conf[0, 1], conf[1, 0], conf[1, 1])
    return _macro_accuracy(conf[0, 0], conf[0, 1], conf[1, 0], conf[1, 1])


@njit(cache=True)
def _init_labels(knn, n_zero, y_pred, conf):
    m, k = knn.shape
    conf[:, :] = 0
    for r in range(m):
        z = 0
        for j in range(k):
            if knn[r, j] < 0:
                z += 1
        n_zero[r] = z
        p = 0 if z >= k - z else 1
        y_pred[r] = p
        conf[1, p] += 1


@njit(cache=True)
def _reverse_nn(knn, rnn_ptr, rnn_idx):
    """CSR transpose: rows listing slice offset t are rnn_idx[rnn_ptr[t]:rnn_ptr[t+1]]."""
    m, k = knn.shape
    rnn_ptr[:m + 1] = 0
    for r in range(m):
        for j in range(k):
            t = knn[r, j]
            if 0 <= t < m:
                rnn_ptr[t + 1] += 1
    for t in range(m):
        rnn_ptr[t + 1] += rnn_ptr[t]
    fill = rnn_ptr[:m].copy()
    for r in range(m):
        for j in range(k):
            t = knn[r, j]
            if 0 <= t < m:
                rnn_idx[fill[t]] = r
                fill[t] += 1
    return rnn_ptr[m]


@njit(cache=True)
def _cross_val(knn, w, kind, n_zero, y_true, y_pred, conf, rnn_ptr, rnn_idx, scores):
    m, k = knn.shape
    _init_labels(knn, n_zero, y_pred, conf)
    _reverse_nn(knn, rnn_ptr, rnn_idx)
    y_true[:m] = 1
    n_splits = m - 2 * w - 1
    work = 0
    for j in range(n_splits):
        # split i = j + w + 1 (1-based) flips the j-th subsequence to class 0
        y_true[j] = 0
        p = y_pred[j]
        conf[1, p] -= 1
        conf[0, p] += 1
        for q in range(rnn_ptr[j], rnn_ptr[j + 1]):
            r = rnn_idx[q]
            n_zero[r] += 1
            work += 1
            new = 0 if n_zero[r] >= k - n_zero[r] else 1
            old = y_pred[r]
            if new != old:
                t = y_true[r]
                conf[t, old] -= 1
                conf[t, new] += 1
                y_pred[r] = new
        scores[j] = _score(conf, kind)
    return work


def macro_f1(conf: np.ndarray) -> float:
    """Mean per-class F1 of a 2x2 confusion matrix indexed ``[true, pred]``."""
    conf = np.asarray(conf)
    if conf.shape != (2, 2) or conf.sum() <= 0:
        raise StateError("confusion matrix must be 2x2 with a positive total")
    return float(_macro_f1(conf[0, 0], conf[0, 1], conf[1, 0], conf[1, 1]))


def macro_accuracy(conf: np.ndarray) -> float:
    """Mean per-class (one-vs-rest) accuracy of a 2x2 confusion matrix."""
    conf = np.asarray(conf)
    if conf.shape != (2, 2) or conf.sum() <= 0:
        raise StateError("confusion matrix must be 2x2 with a positive total")
    return float(_macro_accuracy(conf[0, 0], conf[0, 1], conf[1, 0], conf[1, 1]))


@dataclass
class CrossValState:
    y_true: np.ndarray
    y_pred: np.ndarray
    n_count: np.ndarray  # (m, 2): zero- and one-labelled neighbours per row
    rnn_ptr: np.ndarray
    rnn_idx: np.ndarray
    conf: np.ndarray

    def reverse_neighbours(self, t: int) -> np.ndarray:
        return self.rnn_idx[self.rnn_ptr[t]:self.rnn_ptr[t + 1]]


def init_labels(knn: np.ndarray, k: int | None = None) -> CrossValState:
    """Initial labelling with every in-slice subsequence in class 1."""
    knn = np.ascontiguousarray(knn, dtype=np.int64)
    if knn.ndim != 2 or knn.shape[0] == 0:
        raise StateError("cannot initialise labels for an empty slice")
    if k is not None and knn.shape[1] != k:
        raise ValueError(f"expected {k} neighbours per row, got {knn.shape[1]}")
    m, k = knn.shape
    n_zero = np.empty(m, dtype=np.int64)
    y_pred = np.empty(m, dtype=np.int64)
    conf = np.zeros((2, 2), dtype=np.int64)
    _init_labels(knn, n_zero, y_pred, conf)
    rnn_ptr = np.empty(m + 1, dtype=np.int64)
    rnn_idx = np.empty(m * k, dtype=np.int64)
    total = _reverse_nn(knn, rnn_ptr, rnn_idx)
    return CrossValState(
        y_true=np.ones(m, dtype=np.int64),
        y_pred=y_pred,
        n_count=np.column_stack([n_zero, k - n_zero]),
        rnn_ptr=rnn_ptr,
        rnn_idx=rnn_idx[:total],
        conf=conf,
    )


@dataclass
class ClaspProfile:
    """Cross-validation scores for the admissible splits of one slice.

    ``scores[j]`` belongs to the split that puts slice subsequences
    ``0..j`` into class 0; the change point it implies sits at window offset
    ``base_offset + j + width``.
    """

    scores: np.ndarray
    base_offset: int
    width: int
    window_start: int = 0  # absolute 0-based index of window offset 0

    def __len__(self) -> int:
        return len(self.scores)

    def cp_offset(self, j: int) -> int:
        return self.base_offset + j + self.width

    def timestamps(self) -> np.ndarray:
        """1-based absolute stream timestamps of the change point of each split."""
        j = np.arange(len(self.scores))
        return self.window_start + self.base_offset + j + self.width + 1

    def dump(self, fh) -> None:
        for ts, score in zip(self.timestamps(), self.scores):
            fh.write(f"{int(ts)}\t{float(score)!r}\n")


class CrossValidator:
    """Profile computation with scratch buffers reused across calls."""

    def __init__(self, capacity: int, k: int, score: str = "f1"):
        if score not in SCORE_KINDS:
            raise ValueError(f"unknown score {score!r}, expected one of {sorted(SCORE_KINDS)}")
        self.k = k
        self.kind = SCORE_KINDS[score]
        self.capacity = 0
        self._grow(capacity)
        self.last_work = 0

    def _grow(self, capacity: int) -> None:
        self.capacity = capacity
        self._n_zero = np.empty(capacity, dtype=np.int64)
        self._y_true = np.empty(capacity, dtype=np.int64)
        self._y_pred = np.empty(capacity, dtype=np.int64)
        self._conf = np.zeros((2, 2), dtype=np.int64)
        self._rnn_ptr = np.empty(capacity + 1, dtype=np.int64)
        self._rnn_idx = np.empty(capacity * self.k, dtype=np.int64)
        self._scores = np.empty(capacity, dtype=np.float64)

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self._n_zero, self._y_true, self._y_pred, self._conf,
                                      self._rnn_ptr, self._rnn_idx, self._scores))

    def scores(self, knn: np.ndarray, w: int) -> np.ndarray:
        """Scores for splits ``w+1 .. m-w-1``; empty when the slice is too short.

        The returned array is a view into scratch memory, valid until the next call.
        """
        m = knn.shape[0]
        if knn.shape[1] != self.k:
            raise ValueError(f"expected {self.k} neighbours per row, got {knn.shape[1]}")
        if m < 2 * w + 2:
            return self._scores[:0]
        if m > self.capacity:
            self._grow(m)
        self.last_work = _cross_val(knn, w, self.kind, self._n_zero, self._y_true,
                                    self._y_pred, self._conf, self._rnn_ptr,
                                    self._rnn_idx, self._scores)
        return self._scores[:m - 2 * w - 1]

    @property
    def conf(self) -> np.ndarray:
        """Confusion matrix after the last split of the latest call."""
        return self._conf


def cross_val_scores(knn: np.ndarray, k: int, w: int, score: str = "f1",
                     base_offset: int = 0) -> ClaspProfile:
    """ClaSP of a slice given its slice-relative neighbour offsets."""
    knn = np.ascontiguousarray(knn, dtype=np.int64)
    cv = CrossValidator(max(knn.shape[0], 1), k, score)
    scores = cv.scores(knn, w).copy()
    return ClaspProfile(scores=scores, base_offset=base_offset, width=w)


@njit(cache=True)
def _labels_at_split(knn, j, out):
    m, k = knn.shape
    for r in range(m):
        ones = 0
        for c in range(k):
            if knn[r, c] > j:
                ones += 1
        out[r] = 1 if ones > k - ones else 0
    return out


def labels_at_split(knn: np.ndarray, j: int) -> np.ndarray:
    """Predicted labels when slice subsequences ``0..j`` form class 0."""
    knn = np.ascontiguousarray(knn, dtype=np.int64)
    return _labels_at_split(knn, j, np.empty(knn.shape[0], dtype=np.int64))
