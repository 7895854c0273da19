"""ClaSS driver: one observation in, at most one change point out."""

import logging
import warnings
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from .buffer import SlidingWindow
from .clasp import SCORE_KINDS, ClaspProfile, CrossValidator, labels_at_split
from .errors import DeliveryError, StateError
from .knn import StreamingKNN
from .significance import SignificanceConfig, split_is_significant
from .width import WIDTH_METHODS, NoPeriodicityWarning, WidthEstimate, learn_subsequence_width

log = logging.getLogger(__name__)


@dataclass
class ClassConfig:
    window_size: int = 10_000
    k: int = 3
    score: str = "f1"
    significance: SignificanceConfig = field(default_factory=SignificanceConfig)
    width: int | None = None  # fixed width; skips learning
    width_method: str = "acf"
    width_lower: int = 10
    width_upper: int | None = None  # defaults to window_size // 20
    stride: int = 1
    relearn_width: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def upper_bound(self) -> int:
        if self.width_upper is not None:
            return self.width_upper
        return min(max(self.width_lower + 1, self.window_size // 20), self.window_size // 4)

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.score not in SCORE_KINDS:
            raise ValueError(f"unknown score {self.score!r}")
        if self.width_method not in WIDTH_METHODS:
            raise ValueError(f"unknown width method {self.width_method!r}")
        if self.stride < 1:
            raise ValueError(f"stride must be positive, got {self.stride}")
        if self.relearn_width:
            raise NotImplementedError("periodic width re-learning is not supported")
        w_min = self.width if self.width is not None else self.width_lower
        if w_min < 2:
            raise ValueError(f"width must be at least 2, got {w_min}")
        if self.window_size < 4 * w_min:
            raise ValueError(f"window size {self.window_size} must be at least 4 * width ({w_min})")
        if self.width is None and not self.width_lower < self.upper_bound <= self.window_size // 4:
            raise ValueError(f"width bounds [{self.width_lower}, {self.upper_bound}] do not fit "
                             f"window size {self.window_size}")


@dataclass
class Segmentation:
    """Change points as 1-based stream timestamps; the first is always 1."""

    change_points: list[int] = field(default_factory=lambda: [1])
    n_points: int = 0
    width: int | None = None

    @property
    def detected(self) -> list[int]:
        return self.change_points[1:]


class ClaSS:
    """Streaming segmenter.

    Use :meth:`run` for a complete stream.  For manual stepping, fix the
    width first (config override or :meth:`learn_width`), then call
    :meth:`step` per observation.
    """

    def __init__(self, config: ClassConfig | None = None):
        self.config = config or ClassConfig()
        self.config.validate()
        self.rng = np.random.default_rng(self.config.significance.rng_seed)
        self.width_estimate: WidthEstimate | None = None
        self.window = SlidingWindow(self.config.window_size)
        self.knn: StreamingKNN | None = None
        self.cv: CrossValidator | None = None
        self.segmentation = Segmentation()
        self._cp_abs = 0  # 0-based index of the first value of the open segment
        self._profile: ClaspProfile | None = None
        self._steps = 0
        if self.config.width is not None:
            self._set_width(WidthEstimate(self.config.width, "override"))

    @property
    def width(self) -> int | None:
        return self.width_estimate.width if self.width_estimate else None

    @property
    def cp_l(self) -> int:
        """Window offset (0-based) where the unsegmented suffix starts."""
        return max(0, self._cp_abs - self.window.start_index)

    @property
    def nbytes(self) -> int:
        n = self.window.nbytes
        if self.knn is not None:
            n += self.knn.nbytes + self.cv.nbytes
        return n

    def _set_width(self, est: WidthEstimate) -> None:
        cfg = self.config
        self.width_estimate = est
        self.knn = StreamingKNN(cfg.window_size, est.width, cfg.k)
        self.cv = CrossValidator(cfg.window_size - est.width + 1, cfg.k, cfg.score)
        self.segmentation.width = est.width

    def learn_width(self, prefix) -> WidthEstimate:
        cfg = self.config
        prefix = np.asarray(prefix, dtype=np.float64)
        if self.window.total:
            raise StateError("width must be fixed before the first step")
        if prefix.size < cfg.window_size:
            raise StateError(f"width learning needs {cfg.window_size} values, got {prefix.size}")
        est = learn_subsequence_width(prefix[:cfg.window_size], cfg.width_lower,
                                      cfg.upper_bound, cfg.width_method)
        self._set_width(est)
        log.info("learned subsequence width %d (%s)", est.width, est.source)
        return est

    def profile_snapshot(self) -> ClaspProfile | None:
        """Copy of the most recent profile, or None before the first one."""
        p = self._profile
        if p is None:
            return None
        return ClaspProfile(p.scores.copy(), p.base_offset, p.width, p.window_start)

    def step(self, x: float) -> int | None:
        """Ingest one value; returns a change point timestamp if one was found."""
        if self.knn is None:
            raise StateError("subsequence width is not set; call learn_width or use run()")
        self.window.push(x)
        self.segmentation.n_points = self.window.total
        self.knn.update(self.window)
        self._steps += 1
        if not self.knn.ready or self._steps % self.config.stride:
            return None

        w = self.knn.w
        start = self.window.start_index
        cp_l = self.cp_l
        knn = self.knn.abs_neighbours[cp_l:] - (start + cp_l)
        scores = self.cv.scores(knn, w)
        if scores.size == 0:
            return None
        self._profile = ClaspProfile(scores, cp_l, w, start)
        j = int(np.argmax(scores))
        y_pred = labels_at_split(knn, j)
        if not split_is_significant(y_pred, j + w + 1, self.config.significance, self.rng):
            return None

        self._cp_abs = start + self._profile.cp_offset(j)
        ts = self._cp_abs + 1
        self.segmentation.change_points.append(ts)
        return ts

    def run(self, source: Iterable[float],
            sink: Callable[[int], object] | None = None) -> Segmentation:
        """Segment a whole stream, delivering each change point to ``sink``.

        Without a fixed width the first ``window_size`` values are buffered to
        learn it and then replayed from the first observation.
        """
        it = iter(source)
        if self.knn is None:
            prefix = []
            for x in it:
                prefix.append(float(x))
                if len(prefix) == self.config.window_size:
                    break
            if not self.learn_from_prefix(prefix):
                self.segmentation.n_points = len(prefix)
                return self.segmentation
            self._consume(prefix, sink)
        self._consume(it, sink)
        return self.segmentation

    def learn_from_prefix(self, prefix: list[float]) -> bool:
        """Learn the width from a prefix that may be shorter than the window.

        Returns False (with a warning) when the prefix cannot fit the bounds.
        """
        cfg = self.config
        if len(prefix) == cfg.window_size:
            self.learn_width(prefix)
            return True
        # stream ended early: learn on what there is, if the bounds still fit
        upper = min(cfg.upper_bound, len(prefix) // 4)
        if upper <= cfg.width_lower:
            warnings.warn(f"stream of {len(prefix)} values is too short to learn a width",
                          NoPeriodicityWarning, stacklevel=3)
            return False
        est = learn_subsequence_width(prefix, cfg.width_lower, upper, cfg.width_method)
        self._set_width(est)
        return True

    def _consume(self, values: Iterable[float], sink) -> None:
        for x in values:
            cp = self.step(x)
            if cp is not None and sink is not None:
                try:
                    sink(cp)
                except Exception as exc:
                    raise DeliveryError(f"sink failed for change point {cp}") from exc


def segment(values, config: ClassConfig | None = None) -> Segmentation:
    """Convenience wrapper: run a fresh segmenter over ``values``."""
    return ClaSS(config).run(values)
