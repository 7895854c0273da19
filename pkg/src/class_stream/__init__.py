"""Streaming time series segmentation with self-supervised score profiles."""

from .buffer import SlidingWindow
from .clasp import ClaspProfile, CrossValidator, cross_val_scores, macro_accuracy, macro_f1
from .errors import DeliveryError, InputError, StateError
from .evaluation import AnnotatedSeries, CoveringReport, covering, run_benchmark
from .knn import StreamingKNN, pearson
from .segmenter import ClaSS, ClassConfig, Segmentation, segment
from .significance import SignificanceConfig, rank_sum_test
from .width import NoPeriodicityWarning, WidthEstimate, learn_subsequence_width

__all__ = [
    "AnnotatedSeries", "ClaSS", "ClassConfig", "ClaspProfile", "CoveringReport",
    "CrossValidator", "DeliveryError", "InputError", "NoPeriodicityWarning", "Segmentation",
    "SignificanceConfig", "SlidingWindow", "StateError", "StreamingKNN", "WidthEstimate",
    "covering", "cross_val_scores", "learn_subsequence_width", "macro_accuracy", "macro_f1",
    "pearson", "rank_sum_test", "run_benchmark", "segment",
]
