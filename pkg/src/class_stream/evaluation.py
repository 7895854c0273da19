"""Offline evaluation: covering metric, dataset I/O, benchmark runs, throughput.

A series on disk is ``<name>.ts.csv`` (one value per line, ``#`` comments
allowed) plus ``<name>.meta.json`` with ``name``, ``change_points`` and the
optional ``width_hint`` and ``sample_rate_hz``.  Change points in metadata and
in :func:`covering` are 0-based start indices of new segments, so a change
point ``c`` separates values ``[0, c)`` from ``[c, n)``.  The segmenter reports
1-based timestamps; subtract one to compare.
"""

import json
import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, StateError
from .segmenter import ClaSS, ClassConfig

log = logging.getLogger(__name__)

SERIES_SUFFIX = ".ts.csv"
META_SUFFIX = ".meta.json"


def _segments(cps: Sequence[int], n: int) -> np.ndarray:
    bounds = np.unique(np.concatenate([[0, n], np.asarray(cps, dtype=np.int64)]))
    return np.column_stack([bounds[:-1], bounds[1:]])


def _check_cps(cps, n: int, what: str) -> list[int]:
    out = [int(c) for c in cps]
    for c in out:
        if not 0 < c <= n:
            raise InputError(f"{what} change point {c} outside (0, {n}]")
    return out


def covering(true_cps: Sequence[int], pred_cps: Sequence[int], n: int) -> float:
    """Length-weighted best Jaccard overlap of each true segment with a predicted one.

    Segments are half-open ``[c_i, c_{i+1})`` with sentinels 0 and ``n``.
    """
    if n <= 0:
        raise StateError("covering needs a series of positive length")
    t = _segments(_check_cps(true_cps, n, "true"), n)
    p = _segments(_check_cps(pred_cps, n, "predicted"), n)
    lo = np.maximum(t[:, None, 0], p[None, :, 0])
    hi = np.minimum(t[:, None, 1], p[None, :, 1])
    inter = np.maximum(hi - lo, 0)
    len_t = (t[:, 1] - t[:, 0])[:, None]
    len_p = (p[:, 1] - p[:, 0])[None, :]
    jac = inter / (len_t + len_p - inter)
    return float(np.sum(len_t[:, 0] * jac.max(axis=1)) / n)


@dataclass
class AnnotatedSeries:
    name: str
    values: np.ndarray
    true_cps: list[int]
    width_hint: int | None = None
    sample_rate_hz: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        n = self.values.size
        self.true_cps = _check_cps(self.true_cps, n, "true")
        if any(b <= a for a, b in zip(self.true_cps, self.true_cps[1:])):
            raise InputError(f"{self.name}: change points must be strictly ascending")

    def __len__(self) -> int:
        return self.values.size


def read_values(lines, source: str = "<input>") -> np.ndarray:
    """Parse one decimal value per line; ``#`` lines and blank lines are skipped."""
    out = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a number: {s[:40]!r}", lineno) from None
        if not math.isfinite(v):
            raise InputError(f"{source}:{lineno}: non-finite value {s!r}", lineno)
        out.append(v)
    return np.asarray(out, dtype=np.float64)


def load_series(path: str | Path) -> AnnotatedSeries:
    """Load ``<name>.ts.csv`` and its sidecar metadata."""
    path = Path(path)
    name = path.name[:-len(SERIES_SUFFIX)] if path.name.endswith(SERIES_SUFFIX) else path.stem
    meta_path = path.with_name(name + META_SUFFIX)
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError:
        raise InputError(f"missing metadata file {meta_path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{meta_path}: {exc}") from None
    with path.open() as fh:
        values = read_values(fh, str(path))
    return AnnotatedSeries(
        name=meta.get("name", name),
        values=values,
        true_cps=meta.get("change_points", []),
        width_hint=meta.get("width_hint"),
        sample_rate_hz=meta.get("sample_rate_hz"),
    )


def save_series(series: AnnotatedSeries, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / (series.name + SERIES_SUFFIX)
    np.savetxt(path, series.values, fmt="%.17g")
    meta = {"name": series.name, "change_points": list(series.true_cps)}
    if series.width_hint is not None:
        meta["width_hint"] = series.width_hint
    if series.sample_rate_hz is not None:
        meta["sample_rate_hz"] = series.sample_rate_hz
    (directory / (series.name + META_SUFFIX)).write_text(json.dumps(meta, indent=1))
    return path


class ThroughputMeter:
    """Points per busy second, overall and over 1 s tumbling buckets.

    Every bucket, including the last partial one, counts towards the peak, so
    the peak is never below the mean (a time-weighted average of the buckets).
    """

    def __init__(self, bucket_s: float = 1.0):
        self.bucket_s = bucket_s
        self.points = 0
        self.busy_s = 0.0
        self.peak = 0.0
        self._b_points = 0
        self._b_time = 0.0

    def add(self, points: int, seconds: float) -> None:
        self.points += points
        self.busy_s += seconds
        self._b_points += points
        self._b_time += seconds
        if self._b_time >= self.bucket_s:
            self._close_bucket()

    def _close_bucket(self) -> None:
        if self._b_time > 0.0:
            self.peak = max(self.peak, self._b_points / self._b_time)
        self._b_points = 0
        self._b_time = 0.0

    def finish(self) -> None:
        self._close_bucket()

    @property
    def mean(self) -> float:
        return self.points / self.busy_s if self.busy_s > 0.0 else 0.0


_warm = False


def warm_up() -> None:
    """Load the compiled kernels once per process so timings exclude it."""
    global _warm
    if _warm:
        return
    rng = np.random.default_rng(0)
    seg = ClaSS(ClassConfig(window_size=200, width=10))
    for x in np.sin(np.arange(400) / 3.0) + 0.1 * rng.standard_normal(400):
        seg.step(x)
    _warm = True


def stream_through(values: np.ndarray, cfg: ClassConfig,
                   meter: ThroughputMeter | None = None) -> list[int]:
    """Feed ``values`` point by point through a fresh segmenter, timing only its work.

    Returns the detected change points as 1-based timestamps.
    """
    meter = meter if meter is not None else ThroughputMeter()
    values = np.asarray(values, dtype=np.float64)
    warm_up()
    seg = ClaSS(cfg)
    clock = time.perf_counter
    if seg.width is None:
        t0 = clock()
        prefix = values[:cfg.window_size]
        learned = seg.learn_from_prefix(list(prefix))
        meter.add(0, clock() - t0)
        if not learned:
            meter.finish()
            return []
    step = seg.step
    for x in values:
        t0 = clock()
        step(x)
        meter.add(1, clock() - t0)
    meter.finish()
    return seg.segmentation.detected


def baseline_no_change(series: AnnotatedSeries) -> list[int]:
    return []


@dataclass
class SeriesResult:
    name: str
    n_points: int = 0
    covering: float = math.nan
    predicted: list[int] = field(default_factory=list)  # 1-based timestamps
    wall_time_s: float = 0.0
    pps_mean: float = 0.0
    pps_peak: float = 0.0
    error: str | None = None


def evaluate_series(series: AnnotatedSeries, cfg: ClassConfig,
                    detector: Callable[[AnnotatedSeries], list[int]] | None = None
                    ) -> SeriesResult:
    res = SeriesResult(series.name, n_points=len(series))
    t0 = time.perf_counter()
    if detector is None:
        meter = ThroughputMeter()
        res.predicted = stream_through(series.values, cfg, meter)
        res.pps_mean, res.pps_peak = meter.mean, meter.peak
    else:
        res.predicted = list(detector(series))
    res.wall_time_s = time.perf_counter() - t0
    if detector is not None and res.wall_time_s > 0:
        res.pps_mean = res.pps_peak = len(series) / res.wall_time_s
    res.covering = covering(series.true_cps, [ts - 1 for ts in res.predicted], len(series))
    return res


def _evaluate_path(path: Path, cfg: ClassConfig, detector) -> SeriesResult:
    try:
        series = load_series(path)
        return evaluate_series(series, cfg, detector)
    except Exception as exc:  # recorded per series; the run continues
        name = path.name[:-len(SERIES_SUFFIX)]
        log.warning("series %s failed: %s", name, exc)
        return SeriesResult(name, error=f"{type(exc).__name__}: {exc}")


@dataclass
class CoveringReport:
    per_series: dict[str, float]
    mean: float
    median: float
    std: float
    wall_time_s: float
    points_per_second_mean: float
    points_per_second_peak: float
    results: list[SeriesResult] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            if r.error is not None:
                out.append(f"{r.name}\tERROR\t{r.error}")
            else:
                out.append(f"{r.name}\t{r.covering:.6f}\t{r.pps_mean:.1f}\t{r.pps_peak:.1f}")
        out += [
            f"# series\t{len(self.results)}",
            f"# errors\t{len(self.errors)}",
            f"# covering_mean\t{self.mean:.6f}",
            f"# covering_median\t{self.median:.6f}",
            f"# covering_std\t{self.std:.6f}",
            f"# wall_time_s\t{self.wall_time_s:.3f}",
            f"# pps_mean\t{self.points_per_second_mean:.1f}",
            f"# pps_peak\t{self.points_per_second_peak:.1f}",
        ]
        return out

    def to_json(self) -> str:
        d = asdict(self)
        for key in ("mean", "median", "std"):
            if math.isnan(d[key]):
                d[key] = None
        for r in d["results"]:
            if math.isnan(r["covering"]):
                r["covering"] = None
        return json.dumps(d, indent=1)


def summarise(results: list[SeriesResult], wall_time_s: float) -> CoveringReport:
    ok = [r for r in results if r.error is None]
    cov = np.array([r.covering for r in ok])
    points = sum(r.n_points for r in ok)
    busy = sum(r.n_points / r.pps_mean for r in ok if r.pps_mean > 0)
    return CoveringReport(
        per_series={r.name: r.covering for r in ok},
        mean=float(cov.mean()) if cov.size else math.nan,
        median=float(np.median(cov)) if cov.size else math.nan,
        std=float(cov.std()) if cov.size else math.nan,
        wall_time_s=wall_time_s,
        points_per_second_mean=points / busy if busy > 0 else 0.0,
        points_per_second_peak=max((r.pps_peak for r in ok), default=0.0),
        results=results,
        errors={r.name: r.error for r in results if r.error is not None},
    )


def series_paths(dataset_dir: str | Path) -> list[Path]:
    d = Path(dataset_dir)
    if not d.is_dir():
        raise InputError(f"dataset directory {d} does not exist")
    paths = sorted(d.glob("*" + SERIES_SUFFIX))
    if not paths:
        raise InputError(f"no *{SERIES_SUFFIX} series found in {d}")
    return paths


def run_benchmark(dataset_dir: str | Path, cfg: ClassConfig, parallelism: int = 1,
                  detector: Callable[[AnnotatedSeries], list[int]] | None = None
                  ) -> CoveringReport:
    """Stream every series in ``dataset_dir`` through its own segmenter.

    With ``parallelism > 1`` series run in separate processes; each series is
    still processed on a single thread.  ``detector`` replaces the segmenter
    (it must be picklable for parallel runs).
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be positive, got {parallelism}")
    paths = series_paths(dataset_dir)
    t0 = time.perf_counter()
    if parallelism == 1 or len(paths) == 1:
        results = [_evaluate_path(p, cfg, detector) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(paths))) as pool:
            results = list(pool.map(_evaluate_path, paths, [cfg] * len(paths),
                                    [detector] * len(paths)))
    return summarise(results, time.perf_counter() - t0)
