"""Command-line entry point: ``segment``, ``bench`` and ``throughput``.

Exit codes: 0 success, 1 internal error, 2 input or usage error.
"""

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .errors import InputError
from .evaluation import ThroughputMeter, baseline_no_change, read_values, run_benchmark, stream_through
from .segmenter import ClaSS, ClassConfig
from .significance import SignificanceConfig

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2

log = logging.getLogger("class_stream")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("segmenter")
    g.add_argument("--window-size", type=int, default=10_000, help="sliding window length d")
    g.add_argument("--width", type=int, default=None, help="fixed subsequence width (skips learning)")
    g.add_argument("--width-lower", type=int, default=10)
    g.add_argument("--width-upper", type=int, default=None)
    g.add_argument("--k", type=int, default=3, help="nearest neighbours per subsequence")
    g.add_argument("--significance", type=float, default=1e-50, help="rank-sum test level")
    g.add_argument("--sample-size", type=int, default=1000, help="labels resampled per test")
    g.add_argument("--score", choices=("f1", "accuracy"), default="f1")
    g.add_argument("--seed", type=int, default=0, help="resampling seed (CLASS_SEED overrides)")
    g.add_argument("--stride", type=int, default=1, help="evaluate the profile every n-th point")
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")


def _config(args, parser) -> ClassConfig:
    seed = args.seed
    env = os.environ.get("CLASS_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            parser.error(f"CLASS_SEED must be an integer, got {env!r}")
    try:
        sig = SignificanceConfig(alpha=args.significance, sample_size=args.sample_size,
                                 rng_seed=seed)
        return ClassConfig(window_size=args.window_size, k=args.k, score=args.score,
                           significance=sig, width=args.width, width_lower=args.width_lower,
                           width_upper=args.width_upper, stride=args.stride)
    except ValueError as exc:
        parser.error(str(exc))


def _numbered_values(fh, source: str):
    seen = False
    for lineno, line in enumerate(fh, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise InputError(f"{source}:{lineno}: not a number: {s[:40]!r}", lineno) from None
        if v != v or v in (float("inf"), float("-inf")):
            raise InputError(f"{source}:{lineno}: non-finite value {s!r}", lineno)
        seen = True
        yield v
    if not seen:
        raise InputError(f"{source}: no values")


def _open_input(path: str):
    if path == "-":
        return sys.stdin, "<stdin>"
    return open(path), path


def cmd_segment(args, cfg: ClassConfig) -> int:
    seg = ClaSS(cfg)
    if cfg.width is not None:
        log.info("width override %d; skipping width learning", cfg.width)
    out = sys.stdout
    profile_out = Path(args.profile_out) if args.profile_out else None

    def dump_profile():
        prof = seg.profile_snapshot()
        if profile_out is not None and prof is not None:
            with profile_out.open("w") as fh:
                prof.dump(fh)

    def sink(ts: int) -> None:
        out.write(f"CP\t{ts}\n")
        out.flush()
        dump_profile()

    fh, source = _open_input(args.input)
    try:
        result = seg.run(_numbered_values(fh, source), sink)
    finally:
        if fh is not sys.stdin:
            fh.close()
    dump_profile()
    width = result.width if result.width is not None else "none"
    out.write(f"# points\t{result.n_points}\tchange_points\t{len(result.detected)}\twidth\t{width}\n")
    out.flush()
    return EXIT_OK


def cmd_throughput(args, cfg: ClassConfig) -> int:
    fh, source = _open_input(args.input)
    try:
        values = read_values(fh, source)
    finally:
        if fh is not sys.stdin:
            fh.close()
    if values.size == 0:
        raise InputError(f"{source}: no values")
    meter = ThroughputMeter()
    t0 = time.perf_counter()
    cps = stream_through(values, cfg, meter)
    wall = time.perf_counter() - t0
    print(f"points\t{values.size}")
    print(f"change_points\t{len(cps)}")
    print(f"pps_mean\t{meter.mean:.1f}")
    print(f"pps_peak\t{meter.peak:.1f}")
    print(f"wall_time_s\t{wall:.3f}")
    return EXIT_OK


def cmd_bench(args, cfg: ClassConfig) -> int:
    detector = baseline_no_change if args.detector == "no-change" else None
    report = run_benchmark(args.dataset_dir, cfg, args.parallelism, detector)
    if args.json:
        print(report.to_json())
    else:
        print("\n".join(report.lines()))
    return EXIT_INTERNAL if report.errors else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="class-stream",
                                     description="Streaming time series segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="report change points of a stream")
    p.add_argument("input", nargs="?", default="-", help="value file, or - for stdin")
    p.add_argument("--profile-out", default=None,
                   help="write the latest score profile here on each detection and at the end")
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("throughput", help="time a file pushed through one segmenter")
    p.add_argument("input", help="value file, or - for stdin")
    _add_config_flags(p)
    p.set_defaults(func=cmd_throughput)

    p = sub.add_parser("bench", help="covering over an annotated dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("--parallelism", type=int, default=1, help="series processed concurrently")
    p.add_argument("--detector", choices=("class", "no-change"), default="class")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers = [handler]
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    if getattr(args, "parallelism", 1) < 1:
        parser.error("--parallelism must be positive")
    cfg = _config(args, parser)
    try:
        return args.func(args, cfg)
    except InputError as exc:
        where = f" (line {exc.lineno})" if exc.lineno is not None else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
