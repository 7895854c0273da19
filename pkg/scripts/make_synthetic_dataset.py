"""Write seeded two-regime and multi-regime series in the benchmark directory format."""

import argparse
from pathlib import Path

from class_stream import AnnotatedSeries
from class_stream.evaluation import save_series
from class_stream.synthetic import regime_stream, two_regime_stream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--two-regime", type=int, default=10, help="number of two-regime series")
    ap.add_argument("--multi-regime", type=int, default=5, help="number of long multi-regime series")
    ap.add_argument("--length", type=int, default=40_000, help="length of multi-regime series")
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for seed in range(args.two_regime):
        x, boundary, info = two_regime_stream(seed)
        name = f"two_regime_{seed:02d}_{'_'.join(info['families'])}"
        # stored CPs are 0-based start indices; stream timestamps are 1-based
        save_series(AnnotatedSeries(name, x, [boundary - 1]), args.out_dir)
    for seed in range(args.multi_regime):
        x, starts = regime_stream(args.length, seed=seed)
        save_series(AnnotatedSeries(f"multi_regime_{seed:02d}", x, [s - 1 for s in starts]),
                    args.out_dir)
    print(f"wrote {args.two_regime + args.multi_regime} series to {args.out_dir}")


if __name__ == "__main__":
    main()
