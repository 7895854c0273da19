"""Mean and peak points per second for a range of window sizes."""

import argparse

from class_stream import ClassConfig
from class_stream.evaluation import ThroughputMeter, stream_through, warm_up
from class_stream.synthetic import regime_stream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, nargs="+", default=[2000, 5000, 10_000, 20_000])
    ap.add_argument("--n", type=int, default=60_000)
    ap.add_argument("--regime-len", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    warm_up()
    x, starts = regime_stream(args.n, seed=args.seed, regime_len=args.regime_len)
    print("d\tpps_mean\tpps_peak\tdetected\ttrue")
    for d in args.d:
        meter = ThroughputMeter()
        cps = stream_through(x, ClassConfig(window_size=d), meter)
        print(f"{d}\t{meter.mean:.0f}\t{meter.peak:.0f}\t{len(cps)}\t{len(starts)}", flush=True)


if __name__ == "__main__":
    main()
