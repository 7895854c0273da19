"""CPU time of one segmenter versus stream length n and window size d.

Prints a tab-separated table and the doubling ratios. CPU time is used
because wall time on shared hosts includes time stolen by other tenants.
"""

import argparse
import time

from class_stream import ClassConfig
from class_stream.evaluation import stream_through, warm_up
from class_stream.synthetic import regime_stream


def cpu_seconds(x, d, width):
    t0 = time.process_time()
    stream_through(x, ClassConfig(window_size=d, width=width))
    return time.process_time() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[25_000, 50_000, 100_000])
    ap.add_argument("--d", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    ap.add_argument("--n-for-d", type=int, default=50_000)
    ap.add_argument("--d-for-n", type=int, default=4000)
    ap.add_argument("--width", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    warm_up()
    longest = max(max(args.n), args.n_for_d)
    x, _ = regime_stream(longest, seed=args.seed, regime_len=longest)

    print("n\td\tcpu_s\tus_per_point")
    prev = None
    for n in sorted(args.n):
        s = cpu_seconds(x[:n], args.d_for_n, args.width)
        ratio = "" if prev is None else f"\tx{s / prev:.2f}"
        print(f"{n}\t{args.d_for_n}\t{s:.2f}\t{1e6 * s / n:.1f}{ratio}", flush=True)
        prev = s
    prev = None
    for d in sorted(args.d):
        s = cpu_seconds(x[:args.n_for_d], d, args.width)
        ratio = "" if prev is None else f"\tx{s / prev:.2f}"
        print(f"{args.n_for_d}\t{d}\t{s:.2f}\t{1e6 * s / args.n_for_d:.1f}{ratio}", flush=True)
        prev = s


if __name__ == "__main__":
    main()
