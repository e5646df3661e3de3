"""Per-sample cost of the window forecaster vs ARIMA refitted on every sample."""

import argparse

from ambrosia.forecast import ArForecaster, WindowForecaster, measure_throughput


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="1000,10000,100000")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    print(f"{'n':>8} {'window us':>10} {'arima us':>10} {'ratio':>7} {'window total s':>15}")
    for n in (int(x) for x in args.n.split(",")):
        tw = measure_throughput(lambda: WindowForecaster(5), n, args.repeats)
        ta = measure_throughput(lambda: ArForecaster(3, 50, refit_every=1), n, args.repeats)
        print(f"{n:8d} {tw * 1e6:10.3f} {ta * 1e6:10.2f} {ta / tw:7.0f} {tw * n:15.4f}")

    # the one-second budget for a million samples
    tw = measure_throughput(lambda: WindowForecaster(5), 1_000_000, args.repeats)
    print(f"window forecaster, 1e6 samples: {tw * 1e6:.2f} s")


if __name__ == "__main__":
    main()
