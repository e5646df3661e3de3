"""Data sent and NMSE across thresholds for both forecasters on a pinned or CSV stream."""

import argparse
from pathlib import Path

from ambrosia.datasets import pinned
from ambrosia.metrics import rows_to_csv, sweep
from ambrosia.protocol import ProtocolConfig
from ambrosia.timeseries import load_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", help="CSV stream (default: pinned sweep dataset)")
    ap.add_argument("--deltas", default="0,0.2,0.4,0.6,0.8,1.0,1.2,1.6,2.0")
    ap.add_argument("--window", type=int, default=5)
    ap.add_argument("--out", default="sweep_full.csv")
    args = ap.parse_args()

    series = load_csv(args.input) if args.input else pinned("sweep")
    deltas = [float(d) for d in args.deltas.split(",")]
    configs = [ProtocolConfig(w=args.window, forecaster=f) for f in ("window", "arima")]
    rows = sweep(series, deltas, configs)

    print(f"{'delta':>6} {'forecaster':>10} {'sent %':>8} {'nmse':>8}")
    for r in rows:
        nmse = "-" if r.metrics.nmse is None else f"{r.metrics.nmse:.4f}"
        print(f"{r.delta:6.2f} {r.forecaster:>10} {r.metrics.data_sent_pct:8.2f} {nmse:>8}")
    Path(args.out).write_text(rows_to_csv(rows))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
