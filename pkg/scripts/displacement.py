"""Double-integrated displacement error from reconstructed acceleration."""

import argparse

from ambrosia.applications import displacement_impact
from ambrosia.datasets import pinned
from ambrosia.protocol import ProtocolConfig
from ambrosia.timeseries import load_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", help="CSV of acceleration with a timestamp column (default: pinned accel)")
    ap.add_argument("--deltas", default="0.1,0.3,0.5,1.0,1.5")
    args = ap.parse_args()

    series = load_csv(args.input) if args.input else pinned("accel")
    print(f"{'delta':>6} {'sent %':>7} {'MSE m^2':>10} {'final |err| m':>14}")
    for d in (float(x) for x in args.deltas.split(",")):
        imp = displacement_impact(series, ProtocolConfig(w=5, delta=d))
        final = abs(imp.true.displacement[-1] - imp.processed.displacement[-1])
        print(f"{d:6.2f} {imp.log.data_sent_pct:7.2f} {imp.mse_displacement:10.4g} {final:14.4g}")


if __name__ == "__main__":
    main()
