"""Battery lifetime against fraction of data sent, every radio profile, two traffic levels."""

import argparse
import csv
import sys

import numpy as np

from ambrosia.energy import PROFILES, lifetime_curve
from ambrosia.errors import ChannelSaturated


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ti", default="30,3600", help="transmission intervals in seconds")
    ap.add_argument("--out", default="-", help="CSV path, - for stdout")
    args = ap.parse_args()

    fractions = np.round(np.linspace(0.1, 1.0, 10), 2)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["tech", "ti", "fraction", "years"])
    for name, profile in PROFILES.items():
        for ti in (float(t) for t in args.ti.split(",")):
            try:
                curve = lifetime_curve(profile, ti, fractions)
            except ChannelSaturated as e:  # sigfox cannot carry 1000 B in 30 s
                print(f"# {name} ti={ti:g}: {e}", file=sys.stderr)
                continue
            for f, years in curve:
                w.writerow([name, ti, f, f"{years:.4f}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
