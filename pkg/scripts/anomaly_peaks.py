"""Where does suppression start to change the RRCF peak set?

Scores the pinned spiked stream and its reconstruction at a grid of
thresholds and reports the fraction sent next to whether the peaks match.
"""

import argparse

import numpy as np

from ambrosia.anomaly import ForestConfig, compare_peaks, score_stream
from ambrosia.datasets import SPIKED_THRESHOLD, pinned
from ambrosia.protocol import ProtocolConfig, run_session


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", default="0.25,0.5,0.75,1.0,1.25,1.5,2.0,2.5,3.0,4.0")
    ap.add_argument("--trees", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    series = pinned("spiked")
    fc = ForestConfig(num_trees=args.trees, seed=args.seed)
    true = score_stream(series, fc)
    print(f"true peaks above {SPIKED_THRESHOLD:g}: top at index {int(true.index[np.argmax(true.score)])}")
    print(f"{'delta':>6} {'sent %':>7} {'preserved':>9}  detail")
    for d in (float(x) for x in args.deltas.split(",")):
        log = run_session(series, ProtocolConfig(w=5, delta=d))
        rep = compare_peaks(true, score_stream(log.processed, fc), SPIKED_THRESHOLD, fc.shingle)
        detail = "" if rep.preserved else f"missed={rep.missed} extra={rep.false_positives}"
        print(f"{d:6.2f} {log.data_sent_pct:7.2f} {str(rep.preserved):>9}  {detail}")


if __name__ == "__main__":
    main()
