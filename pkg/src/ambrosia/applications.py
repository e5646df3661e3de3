"""Displacement from acceleration by double trapezoidal integration."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .protocol import ProtocolConfig, TransmissionLog, run_session
from .timeseries import TimeSeries


@dataclass(frozen=True, eq=False)
class KinematicState:
    velocity: np.ndarray
    displacement: np.ndarray


def double_integrate(accel: TimeSeries, v0: float = 0.0, s0: float = 0.0) -> KinematicState:
    """Trapezoidal rule applied twice, sample by sample.

    v[i] = v[i-1] + dt * (a[i-1] + a[i]) / 2
    s[i] = s[i-1] + dt * (v[i-1] + v[i]) / 2
    """
    a = accel.values.tolist()
    if not a:
        raise ValidationError("empty series")
    dt = accel.sample_period
    v, s = [float(v0)], [float(s0)]
    for i in range(1, len(a)):
        v.append(v[-1] + dt * (a[i - 1] + a[i]) / 2)
        s.append(s[-1] + dt * (v[-2] + v[-1]) / 2)
    return KinematicState(np.array(v), np.array(s))


@dataclass(frozen=True, eq=False)
class DisplacementImpact:
    #: raw mean squared error between displacement curves, in m^2
    mse_displacement: float
    true: KinematicState
    processed: KinematicState
    log: TransmissionLog


def displacement_impact(series: TimeSeries, config: ProtocolConfig) -> DisplacementImpact:
    log = run_session(series, config)
    true_k = double_integrate(series)
    proc_k = double_integrate(series.with_values(log.processed))
    diff = true_k.displacement - proc_k.displacement
    return DisplacementImpact(float(np.mean(diff * diff)), true_k, proc_k, log)


def displacement_csv(impacts: dict[float, DisplacementImpact]) -> str:
    """One true curve plus one processed curve per delta."""
    deltas = sorted(impacts)
    first = impacts[deltas[0]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if len(deltas) == 1:
        w.writerow(["index", "displacement_true", "displacement_processed"])
    else:
        w.writerow(["index", "displacement_true"] + [f"displacement_processed_{d!r}" for d in deltas])
    for i, t in enumerate(first.true.displacement):
        w.writerow([i, repr(float(t))] + [repr(float(impacts[d].processed.displacement[i])) for d in deltas])
    return buf.getvalue()
