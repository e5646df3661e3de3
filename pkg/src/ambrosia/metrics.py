"""Session quality metrics and delta sweeps."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .errors import StreamCorruption, ValidationError
from .protocol import ProtocolConfig, TransmissionLog, run_session
from .timeseries import TimeSeries


@dataclass(frozen=True)
class SessionMetrics:
    data_sent_pct: float
    mse: float
    #: MSE over the population variance of the true series; None when that variance is 0
    nmse: float | None
    max_abs_error: float
    n: int


def compute_metrics(log: TransmissionLog, delta: float | None = None) -> SessionMetrics:
    """Metrics for a finished session.

    ``max_abs_error`` covers post-bootstrap indices only (bootstrap samples
    are exact anyway) and must not exceed ``delta`` (the session's own
    threshold by default); a violation means the protocol is broken.
    """
    if log.n == 0:
        raise ValidationError("empty log")
    err = log.true - log.processed
    mse = float(np.mean(err * err))
    var = float(np.var(log.true))
    nmse = mse / var if var > 0 else None
    tail = err[log.config.bootstrap:]
    max_abs = float(np.max(np.abs(tail))) if len(tail) else 0.0
    bound = log.config.delta if delta is None else delta
    if max_abs > bound:
        raise StreamCorruption(f"error bound violated: {max_abs!r} > {bound!r}")
    return SessionMetrics(log.data_sent_pct, mse, nmse, max_abs, log.n)


@dataclass(frozen=True)
class SweepRow:
    delta: float
    forecaster: str
    metrics: SessionMetrics

    def as_dict(self) -> dict:
        return {"delta": self.delta, "forecaster": self.forecaster, **asdict(self.metrics)}


SWEEP_COLUMNS = ("delta", "forecaster", "data_sent_pct", "mse", "nmse", "max_abs_error")


def sweep(
    series: TimeSeries, deltas: Sequence[float], configs: Sequence[ProtocolConfig]
) -> list[SweepRow]:
    """Run one session per (delta, config); each config's own delta is overridden."""
    if not deltas:
        raise ValidationError("deltas must be non-empty")
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise ValidationError("deltas must be ascending")
    rows = []
    for d in deltas:
        for cfg in configs:
            cfg = replace(cfg, delta=float(d))
            log = run_session(series, cfg)
            rows.append(SweepRow(float(d), cfg.forecaster, compute_metrics(log, cfg.delta)))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        d = r.as_dict()
        w.writerow([_fmt(d[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Sequence[SweepRow]) -> str:
    return json.dumps([{c: r.as_dict()[c] for c in SWEEP_COLUMNS} for r in rows], indent=2) + "\n"
