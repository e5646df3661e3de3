"""Stream types, CSV ingestion and deterministic synthetic signals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

KINDS = ("constant", "linear", "sinusoid", "ar1", "random_walk")


@dataclass(frozen=True)
class Sample:
    index: int
    value: float
    timestamp: float | None = None


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An immutable scalar stream with contiguous indices starting at 0.

    Values are kept as a read-only float64 array; ``samples`` materializes
    :class:`Sample` objects on demand.
    """

    values: np.ndarray
    sample_period: float = 1.0
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError("series values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValidationError(f"non-finite value at index {bad}")
        if not (self.sample_period > 0 and math.isfinite(self.sample_period)):
            raise ValidationError("sample_period must be a positive finite number")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            ts = np.array(self.timestamps, dtype=np.float64)
            if ts.shape != values.shape:
                raise ValidationError("timestamps and values differ in length")
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.sample_period == other.sample_period
            and np.array_equal(self.values, other.values)
        )

    @property
    def samples(self) -> list[Sample]:
        ts = self.timestamps
        return [
            Sample(i, float(v), float(ts[i]) if ts is not None else i * self.sample_period)
            for i, v in enumerate(self.values)
        ]

    def with_values(self, values: Sequence[float]) -> "TimeSeries":
        """Same timing, different values (used for processed streams)."""
        return TimeSeries(np.asarray(values, dtype=np.float64), self.sample_period, self.timestamps)


def validate_samples(samples: Iterable[Sample]) -> None:
    """Raise ValidationError unless indices are strictly increasing and values finite."""
    prev = -1
    for s in samples:
        if s.index < 0 or s.index <= prev:
            raise ValidationError(f"index {s.index} is not strictly increasing")
        if not math.isfinite(s.value):
            raise ValidationError(f"non-finite value at index {s.index}")
        prev = s.index


def load_csv(path: str | Path, value_column: str = "value") -> TimeSeries:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError("empty series") from None
        if value_column not in header:
            raise ValidationError(f"column {value_column!r} not found in header {header}")
        vcol = header.index(value_column)
        tcol = header.index("timestamp") if "timestamp" in header else None
        values, stamps = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                v = float(row[vcol])
                t = float(row[tcol]) if tcol is not None else None
            except (ValueError, IndexError):
                raise ValidationError(f"line {lineno}: cannot parse row {row!r}") from None
            if not math.isfinite(v) or (t is not None and not math.isfinite(t)):
                raise ValidationError(f"line {lineno}: non-finite value {row!r}")
            values.append(v)
            stamps.append(t)
    if not values:
        raise ValidationError("empty series")

    if tcol is None:
        return TimeSeries(np.array(values), 1.0)
    ts = np.array(stamps)
    if len(ts) > 1:
        if np.any(np.diff(ts) <= 0):
            raise ValidationError("timestamps must be strictly increasing")
        period = float((ts[-1] - ts[0]) / (len(ts) - 1))
    else:
        period = 1.0
    return TimeSeries(np.array(values), period, ts)


def write_csv(series: TimeSeries, path: str | Path) -> None:
    # repr() round-trips float64 exactly
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if series.timestamps is not None:
            w.writerow(["timestamp", "value"])
            for t, v in zip(series.timestamps, series.values):
                w.writerow([repr(float(t)), repr(float(v))])
        else:
            w.writerow(["index", "value"])
            for i, v in enumerate(series.values):
                w.writerow([i, repr(float(v))])


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a reproducible synthetic stream.

    ``noise_std`` is additive white noise for the deterministic kinds and the
    innovation standard deviation for ``ar1`` and ``random_walk``. Anomalies
    are ``(index, magnitude)`` spikes added after everything else.
    """

    kind: str
    length: int
    noise_std: float = 0.0
    anomaly_indices: tuple[tuple[int, float], ...] = ()
    seed: int = 0
    value: float = 0.0
    slope: float = 1.0
    intercept: float = 0.0
    amplitude: float = 1.0
    period: float = 50.0
    phase: float = 0.0
    phi: float = 0.8
    sample_period: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "anomaly_indices", tuple((int(i), float(m)) for i, m in self.anomaly_indices)
        )


def generate(spec: SyntheticSpec) -> TimeSeries:
    if spec.kind not in KINDS:
        raise ValidationError(f"unknown kind {spec.kind!r}; expected one of {KINDS}")
    n = spec.length
    if n < 1:
        raise ValidationError("length must be >= 1")
    if spec.noise_std < 0:
        raise ValidationError("noise_std must be >= 0")
    for idx, _ in spec.anomaly_indices:
        if not 0 <= idx < n:
            raise ValidationError(f"anomaly index {idx} out of range for length {n}")

    # PCG64 is portable: same seed, same stream on every platform
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    noise = rng.normal(0.0, 1.0, n) * spec.noise_std if spec.noise_std > 0 else np.zeros(n)
    i = np.arange(n, dtype=np.float64)

    if spec.kind == "constant":
        x = np.full(n, spec.value) + noise
    elif spec.kind == "linear":
        x = spec.intercept + spec.slope * i + noise
    elif spec.kind == "sinusoid":
        x = spec.intercept + spec.amplitude * np.sin(2 * np.pi * i / spec.period + spec.phase) + noise
    elif spec.kind == "ar1":
        x = np.empty(n)
        prev = 0.0
        for k in range(n):
            prev = spec.phi * prev + noise[k]
            x[k] = prev
        x += spec.intercept
    else:  # random_walk
        noise[0] = 0.0
        x = spec.intercept + np.cumsum(noise)

    for idx, mag in spec.anomaly_indices:
        x[idx] += mag
    return TimeSeries(x, spec.sample_period)


def parse_gen(text: str) -> SyntheticSpec:
    """Parse ``KIND:LENGTH[,key=value...]``, e.g. ``sinusoid:500,amplitude=3,seed=7``."""
    kind, _, rest = text.partition(":")
    if not rest:
        raise ValidationError(f"generator {text!r} must look like KIND:LENGTH[,key=value...]")
    parts = rest.split(",")
    try:
        kwargs: dict = {"kind": kind.strip(), "length": int(parts[0])}
    except ValueError:
        raise ValidationError(f"bad length in generator {text!r}") from None
    allowed = {f for f in SyntheticSpec.__dataclass_fields__} - {"kind", "length", "anomaly_indices"}
    spikes = []
    for p in parts[1:]:
        key, eq, val = p.partition("=")
        key = key.strip()
        if not eq:
            raise ValidationError(f"expected key=value, got {p!r}")
        if key == "spike":
            # spike=INDEX@MAGNITUDE, repeatable
            at, _, mag = val.partition("@")
            try:
                spikes.append((int(at), float(mag)))
            except ValueError:
                raise ValidationError(f"bad spike {val!r}; expected INDEX@MAGNITUDE") from None
        elif key in allowed:
            try:
                kwargs[key] = int(val) if key == "seed" else float(val)
            except ValueError:
                raise ValidationError(f"bad value for {key!r}: {val!r}") from None
        else:
            raise ValidationError(f"unknown generator parameter {key!r}")
    return SyntheticSpec(anomaly_indices=tuple(spikes), **kwargs)
