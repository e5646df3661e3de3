"""Sensor-side encoder, server-side decoder and the frame wire format.

The encoder predicts each sample with the same forecaster the decoder runs.
A sample is sent only when ``|true - predicted| > delta``; otherwise both
sides feed the prediction back into their forecaster, so their states never
diverge. The first ``bootstrap`` samples are always sent.

Wire format (little-endian): a data frame is 1..5 pairs of ``u32 index`` +
``f64 value`` (12 bytes each, at most 60 bytes). The frame length is carried
by the link layer, so a 4-byte frame is unambiguous and used as the
end-of-batch marker: it carries the number of samples the batch covers, which
lets the decoder flush trailing suppressed samples.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import StreamCorruption, ValidationError
from .forecast import ArForecaster, Forecaster, WindowForecaster
from .timeseries import TimeSeries

FORECASTERS = ("window", "arima")
FRAME_BYTES = 60
PAIR = struct.Struct("<Id")
PAIRS_PER_FRAME = FRAME_BYTES // PAIR.size
MARKER = struct.Struct("<I")


@dataclass(frozen=True)
class ProtocolConfig:
    w: int = 5
    delta: float = 0.5
    forecaster: str = "window"
    ar_order: int = 3
    fit_window: int = 50
    refit_every: int | None = None

    def __post_init__(self):
        if not isinstance(self.w, int) or self.w < 1:
            raise ValidationError("window size w must be an integer >= 1")
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ValidationError("delta must be finite and >= 0")
        if self.forecaster not in FORECASTERS:
            raise ValidationError(f"forecaster must be one of {FORECASTERS}")
        if self.forecaster == "arima":
            # surfaces bad ar_order / fit_window combinations at construction
            self.make_forecaster()

    @property
    def bootstrap(self) -> int:
        """Number of leading samples always sent."""
        if self.forecaster == "arima":
            return max(self.w + 1, self.fit_window)
        return self.w + 1

    def make_forecaster(self) -> Forecaster:
        if self.forecaster == "window":
            return WindowForecaster(self.w)
        return ArForecaster(self.ar_order, self.fit_window, self.refit_every)


@dataclass(frozen=True)
class Decision:
    sent: bool
    #: true value when sent, prediction when suppressed
    value: float
    predicted: float | None = None


class EncoderState:
    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.forecaster = config.make_forecaster()
        self.processed: list[float] = []
        self.samples_seen = 0
        self.samples_sent = 0

    def step(self, true_value: float) -> Decision:
        true_value = float(true_value)
        if not math.isfinite(true_value):
            raise ValidationError(f"non-finite sample at index {self.samples_seen}")
        if self.samples_seen < self.config.bootstrap:
            decision = Decision(True, true_value)
        else:
            pred = self.forecaster.predict_next()
            if abs(true_value - pred) > self.config.delta:
                decision = Decision(True, true_value, pred)
            else:
                decision = Decision(False, pred, pred)
        self.forecaster.observe(decision.value)
        self.processed.append(decision.value)
        self.samples_seen += 1
        self.samples_sent += decision.sent
        return decision


class DecoderState:
    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.forecaster = config.make_forecaster()
        self.reconstructed: list[float] = []

    def step(self, received: float | None) -> float:
        """Consume one index: the transmitted value, or None if it was suppressed."""
        if received is None:
            if len(self.reconstructed) < self.config.bootstrap:
                raise StreamCorruption(
                    f"index {len(self.reconstructed)} missing during bootstrap"
                )
            value = self.forecaster.predict_next()
        else:
            value = float(received)
        self.forecaster.observe(value)
        self.reconstructed.append(value)
        return value


def encoder_step(state: EncoderState, true_value: float) -> Decision:
    return state.step(true_value)


def decoder_step(state: DecoderState, received: float | None) -> float:
    return state.step(received)


@dataclass(frozen=True, eq=False)
class TransmissionLog:
    true: np.ndarray
    processed: np.ndarray
    sent: np.ndarray
    config: ProtocolConfig

    @property
    def n(self) -> int:
        return len(self.true)

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def samples_sent(self) -> int:
        return int(self.sent.sum())

    @property
    def data_sent_pct(self) -> float:
        return 100.0 * self.samples_sent / self.n if self.n else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "true", "processed", "sent"])
        for i, (t, p, s) in enumerate(zip(self.true, self.processed, self.sent)):
            w.writerow([i, repr(float(t)), repr(float(p)), int(s)])
        return buf.getvalue()


def run_session(series: TimeSeries | Iterable[float], config: ProtocolConfig) -> TransmissionLog:
    """Drive encoder and decoder in lockstep over ``series``."""
    values = series.values if isinstance(series, TimeSeries) else np.asarray(list(series), float)
    if len(values) <= config.bootstrap:
        raise ValidationError(
            f"series length {len(values)} must exceed the bootstrap length {config.bootstrap}"
        )
    enc, dec = EncoderState(config), DecoderState(config)
    sent = np.zeros(len(values), dtype=bool)
    for i, v in enumerate(values.tolist()):
        d = enc.step(v)
        got = dec.step(d.value if d.sent else None)
        if got != d.value:
            raise StreamCorruption(f"decoder diverged from encoder at index {i}")
        sent[i] = d.sent
    processed = np.array(enc.processed)
    return TransmissionLog(np.array(values, dtype=np.float64), processed, sent, config)


@dataclass(frozen=True)
class Frame:
    pairs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not 1 <= len(self.pairs) <= PAIRS_PER_FRAME:
            raise ValidationError(f"a frame carries 1..{PAIRS_PER_FRAME} pairs")
        idx = [i for i, _ in self.pairs]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError("indices within a frame must be strictly increasing")

    def to_bytes(self) -> bytes:
        return b"".join(PAIR.pack(i, v) for i, v in self.pairs)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Frame":
        if len(data) % PAIR.size or not 0 < len(data) <= FRAME_BYTES:
            raise StreamCorruption(f"bad frame length {len(data)}")
        return cls(tuple(PAIR.iter_unpack(data)))

    def __len__(self) -> int:
        return len(self.pairs) * PAIR.size


@dataclass(frozen=True)
class FramedStream:
    frames: tuple[Frame, ...]
    #: samples covered by the batch, sent or not
    n_samples: int

    @property
    def total_frames(self) -> int:
        return len(self.frames)

    @property
    def payload_bytes(self) -> int:
        return sum(len(f) for f in self.frames)

    @property
    def full_bytes(self) -> int:
        """Payload bytes had every sample been sent."""
        return self.n_samples * PAIR.size

    @property
    def data_fraction(self) -> float:
        return self.payload_bytes / self.full_bytes if self.n_samples else 0.0

    def packets(self) -> Iterator[bytes]:
        """Link-layer packets: data frames followed by the end-of-batch marker."""
        for f in self.frames:
            yield f.to_bytes()
        yield MARKER.pack(self.n_samples)


def frame_stream(log: TransmissionLog) -> FramedStream:
    idx = np.flatnonzero(log.sent).tolist()
    pairs = [(i, float(log.true[i])) for i in idx]
    frames = tuple(
        Frame(tuple(pairs[k:k + PAIRS_PER_FRAME])) for k in range(0, len(pairs), PAIRS_PER_FRAME)
    )
    return FramedStream(frames, log.n)


def decode_packets(packets: Iterable[bytes], config: ProtocolConfig) -> list[float]:
    """Rebuild the server-side sequence from link-layer packets.

    Suppressed samples are inferred from index gaps; the end-of-batch marker
    says how many samples the batch covered.
    """
    dec = DecoderState(config)
    pos = 0
    for pkt in packets:
        if len(pkt) == MARKER.size:
            (end,) = MARKER.unpack(pkt)
            if end < pos:
                raise StreamCorruption(f"marker {end} behind stream position {pos}")
            while pos < end:
                dec.step(None)
                pos += 1
            continue
        for i, v in Frame.from_bytes(pkt).pairs:
            if i < pos:
                raise StreamCorruption(f"index {i} repeats or goes backwards (at {pos})")
            while pos < i:
                dec.step(None)
                pos += 1
            dec.step(v)
            pos += 1
    return dec.reconstructed


def write_packets(stream: FramedStream, path) -> None:
    """Dump packets to a file, each prefixed by a one-byte length."""
    with open(path, "wb") as fh:
        for pkt in stream.packets():
            fh.write(bytes([len(pkt)]) + pkt)


def read_packets(path) -> list[bytes]:
    data = open(path, "rb").read()
    out, k = [], 0
    while k < len(data):
        size = data[k]
        pkt = data[k + 1:k + 1 + size]
        if len(pkt) != size:
            raise StreamCorruption("truncated packet file")
        out.append(pkt)
        k += 1 + size
    return out
