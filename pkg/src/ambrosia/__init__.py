"""Dual-prediction data reduction for sensor streams.

Sensor and server run the same one-step forecaster; the sensor transmits a
sample only when the forecast misses it by more than a threshold, so the
server's copy is never further than that threshold from the truth.
"""

__version__ = "0.1.0"

from .errors import (
    AmbrosiaError,
    ChannelSaturated,
    InsufficientHistory,
    NotFitted,
    StreamCorruption,
    ValidationError,
)
from .forecast import ArForecaster, WindowForecaster, ar_fit, window_predict
from .metrics import SessionMetrics, compute_metrics, sweep
from .protocol import (
    DecoderState,
    EncoderState,
    ProtocolConfig,
    TransmissionLog,
    frame_stream,
    run_session,
)
from .timeseries import SyntheticSpec, TimeSeries, generate, load_csv, write_csv
