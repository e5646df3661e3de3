"""Pinned synthetic datasets used by the regression and golden-file tests.

Each entry is a :class:`SyntheticSpec`; ``generate(PINNED[name])`` always
returns the same series. The anomaly entry also fixes the score threshold
used for peak matching.
"""

from __future__ import annotations

from .errors import ValidationError
from .timeseries import SyntheticSpec, TimeSeries, generate

# noisy periodic signal for delta sweeps
SWEEP = SyntheticSpec(
    "sinusoid", 1000, noise_std=0.6, amplitude=3.0, period=40.0, seed=2024
)

# periodic signal with three injected spikes for anomaly scoring
SPIKED = SyntheticSpec(
    "sinusoid", 500, noise_std=0.3, amplitude=3.0, period=40.0, seed=7,
    anomaly_indices=((120, 6.0), (260, -6.0), (400, 6.0)),
)
SPIKED_THRESHOLD = 30.0

# acceleration sampled at 10 Hz for displacement
ACCEL = SyntheticSpec(
    "sinusoid", 400, noise_std=0.4, amplitude=2.0, period=50.0, seed=1, sample_period=0.1
)

PINNED: dict[str, SyntheticSpec] = {"sweep": SWEEP, "spiked": SPIKED, "accel": ACCEL}


def pinned(name: str) -> TimeSeries:
    try:
        return generate(PINNED[name])
    except KeyError:
        raise ValidationError(f"unknown pinned dataset {name!r}; valid: {', '.join(PINNED)}") from None
