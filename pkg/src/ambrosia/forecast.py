"""One-step-ahead forecasters: the window method and an AR-on-differences baseline.

Both forecasters are pure state machines over the observed values: two
instances fed the same sequence produce bit-identical predictions, which is
what lets a sensor and a server stay in lockstep without exchanging state.
"""

from __future__ import annotations

import copy
import logging
import math
import statistics
import time
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientHistory, NotFitted, ValidationError

logger = logging.getLogger(__name__)

# condition number above which the normal matrix is treated as singular
SINGULAR_COND = 1e12


class Forecaster(ABC):
    """Common interface. ``predict_next`` never mutates state."""

    #: observations required before ``predict_next`` is defined
    warmup: int

    @abstractmethod
    def observe(self, value: float) -> None: ...

    @abstractmethod
    def predict_next(self) -> float: ...

    @property
    @abstractmethod
    def ready(self) -> bool: ...


def window_predict(buffer: Sequence[float], w: int) -> float:
    """Predict t[n+1] = t[n] + (t[n] - t[n-w]) / w from the last w+1 values."""
    if w < 1:
        raise ValidationError("window size must be >= 1")
    if len(buffer) < w + 1:
        raise InsufficientHistory(f"need {w + 1} observations, have {len(buffer)}")
    last = float(buffer[-1])
    return last + (last - float(buffer[-1 - w])) / w


class WindowForecaster(Forecaster):
    def __init__(self, w: int = 5):
        if w < 1:
            raise ValidationError("window size must be >= 1")
        self.w = w
        self.warmup = w + 1
        self.buffer: deque[float] = deque(maxlen=w + 1)

    def observe(self, value: float) -> None:
        self.buffer.append(float(value))

    @property
    def ready(self) -> bool:
        return len(self.buffer) > self.w

    def predict_next(self) -> float:
        b = self.buffer
        if len(b) <= self.w:
            raise InsufficientHistory(f"need {self.w + 1} observations, have {len(b)}")
        # same expression as window_predict, kept inline for the hot path
        last = b[-1]
        return last + (last - b[0]) / self.w


@dataclass(frozen=True)
class ArFit:
    coefficients: np.ndarray
    #: number of leading lags actually estimated; < p when the normal matrix was singular
    order_used: int
    residual_norm: float

    @property
    def reduced(self) -> bool:
        return self.order_used < len(self.coefficients)


def _design(d: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    # row for target d[t] holds [d[t-1], ..., d[t-p]]
    m = len(d)
    return np.column_stack([d[p - k:m - k] for k in range(1, p + 1)]), d[p:]


def ar_fit(history: Sequence[float], p: int = 3, fit_window: int | None = None) -> ArFit:
    """Least-squares AR(p) coefficients on the first differences of ``history``.

    Uses the trailing ``fit_window`` values (all of them when None) and solves
    the normal equations. When the normal matrix is singular, the highest lags
    are dropped until it is not (a constant-difference ramp ends at order 1,
    a constant series at order 0), and the reduction is logged and recorded in
    ``ArFit.order_used``.
    """
    if p < 1:
        raise ValidationError("AR order must be >= 1")
    x = np.asarray(history, dtype=np.float64)
    if fit_window is not None:
        x = x[-fit_window:]
    d = np.diff(x)
    if len(d) < p + 2:
        raise InsufficientHistory(
            f"AR({p}) fit needs {p + 2} differenced points, have {max(len(d), 0)}"
        )
    X, y = _design(d, p)
    gram = X.T @ X
    rhs = X.T @ y
    coef = np.zeros(p)
    order = p
    while order > 0:
        g = gram[:order, :order]
        if np.linalg.cond(g) < SINGULAR_COND:
            coef[:order] = np.linalg.solve(g, rhs[:order])
            break
        order -= 1
    if order < p:
        logger.info("singular normal matrix; AR order reduced from %d to %d", p, order)
    r = y - X @ coef
    resid = math.sqrt(float(r @ r))
    return ArFit(coef, order, resid)


class ArForecaster(Forecaster):
    """ARIMA(p, 1, 0): an AR(p) model on first differences.

    Coefficients are fitted once, when ``fit_window`` observations have been
    seen. With ``refit_every=k`` they are re-estimated on the trailing
    ``fit_window`` values after every k further observations.
    """

    def __init__(self, p: int = 3, fit_window: int = 50, refit_every: int | None = None):
        if p < 1:
            raise ValidationError("AR order must be >= 1")
        if fit_window < p + 3:
            raise ValidationError(f"fit_window must be >= p + 3 = {p + 3}")
        if refit_every is not None and refit_every < 1:
            raise ValidationError("refit_every must be >= 1")
        self.p = p
        self.fit_window = fit_window
        self.refit_every = refit_every
        self.warmup = fit_window
        self.history: deque[float] = deque(maxlen=fit_window)
        self.coefficients: tuple[float, ...] | None = None
        self.last_fit: ArFit | None = None
        self._count = 0

    def observe(self, value: float) -> None:
        self.history.append(float(value))
        self._count += 1
        since = self._count - self.fit_window
        if since == 0 or (self.refit_every and since > 0 and since % self.refit_every == 0):
            self.fit()

    def fit(self) -> ArFit:
        fit = ar_fit(self.history, self.p)
        self.last_fit = fit
        self.coefficients = tuple(float(c) for c in fit.coefficients)
        return fit

    @property
    def ready(self) -> bool:
        return self.coefficients is not None

    def predict_next(self) -> float:
        if self.coefficients is None:
            raise NotFitted("model not fitted")
        h = self.history
        last = h[-1]
        step = 0.0
        for k, a in enumerate(self.coefficients, start=1):
            step += a * (h[-k] - h[-k - 1])
        return last + step


def ar_predict(state: ArForecaster) -> float:
    return state.predict_next()


def measure_throughput(
    forecaster: Forecaster | Callable[[], Forecaster],
    n: int,
    repeats: int = 5,
    seed: int = 0,
) -> float:
    """Median wall-clock seconds per observe+predict cycle over ``repeats`` runs.

    ``forecaster`` may be an instance (deep-copied per run) or a factory. The
    warm-up observations are fed untimed.
    """
    if n < 1000:
        raise ValidationError("n must be >= 1000")
    make = forecaster if callable(forecaster) and not isinstance(forecaster, Forecaster) else (
        lambda: copy.deepcopy(forecaster)
    )
    rng = np.random.Generator(np.random.PCG64(seed))
    probe = make()
    stream = np.cumsum(rng.normal(0.0, 1.0, n + probe.warmup)).tolist()
    times = []
    for _ in range(max(repeats, 5)):
        f = make()
        for v in stream[: f.warmup]:
            f.observe(v)
        observe, predict = f.observe, f.predict_next
        start = time.perf_counter()
        for v in stream[f.warmup:]:
            predict()
            observe(v)
        times.append(time.perf_counter() - start)
    return statistics.median(times) / n
