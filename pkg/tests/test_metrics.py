import json

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ambrosia.datasets import pinned
from ambrosia.metrics import SWEEP_COLUMNS, compute_metrics, rows_to_csv, rows_to_json, sweep
from ambrosia.protocol import ProtocolConfig, TransmissionLog
from ambrosia.timeseries import SyntheticSpec, generate


def make_log(true, processed, delta=10.0):
    true = np.asarray(true, float)
    processed = np.asarray(processed, float)
    return TransmissionLog(true, processed, true == processed, ProtocolConfig(w=1, delta=delta))


def test_identity_has_zero_error():
    m = compute_metrics(make_log([1, 5, 2, 8], [1, 5, 2, 8]))
    assert (m.mse, m.nmse, m.max_abs_error, m.data_sent_pct) == (0.0, 0.0, 0.0, 100.0)


def test_hand_arithmetic():
    m = compute_metrics(make_log([0, 2], [1, 1]))
    assert m.mse == 1.0
    assert m.nmse == 1.0


def test_constant_truth_has_no_nmse():
    m = compute_metrics(make_log([3, 3, 3], [3, 2.5, 3.5]))
    assert m.nmse is None
    assert m.mse == pytest.approx(1 / 6)


vals = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=40)


@settings(max_examples=100)
@given(vals, st.floats(-1e3, 1e3), st.floats(0.01, 100), st.data())
def test_nmse_invariances(true, shift, scale, data):
    noise = data.draw(st.lists(st.floats(-1, 1), min_size=len(true), max_size=len(true)))
    true = np.array(true)
    assume(np.var(true) > 1e-3)
    proc = true + np.array(noise)
    base = compute_metrics(make_log(true, proc, delta=1e9)).nmse
    shifted = compute_metrics(make_log(true + shift, proc + shift, delta=1e9)).nmse
    scaled = compute_metrics(make_log(true * scale, proc * scale, delta=1e9)).nmse
    assert shifted == pytest.approx(base, rel=1e-6, abs=1e-9)
    assert scaled == pytest.approx(base, rel=1e-6, abs=1e-12)


def test_sweep_delta_zero_row():
    s = generate(SyntheticSpec("sinusoid", 200, noise_std=0.4, seed=1))
    rows = sweep(s, [0.0], [ProtocolConfig(w=5)])
    assert len(rows) == 1
    assert rows[0].metrics.data_sent_pct == 100.0 and rows[0].metrics.nmse == 0.0


def test_sweep_linear_ramp():
    s = generate(SyntheticSpec("linear", 400, slope=0.5, intercept=1.0))
    w = 4
    for r in sweep(s, [0.1, 0.5, 2.0], [ProtocolConfig(w=w)]):
        assert r.metrics.data_sent_pct == 100.0 * (w + 1) / 400
        assert r.metrics.nmse == 0.0


def test_sweep_rejects_unsorted():
    with pytest.raises(ValueError, match="ascending"):
        sweep(pinned("sweep"), [0.8, 0.4], [ProtocolConfig()])


def test_pinned_sweep_trends():
    rows = sweep(pinned("sweep"), [0.0, 0.4, 0.8, 1.2],
                 [ProtocolConfig(w=5), ProtocolConfig(w=5, forecaster="arima")])
    for kind in ("window", "arima"):
        sel = [r.metrics for r in rows if r.forecaster == kind]
        sent = [m.data_sent_pct for m in sel]
        nmse = [m.nmse for m in sel]
        assert sent == sorted(sent, reverse=True)
        assert nmse == sorted(nmse)
        assert all(m.max_abs_error <= d for m, d in zip(sel, (0.0, 0.4, 0.8, 1.2)))


def test_csv_and_json_agree():
    rows = sweep(pinned("sweep"), [0.0, 0.8], [ProtocolConfig(w=5)])
    csv_lines = rows_to_csv(rows).splitlines()
    assert csv_lines[0] == ",".join(SWEEP_COLUMNS)
    js = json.loads(rows_to_json(rows))
    for line, obj in zip(csv_lines[1:], js):
        cells = line.split(",")
        assert float(cells[0]) == obj["delta"]
        assert cells[1] == obj["forecaster"]
        assert float(cells[2]) == obj["data_sent_pct"]
        assert float(cells[4]) == obj["nmse"]
