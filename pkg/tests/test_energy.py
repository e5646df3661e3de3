import numpy as np
import pytest
from hypothesis import given, strategies as st

from ambrosia.energy import (
    PROFILES,
    SECONDS_PER_YEAR,
    TrafficModel,
    fraction_lifetime,
    get_profile,
    lifetime,
    lifetime_curve,
    session_lifetime,
)
from ambrosia.errors import ChannelSaturated, ValidationError
from ambrosia.protocol import ProtocolConfig, TransmissionLog

LORA = get_profile("lora")
BLE = get_profile("ble")

TABLE = {
    # tech: (hardware, p_tx mW, p_rx mW, p_idle mW, p_sleep uW)
    "802.11psm": ("G2M5477", 699.6, 170.0, 66.0, 13.2),
    "ble": ("nRF51822", 37.2, 42.3, 13.2, 7.8),
    "802.15.4": ("SmartMeshIP", 24.11, 20.87, 4.67, 4.32),
    "lora": ("GreenNet", 419.6, 44.06, None, 4.32),
    "sigfox": ("GreenNet", 147.0, 39.0, None, 4.32),
}


@pytest.mark.parametrize("name", sorted(TABLE))
def test_power_table(name):
    p = PROFILES[name]
    assert (p.hardware, p.p_tx_mw, p.p_rx_mw, p.p_idle_mw, p.p_sleep_uw) == TABLE[name]


def test_zero_fraction_is_sleep_only():
    years = lifetime(BLE, TrafficModel(3600, 0.0))
    assert years == pytest.approx(13500 / 7.8e-6 / SECONDS_PER_YEAR)
    assert years == pytest.approx(54.9, abs=0.1)


def test_lora_full_data_anchor():
    # 1000 B at 1000 B/s: 1 s of 419.6 mW per hour plus sleep
    avg = 419.6e-3 / 3600 + 4.32e-6 * 3599 / 3600
    assert avg == pytest.approx(120.9e-6, rel=1e-3)
    years = lifetime(LORA, TrafficModel(3600, 1.0))
    assert years == pytest.approx(13500 / avg / SECONDS_PER_YEAR, rel=1e-12)
    assert years == pytest.approx(3.5, rel=0.02)


def test_lora_half_data():
    assert lifetime(LORA, TrafficModel(3600, 0.5)) == pytest.approx(6.8, rel=0.01)


def test_battery_linearity():
    a = lifetime(LORA, TrafficModel(600, 0.3))
    b = lifetime(LORA, TrafficModel(600, 0.3, battery_energy=27_000))
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_high_traffic_gains_more():
    lo = fraction_lifetime(0.5, LORA, 3600).gain_pct
    hi = fraction_lifetime(0.5, LORA, 30).gain_pct
    assert hi > lo


def test_channel_saturation():
    with pytest.raises(ChannelSaturated):
        lifetime(LORA, TrafficModel(0.5, 1.0))


def test_traffic_validation():
    with pytest.raises(ValidationError):
        TrafficModel(3600, 1.2)
    with pytest.raises(ValidationError):
        TrafficModel(0, 0.5)
    with pytest.raises(ValidationError, match="valid"):
        get_profile("zigbee")


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_curve_strictly_decreasing_and_convex(name):
    fr = np.linspace(0, 1, 21)
    years = np.array([y for _, y in lifetime_curve(PROFILES[name], 3600, fr)])
    assert np.all(np.diff(years) < 0)
    assert np.all(np.diff(years, 2) > 0)
    assert years[0] == pytest.approx(13500 / (PROFILES[name].p_sleep_uw * 1e-6) / SECONDS_PER_YEAR)


@given(st.sampled_from(sorted(PROFILES)), st.floats(0.01, 1.0), st.floats(100, 10_000), st.floats(1.01, 10))
def test_lifetime_increases_with_interval(name, frac, ti, factor):
    p = PROFILES[name]
    assert lifetime(p, TrafficModel(ti * factor, frac)) > lifetime(p, TrafficModel(ti, frac))


def test_unsorted_curve_rejected():
    with pytest.raises(ValidationError):
        lifetime_curve(LORA, 3600, [1.0, 0.5])


def _log(fraction_sent: float, n: int = 1000) -> TransmissionLog:
    sent = np.zeros(n, bool)
    sent[: int(round(fraction_sent * n))] = True
    v = np.zeros(n)
    return TransmissionLog(v, v, sent, ProtocolConfig())


def test_session_lifetime():
    full = session_lifetime(_log(1.0), LORA, 3600)
    assert full.gain_pct == 0.0
    half = session_lifetime(_log(0.5), LORA, 3600)
    assert 70 <= half.gain_pct <= 95
    third = session_lifetime(_log(0.32), LORA, 3600)
    assert third.gain_pct > half.gain_pct


def test_overhead_bytes():
    base = lifetime(LORA, TrafficModel(30, 0.5))
    with_overhead = lifetime(LORA, TrafficModel(30, 0.5, overhead_bytes=100))
    assert with_overhead < base
    assert lifetime(LORA, TrafficModel(30, 0.0, overhead_bytes=100)) == lifetime(LORA, TrafficModel(30, 0.0))
