import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairsim.errors import ConfigError, LinkDown, NonPositiveDistance
from fairsim.radio import (
    DEFAULT_RATE_TABLE,
    RateTable,
    frame_latency,
    link_state,
    link_states_batch,
    path_loss,
    rate_lookup,
    snr,
)
from fairsim.scenario import ResolutionChoice, SimConfig

PL_10 = 103.60422483423211  # 20log10(2400) + 60 - 24
SNR_10 = 6.395775165767887


def test_path_loss_examples(cfg):
    assert path_loss(10.0, cfg) == pytest.approx(PL_10, abs=1e-9)
    assert path_loss(1.0, cfg) == pytest.approx(PL_10 - 60.0, abs=1e-9)
    assert path_loss(20.0, cfg) - path_loss(10.0, cfg) == pytest.approx(60 * np.log10(2), abs=1e-9)


def test_path_loss_rejects_nonpositive(cfg):
    with pytest.raises(NonPositiveDistance):
        path_loss(0.0, cfg)


def test_snr_examples(cfg):
    assert snr(PL_10, cfg) == pytest.approx(SNR_10, abs=1e-9)
    assert snr(cfg.tx_power - cfg.noise_floor, cfg) == 0.0
    assert snr(50.0, cfg) - snr(53.0, cfg) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize(
    "s, rate, up",
    [(15, 173e6, True), (25, 289e6, True), (1.9, 0.0, False), (2, 29e6, True), (6.396, 58e6, True), (100, 289e6, True)],
)
def test_rate_lookup(s, rate, up):
    assert rate_lookup(s) == (rate, up)


@given(st.floats(-20, 60), st.floats(0, 10))
def test_rate_monotone_in_snr(a, delta):
    assert rate_lookup(a + delta)[0] >= rate_lookup(a)[0]


def test_link_chain_at_10m(cfg):
    ls = link_state(10.0, cfg)
    assert ls.connected and ls.rate_R == 58e6
    assert ls.snr == pytest.approx(SNR_10, abs=1e-9)


def test_link_clamps_min_distance(cfg):
    assert link_state(0.0, cfg).path_loss == link_state(cfg.min_distance, cfg).path_loss


def test_batch_matches_scalar(cfg):
    d = np.array([0.3, 1.0, 2.5, 6.0, 9.9, 11.7, 12.5, 40.0])
    pl, s, r = link_states_batch(d, cfg)
    for i, di in enumerate(d):
        ls = link_state(di, cfg)
        assert pl[i] == ls.path_loss and s[i] == ls.snr and r[i] == ls.rate_R


def test_frame_latency(cfg):
    big = ResolutionChoice.of((640, 480), cfg)
    small = ResolutionChoice.of((128, 128), cfg)
    assert frame_latency(big, 173e6) == pytest.approx(0.01420578034682081, abs=1e-15)
    assert frame_latency(small, 173e6) == pytest.approx(0.0007576416184971098, abs=1e-15)
    assert frame_latency(big, 346e6) == frame_latency(big, 173e6) / 2
    with pytest.raises(LinkDown):
        frame_latency(big, 0.0)


def test_rate_table_roundtrip_and_validation():
    assert RateTable.from_dict(DEFAULT_RATE_TABLE.to_dict()) == DEFAULT_RATE_TABLE
    with pytest.raises(ConfigError):
        RateTable(((5, 58e6), (2, 29e6)))
