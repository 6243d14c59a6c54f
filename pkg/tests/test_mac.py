import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairsim import kernels
from fairsim.mac import (
    BASELINES,
    DOWNLINK,
    UPLINK,
    ContentionConfig,
    ContentionState,
    baseline_resolution,
    contend_period,
)
from fairsim.radio import frame_latency
from fairsim.scenario import SimConfig

from helpers import dcv, links_for, ucv

CFG = SimConfig()


def _run(states, links, policy, ccfg, periods, seed, kernel=None, saturated=False, monkeypatch=None):
    if kernel is not None:
        monkeypatch.setattr(kernels, "contend", kernel)
    st_ = ContentionState(BASELINES[policy], ccfg, CFG, seed=seed)
    return [contend_period(states, links, BASELINES[policy], ccfg, CFG, state=st_, saturated=saturated)
            for _ in range(periods)]


def test_baseline_resolution():
    assert baseline_resolution(BASELINES["SA_MAX"], UPLINK, CFG).pixels == 640 * 480
    assert baseline_resolution(BASELINES["DA_MIN"], DOWNLINK, CFG).pixels == 128 * 128
    assert baseline_resolution(BASELINES["SA_MAX"], UPLINK, CFG) == baseline_resolution(BASELINES["SA_MAX"], UPLINK, CFG)


def test_contention_config_validation():
    assert ContentionConfig().validate() == []
    assert ContentionConfig(cw_min=0).validate()
    assert ContentionConfig.from_dict(ContentionConfig().to_dict()) == ContentionConfig()


@pytest.mark.parametrize("mpdu", [0.0, 12000.0])
def test_single_flow_no_collisions(mpdu):
    s = [ucv("a", 5.0)]
    res = _run(s, links_for(s, [173e6]), "SA_MAX", ContentionConfig(mpdu_bits=mpdu), 20, 1)
    frames = sum(r.flows[("a", UPLINK)].frames for r in res)
    assert sum(r.n_collisions for r in res) == 0
    assert frames == 20
    lat = frame_latency(baseline_resolution(BASELINES["SA_MAX"], UPLINK, CFG), 173e6)
    air = math.fsum(r.flows[("a", UPLINK)].payload_air for r in res)
    assert air == pytest.approx(frames * lat, rel=1e-9)


def test_all_collision_period_has_zero_utilization():
    # cw_min = cw_max = 1 forces every backoff to 0, so two flows always collide
    s = [ucv("a", 5.0), ucv("b", 5.0)]
    res = _run(s, links_for(s, [173e6] * 2), "SA_MAX", ContentionConfig(cw_min=1, cw_max=1), 3, 0, saturated=True)
    for r in res:
        assert r.payload_air == 0.0 and r.n_collisions > 0


def test_two_identical_flows_fair():
    s = [ucv("a", 5.0), ucv("b", 5.0)]
    res = _run(s, links_for(s, [173e6] * 2), "SA_MAX", ContentionConfig(), 100, 4, saturated=True)
    fa = sum(r.flows[("a", UPLINK)].frames for r in res)
    fb = sum(r.flows[("b", UPLINK)].frames for r in res)
    assert abs(fa - fb) <= 0.1 * max(fa, fb)


def test_da_mode_favours_downlink():
    s = [ucv("u", 5.0), dcv("d")]
    res = _run(s, links_for(s, [173e6] * 2), "DA_MAX", ContentionConfig(), 100, 2, saturated=True)
    up = sum(r.flows[("u", UPLINK)].frames for r in res)
    down = sum(r.flows[("d", DOWNLINK)].frames for r in res)
    assert down > up


def test_channel_time_accounted():
    s = [ucv(f"u{i}", 5.0) for i in range(4)] + [dcv(f"d{i}") for i in range(4)]
    res = _run(s, links_for(s, [29e6, 289e6, 173e6, 58e6] * 2), "SA_MAX", ContentionConfig(), 30, 9)
    for r in res:
        total = r.success_busy + r.collision_busy + r.idle
        assert total == pytest.approx(CFG.period_T, abs=1e-12)
        assert r.payload_air <= r.success_busy + 1e-15
        for f in r.flows.values():
            assert f.payload_air <= f.occupied + 1e-15


@pytest.mark.skipif(kernels.contend_numba is None, reason="numba not installed")
@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 8),
    st.integers(0, 8),
    st.integers(0, 2**32 - 1),
    st.sampled_from(list(BASELINES)),
    st.sampled_from([0.0, 12000.0]),
    st.booleans(),
)
def test_numba_numpy_parity(n_u, n_d, seed, policy, mpdu, saturated):
    rng = np.random.default_rng(seed)
    s = [ucv(f"u{i}", 5.0) for i in range(n_u)] + [dcv(f"d{i}") for i in range(n_d)]
    rates = rng.choice([0.0, 29e6, 58e6, 173e6, 289e6], size=len(s)).tolist()
    ccfg = ContentionConfig(mpdu_bits=mpdu)
    links = links_for(s, rates)
    with pytest.MonkeyPatch.context() as mp:
        a = _run(s, links, policy, ccfg, 12, seed, kernels.contend_numba, saturated, mp)
        b = _run(s, links, policy, ccfg, 12, seed, kernels.contend_numpy, saturated, mp)
    assert a == b


@pytest.mark.parametrize("flag, expected", [("1", "contend_numpy"), ("", "contend_loops")])
def test_env_flag_selects_kernel(flag, expected):
    import os
    import subprocess
    import sys

    env = dict(os.environ, FAIRSIM_DISABLE_NUMBA=flag)
    code = "import fairsim.kernels as k; print(getattr(k.contend, 'py_func', k.contend).__name__)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == (expected if flag or kernels.HAS_NUMBA else "contend_numpy")
