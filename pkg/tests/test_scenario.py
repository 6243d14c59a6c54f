import math

import pytest
from hypothesis import given, strategies as st

from fairsim.errors import ConfigError, CoverageOutrun, ZeroSpeed
from fairsim.scenario import (
    ResolutionChoice,
    SimConfig,
    VehicleState,
    config_from_dict,
    config_to_dict,
    delta_area,
    sigma_from_speeds,
    sigma_ratio,
    validate_config,
)

# hand-evaluated: (2*55 - radians(50)*V*0.1) * V
DS_10 = 1091.2733537400284
SIGMA_20_10 = 1.98400648887822


def test_default_config_is_valid(cfg):
    assert validate_config(cfg) == []


def test_zero_period_names_period(cfg):
    from dataclasses import replace

    problems = validate_config(replace(cfg, period_T=0))
    assert len(problems) == 1 and "period_T" in problems[0]


def test_unsorted_ladder_names_ordering():
    bad = SimConfig(uplink_resolutions=((640, 480), (128, 128)))
    problems = validate_config(bad)
    assert len(problems) == 1 and "ascending" in problems[0]


def test_nonpositive_weights_rejected():
    assert validate_config(SimConfig(default_weights=(1, 0, 1, 1)))


def test_delta_area_values(cfg):
    assert delta_area(0.0, cfg) == 0.0
    assert delta_area(10.0, cfg) == pytest.approx(DS_10, abs=1e-9)
    assert delta_area(20.0, cfg) > delta_area(10.0, cfg)


def test_delta_area_outrun(cfg):
    # 2l / (theta * T) is where coverage hits zero
    v = 2 * cfg.camera_range_l / (cfg.camera_fov_theta * cfg.period_T)
    with pytest.raises(CoverageOutrun):
        delta_area(v + 1.0, cfg)


def test_sigma_examples(cfg):
    assert sigma_from_speeds(20.0, 10.0, cfg) == pytest.approx(SIGMA_20_10, abs=1e-12)
    assert sigma_from_speeds(10.0, 20.0, cfg) == pytest.approx(0.5040306095800178, abs=1e-12)
    a = VehicleState("a", 0.0, (0, 0), 7.0, True, False)
    assert sigma_ratio(a, a, cfg) == 1.0


def test_sigma_zero_speed(cfg):
    with pytest.raises(ZeroSpeed):
        sigma_from_speeds(0.0, 10.0, cfg)


@given(st.floats(0.5, 40.0), st.floats(0.5, 40.0))
def test_sigma_reciprocal(v1, v2):
    cfg = SimConfig()
    assert sigma_from_speeds(v1, v2, cfg) * sigma_from_speeds(v2, v1, cfg) == pytest.approx(1.0, rel=1e-12)


def test_resolution_bits(cfg):
    r = ResolutionChoice.of((640, 480), cfg)
    assert r.bits == 2_457_600 and r.pixels == 307_200


def test_config_roundtrip(cfg):
    d = config_to_dict(cfg)
    assert d["camera_fov_deg"] == pytest.approx(50.0)
    back = config_from_dict(d)
    assert back.camera_fov_theta == pytest.approx(cfg.camera_fov_theta, rel=1e-15)
    assert back.uplink_resolutions == cfg.uplink_resolutions


def test_config_unknown_key():
    with pytest.raises(ConfigError):
        config_from_dict({"periodT": 0.1})
