import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairsim.errors import EmptyScenario, InvalidPattern, OutOfRange, ParseError, SchemaError
from fairsim.scenario import SimConfig
from fairsim.trajectory import SchemaOptions, dumps_csv, loads_csv, sample_states, synthesize

HEADER = "trackId,frame,xCenter,yCenter,xVelocity,yVelocity,class\n"


def _rows(tid, cls, frames, vx=1.0, vy=0.0):
    return "".join(f"{tid},{f},{f * 0.1},0.0,{vx},{vy},{cls}\n" for f in frames)


def test_class_filter():
    text = HEADER + "".join(_rows(i, "car", range(3)) for i in (1, 2, 3))
    text += _rows(4, "pedestrian", range(3)) + _rows(5, "pedestrian", range(3))
    sc = loads_csv(text)
    assert sorted(sc.tracks) == ["1", "2", "3"]


def test_speed_from_components():
    sc = loads_csv(HEADER + _rows(1, "car", [0], vx=3.0, vy=4.0))
    assert sc.tracks["1"].speed[0] == 5.0


def test_out_of_order_frames_sorted():
    a = loads_csv(HEADER + _rows(1, "car", [0, 1, 2, 3]))
    b = loads_csv(HEADER + _rows(1, "car", [2, 0, 3, 1]))
    assert a.tracks == b.tracks


def test_parse_errors_carry_location():
    with pytest.raises(ParseError) as exc:
        loads_csv(HEADER + "1,0,0.0,0.0,abc,0.0,car\n")
    assert exc.value.row == 2 and exc.value.column == "xVelocity"
    with pytest.raises(ParseError):
        loads_csv(HEADER + _rows(1, "car", [0, 0]))
    with pytest.raises(ParseError):
        loads_csv(HEADER + _rows(1, "hovercraft", [0]))
    with pytest.raises(ParseError):
        loads_csv("# fairsim: {oops\n" + HEADER + _rows(1, "car", [0]))


def test_schema_and_empty():
    with pytest.raises(SchemaError):
        loads_csv("trackId,frame\n1,0\n")
    with pytest.raises(EmptyScenario):
        loads_csv(HEADER + _rows(1, "bicycle", [0, 1]))


def test_column_mapping():
    text = "id,f,x,y,vx,vy,kind\n1,0,0,0,1,0,car\n"
    opts = SchemaOptions(track_id="id", frame="f", x="x", y="y", v_x="vx", v_y="vy", agent_class="kind")
    assert list(loads_csv(text, opts).tracks) == ["1"]


def test_meta_join(tmp_path):
    meta = tmp_path / "tracksMeta.csv"
    meta.write_text("trackId,class\n1,car\n2,pedestrian\n")
    text = "trackId,frame,xCenter,yCenter,xVelocity,yVelocity\n" + "".join(
        f"{t},0,0,0,1,0\n" for t in (1, 2)
    )
    sc = loads_csv(text, SchemaOptions(meta_path=str(meta)))
    assert list(sc.tracks) == ["1"]


def test_zero_order_hold():
    sc = loads_csv(HEADER + _rows(1, "car", [0, 1, 2], vx=1.0) + _rows(2, "car", [2, 3], vx=2.0))
    cfg = SimConfig()
    at = {s.vehicle_id: s for s in sample_states(sc, 1 / 25, cfg)}
    assert at["1"].position[0] == pytest.approx(0.1) and "2" not in at
    mid = {s.vehicle_id: s for s in sample_states(sc, 1.5 / 25, cfg)}
    assert mid["1"].position[0] == pytest.approx(0.1)
    with pytest.raises(OutOfRange):
        sample_states(sc, 10.0, cfg)


def test_roundtrip_csv():
    sc = synthesize("stop_and_go", 2, 2, 2.0, 5)
    back = loads_csv(dumps_csv(sc))
    assert back.tracks == sc.tracks
    assert back.role_assignment == sc.role_assignment
    assert back.server_position == sc.server_position
    assert dumps_csv(back) == dumps_csv(sc)


def test_synthesize_deterministic():
    a = synthesize("constant_speed_ring", 2, 0, 10.0, 1)
    b = synthesize("constant_speed_ring", 2, 0, 10.0, 1)
    assert dumps_csv(a) == dumps_csv(b)
    assert dumps_csv(a) != dumps_csv(synthesize("constant_speed_ring", 2, 0, 10.0, 2))
    with pytest.raises(InvalidPattern):
        synthesize("zigzag", 1, 1, 1.0, 0)


def _all_states(sc, cfg):
    return [s for k in range(int(sc.span / cfg.period_T)) for s in sample_states(sc, k * cfg.period_T, cfg)]


def test_highway_pattern_exceeds_threshold():
    cfg = SimConfig()
    sc = synthesize("highway_pass", 3, 0, 5.0, 0)
    assert any(s.speed_V > cfg.v_highway for s in _all_states(sc, cfg))


def test_stop_and_go_stops():
    cfg = SimConfig()
    sc = synthesize("stop_and_go", 3, 0, 20.0, 0)
    assert any(s.speed_V == 0.0 for s in _all_states(sc, cfg))


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.sampled_from(["constant_speed_ring", "stop_and_go", "highway_pass"]))
def test_synth_roles_and_speeds(seed, pattern):
    sc = synthesize(pattern, 2, 3, 2.0, seed)
    assert sc.role_counts() == (2, 3)
    assert all(np.all(t.speed >= 0) for t in sc.tracks.values())
