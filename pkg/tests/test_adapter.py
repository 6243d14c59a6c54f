import itertools

import pytest
from hypothesis import given, strategies as st

from fairsim.adapter import frames_in_grant, solve_p0, solve_p1, utilization
from fairsim.allocator import dop_max
from fairsim.energy import EnergyParams
from fairsim.errors import LinkDown, ZeroGrant
from fairsim.scenario import ResolutionChoice, SimConfig

P = EnergyParams()
DOP_173 = 0.01420578034682081


def res(cfg, k, s):
    return ResolutionChoice.of((k, s), cfg)


def test_utilization_examples(cfg):
    big, small = res(cfg, 640, 480), res(cfg, 128, 128)
    assert utilization(big, DOP_173, 173e6) == pytest.approx(1.0, abs=1e-12)
    assert utilization(small, DOP_173, 173e6) == pytest.approx(0.0533, abs=1e-4)
    assert utilization(big, 2 * DOP_173, 173e6) == utilization(big, DOP_173, 173e6) / 2
    with pytest.raises(ZeroGrant):
        utilization(big, 0.0, 173e6)
    with pytest.raises(LinkDown):
        utilization(big, 0.01, 0.0)


def test_p0_full_grant_takes_max(cfg):
    d = solve_p0(dop_max(173e6, cfg), 173e6, (1.0, 1.0), cfg, P)
    assert d.resolution.pixels == 640 * 480 and d.frames_this_period == 1


def test_p0_pure_utilization(cfg):
    # 7.160 ms at 173 Mbps fits 1.24 Mbit: 320x480 is the largest
    d = solve_p0(7.160e-3, 173e6, (0.0, 1.0), cfg, P)
    assert (d.resolution.k, d.resolution.s) == (320, 480)


def test_p0_pure_energy(cfg):
    d = solve_p0(0.012, 173e6, (1.0, 0.0), cfg, P)
    assert (d.resolution.k, d.resolution.s) == (128, 128)


def test_p1_examples(cfg):
    d = solve_p1(0.078634, 173e6, (0.0, 1.0), cfg, P)
    assert d.resolution.pixels == 640 * 480
    assert d.utilization == pytest.approx(0.1807, abs=1e-4)
    tiny = solve_p1(1e-4, 173e6, (1.0, 1.0), cfg, P)
    assert not tiny.feasible and tiny.frames_this_period == 0


def test_frames_in_grant(cfg):
    assert frames_in_grant(res(cfg, 640, 480), DOP_173, 173e6, cfg) == (1, 10.0)
    assert frames_in_grant(res(cfg, 640, 480), 0.0, 173e6, cfg) == (0, 0.0)
    assert frames_in_grant(res(cfg, 320, 320), 7.160e-3, 173e6, cfg) == (1, 10.0)


def _enumerate(direction, grant, rate, w, cfg):
    """Exhaustive oracle written independently of the solver."""
    best = None
    for k, s in cfg.ladder(direction):
        bits = k * s * cfg.color_depth_gamma
        u = bits / (grant * rate)
        if u > 1 + 1e-12:
            continue
        px = k * s
        if direction == "uplink":
            e = (P.p_pro * P.t_pro + (P.ptr_slope * rate / 1e6 + P.ptr_intercept) * bits / rate + P.p_tail * P.t_tail
                 + sum(c * px ** p for c, p in zip(P.cam_poly, (3, 2, 1, 0))))
        else:
            e = P.p_rev * bits / rate
        q = w[0] * e - w[1] * u
        # ties (to 1e-12) go to the larger frame
        if best is None or q < best[0] - 1e-12 or (abs(q - best[0]) <= 1e-12 and px > best[1]):
            best = (q, px)
    return best


instances = st.tuples(
    st.floats(1e-4, 0.1),
    st.sampled_from((29e6, 58e6, 87e6, 116e6, 173e6, 231e6, 260e6, 289e6)),
    st.floats(0.01, 30.0),
    st.floats(0.01, 30.0),
)


@given(instances, st.sampled_from(["uplink", "downlink"]))
def test_matches_enumeration(inst, direction):
    cfg = SimConfig()
    grant, rate, w1, w2 = inst
    solver = solve_p0 if direction == "uplink" else solve_p1
    if direction == "uplink" and grant >= dop_max(rate, cfg) * (1 - 1e-12):
        grant = dop_max(rate, cfg) * 0.999
    d = solver(grant, rate, (w1, w2), cfg, P)
    oracle = _enumerate(direction, grant, rate, (w1, w2), cfg)
    if oracle is None:
        assert not d.feasible
    else:
        assert d.feasible and d.resolution.pixels == oracle[1]


@given(instances, st.floats(0.01, 100.0))
def test_weight_scaling_invariance(inst, c):
    cfg = SimConfig()
    grant, rate, w1, w2 = inst
    a = solve_p1(grant, rate, (w1, w2), cfg, P)
    b = solve_p1(grant, rate, (c * w1, c * w2), cfg, P)
    assert a.resolution == b.resolution
