"""Builders shared by the allocator, adapter and acceptance tests."""

from fairsim.radio import LinkState
from fairsim.scenario import VehicleState

RATES = (29e6, 58e6, 87e6, 116e6, 173e6, 231e6, 260e6, 289e6)


def ucv(vid, speed, streak=0, dcv=False):
    return VehicleState(vid, 0.0, (0.0, 0.0), float(speed), True, dcv, unallocated_streak=streak)


def dcv(vid, speed=5.0):
    return VehicleState(vid, 0.0, (0.0, 0.0), float(speed), False, True)


def link(rate):
    return LinkState(5.0, 0.0, 0.0, float(rate), rate > 0)


def links_for(states, rates):
    return {s.vehicle_id: link(r) for s, r in zip(states, rates)}


# one "PASS/FAIL criterion N: ..." line per acceptance criterion, printed in
# the terminal summary by conftest.py
ACCEPTANCE_LINES = []


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
