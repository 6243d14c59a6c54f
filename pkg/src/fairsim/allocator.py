"""Per-period reservation of offloading (DOP) and downloading (DDP) airtime.

Order of service inside one period:

1. every HIGHWAY uplink vehicle gets the max-resolution period sized with
   the slowest link among them;
2. with no highway traffic, the fastest remaining vehicle gets the
   max-resolution period at its own rate;
3. vehicles starved for ``beta`` periods;
4. the rest in descending speed, scaled by the changed-area ratio, then
   stopped vehicles (one minimum frame, every ``stop_offload_interval``
   periods);
5. whatever budget is left is split evenly across downlink vehicles.

The budget is never overdrawn: the grant that would overdraw it is clamped
and everybody after it gets nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import LinkDown
from .radio import LinkState
from .scenario import ResolutionChoice, SimConfig, VehicleState, delta_area


class CaseLabel(str, Enum):
    HIGHWAY = "HIGHWAY"
    CONTINUOUS_UNALLOCATED = "CONTINUOUS_UNALLOCATED"
    TEMPORARY_STOP = "TEMPORARY_STOP"
    NORMAL = "NORMAL"


@dataclass(frozen=True)
class DopGrant:
    vehicle_id: str
    duration: float
    case: CaseLabel


@dataclass(frozen=True)
class DdpGrant:
    vehicle_id: str
    duration: float


@dataclass(frozen=True)
class AllocationPlan:
    period_start: float
    period_T: float
    dop_grants: Tuple[DopGrant, ...] = ()
    ddp_grants: Tuple[DdpGrant, ...] = ()
    leftover: float = 0.0
    # streak map after this period, owned by the caller
    streaks: Dict[str, int] = field(default_factory=dict)

    def dop(self, vehicle_id) -> float:
        for g in self.dop_grants:
            if g.vehicle_id == vehicle_id:
                return g.duration
        return 0.0

    def ddp(self, vehicle_id) -> float:
        for g in self.ddp_grants:
            if g.vehicle_id == vehicle_id:
                return g.duration
        return 0.0

    def total_granted(self) -> float:
        return math.fsum([g.duration for g in self.dop_grants] + [g.duration for g in self.ddp_grants])

    def to_dict(self) -> dict:
        return {
            "period_start": self.period_start,
            "dop": [[g.vehicle_id, g.duration, g.case.value] for g in self.dop_grants],
            "ddp": [[g.vehicle_id, g.duration] for g in self.ddp_grants],
            "leftover": self.leftover,
        }


def classify(states: Sequence[VehicleState], cfg: SimConfig, streaks: Optional[Mapping[str, int]] = None) -> Dict[str, CaseLabel]:
    labels = {}
    for st in states:
        streak = st.unallocated_streak if streaks is None else streaks.get(st.vehicle_id, st.unallocated_streak)
        if st.speed_V > cfg.v_highway:
            labels[st.vehicle_id] = CaseLabel.HIGHWAY
        elif st.speed_V <= cfg.stop_speed_eps:
            labels[st.vehicle_id] = CaseLabel.TEMPORARY_STOP
        elif streak >= cfg.beta_unallocated:
            labels[st.vehicle_id] = CaseLabel.CONTINUOUS_UNALLOCATED
        else:
            labels[st.vehicle_id] = CaseLabel.NORMAL
    return labels


def dop_max(rate_R: float, cfg: SimConfig) -> float:
    """Airtime for fps0*T max-resolution uplink frames at ``rate_R``."""
    if not rate_R > 0:
        raise LinkDown("DOP_max needs a positive rate")
    top = ResolutionChoice.of(cfg.uplink_resolutions[-1], cfg)
    return top.bits / rate_R * cfg.fps0 * cfg.period_T


def stop_dop(rate_R: float, cfg: SimConfig) -> float:
    """One minimum-resolution frame."""
    if not rate_R > 0:
        raise LinkDown("stop grant needs a positive rate")
    return ResolutionChoice.of(cfg.uplink_resolutions[0], cfg).bits / rate_R


def _speed_order(st: VehicleState):
    return (-st.speed_V, str(st.vehicle_id))


class _Budget:
    def __init__(self, total):
        self.remaining = total
        self.exhausted = False

    def take(self, need):
        if self.exhausted or need <= 0:
            return 0.0
        if need > self.remaining:
            got = self.remaining
            self.remaining = 0.0
            self.exhausted = True
            return got
        self.remaining -= need
        return need


def allocate(
    states: Sequence[VehicleState],
    links: Mapping[str, LinkState],
    streaks: Optional[Mapping[str, int]],
    cfg: SimConfig,
    period_index: int = 0,
) -> AllocationPlan:
    T = cfg.period_T
    start = states[0].time if states else period_index * T
    streaks = dict(streaks or {})
    if not states:
        return AllocationPlan(start, T, leftover=T, streaks=streaks)

    def rate(st):
        link = links.get(st.vehicle_id)
        return link.rate_R if link is not None and link.connected else 0.0

    ucvs = sorted((s for s in states if s.is_ucv), key=_speed_order)
    dcvs = sorted((s for s in states if s.is_dcv), key=lambda s: str(s.vehicle_id))
    labels = classify(ucvs, cfg, streaks)

    budget = _Budget(T)
    grants: Dict[str, DopGrant] = {}
    order: List[str] = []

    def give(st, need):
        grants[st.vehicle_id] = DopGrant(st.vehicle_id, budget.take(need), labels[st.vehicle_id])
        order.append(st.vehicle_id)

    live = [s for s in ucvs if rate(s) > 0]
    highway = [s for s in live if labels[s.vehicle_id] is CaseLabel.HIGHWAY]
    movers = [
        s for s in live
        if labels[s.vehicle_id] in (CaseLabel.NORMAL, CaseLabel.CONTINUOUS_UNALLOCATED)
    ]
    stopped = [s for s in live if labels[s.vehicle_id] is CaseLabel.TEMPORARY_STOP]

    if highway:
        r_min = min(rate(s) for s in highway)
        for st in highway:
            give(st, dop_max(r_min, cfg))

    ref = movers[0] if movers else None
    if ref is not None:
        ref_dop = dop_max(rate(ref), cfg)
        ref_area = delta_area(ref.speed_V, cfg)

        def scaled(st):
            # DOP_max / sigma(ref, st)
            return ref_dop * delta_area(st.speed_V, cfg) / ref_area

        if not highway:
            give(ref, ref_dop)
        for st in movers:
            if labels[st.vehicle_id] is CaseLabel.CONTINUOUS_UNALLOCATED and st.vehicle_id not in grants:
                give(st, scaled(st))
        for st in movers:
            if st.vehicle_id not in grants:
                give(st, ref_dop if st is ref else scaled(st))

    on_cadence = period_index % cfg.stop_offload_interval == 0
    for st in stopped:
        give(st, stop_dop(rate(st), cfg) if on_cadence else 0.0)

    # disconnected vehicles are listed last with nothing
    for st in ucvs:
        if st.vehicle_id not in grants:
            grants[st.vehicle_id] = DopGrant(st.vehicle_id, 0.0, labels[st.vehicle_id])
            order.append(st.vehicle_id)

    # only vehicles present this period carry a streak forward
    new_streaks = {}
    for st in ucvs:
        vid = st.vehicle_id
        if grants[vid].duration > 0:
            new_streaks[vid] = 0
        elif labels[vid] is CaseLabel.TEMPORARY_STOP and rate(st) > 0 and not on_cadence:
            new_streaks[vid] = streaks.get(vid, st.unallocated_streak)
        else:
            new_streaks[vid] = streaks.get(vid, st.unallocated_streak) + 1

    live_dcvs = [s for s in dcvs if rate(s) > 0]
    ddp = {}
    if live_dcvs and budget.remaining > 0:
        share = budget.remaining / len(live_dcvs)
        for st in live_dcvs:
            ddp[st.vehicle_id] = share
    ddp_grants = tuple(DdpGrant(s.vehicle_id, ddp.get(s.vehicle_id, 0.0)) for s in dcvs)
    dop_grants = tuple(grants[v] for v in order)

    used = math.fsum([g.duration for g in dop_grants] + [g.duration for g in ddp_grants])
    leftover = max(0.0, T - used)
    return AllocationPlan(start, T, dop_grants, ddp_grants, leftover, new_streaks)
