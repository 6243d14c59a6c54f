"""Contention-based baselines: same/different AIFS x max/min resolution.

Each uplink vehicle owns one station-side flow; each downlink vehicle owns
one server-side flow. Flows contend with an idealised slotted CSMA/CA:
uniform backoff in [0, CW), smallest AIFSN + backoff wins, equal countdowns
collide and double CW up to ``cw_max``, a success resets CW to ``cw_min``.
Image frames are fragmented into MPDUs of ``mpdu_bits``; every
transmission attempt pays ``tx_overhead`` (preamble + SIFS + ACK) on top of
its payload airtime. ``mpdu_bits = 0`` sends each image frame whole.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import ConfigError
from .radio import LinkState
from .scenario import ResolutionChoice, SimConfig, VehicleState

UPLINK = "uplink"
DOWNLINK = "downlink"


@dataclass(frozen=True)
class ContentionConfig:
    aifsn_server: int = 1
    aifsn_station: int = 2
    slot_time: float = 9e-6
    sifs: float = 16e-6
    cw_min: int = 15
    cw_max: int = 1023
    seed: int = 0
    # 1500-byte MPDUs; 0 sends whole image frames
    mpdu_bits: float = 12000.0
    # HT preamble (48 us) + SIFS + legacy ACK (44 us)
    tx_overhead: float = 92e-6
    # frames a flow may hold, the one in progress included
    queue_limit: int = 2

    def validate(self) -> list:
        problems = []
        if self.aifsn_server < 1 or self.aifsn_station < 1:
            problems.append("aifsn values must be >= 1")
        if self.cw_min < 1 or self.cw_min > self.cw_max:
            problems.append("need 1 <= cw_min <= cw_max")
        if not self.slot_time > 0:
            problems.append("slot_time must be > 0")
        if self.sifs < 0 or self.tx_overhead < 0 or self.mpdu_bits < 0:
            problems.append("sifs, tx_overhead and mpdu_bits must be nonnegative")
        if self.queue_limit < 1:
            problems.append("queue_limit must be >= 1")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "ContentionConfig":
        d = dict(d or {})
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown contention keys: {sorted(unknown)}")
        return cls(**d)


class AifsMode(str, Enum):
    SAME = "SAME"
    DIFFERENT = "DIFFERENT"


class ResolutionMode(str, Enum):
    MAX = "MAX"
    MIN = "MIN"


@dataclass(frozen=True)
class BaselinePolicy:
    aifs_mode: AifsMode
    resolution_mode: ResolutionMode

    @property
    def name(self) -> str:
        return ("SA_" if self.aifs_mode is AifsMode.SAME else "DA_") + self.resolution_mode.value


BASELINES = {
    "SA_MAX": BaselinePolicy(AifsMode.SAME, ResolutionMode.MAX),
    "SA_MIN": BaselinePolicy(AifsMode.SAME, ResolutionMode.MIN),
    "DA_MAX": BaselinePolicy(AifsMode.DIFFERENT, ResolutionMode.MAX),
    "DA_MIN": BaselinePolicy(AifsMode.DIFFERENT, ResolutionMode.MIN),
}


def baseline_resolution(policy: BaselinePolicy, direction: str, cfg: SimConfig) -> ResolutionChoice:
    ladder = cfg.ladder(direction)
    pick = ladder[-1] if policy.resolution_mode is ResolutionMode.MAX else ladder[0]
    return ResolutionChoice.of(pick, cfg)


def flow_aifsn(policy: BaselinePolicy, direction: str, ccfg: ContentionConfig) -> int:
    if direction == DOWNLINK and policy.aifs_mode is AifsMode.DIFFERENT:
        return ccfg.aifsn_server
    return ccfg.aifsn_station


@dataclass
class FlowResult:
    frames: int
    payload_air: float
    occupied: float
    collisions: int


@dataclass
class PeriodContention:
    flows: Dict[Tuple[str, str], FlowResult]
    success_busy: float
    collision_busy: float
    idle: float
    n_collisions: int

    @property
    def payload_air(self) -> float:
        return math.fsum(f.payload_air for f in self.flows.values())


class ContentionState:
    """Backoff, queue and RNG state that carries across periods of a run."""

    def __init__(self, policy: BaselinePolicy, ccfg: ContentionConfig, cfg: SimConfig, seed: Optional[int] = None):
        self.policy = policy
        self.ccfg = ccfg
        self.cfg = cfg
        self.rng = np.random.default_rng(ccfg.seed if seed is None else seed)
        self.keys: List[Tuple[str, str]] = []
        self._index: Dict[Tuple[str, str], int] = {}
        self.aifsn = np.zeros(0, np.int64)
        self.frame_bits = np.zeros(0, np.float64)
        self.bc = np.zeros(0, np.int64)
        self.cw = np.zeros(0, np.int64)
        self.queued = np.zeros(0, np.int64)
        self.rem_bits = np.zeros(0, np.float64)
        self.credit = np.zeros(0, np.float64)
        self.carry_f = np.zeros(2, np.float64)
        self.carry_i = np.array([kernels.NONE, -1, 0], np.int64)

    def flow(self, key) -> int:
        i = self._index.get(key)
        if i is not None:
            return i
        vid, direction = key
        i = len(self.keys)
        self.keys.append(key)
        self._index[key] = i
        res = baseline_resolution(self.policy, direction, self.cfg)
        self.aifsn = np.append(self.aifsn, flow_aifsn(self.policy, direction, self.ccfg))
        self.frame_bits = np.append(self.frame_bits, res.bits)
        self.bc = np.append(self.bc, -1)
        self.cw = np.append(self.cw, self.ccfg.cw_min)
        self.queued = np.append(self.queued, 0)
        self.rem_bits = np.append(self.rem_bits, 0.0)
        self.credit = np.append(self.credit, 0.0)
        return i


def flows_for(states: Sequence[VehicleState]) -> List[Tuple[str, str]]:
    keys = []
    for st in states:
        if st.is_ucv:
            keys.append((st.vehicle_id, UPLINK))
        if st.is_dcv:
            keys.append((st.vehicle_id, DOWNLINK))
    return keys


_SATURATED = 1 << 40


def contend_period(
    states: Sequence[VehicleState],
    links: Mapping[str, LinkState],
    policy: BaselinePolicy,
    ccfg: ContentionConfig,
    cfg: SimConfig,
    state: Optional[ContentionState] = None,
    seed: Optional[int] = None,
    saturated=False,
) -> PeriodContention:
    """Run one period of contention and return per-flow results.

    ``state`` carries backoff and queues between calls; a fresh one is
    created from ``seed`` (or ``ccfg.seed``) when omitted. ``saturated``
    keeps flows permanently backlogged, either for all flows (True) or for
    the given collection of flow keys.
    """
    if state is None:
        state = ContentionState(policy, ccfg, cfg, seed)
    keys = flows_for(sorted(states, key=lambda s: str(s.vehicle_id)))
    for k in keys:
        state.flow(k)
    n = len(state.keys)
    rate = np.zeros(n, np.float64)
    present = set()
    for k in keys:
        link = links.get(k[0])
        if link is not None and link.connected:
            rate[state.flow(k)] = link.rate_R
            present.add(k)

    per_period = cfg.fps0 * cfg.period_T
    for k in present:
        i = state.flow(k)
        sat = saturated is True or (saturated and k in saturated)
        if sat:
            state.queued[i] = _SATURATED
        else:
            state.credit[i] += per_period
            new = math.floor(state.credit[i] + 1e-9)
            state.credit[i] -= new
            state.queued[i] = min(state.queued[i] + new, ccfg.queue_limit)
        if state.queued[i] > 0 and state.rem_bits[i] <= 0:
            state.rem_bits[i] = state.frame_bits[i]

    frames_done = np.zeros(n, np.int64)
    collisions = np.zeros(n, np.int64)
    payload_air = np.zeros(n, np.float64)
    occupied = np.zeros(n, np.float64)
    channel = np.zeros(4, np.float64)
    rnd = state.rng.random(kernels.draws_bound(n, cfg.period_T, ccfg.slot_time, ccfg.sifs))
    kernels.contend(
        state.aifsn, rate, state.frame_bits, float(ccfg.mpdu_bits), ccfg.slot_time, ccfg.sifs,
        ccfg.tx_overhead, ccfg.cw_min, ccfg.cw_max, cfg.period_T,
        state.bc, state.cw, state.queued, state.rem_bits, state.carry_f, state.carry_i, rnd,
        frames_done, collisions, payload_air, occupied, channel,
    )
    flows = {
        k: FlowResult(int(frames_done[state.flow(k)]), float(payload_air[state.flow(k)]),
                      float(occupied[state.flow(k)]), int(collisions[state.flow(k)]))
        for k in keys
    }
    # a carried-in success can credit a flow that is absent this period
    for k, i in state._index.items():
        if k not in flows and (frames_done[i] or payload_air[i] or occupied[i]):
            flows[k] = FlowResult(int(frames_done[i]), float(payload_air[i]), float(occupied[i]), int(collisions[i]))
    return PeriodContention(
        flows=flows,
        success_busy=float(channel[0]),
        collision_busy=float(channel[1]),
        idle=float(channel[2]),
        n_collisions=int(channel[3]),
    )
