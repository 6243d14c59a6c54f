"""On-vehicle resolution selection for a granted DOP/DDP.

Each direction solves a small discrete problem over its resolution ladder:
minimise ``w1 * energy - w2 * utilization`` subject to the frame fitting
the grant (utilization <= 1). Ties go to the larger resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .allocator import dop_max
from .energy import EnergyParams, download_frame_energy, offload_frame_energy
from .errors import LinkDown, ZeroGrant
from .scenario import ResolutionChoice, SimConfig

UPLINK = "uplink"
DOWNLINK = "downlink"

_FIT_TOL = 1e-12


@dataclass(frozen=True)
class AdaptationDecision:
    vehicle_id: Optional[str]
    direction: str
    resolution: ResolutionChoice
    weights: Tuple[float, float]
    objective_Q: float
    utilization: float
    frame_energy: float
    frames_this_period: int
    achieved_fps: float
    feasible: bool = True

    def to_dict(self) -> dict:
        return {
            "vehicle_id": self.vehicle_id,
            "direction": self.direction,
            "resolution": self.resolution.label(),
            "Q": self.objective_Q,
            "utilization": self.utilization,
            "frame_energy": self.frame_energy,
            "frames": self.frames_this_period,
            "fps": self.achieved_fps,
            "feasible": self.feasible,
        }


def utilization(res: ResolutionChoice, grant: float, rate_R: float) -> float:
    """Fraction of the grant one frame of ``res`` occupies."""
    if not grant > 0:
        raise ZeroGrant("utilization needs a positive grant")
    if not rate_R > 0:
        raise LinkDown("utilization needs a positive rate")
    return res.bits / (grant * rate_R)


utilization_uplink = utilization
utilization_downlink = utilization


def frames_in_grant(res: ResolutionChoice, grant: float, rate_R: float, cfg: SimConfig):
    if grant <= 0 or rate_R <= 0:
        return 0, 0.0
    count = math.floor(grant * rate_R / res.bits + 1e-9)
    count = min(count, cfg.frames_per_period)
    return count, count / cfg.period_T


def frame_energy(direction: str, res: ResolutionChoice, rate_R: float, params: EnergyParams, burst: int = 1) -> float:
    if direction == UPLINK:
        return offload_frame_energy(res, rate_R, params, burst)
    return download_frame_energy(res, rate_R, params)


def _solve(direction, grant, rate_R, weights, cfg, params, vehicle_id, shortcut):
    if not grant > 0:
        raise ZeroGrant(f"no {direction} grant")
    if not rate_R > 0:
        raise LinkDown("adaptation needs a positive rate")
    w1, w2 = weights
    ladder = [ResolutionChoice.of(r, cfg) for r in cfg.ladder(direction)]

    if shortcut:
        best = ladder[-1]
    else:
        best = None
        best_q = math.inf
        # walk from the top so equal objectives keep the larger frame
        for res in reversed(ladder):
            u = res.bits / (grant * rate_R)
            if u > 1.0 + _FIT_TOL:
                continue
            q = w1 * frame_energy(direction, res, rate_R, params) - w2 * u
            if q < best_q:
                best, best_q = res, q

    feasible = best is not None
    if best is None:
        best = ladder[0]
    frames, fps = frames_in_grant(best, grant, rate_R, cfg) if feasible else (0, 0.0)
    u = best.bits / (grant * rate_R)
    e = frame_energy(direction, best, rate_R, params, burst=max(frames, 1))
    return AdaptationDecision(
        vehicle_id=vehicle_id,
        direction=direction,
        resolution=best,
        weights=(w1, w2),
        objective_Q=w1 * e - w2 * u,
        utilization=u,
        frame_energy=e,
        frames_this_period=frames,
        achieved_fps=fps,
        feasible=feasible,
    )


def solve_p0(dop: float, rate_R: float, weights, cfg: SimConfig, params: EnergyParams, vehicle_id=None) -> AdaptationDecision:
    """Uplink resolution for a DOP; a full DOP_max grant takes the top rung."""
    full = dop > 0 and rate_R > 0 and dop >= dop_max(rate_R, cfg) * (1.0 - _FIT_TOL)
    return _solve(UPLINK, dop, rate_R, weights, cfg, params, vehicle_id, full)


def solve_p1(ddp: float, rate_R: float, weights, cfg: SimConfig, params: EnergyParams, vehicle_id=None) -> AdaptationDecision:
    return _solve(DOWNLINK, ddp, rate_R, weights, cfg, params, vehicle_id, False)
