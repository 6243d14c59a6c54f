"""Period-by-period simulation driver and metrics ledger."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .adapter import DOWNLINK, UPLINK, solve_p0, solve_p1
from .allocator import allocate
from .energy import EnergyParams, download_frame_energy, offload_frame_energy
from .errors import ConfigError, FairSimError
from .mac import BASELINES, ContentionConfig, ContentionState, baseline_resolution, contend_period
from .radio import DEFAULT_RATE_TABLE, LinkState, RateTable, frame_latency, link_states_batch
from .scenario import SimConfig, config_to_dict, validate_config
from .trajectory import Scenario, sample_states

log = logging.getLogger(__name__)

FAIR = "FAIR"
ALGORITHMS = (FAIR,) + tuple(BASELINES)

UTILIZATION_DEFINITION = (
    "channel utilization = airtime carrying successfully delivered frame payload / period_T; "
    "FAIR busy airtime = sum(min(grant, frames * frame_latency)), baselines = successful payload airtime"
)


@dataclass
class RunSpec:
    scenario: Scenario
    algorithm: str = FAIR
    cfg: SimConfig = field(default_factory=SimConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    contention: ContentionConfig = field(default_factory=ContentionConfig)
    duration: Optional[float] = None
    seed: int = 0
    rate_table: RateTable = DEFAULT_RATE_TABLE
    label: Dict[str, object] = field(default_factory=dict)
    # baselines only: keep every flow backlogged
    saturated: bool = False

    def __post_init__(self):
        self.algorithm = self.algorithm.upper()
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")

    def snapshot(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "duration": self.duration,
            "scenario": self.scenario.fingerprint(),
            "sim": config_to_dict(self.cfg),
            "energy": self.energy.to_dict(),
            "contention": self.contention.to_dict(),
            "rate_table": self.rate_table.to_dict(),
            "label": self.label,
            "saturated": self.saturated,
        }

    def spec_hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class MetricsLedger:
    meta: dict
    vehicle_records: List[dict] = field(default_factory=list)
    system_records: List[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    audit: List[str] = field(default_factory=list)

    @property
    def algorithm(self) -> str:
        return self.meta["algorithm"]

    def to_json(self) -> str:
        return json.dumps(
            {
                "meta": self.meta,
                "aggregates": self.aggregates,
                "system": self.system_records,
                "vehicles": self.vehicle_records,
            },
            sort_keys=True,
        )

    def audit_text(self) -> str:
        return "".join(line + "\n" for line in self.audit)


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def compute_aggregates(ledger: MetricsLedger) -> dict:
    """Recompute every aggregate from the per-period series."""
    ucv = [r for r in ledger.vehicle_records if r["direction"] == UPLINK]
    dcv = [r for r in ledger.vehicle_records if r["direction"] == DOWNLINK]
    frames_u = sum(r["frames"] for r in ucv)
    frames_d = sum(r["frames"] for r in dcv)
    energy_u = math.fsum(r["frames"] * r["frame_energy"] for r in ucv if r["frames"])
    energy_d = math.fsum(r["frames"] * r["frame_energy"] for r in dcv if r["frames"])
    return {
        "periods": len(ledger.system_records),
        "channel_utilization": _mean(r["channel_utilization"] for r in ledger.system_records),
        "fps_ucv": _mean(r["fps"] for r in ucv if r["rate"] > 0),
        "fps_dcv": _mean(r["fps"] for r in dcv if r["rate"] > 0),
        "mean_Q_u": _mean(r["Q"] for r in ucv if r["Q"] is not None),
        "mean_Q_d": _mean(r["Q"] for r in dcv if r["Q"] is not None),
        "frames_ucv": frames_u,
        "frames_dcv": frames_d,
        "mean_frame_energy_ucv": energy_u / frames_u if frames_u else 0.0,
        "mean_frame_energy_dcv": energy_d / frames_d if frames_d else 0.0,
        "lifetime_energy": math.fsum([energy_u, energy_d]),
        "collisions": sum(r["collisions"] for r in ledger.system_records),
    }


def _links(states, scenario: Scenario, cfg: SimConfig, table: RateTable) -> Dict[str, LinkState]:
    if not states:
        return {}
    sx, sy = scenario.server_position
    d = np.array([math.hypot(s.position[0] - sx, s.position[1] - sy) for s in states])
    pl, snr, rate = link_states_batch(d, cfg, table)
    return {
        s.vehicle_id: LinkState(float(d[i]), float(pl[i]), float(snr[i]), float(rate[i]), bool(rate[i] > 0))
        for i, s in enumerate(states)
    }


def _vehicle_row(k, t, st, link, direction, case, grant, res, frames, energy, util, q, feasible):
    return {
        "period": k,
        "time": t,
        "vehicle_id": st.vehicle_id,
        "direction": direction,
        "case": case,
        "speed": st.speed_V,
        "distance": link.distance_d,
        "snr": link.snr,
        "rate": link.rate_R,
        "grant": grant,
        "resolution": res.label() if res is not None else "",
        "pixels": res.pixels if res is not None else 0,
        "frames": frames,
        "fps": 0.0,
        "utilization": util,
        "frame_energy": energy,
        "Q": q,
        "feasible": feasible,
        "collisions": 0,
    }


def _period_times(spec: RunSpec):
    sc, T = spec.scenario, spec.cfg.period_T
    start, end = sc.start_time, sc.end_time
    if spec.duration is not None:
        if spec.duration > sc.span + 1e-9:
            raise ConfigError(f"duration {spec.duration} exceeds scenario span {sc.span}")
        end = min(end, start + spec.duration)
    k0 = math.ceil((start - sc.time_origin) / T - 1e-9)
    n = math.floor((end - (sc.time_origin + k0 * T)) / T + 1e-9)
    return [(k0 + i, sc.time_origin + (k0 + i) * T) for i in range(max(n, 0))]


def run(spec: RunSpec) -> MetricsLedger:
    cfg = spec.cfg
    problems = validate_config(cfg) + spec.contention.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    T = cfg.period_T
    ledger = MetricsLedger(
        meta={
            "algorithm": spec.algorithm,
            "seed": spec.seed,
            "spec_hash": spec.spec_hash(),
            "scenario": spec.scenario.fingerprint(),
            "n_ucv": spec.scenario.role_counts()[0],
            "n_dcv": spec.scenario.role_counts()[1],
            "label": dict(spec.label),
            "utilization_definition": UTILIZATION_DEFINITION,
            "modeled_constants": {"p_rev": spec.energy.p_rev, "tx_power": cfg.tx_power, "noise_floor": cfg.noise_floor},
            "config": spec.snapshot(),
        }
    )
    streaks: Dict[str, int] = {}
    cstate = None
    policy = BASELINES.get(spec.algorithm)
    if policy is not None:
        cstate = ContentionState(policy, spec.contention, cfg, seed=spec.seed)

    for k, t in _period_times(spec):
        states = sample_states(spec.scenario, t, cfg, streaks)
        links = _links(states, spec.scenario, cfg, spec.rate_table)
        if policy is None:
            rows, sysrow, audit = _fair_period(k, t, states, links, streaks, cfg, spec.energy)
            streaks = sysrow.pop("_streaks")
        else:
            rows, sysrow, audit = _baseline_period(k, t, states, links, policy, cstate, cfg, spec)
        for r in rows:
            r["fps"] = r["frames"] / T
        ledger.vehicle_records.extend(rows)
        ledger.system_records.append(sysrow)
        ledger.audit.append(json.dumps(audit, sort_keys=True))

    ledger.aggregates = compute_aggregates(ledger)
    return ledger


def _fair_period(k, t, states, links, streaks, cfg, energy):
    T = cfg.period_T
    plan = allocate(states, links, streaks, cfg, period_index=k)
    cases = {g.vehicle_id: g.case.value for g in plan.dop_grants}
    rows, decisions = [], []
    busy = []
    for st in sorted(states, key=lambda s: str(s.vehicle_id)):
        link = links[st.vehicle_id]
        w1, w2, w1b, w2b = st.weights
        for direction, grant, solver, weights, on in (
            (UPLINK, plan.dop(st.vehicle_id), solve_p0, (w1, w2), st.is_ucv),
            (DOWNLINK, plan.ddp(st.vehicle_id), solve_p1, (w1b, w2b), st.is_dcv),
        ):
            if not on:
                continue
            case = cases.get(st.vehicle_id, "") if direction == UPLINK else ""
            if grant > 0 and link.rate_R > 0:
                d = solver(grant, link.rate_R, weights, cfg, energy, vehicle_id=st.vehicle_id)
                decisions.append(d.to_dict())
                if d.feasible:
                    busy.append(min(grant, d.frames_this_period * frame_latency(d.resolution, link.rate_R)))
                rows.append(_vehicle_row(
                    k, t, st, link, direction, case, grant, d.resolution, d.frames_this_period,
                    d.frame_energy if d.feasible else 0.0, d.utilization if d.feasible else 0.0,
                    d.objective_Q if d.feasible else None, d.feasible,
                ))
            else:
                rows.append(_vehicle_row(k, t, st, link, direction, case, grant, None, 0, 0.0, 0.0, None, False))
    sysrow = {
        "period": k,
        "time": t,
        "channel_utilization": math.fsum(busy) / T,
        "leftover": plan.leftover,
        "collisions": 0,
        "idle": plan.leftover,
        "n_vehicles": len(states),
        "_streaks": plan.streaks,
    }
    audit = {"period": k, "time": t, "plan": plan.to_dict(), "decisions": decisions}
    return rows, sysrow, audit


def _baseline_period(k, t, states, links, policy, cstate, cfg, spec):
    T = cfg.period_T
    energy = spec.energy
    res = contend_period(states, links, policy, spec.contention, cfg, state=cstate, saturated=spec.saturated)
    rows = []
    for st in sorted(states, key=lambda s: str(s.vehicle_id)):
        link = links[st.vehicle_id]
        w1, w2, w1b, w2b = st.weights
        for direction, weights, on in ((UPLINK, (w1, w2), st.is_ucv), (DOWNLINK, (w1b, w2b), st.is_dcv)):
            if not on:
                continue
            fr = res.flows.get((st.vehicle_id, direction))
            choice = baseline_resolution(policy, direction, cfg)
            frames = fr.frames if fr else 0
            util = fr.payload_air / fr.occupied if fr and fr.occupied > 0 else 0.0
            e, q = 0.0, None
            if frames and link.rate_R > 0:
                if direction == UPLINK:
                    e = offload_frame_energy(choice, link.rate_R, energy)
                else:
                    e = download_frame_energy(choice, link.rate_R, energy)
                q = weights[0] * e - weights[1] * util
            rows.append(_vehicle_row(
                k, t, st, link, direction, "", fr.occupied if fr else 0.0, choice, frames, e, util, q, frames > 0,
            ))
            rows[-1]["collisions"] = fr.collisions if fr else 0
    sysrow = {
        "period": k,
        "time": t,
        "channel_utilization": res.payload_air / T,
        "leftover": 0.0,
        "collisions": res.n_collisions,
        "idle": res.idle,
        "success_busy": res.success_busy,
        "collision_busy": res.collision_busy,
        "n_vehicles": len(states),
    }
    audit = {
        "period": k,
        "time": t,
        "contention": {
            "flows": [[vid, d, f.frames, f.payload_air, f.occupied, f.collisions] for (vid, d), f in sorted(res.flows.items())],
            "success_busy": res.success_busy,
            "collision_busy": res.collision_busy,
            "idle": res.idle,
            "collisions": res.n_collisions,
        },
    }
    return rows, sysrow, audit


def channel_utilization(ledger: MetricsLedger):
    """Per-period utilization list and the run average."""
    per = [r["channel_utilization"] for r in ledger.system_records]
    return per, _mean(per)


def _run_isolated(spec: RunSpec) -> MetricsLedger:
    try:
        return run(spec)
    except FairSimError as exc:
        log.error("run %s failed: %s", spec.algorithm, exc)
        return MetricsLedger(meta={"algorithm": spec.algorithm, "label": dict(spec.label), "error": str(exc)})


def sweep(specs: Sequence[RunSpec], workers: int = 1) -> List[MetricsLedger]:
    """Independent runs, results in input order; a failing spec yields a ledger with ``meta['error']``."""
    specs = list(specs)
    if workers <= 1 or len(specs) <= 1:
        return [_run_isolated(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_isolated, specs))
