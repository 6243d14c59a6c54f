"""Configuration, unit conventions and shared value types.

Units: seconds, meters, m/s, bits, bits/second, dB/dBm, MHz. Angles are
radians in memory and degrees in JSON files.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Tuple

from .errors import ConfigError, CoverageOutrun, ZeroSpeed

Resolution = Tuple[int, int]

DEFAULT_RESOLUTIONS: Tuple[Resolution, ...] = (
    (128, 128),
    (128, 224),
    (224, 224),
    (224, 320),
    (320, 320),
    (320, 480),
    (480, 480),
    (640, 480),
)


@dataclass(frozen=True)
class SimConfig:
    period_T: float = 0.1
    fps0: float = 10.0
    v_highway: float = 26.8
    beta_unallocated: int = 3
    stop_offload_interval: int = 10
    camera_fov_theta: float = math.radians(50.0)
    camera_range_l: float = 55.0
    color_depth_gamma: int = 8
    carrier_freq_f: float = 2400.0
    pathloss_exponent_n: float = 6.0
    tx_power: float = 20.0
    noise_floor: float = -90.0
    uplink_resolutions: Tuple[Resolution, ...] = DEFAULT_RESOLUTIONS
    downlink_resolutions: Tuple[Resolution, ...] = DEFAULT_RESOLUTIONS
    # (w1, w2, w1_bar, w2_bar)
    default_weights: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    # speeds at or below this count as a temporary stop
    stop_speed_eps: float = 0.1
    # path loss is evaluated no closer than this
    min_distance: float = 1.0

    def __post_init__(self):
        # normalise list inputs (e.g. from JSON) into hashable tuples
        object.__setattr__(self, "uplink_resolutions", _as_ladder(self.uplink_resolutions))
        object.__setattr__(self, "downlink_resolutions", _as_ladder(self.downlink_resolutions))
        object.__setattr__(self, "default_weights", tuple(float(w) for w in self.default_weights))

    @property
    def frames_per_period(self) -> int:
        """Frame cap per grant, ceil(fps0 * T)."""
        return max(0, math.ceil(self.fps0 * self.period_T - 1e-9))

    def ladder(self, direction: str) -> Tuple[Resolution, ...]:
        if direction == "uplink":
            return self.uplink_resolutions
        if direction == "downlink":
            return self.downlink_resolutions
        raise ValueError(f"unknown direction {direction!r}")


def _as_ladder(seq) -> Tuple[Resolution, ...]:
    return tuple((int(k), int(s)) for k, s in seq)


@dataclass(frozen=True)
class ResolutionChoice:
    k: int
    s: int
    bits: float

    @classmethod
    def of(cls, res: Resolution, cfg: SimConfig) -> "ResolutionChoice":
        k, s = res
        return cls(k, s, float(k * s * cfg.color_depth_gamma))

    @property
    def pixels(self) -> int:
        return self.k * self.s

    def label(self) -> str:
        return f"{self.k}x{self.s}"


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: str
    time: float
    position: Tuple[float, float]
    speed_V: float
    is_ucv: bool
    is_dcv: bool
    weights: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    unallocated_streak: int = 0


def validate_config(cfg: SimConfig) -> list:
    """Return a list of violated invariants; empty means valid."""
    problems = []
    if not cfg.period_T > 0:
        problems.append("period_T must be > 0")
    if not cfg.fps0 > 0:
        problems.append("fps0 must be > 0")
    if cfg.beta_unallocated < 1:
        problems.append("beta_unallocated must be >= 1")
    if cfg.stop_offload_interval < 1:
        problems.append("stop_offload_interval must be >= 1")
    if not cfg.camera_range_l > 0:
        problems.append("camera_range_l must be > 0")
    if cfg.camera_fov_theta < 0:
        problems.append("camera_fov_theta must be >= 0")
    if cfg.color_depth_gamma <= 0:
        problems.append("color_depth_gamma must be > 0")
    if not cfg.carrier_freq_f > 0:
        problems.append("carrier_freq_f must be > 0")
    if not cfg.min_distance > 0:
        problems.append("min_distance must be > 0")
    for name in ("uplink_resolutions", "downlink_resolutions"):
        ladder = getattr(cfg, name)
        if not ladder:
            problems.append(f"{name} must not be empty")
            continue
        if any(k <= 0 or s <= 0 for k, s in ladder):
            problems.append(f"{name} entries must be positive")
        products = [k * s for k, s in ladder]
        if any(b <= a for a, b in zip(products, products[1:])):
            problems.append(f"{name} must be sorted strictly ascending by k*s")
    if len(cfg.default_weights) != 4 or any(not w > 0 for w in cfg.default_weights):
        problems.append("default_weights must be four strictly positive values")
    return problems


def delta_area(speed_V: float, cfg: SimConfig) -> float:
    """Changed-surroundings proxy (2l - theta*V*T) * V."""
    if speed_V < 0:
        raise ValueError("speed must be nonnegative")
    coverage = 2.0 * cfg.camera_range_l - cfg.camera_fov_theta * speed_V * cfg.period_T
    if coverage <= 0:
        raise CoverageOutrun(f"speed {speed_V} m/s outruns camera coverage")
    return coverage * speed_V


def sigma_ratio(state_n: VehicleState, state_m: VehicleState, cfg: SimConfig) -> float:
    """Ratio of changed-surroundings areas of vehicle n over vehicle m."""
    return sigma_from_speeds(state_n.speed_V, state_m.speed_V, cfg)


def sigma_from_speeds(v_n: float, v_m: float, cfg: SimConfig) -> float:
    ds_n = delta_area(v_n, cfg)
    ds_m = delta_area(v_m, cfg)
    if ds_n == 0 or ds_m == 0:
        raise ZeroSpeed("sigma undefined for a stopped vehicle")
    return ds_n / ds_m


# -- JSON mapping -------------------------------------------------------------

def config_to_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d["camera_fov_deg"] = math.degrees(d.pop("camera_fov_theta"))
    d["uplink_resolutions"] = [list(r) for r in cfg.uplink_resolutions]
    d["downlink_resolutions"] = [list(r) for r in cfg.downlink_resolutions]
    d["default_weights"] = list(cfg.default_weights)
    return d


def config_from_dict(d: Optional[dict]) -> SimConfig:
    d = dict(d or {})
    if "camera_fov_deg" in d:
        d["camera_fov_theta"] = math.radians(float(d.pop("camera_fov_deg")))
    known = {f.name for f in fields(SimConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return SimConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def with_weights(cfg: SimConfig, weights) -> SimConfig:
    return replace(cfg, default_weights=tuple(weights))
