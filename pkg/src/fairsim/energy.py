"""Per-frame and life-time energy for offloading and downloading."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Tuple

from .errors import ConfigError, LinkDown
from .radio import frame_latency
from .scenario import ResolutionChoice

PER_FRAME = "per_frame"
COALESCED = "coalesced"


@dataclass(frozen=True)
class EnergyParams:
    p_pro: float = 1.97
    t_pro: float = 0.034
    p_tail: float = 1.61
    t_tail: float = 0.21
    # P_tr = slope * R[Mbps] + intercept
    ptr_slope: float = 0.01821
    ptr_intercept: float = 0.7368
    # camera sampling energy, cubic in pixel count: c3, c2, c1, c0
    cam_poly: Tuple[float, float, float, float] = (-1.772e-17, 7.491e-12, 2.379e-6, 0.6068)
    # modeled constant, not measured
    p_rev: float = 1.0
    tail_mode: str = PER_FRAME

    def __post_init__(self):
        object.__setattr__(self, "cam_poly", tuple(float(c) for c in self.cam_poly))
        if self.tail_mode not in (PER_FRAME, COALESCED):
            raise ConfigError(f"tail_mode must be {PER_FRAME!r} or {COALESCED!r}")
        if len(self.cam_poly) != 4:
            raise ConfigError("cam_poly needs four coefficients")
        for name in ("p_pro", "t_pro", "p_tail", "t_tail", "p_rev"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")

    @property
    def e_pro(self) -> float:
        return self.p_pro * self.t_pro

    @property
    def e_tail(self) -> float:
        return self.p_tail * self.t_tail

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cam_poly"] = list(self.cam_poly)
        return d

    @classmethod
    def from_dict(cls, d) -> "EnergyParams":
        d = dict(d or {})
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown energy keys: {sorted(unknown)}")
        return cls(**d)


def transmit_power(rate_R: float, params: EnergyParams) -> float:
    return params.ptr_slope * (rate_R / 1e6) + params.ptr_intercept


def transmit_energy(res: ResolutionChoice, rate_R: float, params: EnergyParams, burst: int = 1) -> float:
    """Promotion + transmission + tail energy of one frame.

    In coalesced mode one promotion/tail pair is shared by the ``burst``
    frames sent back to back, and each frame carries an even share of it.
    """
    latency = frame_latency(res, rate_R)
    overhead = params.e_pro + params.e_tail
    if params.tail_mode == COALESCED and burst > 1:
        overhead /= burst
    return overhead + transmit_power(rate_R, params) * latency


def camera_energy(res: ResolutionChoice, params: EnergyParams) -> float:
    c3, c2, c1, c0 = params.cam_poly
    x = float(res.pixels)
    return ((c3 * x + c2) * x + c1) * x + c0


def offload_frame_energy(res: ResolutionChoice, rate_R: float, params: EnergyParams, burst: int = 1) -> float:
    return camera_energy(res, params) + transmit_energy(res, rate_R, params, burst)


def download_frame_energy(res: ResolutionChoice, rate_R: float, params: EnergyParams) -> float:
    if not rate_R > 0:
        raise LinkDown("download energy needs a positive rate")
    return params.p_rev * frame_latency(res, rate_R)


def lifetime_energy(ledger, window=None) -> float:
    """Total frame energy of all frames completed inside ``window``.

    ``window`` is a half-open (start, end) pair in seconds; None means the
    whole run. Each per-vehicle record contributes frames * frame_energy.
    """
    terms = []
    for rec in ledger.vehicle_records:
        if window is not None and not (window[0] <= rec["time"] < window[1]):
            continue
        if rec["frames"]:
            terms.append(rec["frames"] * rec["frame_energy"])
    return math.fsum(terms)
