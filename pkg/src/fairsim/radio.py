"""Distance -> path loss -> SNR -> data rate, and per-frame airtime."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import ConfigError, LinkDown, NonPositiveDistance
from .scenario import ResolutionChoice, SimConfig


@dataclass(frozen=True)
class RateTable:
    """Step table of (min_snr dB, rate bits/s), both strictly increasing."""

    entries: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        entries = tuple((float(s), float(r)) for s, r in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ConfigError("rate table is empty")
        snrs = [s for s, _ in entries]
        rates = [r for _, r in entries]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ConfigError("rate table min_snr must be strictly increasing")
        if any(b <= a for a, b in zip(rates, rates[1:])) or rates[0] <= 0:
            raise ConfigError("rate table rates must be positive and strictly increasing")

    @property
    def thresholds(self):
        return [s for s, _ in self.entries]

    @property
    def rates(self):
        return [r for _, r in self.entries]

    def to_dict(self) -> dict:
        return {"entries": [{"min_snr_db": s, "rate_mbps": r / 1e6} for s, r in self.entries]}

    @classmethod
    def from_dict(cls, d) -> "RateTable":
        rows = d["entries"] if isinstance(d, dict) else d
        return cls(tuple((row["min_snr_db"], row["rate_mbps"] * 1e6) for row in rows))


# 802.11n, 4 spatial streams
DEFAULT_RATE_TABLE = RateTable(
    (
        (2, 29e6),
        (5, 58e6),
        (9, 87e6),
        (11, 116e6),
        (15, 173e6),
        (18, 231e6),
        (20, 260e6),
        (25, 289e6),
    )
)


def load_rate_table(path) -> RateTable:
    with open(path, encoding="utf-8") as fh:
        return RateTable.from_dict(json.load(fh))


@dataclass(frozen=True)
class LinkState:
    distance_d: float
    path_loss: float
    snr: float
    rate_R: float
    connected: bool


def path_loss(distance_d: float, cfg: SimConfig) -> float:
    if not distance_d > 0:
        raise NonPositiveDistance(f"distance must be > 0, got {distance_d}")
    return (
        20.0 * math.log10(cfg.carrier_freq_f)
        + 10.0 * cfg.pathloss_exponent_n * math.log10(distance_d)
        - 24.0
    )


def snr(path_loss_db: float, cfg: SimConfig) -> float:
    return cfg.tx_power - path_loss_db - cfg.noise_floor


def rate_lookup(snr_db: float, table: RateTable = DEFAULT_RATE_TABLE) -> Tuple[float, bool]:
    """Highest rate whose threshold is <= snr; (0.0, False) below the table."""
    i = bisect.bisect_right(table.thresholds, snr_db)
    if i == 0:
        return 0.0, False
    return table.rates[i - 1], True


def link_state(distance_d: float, cfg: SimConfig, table: RateTable = DEFAULT_RATE_TABLE) -> LinkState:
    pl = path_loss(max(distance_d, cfg.min_distance), cfg)
    s = snr(pl, cfg)
    rate, connected = rate_lookup(s, table)
    return LinkState(distance_d, pl, s, rate, connected)


def link_states_batch(distances: Sequence[float], cfg: SimConfig, table: RateTable = DEFAULT_RATE_TABLE):
    """Link chain over many distances; returns (path_loss, snr, rate) arrays.

    The logarithm goes through ``math.log10`` element-wise so results match
    ``link_state`` bit for bit (numpy's log10 can differ in the last ulp).
    """
    d = np.maximum(np.asarray(distances, dtype=float), cfg.min_distance)
    logd = np.fromiter((math.log10(x) for x in d), dtype=float, count=d.size)
    pl = 20.0 * math.log10(cfg.carrier_freq_f) + 10.0 * cfg.pathloss_exponent_n * logd - 24.0
    s = cfg.tx_power - pl - cfg.noise_floor
    idx = np.searchsorted(np.asarray(table.thresholds), s, side="right")
    rates = np.concatenate(([0.0], np.asarray(table.rates)))[idx]
    return pl, s, rates


def frame_latency(res: ResolutionChoice, rate_R: float) -> float:
    if not rate_R > 0:
        raise LinkDown("frame latency needs a positive rate")
    return res.bits / rate_R
