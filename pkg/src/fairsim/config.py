"""JSON configuration bundle: simulation fields plus optional sections.

Layout::

    {
      "period_T": 0.1, "fps0": 10, ...,          # SimConfig fields
      "energy": {...},                          # EnergyParams fields
      "contention": {...},                      # ContentionConfig fields
      "rate_table": {"entries": [...]}          # or a path string
    }

Overrides use dotted keys: ``fps0=15``, ``energy.p_rev=2``,
``contention.mpdu_bits=0``. Values are parsed as JSON when possible and
kept as strings otherwise.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from .energy import EnergyParams
from .errors import ConfigError
from .mac import ContentionConfig
from .radio import DEFAULT_RATE_TABLE, RateTable, load_rate_table
from .scenario import SimConfig, config_from_dict, config_to_dict, validate_config

ENV_CONFIG = "FAIRSIM_CONFIG"
SECTIONS = ("energy", "contention", "rate_table")


@dataclass(frozen=True)
class Bundle:
    sim: SimConfig = field(default_factory=SimConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    contention: ContentionConfig = field(default_factory=ContentionConfig)
    rate_table: RateTable = DEFAULT_RATE_TABLE
    overrides: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = config_to_dict(self.sim)
        d["energy"] = self.energy.to_dict()
        d["contention"] = self.contention.to_dict()
        d["rate_table"] = self.rate_table.to_dict()
        return d


def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def apply_overrides(raw: dict, overrides: Iterable[str]) -> dict:
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"bad override key {key!r}")
        node = out
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = _parse_value(value.strip())
    return out


def bundle_from_dict(raw: dict, base_dir: Optional[Path] = None, overrides=()) -> Bundle:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    raw = apply_overrides(raw, overrides)
    sim = {k: v for k, v in raw.items() if k not in SECTIONS}
    table = raw.get("rate_table")
    if table is None:
        rate_table = DEFAULT_RATE_TABLE
    elif isinstance(table, str):
        p = Path(table)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        try:
            rate_table = load_rate_table(p)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot load rate table {p}: {exc}") from exc
    else:
        try:
            rate_table = RateTable.from_dict(table)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad rate_table: {exc}") from exc
    try:
        energy = EnergyParams.from_dict(raw.get("energy"))
        contention = ContentionConfig.from_dict(raw.get("contention"))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return Bundle(config_from_dict(sim), energy, contention, rate_table, tuple(overrides))


def load_bundle(path=None, overrides=()) -> Bundle:
    """Load ``path`` (or ``$FAIRSIM_CONFIG``); no path at all means defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    if path is None:
        return bundle_from_dict({}, overrides=overrides)
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return bundle_from_dict(raw, base_dir=path.parent, overrides=overrides)


def validate_bundle(bundle: Bundle) -> List[str]:
    return validate_config(bundle.sim) + bundle.contention.validate()
