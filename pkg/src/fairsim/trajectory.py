"""Drone-trajectory CSV ingestion and synthetic trajectory generation.

Default column names follow the public rounD/inD ``tracks.csv`` layout.
Those files keep the agent class in a separate ``tracksMeta.csv``; pass it
as ``meta_path`` when the tracks file has no class column.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from .errors import EmptyScenario, InvalidPattern, OutOfRange, ParseError, SchemaError
from .scenario import SimConfig, VehicleState

NATIVE_FRAME_RATE = 25.0
VEHICLE_CLASSES = frozenset({"car", "truck", "van", "bus", "truck_bus", "trailer"})
EXCLUDED_CLASSES = frozenset({"pedestrian", "bicycle", "motorcycle"})
ROLES = ("UCV", "DCV", "both")
PATTERNS = ("constant_speed_ring", "stop_and_go", "highway_pass")

_META_PREFIX = "# fairsim:"


@dataclass
class SchemaOptions:
    track_id: str = "trackId"
    frame: str = "frame"
    x: str = "xCenter"
    y: str = "yCenter"
    v_x: str = "xVelocity"
    v_y: str = "yVelocity"
    agent_class: str = "class"
    role: str = "role"
    frame_rate: float = NATIVE_FRAME_RATE
    meta_path: Optional[str] = None
    # used when the file has no role column: alternate | UCV | DCV | both
    default_roles: str = "alternate"
    server_position: Optional[Tuple[float, float]] = None
    time_origin: float = 0.0


@dataclass(frozen=True)
class TrajectoryPoint:
    track_id: str
    frame_index: int
    x: float
    y: float
    v_x: float
    v_y: float
    agent_class: str

    @property
    def speed(self) -> float:
        return math.hypot(self.v_x, self.v_y)


@dataclass(frozen=True, eq=False)
class Track:
    track_id: str
    agent_class: str
    frame: np.ndarray
    x: np.ndarray
    y: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray
    speed: np.ndarray = field(init=False)

    def __post_init__(self):
        order = np.argsort(self.frame, kind="stable")
        for name in ("frame", "x", "y", "v_x", "v_y"):
            arr = np.asarray(getattr(self, name))[order]
            arr = arr.astype(np.int64 if name == "frame" else np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        speed = np.hypot(self.v_x, self.v_y)
        speed.setflags(write=False)
        object.__setattr__(self, "speed", speed)

    def __eq__(self, other):
        if not isinstance(other, Track):
            return NotImplemented
        return (
            self.track_id == other.track_id
            and self.agent_class == other.agent_class
            and all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("frame", "x", "y", "v_x", "v_y"))
        )

    def __len__(self):
        return len(self.frame)

    def points(self) -> Iterator[TrajectoryPoint]:
        for i in range(len(self.frame)):
            yield TrajectoryPoint(
                self.track_id, int(self.frame[i]), float(self.x[i]), float(self.y[i]),
                float(self.v_x[i]), float(self.v_y[i]), self.agent_class,
            )


@dataclass(frozen=True)
class Scenario:
    tracks: Mapping[str, Track]
    server_position: Tuple[float, float]
    role_assignment: Mapping[str, str]
    time_origin: float = 0.0
    frame_rate: float = NATIVE_FRAME_RATE

    def __post_init__(self):
        missing = set(self.role_assignment) - set(self.tracks)
        if missing:
            raise SchemaError(f"roles assigned to unknown tracks: {sorted(missing)[:5]}")
        object.__setattr__(self, "server_position", (float(self.server_position[0]), float(self.server_position[1])))

    @property
    def start_time(self) -> float:
        first = min(int(t.frame[0]) for t in self.tracks.values())
        return self.time_origin + first / self.frame_rate

    @property
    def end_time(self) -> float:
        last = max(int(t.frame[-1]) for t in self.tracks.values())
        return self.time_origin + last / self.frame_rate

    @property
    def span(self) -> float:
        return self.end_time - self.start_time

    def role_counts(self) -> Tuple[int, int]:
        n_u = sum(1 for r in self.role_assignment.values() if r in ("UCV", "both"))
        n_d = sum(1 for r in self.role_assignment.values() if r in ("DCV", "both"))
        return n_u, n_d

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(dumps_csv(self).encode("utf-8")).hexdigest()[:16]


def _id_key(track_id: str):
    try:
        return (0, int(track_id), track_id)
    except ValueError:
        return (1, 0, track_id)


def _assign_roles(ids: List[str], mode: str) -> Dict[str, str]:
    if mode == "alternate":
        return {tid: ("UCV" if i % 2 == 0 else "DCV") for i, tid in enumerate(ids)}
    if mode in ROLES:
        return {tid: mode for tid in ids}
    raise SchemaError(f"unknown default role mode {mode!r}")


def _read_meta_classes(path, opts: SchemaOptions) -> Dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or opts.track_id not in reader.fieldnames or opts.agent_class not in reader.fieldnames:
            raise SchemaError(f"meta file lacks {opts.track_id!r}/{opts.agent_class!r}")
        return {row[opts.track_id].strip(): row[opts.agent_class].strip().lower() for row in reader}


def load_csv(path, schema_options: Optional[SchemaOptions] = None) -> Scenario:
    with open(path, newline="", encoding="utf-8") as fh:
        return loads_csv(fh.read(), schema_options)


def loads_csv(text: str, schema_options: Optional[SchemaOptions] = None) -> Scenario:
    opts = schema_options or SchemaOptions()
    meta = {}
    body_lines = []
    header_row = 1
    for line in text.splitlines(keepends=True):
        if line.startswith("#") and not body_lines:
            if line.startswith(_META_PREFIX):
                try:
                    meta = json.loads(line[len(_META_PREFIX):])
                except ValueError as exc:
                    raise ParseError(header_row, "metadata", f"bad metadata line: {exc}") from None
            header_row += 1
            continue
        body_lines.append(line)

    reader = csv.DictReader(io.StringIO("".join(body_lines)))
    columns = reader.fieldnames or []
    required = [opts.track_id, opts.frame, opts.x, opts.y, opts.v_x, opts.v_y]
    meta_classes = _read_meta_classes(opts.meta_path, opts) if opts.meta_path else None
    if meta_classes is None:
        required.append(opts.agent_class)
    missing = [c for c in required if c not in columns]
    if missing:
        raise SchemaError(f"missing columns: {missing}")
    has_role = opts.role in columns

    rows: Dict[str, dict] = {}
    for rownum, row in enumerate(reader, start=header_row + 1):
        tid = (row[opts.track_id] or "").strip()
        if not tid:
            raise ParseError(rownum, opts.track_id, "empty track id")
        if meta_classes is not None:
            if tid not in meta_classes:
                raise ParseError(rownum, opts.track_id, "track missing from meta file")
            cls = meta_classes[tid]
        else:
            cls = (row[opts.agent_class] or "").strip().lower()
        if cls not in VEHICLE_CLASSES and cls not in EXCLUDED_CLASSES:
            raise ParseError(rownum, opts.agent_class, f"unknown class {cls!r}")
        try:
            frame = int(row[opts.frame])
        except (TypeError, ValueError):
            raise ParseError(rownum, opts.frame, f"not an integer: {row[opts.frame]!r}") from None
        if frame < 0:
            raise ParseError(rownum, opts.frame, "negative frame index")
        vals = []
        for col in (opts.x, opts.y, opts.v_x, opts.v_y):
            try:
                v = float(row[col])
            except (TypeError, ValueError):
                raise ParseError(rownum, col, f"not a number: {row[col]!r}") from None
            if not math.isfinite(v):
                raise ParseError(rownum, col, "non-finite value")
            vals.append(v)
        rec = rows.setdefault(tid, {"class": cls, "frames": [], "vals": [], "rows": [], "role": None})
        if rec["class"] != cls:
            raise ParseError(rownum, opts.agent_class, "class changes within a track")
        rec["frames"].append(frame)
        rec["vals"].append(vals)
        rec["rows"].append(rownum)
        if has_role:
            role = (row[opts.role] or "").strip()
            role = {"ucv": "UCV", "dcv": "DCV", "both": "both"}.get(role.lower(), role)
            if role not in ROLES:
                raise ParseError(rownum, opts.role, f"unknown role {role!r}")
            if rec["role"] not in (None, role):
                raise ParseError(rownum, opts.role, "role changes within a track")
            rec["role"] = role

    tracks = {}
    for tid in sorted(rows, key=_id_key):
        rec = rows[tid]
        if rec["class"] in EXCLUDED_CLASSES:
            continue
        frames = np.asarray(rec["frames"], dtype=np.int64)
        order = np.argsort(frames, kind="stable")
        sorted_frames = frames[order]
        dup = np.nonzero(np.diff(sorted_frames) == 0)[0]
        if dup.size:
            raise ParseError(rec["rows"][order[dup[0] + 1]], opts.frame, "duplicate frame within track")
        vals = np.asarray(rec["vals"], dtype=np.float64)
        tracks[tid] = Track(tid, rec["class"], frames, vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3])
    if not tracks:
        raise EmptyScenario("no vehicle tracks survive class filtering")

    if has_role:
        roles = {tid: rows[tid]["role"] for tid in tracks}
    else:
        roles = _assign_roles(list(tracks), opts.default_roles)

    server = opts.server_position
    if server is None and "server_position" in meta:
        server = tuple(meta["server_position"])
    if server is None:
        xs = np.concatenate([t.x for t in tracks.values()])
        ys = np.concatenate([t.y for t in tracks.values()])
        server = (float(xs.mean()), float(ys.mean()))
    time_origin = float(meta.get("time_origin", opts.time_origin))
    frame_rate = float(meta.get("frame_rate", opts.frame_rate))
    return Scenario(tracks, server, roles, time_origin, frame_rate)


def dumps_csv(scenario: Scenario) -> str:
    out = io.StringIO()
    meta = {
        "server_position": list(scenario.server_position),
        "time_origin": scenario.time_origin,
        "frame_rate": scenario.frame_rate,
    }
    out.write(_META_PREFIX + " " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trackId", "frame", "xCenter", "yCenter", "xVelocity", "yVelocity", "class", "role"])
    for tid, tr in scenario.tracks.items():
        role = scenario.role_assignment.get(tid, "UCV")
        for i in range(len(tr)):
            w.writerow([
                tid, int(tr.frame[i]), repr(float(tr.x[i])), repr(float(tr.y[i])),
                repr(float(tr.v_x[i])), repr(float(tr.v_y[i])), tr.agent_class, role,
            ])
    return out.getvalue()


def write_csv(scenario: Scenario, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(dumps_csv(scenario))


def sample_states(scenario: Scenario, t: float, cfg: SimConfig, streaks: Optional[Mapping[str, int]] = None) -> List[VehicleState]:
    """Zero-order-hold snapshot of every track alive at ``t``."""
    eps = 1e-9
    if t > scenario.end_time + eps or t < scenario.start_time - eps:
        raise OutOfRange(f"t={t} outside [{scenario.start_time}, {scenario.end_time}]")
    f = math.floor((t - scenario.time_origin) * scenario.frame_rate + eps)
    states = []
    for tid, tr in scenario.tracks.items():
        if f < tr.frame[0] or f > tr.frame[-1]:
            continue
        i = int(np.searchsorted(tr.frame, f, side="right")) - 1
        role = scenario.role_assignment.get(tid)
        if role is None:
            continue
        states.append(VehicleState(
            vehicle_id=tid,
            time=t,
            position=(float(tr.x[i]), float(tr.y[i])),
            speed_V=float(tr.speed[i]),
            is_ucv=role in ("UCV", "both"),
            is_dcv=role in ("DCV", "both"),
            weights=cfg.default_weights,
            unallocated_streak=0 if streaks is None else streaks.get(tid, 0),
        ))
    return states


# -- synthetic scenarios ------------------------------------------------------

def synthesize(pattern: str, n_ucv: int, n_dcv: int, duration: float, seed: int, **opts) -> Scenario:
    """Deterministic synthetic scenario around a server at the origin.

    Options (all optional): ``radius_range`` for ring patterns,
    ``speed_range``, ``lateral_range`` and ``half_length`` for
    ``highway_pass``, ``n_both`` vehicles holding both roles.
    """
    if pattern not in PATTERNS:
        raise InvalidPattern(f"unknown pattern {pattern!r}; choose from {PATTERNS}")
    n_both = int(opts.pop("n_both", 0))
    n = n_ucv + n_dcv + n_both
    if n <= 0:
        raise EmptyScenario("synthesize needs at least one vehicle")
    rng = np.random.default_rng(seed)
    rate = NATIVE_FRAME_RATE
    frames = np.arange(int(round(duration * rate)) + 1, dtype=np.int64)
    t = frames / rate

    gen = {"constant_speed_ring": _ring, "stop_and_go": _stop_and_go, "highway_pass": _highway}[pattern]
    width = len(str(n))
    tracks, roles = {}, {}
    for i in range(n):
        tid = f"v{i + 1:0{width}d}"
        x, y, vx, vy = gen(rng, t, **opts)
        tracks[tid] = Track(tid, "car", frames, x, y, vx, vy)
        roles[tid] = "UCV" if i < n_ucv else ("DCV" if i < n_ucv + n_dcv else "both")
    return Scenario(tracks, (0.0, 0.0), roles, 0.0, rate)


def _ring(rng, t, radius_range=(2.0, 11.0), speed_range=(0.0, 17.72), **_):
    r = rng.uniform(*radius_range)
    v = rng.uniform(*speed_range)
    phi0 = rng.uniform(0.0, 2 * math.pi)
    phi = phi0 + v / r * t
    return _on_circle(r, phi, np.full_like(t, v))


def _on_circle(r, phi, v):
    x = r * np.cos(phi)
    y = r * np.sin(phi)
    return x, y, -v * np.sin(phi), v * np.cos(phi)


def _stop_and_go(rng, t, radius_range=(2.0, 11.0), speed_range=(3.0, 15.0), go_range=(3.0, 6.0), stop_range=(1.5, 4.0), **_):
    r = rng.uniform(*radius_range)
    v_go = rng.uniform(*speed_range)
    go = rng.uniform(*go_range)
    stop = rng.uniform(*stop_range)
    offset = rng.uniform(0.0, go + stop)
    phi0 = rng.uniform(0.0, 2 * math.pi)
    in_cycle = np.mod(t + offset, go + stop)
    v = np.where(in_cycle < go, v_go, 0.0)
    dt = np.diff(t, prepend=t[0])
    # arc length advanced with the speed held over the previous step
    arc = np.cumsum(np.concatenate(([0.0], v[:-1])) * dt)
    return _on_circle(r, phi0 + arc / r, v)


def _highway(rng, t, speed_range=(28.0, 34.0), lateral_range=(1.0, 4.0), half_length=8.0, **_):
    v = rng.uniform(*speed_range)
    lane = rng.uniform(*lateral_range) * rng.choice((-1.0, 1.0))
    x0 = rng.uniform(-half_length, half_length)
    # the vehicle loops through the covered stretch of road
    x = np.mod(x0 + v * t + half_length, 2 * half_length) - half_length
    return x, np.full_like(t, lane), np.full_like(t, v), np.zeros_like(t)
