"""CSV comparison tables, per-vehicle series and a hashed manifest.

Floats are written with ``repr`` so a table cell parses back to exactly the
ledger value; summary ratios are therefore exact quotients of table cells.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from .engine import FAIR, UTILIZATION_DEFINITION, MetricsLedger
from .errors import MismatchedScenario

FORMAT_VERSION = "1"

SERIES_COLUMNS = (
    "period", "time", "vehicle_id", "direction",
    "speed", "snr", "rate", "grant", "frame_energy", "utilization", "resolution",
    "frames", "fps",
)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def point_of(ledger: MetricsLedger) -> str:
    """Sweep-point label: explicit ``label['point']`` or the role counts."""
    label = ledger.meta.get("label") or {}
    if "point" in label:
        return str(label["point"])
    return f"{ledger.meta.get('n_ucv', 0)}+{ledger.meta.get('n_dcv', 0)}"


def weights_of(ledger: MetricsLedger) -> str:
    w = ledger.meta.get("config", {}).get("sim", {}).get("default_weights")
    return ":".join(_cell(float(x)) for x in w) if w else ""


def _tag(ledger: MetricsLedger, seen: Dict[str, int]) -> str:
    base = f"{ledger.algorithm}_{point_of(ledger)}_s{ledger.meta.get('seed', 0)}"
    base = re.sub(r"[^A-Za-z0-9_.+-]", "_", base)
    n = seen.get(base, 0)
    seen[base] = n + 1
    return base if n == 0 else f"{base}_{n}"


def _algorithms(ledgers) -> List[str]:
    out = []
    for L in ledgers:
        if L.algorithm not in out:
            out.append(L.algorithm)
    return out


def _pivot(ledgers, key_fn, metrics):
    """Rows keyed by key_fn, one column per (algorithm, metric); first ledger wins per cell."""
    algos = _algorithms(ledgers)
    keys: List[str] = []
    cells: Dict[tuple, float] = {}
    for L in ledgers:
        k = key_fn(L)
        if k not in keys:
            keys.append(k)
        for m in metrics:
            cells.setdefault((k, L.algorithm, m), L.aggregates.get(m))
    header = ["point"] + [a if len(metrics) == 1 else f"{a}:{m}" for a in algos for m in metrics]
    rows = [[k] + [cells.get((k, a, m)) for a in algos for m in metrics] for k in keys]
    return header, rows


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def emit_summary(ledgers: Sequence[MetricsLedger]) -> dict:
    """FAIR / baseline ratios for utilization and fps, plus mean-Q deltas.

    The first FAIR ledger is the reference; every other ledger (a second FAIR
    ledger included) is a comparison and must share its scenario.
    """
    ledgers = [L for L in ledgers if "error" not in L.meta]
    ref_i = next((i for i, L in enumerate(ledgers) if L.algorithm == FAIR), None)
    if ref_i is None:
        raise MismatchedScenario("summary needs a FAIR ledger")
    ref = ledgers[ref_i]
    others = ledgers[:ref_i] + ledgers[ref_i + 1:]
    if not others:
        raise MismatchedScenario("summary needs at least one comparison ledger")
    for L in others:
        if L.meta.get("scenario") != ref.meta.get("scenario"):
            raise MismatchedScenario(
                f"{L.algorithm} ran on scenario {L.meta.get('scenario')}, FAIR on {ref.meta.get('scenario')}"
            )
    a = ref.aggregates
    rows = []
    for L in others:
        b = L.aggregates
        rows.append({
            "baseline": L.algorithm,
            "utilization_ratio": _ratio(a["channel_utilization"], b["channel_utilization"]),
            "fps_ucv_ratio": _ratio(a["fps_ucv"], b["fps_ucv"]),
            "fps_dcv_ratio": _ratio(a["fps_dcv"], b["fps_dcv"]),
            "delta_Q_u": a["mean_Q_u"] - b["mean_Q_u"],
            "delta_Q_d": a["mean_Q_d"] - b["mean_Q_d"],
        })
    return {"reference": ref.meta.get("spec_hash"), "scenario": ref.meta.get("scenario"), "rows": rows}


SUMMARY_COLUMNS = ("baseline", "utilization_ratio", "fps_ucv_ratio", "fps_dcv_ratio", "delta_Q_u", "delta_Q_d")


def build_report(ledgers: Sequence[MetricsLedger]) -> Dict[str, str]:
    """File name -> text for every report file except the manifest."""
    ok = [L for L in ledgers if "error" not in L.meta]
    files: Dict[str, str] = {}
    files["utilization_vs_load.csv"] = _csv_text(*_pivot(ok, point_of, ["channel_utilization"]))
    files["fps_vs_load.csv"] = _csv_text(*_pivot(ok, point_of, ["fps_ucv", "fps_dcv"]))
    files["q_vs_load.csv"] = _csv_text(*_pivot(ok, point_of, ["mean_Q_u", "mean_Q_d"]))
    h, r = _pivot(ok, weights_of, ["mean_Q_u", "mean_Q_d", "mean_frame_energy_ucv"])
    h[0] = "weights"
    files["q_vs_weights.csv"] = _csv_text(h, r)

    seen: Dict[str, int] = {}
    for L in ok:
        tag = _tag(L, seen)
        files[f"series_{tag}.csv"] = _csv_text(
            SERIES_COLUMNS, ([rec[c] for c in SERIES_COLUMNS] for rec in L.vehicle_records)
        )
        files[f"system_{tag}.csv"] = _csv_text(
            ("period", "time", "channel_utilization", "leftover", "collisions"),
            ([s["period"], s["time"], s["channel_utilization"], s["leftover"], s["collisions"]] for s in L.system_records),
        )
        files[f"audit_{tag}.jsonl"] = L.audit_text()

    # one summary block per sweep point that has a FAIR run and a comparison
    groups: Dict[str, List[MetricsLedger]] = {}
    for L in ok:
        groups.setdefault(point_of(L), []).append(L)
    summary_rows = []
    for point, members in groups.items():
        try:
            summary = emit_summary(members)
        except MismatchedScenario:
            continue
        summary_rows.extend([point] + [row[c] for c in SUMMARY_COLUMNS] for row in summary["rows"])
    if summary_rows:
        files["summary.csv"] = _csv_text(("point",) + SUMMARY_COLUMNS, summary_rows)
    return files


def emit_csv(ledgers: Sequence[MetricsLedger], out_dir) -> dict:
    """Write all report files atomically plus ``manifest.json``; return the manifest."""
    out_dir = Path(out_dir)
    files = build_report(ledgers)
    for name, text in files.items():
        atomic_write(out_dir / name, text)
    manifest = {
        "format_version": FORMAT_VERSION,
        "utilization_definition": UTILIZATION_DEFINITION,
        "runs": [
            {k: L.meta.get(k) for k in ("algorithm", "seed", "spec_hash", "scenario", "label", "config", "overrides", "error")
             if k in L.meta}
            for L in ledgers
        ],
        "files": [
            {"name": name, "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest()}
            for name, text in sorted(files.items())
        ],
    }
    atomic_write(out_dir / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest
