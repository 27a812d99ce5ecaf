"""CSV/JSON emission with self-describing '#' parameter headers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from cqtm.spectra import BandInterval, SweepRecord

OUTPUT_DIR_ENV = "CQTM_OUTPUT_DIR"

SWEEP_COLUMNS = [
    "k",
    "branch",
    "log10_lr",
    "transmission",
    "half_trace_sign",
    "log10_half_trace",
    "band",
    "health",
]


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.15g}"
    return str(x)


def header_fields(params: dict, timestamp: bool = True) -> dict:
    out = {k: v for k, v in params.items() if v is not None}
    if timestamp:
        out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return out


def header_lines(title: str, fields: dict) -> str:
    lines = [f"# {title}"] + [f"# {k}={fmt(v)}" for k, v in fields.items()]
    return "\n".join(lines) + "\n"


def csv_text(columns: list[str], rows, header: str = "") -> str:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sweep_csv(records: list[SweepRecord], header: str = "") -> str:
    rows = ([getattr(r, c) for c in SWEEP_COLUMNS] for r in records)
    return csv_text(SWEEP_COLUMNS, rows, header)


def _bool(s: str) -> bool:
    return s.strip().lower() in ("1", "true")


def parse_header(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if "=" in body:
            key, val = body.split("=", 1)
            out[key] = val
    return out


def read_sweep_csv(text: str) -> tuple[dict, list[SweepRecord]]:
    header = parse_header(text)
    body = [line for line in text.splitlines() if not line.startswith("#")]
    records = []
    for row in csv.DictReader(body):
        records.append(
            SweepRecord(
                float(row["k"]),
                row["branch"],
                float(row["log10_lr"]),
                float(row["transmission"]),
                int(row["half_trace_sign"]),
                float(row["log10_half_trace"]),
                _bool(row["band"]),
                _bool(row["health"]),
            )
        )
    return header, records


def intervals_json(intervals: list[BandInterval], header: dict) -> str:
    body = [
        {"k_lo": iv.k_lo, "k_hi": iv.k_hi, "kind": iv.kind, "tol": iv.edge_tolerance}
        for iv in intervals
    ]
    return json.dumps({"header": header, "intervals": body}, indent=1) + "\n"


def read_intervals_json(text: str) -> list[BandInterval]:
    data = json.loads(text)
    items = data["intervals"] if isinstance(data, dict) else data
    return [BandInterval(d["k_lo"], d["k_hi"], d["kind"], d["tol"]) for d in items]


def records_json(records: list[SweepRecord], header: dict) -> str:
    body = [{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in records]
    for d in body:
        for key, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[key] = fmt(v)
    return json.dumps({"header": header, "records": body}, indent=1) + "\n"


def resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_text(text: str, path: str | None, stream=None) -> None:
    p = resolve_out(path)
    if p is None:
        (stream or sys.stdout).write(text)
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
