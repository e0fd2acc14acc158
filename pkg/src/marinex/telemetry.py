"""Per-tick telemetry records and their JSONL/CSV projections.

One record per tick. Every field refers to the same instant: the vessel state
at t, the detection made from it, the command decided on it (applied over the
following dt), and the disturbance force evaluated at t. Serialization uses a
fixed key/column order so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .sensing import Detection

TELEMETRY_SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "tick", "t", "x", "y", "heading", "surge", "sway", "yaw_rate",
    "left", "right", "mode", "phase", "pixel_error", "depth",
    "det_center_x", "det_center_y", "det_box_w", "det_box_h", "det_confidence",
    "pid_p", "pid_i", "pid_d", "dist_fx", "dist_fy", "dist_mz",
    "target_x", "target_y",
]


@dataclass(frozen=True)
class TelemetryRecord:
    tick: int
    t: float
    x: float
    y: float
    heading: float
    surge: float
    sway: float
    yaw_rate: float
    left: float
    right: float
    mode: str
    phase: str
    detection: Detection | None
    pixel_error: float | None
    pid_p: float
    pid_i: float
    pid_d: float
    depth: float | None
    dist_fx: float
    dist_fy: float
    dist_mz: float
    target_x: float
    target_y: float

    def to_dict(self) -> dict:
        det = None
        if self.detection is not None:
            d = self.detection
            det = {"center_x": d.center_x, "center_y": d.center_y,
                   "box_w": d.box_w, "box_h": d.box_h,
                   "confidence": d.confidence, "depth": d.depth}
        return {
            "tick": self.tick, "t": self.t,
            "x": self.x, "y": self.y, "heading": self.heading,
            "surge": self.surge, "sway": self.sway, "yaw_rate": self.yaw_rate,
            "left": self.left, "right": self.right,
            "mode": self.mode, "phase": self.phase,
            "detection": det,
            "pixel_error": self.pixel_error,
            "pid_p": self.pid_p, "pid_i": self.pid_i, "pid_d": self.pid_d,
            "depth": self.depth,
            "dist_fx": self.dist_fx, "dist_fy": self.dist_fy, "dist_mz": self.dist_mz,
            "target_x": self.target_x, "target_y": self.target_y,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TelemetryRecord":
        det = d.get("detection")
        detection = Detection(**det) if det is not None else None
        return cls(
            tick=d["tick"], t=d["t"], x=d["x"], y=d["y"], heading=d["heading"],
            surge=d["surge"], sway=d["sway"], yaw_rate=d["yaw_rate"],
            left=d["left"], right=d["right"], mode=d["mode"], phase=d["phase"],
            detection=detection, pixel_error=d["pixel_error"],
            pid_p=d["pid_p"], pid_i=d["pid_i"], pid_d=d["pid_d"],
            depth=d["depth"], dist_fx=d["dist_fx"], dist_fy=d["dist_fy"],
            dist_mz=d["dist_mz"], target_x=d["target_x"], target_y=d["target_y"],
        )


def record_to_json(rec: TelemetryRecord) -> str:
    return json.dumps(rec.to_dict(), separators=(",", ":"))


def records_to_jsonl(records: Iterable[TelemetryRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def write_jsonl(records: Iterable[TelemetryRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_jsonl(records))


def read_jsonl(path: str | Path) -> list[TelemetryRecord]:
    """Parse a telemetry JSONL file; errors name the offending line number."""
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(TelemetryRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad telemetry record ({exc})") from exc
    return records


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def write_csv(records: Iterable[TelemetryRecord], path: str | Path) -> None:
    """Flat projection with the fixed CSV_COLUMNS order."""
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        det = r.detection
        row = [
            r.tick, r.t, r.x, r.y, r.heading, r.surge, r.sway, r.yaw_rate,
            r.left, r.right, r.mode, r.phase, r.pixel_error, r.depth,
            det.center_x if det else None, det.center_y if det else None,
            det.box_w if det else None, det.box_h if det else None,
            det.confidence if det else None,
            r.pid_p, r.pid_i, r.pid_d, r.dist_fx, r.dist_fy, r.dist_mz,
            r.target_x, r.target_y,
        ]
        lines.append(",".join(_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
