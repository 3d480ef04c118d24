"""Verification reports and their JSON/CSV persistence."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class VerificationReport:
    """Outcome of one numerical estimate check.

    ``grid`` holds one coordinate tuple per evaluation point (axis names in
    ``grid_names``) and ``ratios`` the measured quantity at that point, so the
    verdict can always be recomputed from the raw series.
    """

    estimate: str
    grid_names: tuple[str, ...]
    grid: list[tuple[float, ...]]
    ratios: list[float]
    sup: float
    verdict: bool
    refinement_delta: float | None = None
    bound: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) != len(self.ratios):
            raise ValueError("grid and ratios must have equal length")
        self.grid_names = tuple(self.grid_names)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["grid_names"] = list(self.grid_names)
        d["grid"] = [list(g) for g in self.grid]
        return jsonable(d)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "VerificationReport":
        d = dict(d)
        d.pop("schema_version", None)
        d.pop("kind", None)
        d["grid"] = [tuple(_unjson(x) for x in g) for g in d["grid"]]
        d["ratios"] = [_unjson(x) for x in d["ratios"]]
        d["sup"] = _unjson(d["sup"])
        if d.get("refinement_delta") is not None:
            d["refinement_delta"] = _unjson(d["refinement_delta"])
        return cls(**d)


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


def _unjson(x: Any) -> Any:
    if isinstance(x, str) and x in ("nan", "inf", "-inf"):
        return float(x)
    return x


def content_hash(config: dict[str, Any]) -> str:
    blob = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def emit_report(report: VerificationReport | dict[str, Any], path: str | Path,
                config: dict[str, Any] | None = None) -> Path:
    """Write ``report`` as versioned JSON plus a CSV sidecar next to it.

    Dict payloads (simulation runs, exponent tables) are written as-is; the
    CSV then carries one row per entry of their ``series`` mapping, if any.
    """
    path = Path(path)
    if isinstance(report, VerificationReport):
        payload = {"kind": "verification", **report.to_dict()}
    else:
        payload = {"kind": report.get("kind", "record"), **jsonable(report)}
    payload["schema_version"] = SCHEMA_VERSION
    if config is not None:
        payload["config"] = jsonable(config)
        payload["input_hash"] = content_hash(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    _write_csv(payload, path.with_suffix(".csv"))
    return path


def load_report(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())


def _write_csv(payload: dict[str, Any], path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if "grid" in payload and "ratios" in payload:
            w.writerow(list(payload["grid_names"]) + ["value"])
            for g, v in zip(payload["grid"], payload["ratios"]):
                w.writerow(list(g) + [v])
            return
        series = payload.get("series") or {}
        names = list(series)
        w.writerow(names)
        for row in zip(*(series[n] for n in names)):
            w.writerow(row)
