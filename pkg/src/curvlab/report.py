"""Deterministic report emission.

JSON floats are written with ``repr`` (shortest round-trip form, at most 17
significant digits); non-finite values become the strings ``"nan"``,
``"inf"`` and ``"-inf"``.  CSV cells use ``%.17g``.  The content hash is the
SHA-256 of the canonical JSON of everything except ``timestamp`` and the hash
itself.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["Report", "to_jsonable", "content_hash", "write_json", "write_csv", "format_float"]


def format_float(x: float) -> str:
    return "%.17g" % x


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _canonical(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_hash(data: dict) -> str:
    body = {k: v for k, v in data.items() if k not in ("timestamp", "content_hash")}
    return hashlib.sha256(_canonical(to_jsonable(body)).encode()).hexdigest()


@dataclasses.dataclass
class Report:
    command: str
    config: dict
    checks: list = dataclasses.field(default_factory=list)
    sections: dict = dataclasses.field(default_factory=dict)
    errors: list = dataclasses.field(default_factory=list)

    def add(self, name: str, passed: bool, **detail):
        self.checks.append({"name": name, "verdict": "pass" if passed else "fail", **detail})

    @property
    def passed(self) -> bool:
        return not self.errors and all(c["verdict"] == "pass" for c in self.checks)

    def as_dict(self, timestamp: str | None = None) -> dict:
        data = to_jsonable({
            "command": self.command,
            "version": __version__,
            "config": self.config,
            "checks": self.checks,
            "errors": self.errors,
            "sections": self.sections,
            "all_pass": self.passed,
        })
        data["content_hash"] = content_hash(data)
        data["timestamp"] = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return data


def write_json(path: Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
