"""JSON and CSV helpers with byte-stable number formatting."""
from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = ["read_json", "write_json", "dumps_json", "write_csv", "format_float", "sidecar_path"]


def format_float(v: float) -> str:
    # repr is the shortest string that round-trips a double
    return repr(float(v))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object at top level")
    return data


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def write_csv(path, header: list[str], rows: list[list[float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) for v in row])


def sidecar_path(output) -> Path:
    """``traj.csv`` -> ``traj.drift.json``."""
    out = Path(output)
    return out.with_name(out.stem + ".drift.json")
