"""Deterministic report serialization.

Reports embed {tool_version, config_hash, input_hashes} and contain no
wall-clock data, so identical inputs and config always produce identical
bytes. Floats are rounded to 12 significant digits before writing, which
keeps report bytes stable across kernel backends whose reductions may differ
in the last ulp.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from . import __version__


def canon_value(value):
    """Recursively round floats to 12 significant digits; map nan/inf to None."""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return None
        if value == 0.0:
            return 0.0
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {str(k): canon_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canon_value(v) for v in value]
    return value


def dumps_canonical(obj) -> str:
    return json.dumps(canon_value(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: Path, obj):
    path.write_text(dumps_canonical(obj), encoding="utf-8")


def fmt_float(value: float) -> str:
    if value != value or math.isinf(value):
        return ""
    return f"{value:.12g}"


def write_csv(path: Path, header: list[str], rows: list[list]):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(fmt_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def file_hash(path: Path) -> str:
    return sha256_hex(path.read_bytes())


def build_meta(config_dict: dict, input_paths: dict[str, Path | None]) -> dict:
    config_bytes = json.dumps(canon_value(config_dict), sort_keys=True).encode("utf-8")
    hashes = {}
    for name, p in input_paths.items():
        if p is not None and Path(p).exists():
            hashes[name] = file_hash(Path(p))
    return {
        "tool_version": __version__,
        "config_hash": sha256_hex(config_bytes),
        "input_hashes": hashes,
        "schema_version": 1,
    }
