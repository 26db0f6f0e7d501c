"""CSV and manifest output with reproducibility headers.

Every file starts with comment lines embedding the config hash and seed
so any output can be traced back to the exact invocation.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

__all__ = ["config_hash", "write_csv", "read_csv", "write_manifest"]


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path, rows: list[dict], meta: dict | None = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}={value}\n")
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return v


def read_csv(path) -> tuple[list[dict], dict]:
    """Rows (strings) and the `# key=value` metadata header."""
    meta = {}
    lines = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value
            else:
                lines.append(line)
    rows = list(csv.DictReader(lines))
    return rows, meta


def write_manifest(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
