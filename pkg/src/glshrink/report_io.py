"""CSV/JSON report serialization and the run manifest.

Reports are written as CSV with a header row, '.' decimal separator, and
floats at 17 significant digits (lossless float64 round trip); a companion
JSON file carries the run summary.  Any NaN in a cell is a hard error.
Each run directory also receives the resolved configuration and a manifest
whose digest is recomputable from that resolved copy.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = ["RunManifest", "write_report", "read_report", "write_json", "sha256_text"]


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            raise ValidationError("refusing to serialize NaN into a report cell")
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        raise ValidationError("refusing to serialize a missing value into a report cell")
    return str(value)


def write_report(rows: list[dict], schema: list[str], path) -> None:
    """Write rows as CSV under the declared column schema."""
    path = Path(path)
    for i, row in enumerate(rows):
        missing = [c for c in schema if c not in row]
        if missing:
            raise ValidationError(f"row {i} is missing columns {missing}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in schema])


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_report(path) -> list[dict]:
    """Parse a report CSV back into typed rows (inverse of write_report)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [dict(zip(header, map(_parse_cell, row))) for row in reader]


def write_json(payload: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    root_seed: int
    tool_version: str
    started: str
    finished: str

    @classmethod
    def start(cls, command: str, resolved_config: str, root_seed: int, tool_version: str):
        return {
            "command": command,
            "config_digest": sha256_text(resolved_config),
            "root_seed": root_seed,
            "tool_version": tool_version,
            "started": dt.datetime.now(dt.timezone.utc).isoformat(),
        }

    @staticmethod
    def finish(partial: dict) -> "RunManifest":
        return RunManifest(
            finished=dt.datetime.now(dt.timezone.utc).isoformat(), **partial
        )

    def write(self, path) -> None:
        write_json(
            {
                "command": self.command,
                "config_digest": self.config_digest,
                "root_seed": self.root_seed,
                "tool_version": self.tool_version,
                "started": self.started,
                "finished": self.finished,
            },
            path,
        )
