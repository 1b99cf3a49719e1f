"""Shared output helpers for the experiment scripts."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path


def write_csv(path: Path, config, columns: list[str], rows: list[dict]) -> None:
    """CSV with a ``# config:`` line, a header and ``.17g`` floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# config: " + json.dumps(asdict(config)) + "\r\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([format(r[c], ".17g") if isinstance(r[c], float) else r[c] for c in columns])
