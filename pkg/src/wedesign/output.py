"""CSV (RFC-4180) and JSON result writers shared by the CLI commands."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence


def _normalize(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return value
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return value


def write_rows(rows: Sequence[dict], out_dir: str | Path, stem: str) -> tuple[Path, Path]:
    """Write dict rows as <stem>.csv and a <stem>.json mirror; returns both paths.

    Column order follows first appearance across rows; missing cells are empty.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    normalized = [{k: _normalize(v) for k, v in row.items()} for row in rows]
    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for row in normalized:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(normalized, indent=2) + "\n")
    return csv_path, json_path
