"""Benchmark reports: flat per-record rows plus aggregate statistics and a config echo."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def mean_std(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std()),
            "median": float(np.median(arr)), "n": int(arr.size)}


@dataclass
class BenchmarkReport:
    """Per-record rows, aggregate statistics and the config that produced them.

    Rows that carry ``R_u`` and ``R_m`` are errors of the unmitigated and
    mitigated estimates; their ratio is the improvement factor.
    """

    scenario: str
    config: dict
    records: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)

    def add(self, **row) -> None:
        for key in ("R_u", "R_m"):
            if key in row and row[key] is not None and row[key] < 0:
                raise ValueError(f"{key} must be non-negative")
        if row.get("R_u") is not None and row.get("R_m") is not None:
            row.setdefault("improvement", row["R_u"] / row["R_m"] if row["R_m"] > 0 else math.inf)
        self.records.append(row)

    def column(self, key: str, **where) -> list:
        return [r[key] for r in self.records
                if all(r.get(k) == v for k, v in where.items())]

    def aggregate(self, value: str, by: Sequence[str]) -> dict[tuple, dict]:
        """Mean, std and median of ``value`` grouped by the ``by`` columns."""
        groups: dict[tuple, list[float]] = defaultdict(list)
        for r in self.records:
            groups[tuple(r[k] for k in by)].append(r[value])
        return {k: mean_std(v) for k, v in groups.items()}

    def to_csv(self, rows: list[dict] | None = None) -> str:
        rows = self.records if rows is None else rows
        keys: list[str] = []
        for r in rows:
            keys.extend(k for k in r if k not in keys)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(_jsonable({"scenario": self.scenario, "config": self.config,
                                     "summary": self.summary, "tables": self.tables,
                                     "records": self.records}),
                          indent=2)

    def write(self, out_dir: str | Path) -> list[Path]:
        """Write ``<scenario>.csv`` (records), ``<scenario>.json`` (everything)
        and one ``<scenario>_<table>.csv`` per summary table."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{self.scenario}.csv", out / f"{self.scenario}.json"]
        paths[0].write_text(self.to_csv())
        paths[1].write_text(self.to_json())
        for name, rows in self.tables.items():
            path = out / f"{self.scenario}_{name}.csv"
            path.write_text(self.to_csv(rows))
            paths.append(path)
        return paths
