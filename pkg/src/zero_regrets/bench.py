"""Batch runs over a directory of instances with grouped averages."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from statistics import mean

from .errors import ZeroRegretsError
from .instances import load
from .master import CSV_COLUMNS, TIME_LIMIT, SolveConfig, run

log = logging.getLogger(__name__)

BATCH_COLUMNS = ["group"] + CSV_COLUMNS + ["Tl"]
AVERAGED = ["PoS", "#EI", "#EI_P", "#EI_D", "#It", "Time", "Time-1st"]


def _group_label(key: tuple) -> str:
    return "(" + ", ".join(str(k) for k in key) + ")"


def run_one(path: str, config: dict) -> dict:
    """Solve one file; never raises, failures become an ERROR row."""
    try:
        loaded = load(path, strategic=config.get("strategic_cuts", True))
        report = run(loaded.game, SolveConfig(**config))
        row = report.csv_row()
        row["instance"] = Path(path).stem
        row["group"] = _group_label(loaded.group_key())
    except (ZeroRegretsError, OSError) as exc:
        log.warning("batch instance=%s error=%s", path, exc)
        row = {c: "" for c in CSV_COLUMNS}
        row.update(instance=Path(path).stem, status=f"ERROR: {exc}", group="(error)")
    return row


def _average(values) -> str:
    nums = [float(v) for v in values if v not in ("", None)]
    return f"{mean(nums):.3f}" if nums else "-"


def aggregate(rows: list[dict]) -> list[dict]:
    """One row per group: averages over every instance (time-limit hits
    included) and the count of time-limit hits."""
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row["group"], []).append(row)
    out = []
    for label in sorted(groups):
        members = groups[label]
        agg = {c: "" for c in BATCH_COLUMNS}
        agg["group"] = label
        agg["instance"] = "AVG"
        agg["status"] = f"{len(members)} instances"
        for col in AVERAGED:
            agg[col] = _average(r.get(col) for r in members)
        hits = sum(r["status"] == TIME_LIMIT for r in members)
        agg["Tl"] = f"{hits}/{len(members)}"
        out.append(agg)
    return out


def batch(directory: str | Path, config: SolveConfig | None = None, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    config = config or SolveConfig()
    paths = sorted(str(p) for p in Path(directory).glob("*.json"))
    cfg = asdict(config)
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_one, paths, [cfg] * len(paths)))
    else:
        rows = [run_one(p, cfg) for p in paths]
    return rows, aggregate(rows)


def write_batch_csv(path: str | Path, rows: list[dict], groups: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BATCH_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rows + groups:
            w.writerow({c: row.get(c, "") for c in BATCH_COLUMNS})
