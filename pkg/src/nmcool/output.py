"""File writers for experiment results (CSV tables + JSON metadata)."""

from __future__ import annotations

import csv
import datetime
import json
import pathlib

from .runner import ExperimentResult


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)  # shortest round-trip form => byte-stable across runs
    return str(v)


def write_table(path: pathlib.Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_experiment(result: ExperimentResult, out_dir, prefix: str) -> list[pathlib.Path]:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[pathlib.Path] = []
    for table in result.tables:
        path = out / f"{table.name}.csv"
        write_table(path, table.header, table.rows)
        written.append(path)

    meta = dict(result.metadata)
    meta["summary"] = result.summary
    meta_path = out / f"{prefix}_metadata.json"
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(meta_path)
    return written


def stamp(meta: dict) -> dict:
    """Adds a wall-clock timestamp; kept out of write_experiment so outputs stay deterministic."""
    meta = dict(meta)
    meta["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return meta
