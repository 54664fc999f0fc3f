"""Aggregate experiment records into plot-ready tables and series."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .experiment import SCHEMA

REQUIRED = ("schema", "key", "method", "depth", "repeat", "metrics", "final_energy", "trace",
            "eigen_scan", "problem")
TABLE_COLUMNS = ["label", "method", "depth", "runs", "energy_mean", "energy_std", "success_mean",
                 "success_std", "kl_mean", "kl_std", "qnre_mean", "qnre_std"]


class SchemaError(ValueError):
    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)


def load_records(paths) -> list[dict]:
    records = []
    for path in paths:
        try:
            rec = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(path, f"not valid JSON ({exc})") from exc
        if not isinstance(rec, dict):
            raise SchemaError(path, "record is not a JSON object")
        if rec.get("schema") != SCHEMA:
            raise SchemaError(path, f"schema {rec.get('schema')!r}, expected {SCHEMA}")
        missing = [k for k in REQUIRED if k not in rec]
        if missing:
            raise SchemaError(path, f"missing keys {missing}")
        records.append(rec)
    return records


def _stats(values) -> tuple[float | None, float | None]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=float)
    return float(arr.mean()), float(arr.std())


def aggregate(records: list[dict]) -> dict:
    """Mean/std per (problem, method, depth) cell plus the figure series."""
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for rec in sorted(records, key=lambda r: (r["problem"]["label"], r["method"], r["depth"], r["repeat"])):
        groups[(rec["problem"]["label"], rec["method"], rec["depth"])].append(rec)

    table, cdf, convergence = [], {}, {}
    kl_vs_depth: dict[str, list] = defaultdict(list)
    for (label, method, depth), recs in groups.items():
        e = _stats(r["final_energy"] for r in recs)
        s = _stats(r["metrics"]["success_rate"] for r in recs)
        k = _stats(r["metrics"]["kl_uniform"] for r in recs)
        qn = _stats(r["metrics"]["qnre"] for r in recs)
        table.append({"label": label, "method": method, "depth": depth, "runs": len(recs),
                      "energy_mean": e[0], "energy_std": e[1], "success_mean": s[0], "success_std": s[1],
                      "kl_mean": k[0], "kl_std": k[1], "qnre_mean": qn[0], "qnre_std": qn[1]})
        key = f"{label}/{method}/p{depth}"
        curves = [r["metrics"]["cdf"] for r in recs if r["metrics"].get("cdf")]
        if curves:
            cdf[key] = np.mean(np.asarray(curves), axis=0).tolist()
        length = min(len(r["trace"]["best_f"]) for r in recs)
        best = np.asarray([r["trace"]["best_f"][:length] for r in recs])
        convergence[key] = {"mean": best.mean(axis=0).tolist(), "std": best.std(axis=0).tolist()}
        kl_vs_depth[f"{label}/{method}"].append([depth, k[0]])

    success_difference = []
    by_cell = {(row["label"], row["method"], row["depth"]): row for row in table}
    for (label, method, depth), row in by_cell.items():
        other = by_cell.get((label, "VANILLA", depth))
        if method == "DEAL" and other is not None:
            success_difference.append({"label": label, "depth": depth,
                                       "difference_pct": 100 * (row["success_mean"] - other["success_mean"])})

    eigen_scan = {}
    for rec in records:
        energies = [item["energy"] for item in rec["eigen_scan"]]
        eigen_scan[f"{rec['problem']['label']}/{rec['key']}"] = {
            "energies": energies,
            "optimal": [item["optimal"] for item in rec["eigen_scan"]],
            "optimum": rec["problem"]["optimum"],
            "lowest_is_optimum": bool(energies) and rec["problem"]["optimum"] is not None
            and abs(energies[0] - rec["problem"]["optimum"]) < 1e-9,
        }
    return {"table": table, "success_difference": sorted(success_difference, key=lambda d: (d["label"], d["depth"])),
            "cdf": cdf, "kl_vs_depth": dict(kl_vs_depth), "convergence": convergence,
            "eigen_scan": dict(sorted(eigen_scan.items()))}


def table_csv(agg: dict) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in agg["table"]:
        writer.writerow(row)
    return buf.getvalue()


def render(agg: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(agg, indent=1, sort_keys=True) + "\n"
    if fmt == "csv":
        return table_csv(agg)
    raise ValueError(f"unknown format {fmt!r}")
