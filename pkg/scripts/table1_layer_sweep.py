"""Per-depth DEAL minus VANILLA success-rate difference under depolarizing noise.

    python3 scripts/table1_layer_sweep.py --repeats 3 --max-depth 4 --out runs/table1
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from deal.harness.config import ExperimentConfig
from deal.harness.experiment import run_experiment
from deal.harness.report import aggregate, table_csv


@dataclass
class SweepConfig:
    config: str = "configs/table1_layer_sweep.json"
    repeats: int | None = None
    max_depth: int | None = None
    out: str = "runs/table1"


def main(args: SweepConfig) -> list[dict]:
    cfg = ExperimentConfig.load(args.config)
    if args.repeats:
        cfg = cfg.with_overrides(repeats=args.repeats)
    if args.max_depth:
        cfg = cfg.with_overrides(depths=[p for p in cfg.depths if p <= args.max_depth])
    agg = aggregate(run_experiment(cfg, Path(args.out)))
    (Path(args.out) / "table.csv").write_text(table_csv(agg))
    print("depth  DEAL-VANILLA success (%)")
    for row in agg["success_difference"]:
        print(f"{row['depth']:5d}  {row['difference_pct']:+.2f}")
    return agg["success_difference"]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=SweepConfig.config)
    ap.add_argument("--repeats", type=int, default=None)
    ap.add_argument("--max-depth", type=int, default=None)
    ap.add_argument("--out", default=SweepConfig.out)
    main(SweepConfig(**vars(ap.parse_args())))
