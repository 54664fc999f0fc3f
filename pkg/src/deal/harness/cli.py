"""``deal`` command line: generate | run | report | inspect.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..ansatz import AnsatzSpec, build_circuit, default_mixer_graph, mixer_couplings
from ..problems import (Graph, QuboInstance, erdos_renyi, knapsack_qubo, maxcut_qubo,
                        qubit_requirement, qubo_to_ising, tsp_qubo)
from ..qpn import angle_tensors, importance_scores, initial_params, normalize_weights
from ..simulator import NoiseModel
from ..zne import ZneConfig
from .config import ExperimentConfig
from .experiment import build_instance, run_experiment
from .report import SchemaError, aggregate, load_records, render

log = logging.getLogger("deal")


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.problem == "maxcut":
        g = Graph.complete(args.n) if args.edge_prob is None else erdos_renyi(args.n, args.edge_prob, args.seed)
        q = maxcut_qubo(g)
        size, capacity = args.n, None
    elif args.problem == "tsp":
        upper = np.triu(rng.integers(1, 10, size=(args.n, args.n)), 1)
        q = tsp_qubo(upper + upper.T, args.penalty)
        size, capacity = args.n, None
    else:
        if args.values and args.weights:
            values, weights = _floats(args.values), _floats(args.weights)
        else:
            values = rng.integers(1, 10, size=args.n).tolist()
            weights = rng.integers(1, 6, size=args.n).tolist()
        capacity = args.capacity if args.capacity is not None else int(sum(weights) // 2)
        q = knapsack_qubo(values, weights, capacity, args.penalty)
        size = len(values)
    qubits = qubit_requirement(args.problem, size, capacity)
    if qubits != q.n:
        raise RuntimeError(f"encoding produced {q.n} qubits, expected {qubits}")
    text = json.dumps(q.to_dict(), indent=1, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        if out.suffix != ".json":
            out.mkdir(parents=True, exist_ok=True)
            out = out / f"{args.problem}_n{size}_s{args.seed}.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    print(f"qubits: {qubits}", file=sys.stderr if not args.out else sys.stdout)
    return 0


def _load_config(args) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        overrides = {"seed": args.seed, "workers": args.workers}
        if args.exact:
            overrides["exact"] = True
        if args.noise:
            overrides["noise"] = NoiseModel.parse(args.noise)
        if args.zne:
            overrides["zne"] = ZneConfig.parse(args.zne)
        return cfg.with_overrides(**overrides)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad configuration: {exc}") from exc


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out or "runs")
    records = run_experiment(cfg, out)
    print(f"wrote {len(records)} record(s) to {out}")
    return 0


def cmd_report(args) -> int:
    if not args.records:
        raise UsageError("report needs at least one record file")
    paths = []
    for p in args.records:
        path = Path(p)
        paths.extend(sorted(path.glob("*.json")) if path.is_dir() else [path])
    if not paths:
        raise UsageError("no record files found")
    try:
        agg = aggregate(load_records(paths))
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 1
    text = render(agg, args.format)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_inspect(args) -> int:
    if args.instance:
        q = QuboInstance.from_dict(json.loads(Path(args.instance).read_text()))
        g = q.meta.get("graph")
        graph = Graph.from_dict(g) if g else None
    else:
        q, graph = build_instance(_load_config(args).problem)
    s = importance_scores(q)
    w = normalize_weights(s)
    t = angle_tensors(w, args.depth)
    theta = initial_params(t)
    h = qubo_to_ising(q)
    mixer = default_mixer_graph(h, graph)
    doc = {
        "n": q.n,
        "label": q.label,
        "scores": s.tolist(),
        "weights": w.normalized.tolist(),
        "phi_gamma": t.phi_gamma.tolist(),
        "phi_beta": t.phi_beta.tolist(),
        "gammas": theta.gammas.tolist(),
        "betas": theta.betas.tolist(),
        "ising": {"offset": h.offset, "linear": h.linear.tolist(),
                  "quadratic": [[i, j, v] for i, j, v in h.quadratic_terms()]},
    }
    if mixer.edges:
        k = mixer_couplings(mixer)
        doc["mixer_couplings"] = [[i, j, float(v)] for (i, j), v in k.items()]
        if args.circuit:
            doc["circuit"] = build_circuit(AnsatzSpec(h, mixer, args.depth, "DEAL"), theta).to_json_list()
    print(json.dumps(doc, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a problem instance as JSON")
    gen.add_argument("--problem", choices=["maxcut", "tsp", "knapsack"], required=True)
    gen.add_argument("--n", type=int, default=5, help="nodes, cities or items")
    gen.add_argument("--edge-prob", type=float, default=None, help="Erdos-Renyi edge probability (MaxCut)")
    gen.add_argument("--capacity", type=int, default=None)
    gen.add_argument("--values", default=None, help="comma-separated item values")
    gen.add_argument("--weights", default=None, help="comma-separated item weights")
    gen.add_argument("--penalty", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None, help="output directory or .json path")
    gen.set_defaults(func=cmd_generate)

    def common(p):
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--exact", action="store_true", help="exact expectations (shots=0)")
        p.add_argument("--noise", default=None, metavar="P1,P2,READOUT")
        p.add_argument("--zne", default=None, metavar="scales=1,3,5")
        p.add_argument("--workers", type=int, default=None)

    run = sub.add_parser("run", help="run an experiment config")
    common(run)
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="aggregate record files")
    rep.add_argument("records", nargs="*")
    rep.add_argument("--format", choices=["csv", "json"], default="json")
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_report)

    ins = sub.add_parser("inspect", help="show QPN weights, angle tensors and initial angles")
    common(ins)
    ins.add_argument("--instance", default=None)
    ins.add_argument("--depth", type=int, default=1)
    ins.add_argument("--circuit", action="store_true")
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"deal: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure; records written so far stay on disk
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
