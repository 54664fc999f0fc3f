"""End-to-end cell execution: QPN -> mapping -> ansatz -> optimisation -> metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..ansatz import AnsatzSpec, build_circuit, default_mixer_graph, truncate_small_terms
from ..mapping import connectivity_report, distance_matrix, load_device, map_qubits
from ..metrics import lowest_sampled_energies, metric_report, noise_energy_spread
from ..optimize import OptimizerConfig, derive_seed, energy_objective, evaluate_energy, minimize, outcome_probabilities
from ..problems import (Graph, QuboInstance, erdos_renyi, knapsack_qubo, maxcut_qubo,
                        optimal_bitstrings, qubo_to_ising, tsp_qubo)
from ..qpn import QaoaParams, qpn_params, qubit_weights, random_params
from ..simulator import sample_counts
from ..zne import mitigated_expectation, pair_scale_factors
from .config import ExperimentConfig, ProblemConfig, cell_seed

log = logging.getLogger(__name__)

SCHEMA = 1
MAX_PROBS_QUBITS = 12
CSV_COLUMNS = ["key", "method", "depth", "repeat", "seed", "n", "final_energy", "optimum",
               "success_rate", "kl_uniform", "qnre", "qnre_noise_floored", "evaluations",
               "zne_extrapolated"]


def _random_instance_rng(problem: ProblemConfig, repeat: int) -> np.random.Generator:
    seed = cell_seed(problem.seed, "instance", repeat) if problem.per_repeat_instance else problem.seed
    return np.random.default_rng(seed)


def erg_with_edges(n: int, edge_prob: float, seed: int, max_tries: int = 1000) -> Graph:
    """Erdos-Renyi graph, redrawn with derived seeds until it has at least one edge."""
    for attempt in range(max_tries):
        g = erdos_renyi(n, edge_prob, seed if attempt == 0 else cell_seed(seed, "redraw", attempt))
        if g.edges:
            return g
    raise ValueError(f"no edges after {max_tries} draws of G({n}, {edge_prob})")


def build_instance(problem: ProblemConfig, repeat: int = 0) -> tuple[QuboInstance, Graph | None]:
    if problem.instance:
        q = QuboInstance.from_dict(json.loads(Path(problem.instance).read_text()))
        graph = q.meta.get("graph")
        return q, Graph.from_dict(graph) if graph else None
    kind = problem.type
    if kind == "maxcut":
        if problem.edge_prob is None:
            g = Graph.complete(problem.size)
        else:
            seed = cell_seed(problem.seed, "instance", repeat) if problem.per_repeat_instance else problem.seed
            g = erg_with_edges(problem.size, problem.edge_prob, seed)
        return maxcut_qubo(g), g
    if kind == "tsp":
        d = problem.distances
        if d is None:
            rng = _random_instance_rng(problem, repeat)
            upper = np.triu(rng.integers(1, 10, size=(problem.size, problem.size)), 1)
            d = (upper + upper.T).tolist()
        return tsp_qubo(d, problem.penalty), None
    if kind == "knapsack":
        values, weights = problem.values, problem.weights
        if values is None or weights is None:
            rng = _random_instance_rng(problem, repeat)
            values = rng.integers(1, 10, size=problem.size).tolist()
            weights = rng.integers(1, 6, size=problem.size).tolist()
        capacity = problem.capacity if problem.capacity is not None else int(sum(weights) // 2)
        return knapsack_qubo(values, weights, capacity, problem.penalty), None
    raise ValueError(f"unknown problem type {kind!r}")


def initial_theta(cfg: ExperimentConfig, q: QuboInstance, method: str, depth: int, seed: int) -> QaoaParams:
    rule = cfg.init.get(method, "qpn")
    if rule == "qpn":
        return qpn_params(q, depth, cfg.lambda_gamma, cfg.lambda_beta, cfg.mixer_floor)
    if rule == "random":
        return random_params(depth, derive_seed(seed, 11))
    raise ValueError(f"unknown init rule {rule!r}")


def _noise_active(cfg: ExperimentConfig) -> bool:
    return cfg.noise is not None and not cfg.noise.is_noiseless


def run_cell(cfg: ExperimentConfig, method: str, depth: int, repeat: int) -> dict:
    start = time.perf_counter()
    seed = cell_seed(cfg.seed, cfg.name, method, depth, repeat)
    q, graph = build_instance(cfg.problem, repeat)
    h = truncate_small_terms(qubo_to_ising(q), cfg.truncate)
    w = qubit_weights(q)
    mixer = default_mixer_graph(h, graph) if method == "DEAL" else None
    spec = AnsatzSpec(h, mixer, depth, method)

    mapping = None
    d_logical = np.ones((q.n, q.n)) - np.eye(q.n)
    if cfg.device:
        cm = load_device(cfg.device)
        mapping = map_qubits(w, q, cm)
        d_logical = distance_matrix(cm)[np.ix_(mapping.pi, mapping.pi)].astype(float)

    theta0 = initial_theta(cfg, q, method, depth, seed)
    probe = build_circuit(spec, theta0)
    pairs = sorted(probe.two_qubit_pairs())
    pair_scales = pair_scale_factors(w, d_logical, pairs, cfg.zne.lambda_gain if cfg.zne else 1.0)
    counts_nij = np.zeros((q.n, q.n))
    for (i, j), k in probe.two_qubit_pairs().items():
        counts_nij[i, j] = k
    c_conn = float(np.sum(np.triu(np.outer(w.normalized, w.normalized) * d_logical * counts_nij, 1)))
    if mapping is not None:
        c_conn = connectivity_report(mapping, q, probe, cm, w).cost

    noise = cfg.noise if _noise_active(cfg) else None
    opt_cfg = OptimizerConfig(**{**cfg.optimizer.to_dict(), "shots": cfg.measure_shots,
                                 "seed": derive_seed(seed, 21)})
    zne_opt = cfg.zne if (cfg.zne_during_optimization and noise is not None) else None
    objective = energy_objective(spec, opt_cfg, noise, zne_opt, cfg.trajectories,
                                 pair_scales.lambdas, c_conn)
    theta_star, trace = minimize(objective, theta0, opt_cfg)
    theta_star = QaoaParams.from_vector(theta_star)

    energies = h.energies()
    probs = outcome_probabilities(spec, theta_star, noise, derive_seed(seed, 31), cfg.trajectories)
    counts = sample_counts(probs, cfg.shots if cfg.shots > 0 else 1024, derive_seed(seed, 32))
    if cfg.measure_shots == 0:
        e_obs = float(probs @ energies)
    else:
        e_obs = float(sum(energies[int(b, 2)] * c for b, c in counts.items()) / sum(counts.values()))

    e_noise = 0.0
    if noise is not None:
        reps = [evaluate_energy(spec, theta_star, cfg.measure_shots, noise, derive_seed(seed, 41, r),
                                None, cfg.trajectories) for r in range(cfg.noise_repeats)]
        e_noise = noise_energy_spread(reps)

    opt_bits = optimal_bitstrings(q) if q.n <= 20 else set()
    e_opt = q.known_optimum[1] if q.known_optimum else None
    report = metric_report(e_obs, e_opt if e_opt is not None else 0.0, e_noise, counts, opt_bits, probs)

    zne_diag = None
    if cfg.zne is not None and noise is not None:
        res = mitigated_expectation(lambda t: build_circuit(spec, t), theta_star, h, noise, cfg.zne,
                                    cfg.measure_shots, derive_seed(seed, 51), pair_scales.lambdas, c_conn)
        zne_diag = {"scales": res.diagnostics["scales"], "raw": res.diagnostics["raw"],
                    "extrapolated": res.value, "lambda": res.diagnostics["lambda"],
                    "lambda_nominal": res.diagnostics["lambda_nominal"],
                    "lambda_gain": res.diagnostics["lambda_gain"],
                    "pair_scales": res.diagnostics["pair_scales"]}

    scan = lowest_sampled_energies(counts, energies, cfg.eigen_k)
    record = {
        "schema": SCHEMA,
        "software_version": __version__,
        "master_seed": cfg.seed,
        "config": cfg.to_dict(),
        "key": f"{method}-p{depth}-r{repeat}",
        "method": method,
        "depth": depth,
        "repeat": repeat,
        "seed": seed,
        "problem": {"label": q.label, "n": q.n, "optimum": e_opt,
                    "optimal_bitstrings": sorted(opt_bits)[:64]},
        "mapping": list(mapping.pi) if mapping is not None else None,
        "c_conn": c_conn,
        "theta0": theta0.to_vector().tolist(),
        "theta": theta_star.to_vector().tolist(),
        "trace": {"f": trace.values, "best_f": trace.best},
        "final_energy": e_obs,
        "e_noise": e_noise,
        "counts": counts,
        "probabilities": probs.tolist() if q.n <= MAX_PROBS_QUBITS else None,
        "metrics": {k: v for k, v in report.to_dict().items()
                    if k != "cdf" or q.n <= MAX_PROBS_QUBITS},
        "eigen_scan": [{"bits": b, "energy": e, "optimal": b in opt_bits} for b, e in scan],
        "zne": zne_diag,
        "wall_clock_s": time.perf_counter() - start,
    }
    if e_opt is None:
        record["metrics"]["qnre"] = record["metrics"]["qnre_noise_floored"] = None
    return record


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=1) + "\n"


def strip_wall_clock(text: str) -> str:
    rec = json.loads(text)
    rec.pop("wall_clock_s", None)
    return dumps_record(rec)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def record_filename(cfg: ExperimentConfig, method: str, depth: int, repeat: int) -> str:
    return f"{cfg.name}__{method}__p{depth:02d}__r{repeat:04d}.json"


def cells(cfg: ExperimentConfig) -> list[tuple[str, int, int]]:
    return [(m, p, r) for m in cfg.methods for p in cfg.depths for r in range(cfg.repeats * cfg.batch)]


def _run_and_write(cfg: ExperimentConfig, cell: tuple[str, int, int], out: Path) -> dict:
    rec = run_cell(cfg, *cell)
    _atomic_write(out / record_filename(cfg, *cell), dumps_record(rec))
    return rec


def csv_row(rec: dict) -> list:
    m = rec["metrics"]
    return [rec["key"], rec["method"], rec["depth"], rec["repeat"], rec["seed"], rec["problem"]["n"],
            repr(rec["final_energy"]), rec["problem"]["optimum"], repr(m["success_rate"]),
            repr(m["kl_uniform"]), m["qnre"], m["qnre_noise_floored"], len(rec["trace"]["f"]),
            rec["zne"]["extrapolated"] if rec["zne"] else None]


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path) -> list[dict]:
    """Run every (method, depth, repeat) cell, writing one JSON record per cell plus a CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    todo = cells(cfg)
    records = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(_run_and_write, cfg, c, out) for c in todo]
            for f in futures:
                records.append(f.result())
    else:
        for c in todo:
            records.append(_run_and_write(cfg, c, out))
    records.sort(key=lambda r: (r["method"], r["depth"], r["repeat"]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(csv_row(rec))
    _atomic_write(out / f"{cfg.name}.csv", buf.getvalue())
    return records


def compare_inits(instances: list[QuboInstance], graphs: list[Graph | None], depth: int,
                  budget: int, style: str = "DEAL", seed: int = 0, shots: int = 0) -> dict:
    """Paired QPN-vs-random optimisation runs at equal budget; returns per-instance final energies."""
    qpn_final, rnd_final, qpn_traces, rnd_traces = [], [], [], []
    for idx, (q, g) in enumerate(zip(instances, graphs)):
        h = qubo_to_ising(q)
        mixer = default_mixer_graph(h, g) if style == "DEAL" else None
        spec = AnsatzSpec(h, mixer, depth, style)
        cfg = OptimizerConfig(budget=budget, shots=shots, seed=derive_seed(seed, idx))
        for theta0, finals, traces in (
            (qpn_params(q, depth), qpn_final, qpn_traces),
            (random_params(depth, derive_seed(seed, idx, 7)), rnd_final, rnd_traces),
        ):
            x, trace = minimize(energy_objective(spec, cfg), theta0, cfg)
            finals.append(min(trace.values))
            traces.append(trace.best)
    return {"qpn": np.array(qpn_final), "random": np.array(rnd_final),
            "qpn_traces": qpn_traces, "random_traces": rnd_traces}
