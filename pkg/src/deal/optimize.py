"""Shot-based energy evaluation and derivative-free minimisation of QAOA angles."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ansatz import AnsatzSpec, build_circuit
from .qpn import QaoaParams
from .simulator import NoiseModel, run_circuit, run_noisy, sample_counts
from .zne import ZneConfig, mitigated_expectation

EXACT = 0  # shots sentinel: use outcome probabilities directly

# Nelder-Mead coefficients: reflection, expansion, contraction, shrink
ALPHA, GAMMA, RHO, SIGMA = 1.0, 2.0, 0.5, 0.5


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([int(seed) & (2**63 - 1), *keys]).generate_state(1)[0])


def outcome_probabilities(spec: AnsatzSpec, theta: QaoaParams, noise: NoiseModel | None,
                          seed: int, trajectories: int = 256) -> np.ndarray:
    c = build_circuit(spec, theta)
    if noise is None or noise.is_noiseless:
        return run_circuit(c).probabilities()
    return run_noisy(c, noise, trajectories, seed)


def evaluate_energy(
    spec: AnsatzSpec,
    theta: QaoaParams,
    shots: int = 1024,
    noise: NoiseModel | None = None,
    seed: int = 0,
    zne_config: ZneConfig | None = None,
    trajectories: int = 256,
    pair_scales: dict | None = None,
    c_conn: float = 0.0,
) -> float:
    """Estimate ``<H_C>``: mean sampled bitstring energy, or the exact value when ``shots == 0``."""
    if shots < 0:
        raise ValueError("shots must be >= 0")
    h = spec.hamiltonian
    if zne_config is not None and noise is not None and not noise.is_noiseless:
        res = mitigated_expectation(lambda t: build_circuit(spec, t), theta, h, noise,
                                    zne_config, shots, seed, pair_scales, c_conn)
        return res.value
    sim_seed, shot_seed = (derive_seed(seed, k) for k in (1, 2))
    probs = outcome_probabilities(spec, theta, noise, sim_seed, trajectories)
    energies = h.energies()
    if shots == EXACT:
        return float(probs @ energies)
    counts = sample_counts(probs, shots, shot_seed)
    return float(sum(energies[int(b, 2)] * c for b, c in counts.items()) / shots)


@dataclass
class OptimizerConfig:
    method: str = "simplex"
    budget: int = 200
    xtol: float = 1e-4
    ftol: float = 1e-6
    shots: int = 1024
    seed: int = 0
    step: float = 0.1

    def __post_init__(self):
        if self.method not in ("simplex", "pattern-search"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OptTrace:
    thetas: list[np.ndarray] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    best: list[float] = field(default_factory=list)

    def record(self, theta: np.ndarray, value: float) -> None:
        self.thetas.append(np.array(theta, dtype=float))
        self.values.append(float(value))
        prev = self.best[-1] if self.best else math.inf
        self.best.append(min(prev, float(value)))

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        dim = len(self.thetas[0]) if self.thetas else 0
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "f", "best_f"] + [f"theta_{i}" for i in range(dim)])
        for t, (th, f, b) in enumerate(zip(self.thetas, self.values, self.best)):
            writer.writerow([t, repr(f), repr(b)] + [repr(float(x)) for x in th])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"f": self.values, "best_f": self.best, "theta": [t.tolist() for t in self.thetas]}


class OptimizationAborted(RuntimeError):
    def __init__(self, message: str, trace: OptTrace):
        super().__init__(message)
        self.trace = trace


class _Budgeted:
    def __init__(self, objective: Callable, budget: int, trace: OptTrace):
        self.objective = objective
        self.budget = budget
        self.trace = trace

    @property
    def exhausted(self) -> bool:
        return len(self.trace) >= self.budget

    def __call__(self, x: np.ndarray) -> float:
        f = float(self.objective(x))
        self.trace.record(x, f)
        if not math.isfinite(f):
            raise OptimizationAborted(f"objective returned {f} at evaluation {len(self.trace) - 1}",
                                      self.trace)
        return f


def _nelder_mead(fun: _Budgeted, x0: np.ndarray, cfg: OptimizerConfig) -> None:
    dim = x0.size
    simplex = [x0.copy()]
    values = [fun(x0)]
    for i in range(dim):
        if fun.exhausted:
            return
        v = x0.copy()
        v[i] += cfg.step
        simplex.append(v)
        values.append(fun(v))
    simplex = np.array(simplex)
    values = np.array(values)
    while not fun.exhausted:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        diameter = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1))
        if diameter < cfg.xtol and values[-1] - values[0] < cfg.ftol:
            return
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + ALPHA * (centroid - simplex[-1])
        fr = fun(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            if fun.exhausted:
                simplex[-1], values[-1] = xr, fr
                return
            xe = centroid + GAMMA * (xr - centroid)
            fe = fun(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fun.exhausted:
            return
        if fr < values[-1]:
            xc = centroid + RHO * (xr - centroid)
            fc = fun(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + RHO * (simplex[-1] - centroid)
            fc = fun(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for i in range(1, dim + 1):
            if fun.exhausted:
                return
            simplex[i] = simplex[0] + SIGMA * (simplex[i] - simplex[0])
            values[i] = fun(simplex[i])


def _pattern_search(fun: _Budgeted, x0: np.ndarray, cfg: OptimizerConfig) -> None:
    x, fx = x0.copy(), fun(x0)
    step = cfg.step
    while not fun.exhausted and step >= cfg.xtol:
        improved = False
        for i in range(x.size):
            for sign in (1.0, -1.0):
                if fun.exhausted:
                    return
                trial = x.copy()
                trial[i] += sign * step
                ft = fun(trial)
                if ft < fx - cfg.ftol:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            step *= 0.5


def minimize(objective: Callable[[np.ndarray], float], theta0, config: OptimizerConfig | None = None
             ) -> tuple[np.ndarray, OptTrace]:
    """Derivative-free minimisation; returns the best evaluated point and the full trace.

    The objective is called at most ``config.budget`` times.
    """
    config = config or OptimizerConfig()
    x0 = np.asarray(theta0.to_vector() if isinstance(theta0, QaoaParams) else theta0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial point must be finite")
    trace = OptTrace()
    fun = _Budgeted(objective, config.budget, trace)
    if config.method == "simplex":
        _nelder_mead(fun, x0, config)
    else:
        _pattern_search(fun, x0, config)
    best = int(np.argmin(trace.values))
    return trace.thetas[best], trace


def energy_objective(spec: AnsatzSpec, config: OptimizerConfig, noise: NoiseModel | None = None,
                     zne_config: ZneConfig | None = None, trajectories: int = 256,
                     pair_scales: dict | None = None, c_conn: float = 0.0) -> Callable:
    """``theta -> energy`` whose t-th call uses a seed derived from ``(config.seed, t)``."""
    counter = {"t": 0}

    def objective(x: np.ndarray) -> float:
        t = counter["t"]
        counter["t"] += 1
        return evaluate_energy(spec, QaoaParams.from_vector(x), config.shots, noise,
                               derive_seed(config.seed, t), zne_config, trajectories,
                               pair_scales, c_conn)

    return objective
