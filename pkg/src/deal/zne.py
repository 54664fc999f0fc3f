"""Zero-noise extrapolation: gate folding, QPN-weighted pair scales, polynomial
extrapolation and Bayesian refinement of the effective noise scales.

Each measured point ``k`` carries a continuous effective noise scale
``lambda_k``: the error-probability-weighted mean fold factor over the folded
circuit's gates. Folding itself only realises odd integers; extrapolation
runs on the continuous ``lambda`` vector, which the Bayesian step refines
against a quadratic surrogate of ``E(lambda)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError
from .problems import IsingHamiltonian
from .qpn import QaoaParams
from .simulator import Circuit, Gate, NoiseModel, noisy_energy_samples, sample_counts, run_noisy

log = logging.getLogger(__name__)

MAX_DEGREE = 2


def check_scale(scale: int) -> int:
    if int(scale) != scale or scale < 1 or int(scale) % 2 == 0:
        raise ValueError(f"fold scale must be an odd positive integer, got {scale}")
    return int(scale)


def to_odd(x: float) -> int:
    """Round half-to-even, bump even results up to the next odd integer, floor at 1."""
    r = int(round(x))
    if r % 2 == 0:
        r += 1
    return max(1, r)


def _fold_gate(g: Gate, factor: int) -> list[Gate]:
    inv = g.inverse()
    return [g] + [inv, g] * ((factor - 1) // 2)


def fold_circuit(c: Circuit, scale: int, mode: str = "per_gate",
                 pair_scales: dict | None = None) -> Circuit:
    """Noise-amplifying identity insertion.

    ``per_gate`` replaces each gate ``G`` by ``G (G^dag G)^((s-1)/2)``; two-qubit
    gates on a pair listed in ``pair_scales`` use ``s * lambda_ij`` instead.
    ``global`` appends ``(C^dag C)^((s-1)/2)`` to the whole circuit.
    """
    scale = check_scale(scale)
    if mode == "global":
        if pair_scales:
            raise ValueError("pair scales only apply to per-gate folding")
        out = Circuit(c.n, list(c.gates))
        inv = c.inverse()
        for _ in range((scale - 1) // 2):
            out.extend(inv.gates)
            out.extend(c.gates)
        return out
    if mode != "per_gate":
        raise ValueError(f"unknown folding mode {mode!r}")
    out = Circuit(c.n)
    for g in c.gates:
        factor = scale
        if pair_scales and g.is_two_qubit:
            factor = scale * check_scale(pair_scales.get(tuple(sorted(g.targets)), 1))
        out.gates.extend(_fold_gate(g, factor) if g.kind != "BARRIER" else [g])
    return out


def effective_scale(c: Circuit, scale: int, noise: NoiseModel | None,
                    pair_scales: dict | None = None) -> float:
    """Mean fold factor over the gates of ``c``, weighted by each gate's error probability."""
    uniform = noise is None or (noise.p1 == 0 and noise.p2 == 0)
    num = den = 0.0
    for g in c.gates:
        if g.kind == "BARRIER":
            continue
        p = 1.0 if uniform else (noise.p2 if g.is_two_qubit else noise.p1)
        factor = scale
        if pair_scales and g.is_two_qubit:
            factor = scale * pair_scales.get(tuple(sorted(g.targets)), 1)
        num += p * factor
        den += p
    return num / den if den else float(scale)


@dataclass(frozen=True)
class PairScale:
    lambdas: dict[tuple[int, int], int]
    products: dict[tuple[int, int], float]
    gain: float = 1.0


def pair_scale_factors(w, d, pairs, gain: float = 1.0) -> PairScale:
    """``lambda_ij = to_odd(round(gain * w_i * w_j * d_ij))`` for each interacting pair."""
    w = np.asarray(getattr(w, "normalized", w), dtype=float)
    d = np.asarray(d, dtype=float)
    products, lambdas = {}, {}
    for i, j in pairs:
        key = (min(i, j), max(i, j))
        prod = gain * w[i] * w[j] * d[i, j]
        products[key] = float(prod)
        lambdas[key] = to_odd(prod)
    return PairScale(lambdas, products, gain)


@dataclass(frozen=True)
class ScalePoint:
    scale: float
    expectation: float
    variance: float = 0.0


def measure_at_scales(runner: Callable, scales: Sequence[float], seed: int = 0) -> list[ScalePoint]:
    """Evaluate ``runner(scale, seed_k)`` once per scale with independent child seeds.

    ``runner`` returns either an expectation or an ``(expectation, variance)`` pair.
    """
    scales = list(scales)
    if len(set(scales)) != len(scales):
        raise ValueError(f"duplicate scales in {scales}")
    if any(s < 1 for s in scales):
        raise ValueError("scales must be >= 1")
    seeds = np.random.SeedSequence(int(seed)).generate_state(len(scales), dtype=np.uint32)
    points = []
    for s, sd in zip(scales, seeds):
        out = runner(s, int(sd))
        mean, var = out if isinstance(out, tuple) else (out, 0.0)
        points.append(ScalePoint(float(s), float(mean), float(var)))
    return points


def fit_polynomial(x, y, degree: int | None = None) -> np.polynomial.Polynomial:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if degree is None:
        degree = min(len(x) - 1, MAX_DEGREE)
    return np.polynomial.Polynomial.fit(x, y, degree).convert()


def extrapolation_weights(x, degree: int | None = None) -> np.ndarray:
    """Linear weights ``a`` with ``extrapolate_zero(x, y) == a @ y``; used for error propagation."""
    x = np.asarray(x, dtype=float)
    if degree is None:
        degree = min(len(x) - 1, MAX_DEGREE)
    vander = np.vander(x, degree + 1, increasing=True)
    return np.linalg.pinv(vander)[0]


def extrapolate_zero(points) -> float:
    """Least-squares polynomial of degree ``min(len - 1, 2)`` evaluated at zero noise."""
    if len(points) < 2:
        raise ValueError("extrapolation needs at least two points")
    x, y = _xy(points)
    if len(set(x.tolist())) < 2:
        raise ValueError("extrapolation needs two distinct scales")
    return float(extrapolation_weights(x) @ y)


def _xy(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points[0], ScalePoint):
        return (np.array([p.scale for p in points]), np.array([p.expectation for p in points]))
    arr = np.asarray(points, dtype=float)
    return arr[:, 0], arr[:, 1]


@dataclass
class BayesState:
    lambda_vec: np.ndarray
    sigma_prior: np.ndarray
    sigma_shot2: float
    sigma_gate2: float
    jacobian: np.ndarray
    residual: np.ndarray
    c_conn: np.ndarray | float = 0.0

    def __post_init__(self):
        self.lambda_vec = np.atleast_1d(np.asarray(self.lambda_vec, dtype=float))
        m = self.lambda_vec.size
        self.residual = np.atleast_1d(np.asarray(self.residual, dtype=float))
        k = self.residual.size
        self.jacobian = np.asarray(self.jacobian, dtype=float).reshape(k, m)
        prior = np.asarray(self.sigma_prior, dtype=float)
        self.sigma_prior = prior * np.eye(m) if prior.ndim == 0 else prior.reshape(m, m)
        c = np.asarray(self.c_conn, dtype=float)
        self.c_conn = c * np.eye(k) if c.ndim == 0 else (np.diag(c) if c.ndim == 1 else c)

    @property
    def sigma_noise(self) -> np.ndarray:
        k = self.residual.size
        return self.sigma_shot2 * np.eye(k) + self.sigma_gate2 * self.c_conn


def bayes_update(state: BayesState) -> np.ndarray:
    """``lambda + Sigma_prior J^T Sigma_noise^{-1} r``."""
    noise = state.sigma_noise
    try:
        cond = np.linalg.cond(noise)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        weighted = np.linalg.solve(noise, state.residual)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "noise covariance is singular",
            {"sigma_noise": noise.tolist(), "sigma_shot2": state.sigma_shot2,
             "sigma_gate2": state.sigma_gate2},
        ) from exc
    return state.lambda_vec + state.sigma_prior @ state.jacobian.T @ weighted


_ZZ_TWIRLS = (("I", "I"), ("Z", "Z"), ("I", "Z"), ("Z", "I"),
              ("X", "X"), ("Y", "Y"), ("X", "Y"), ("Y", "X"))


def twirl_circuit(c: Circuit, seed) -> Circuit:
    """Conjugate each RZZ by a random Pauli pair that commutes with ``Z x Z``."""
    rng = np.random.default_rng(seed)
    out = Circuit(c.n)
    for g in c.gates:
        if g.kind != "RZZ":
            out.gates.append(g)
            continue
        pa, pb = _ZZ_TWIRLS[int(rng.integers(len(_ZZ_TWIRLS)))]
        frame = [Gate(p, (q,)) for p, q in ((pa, g.targets[0]), (pb, g.targets[1])) if p != "I"]
        out.gates.extend(frame + [g] + frame)
    return out


@dataclass
class ZneConfig:
    scales: tuple[int, ...] = (1, 3, 5)
    mode: str = "per_gate"
    lambda_gain: float = 10.0
    refine_steps: int = 1
    sigma_gate2: float = 1e-4
    prior_var: float = 0.25
    twirl: bool = False
    trajectories: int = 256

    def __post_init__(self):
        self.scales = tuple(check_scale(s) for s in self.scales)
        if len(set(self.scales)) != len(self.scales):
            raise ValueError("duplicate ZNE scales")

    def to_dict(self) -> dict:
        return {"scales": list(self.scales), "mode": self.mode, "lambda_gain": self.lambda_gain,
                "refine_steps": self.refine_steps, "sigma_gate2": self.sigma_gate2,
                "prior_var": self.prior_var, "twirl": self.twirl, "trajectories": self.trajectories}

    @classmethod
    def parse(cls, text: str) -> ZneConfig:
        """``"scales=1,3,5"`` or ``"scales=1,3,5;refine_steps=2"``."""
        kwargs = {}
        for part in filter(None, text.split(";")):
            key, _, value = part.partition("=")
            key = key.strip()
            if key == "scales":
                kwargs[key] = tuple(int(v) for v in value.split(","))
            elif key in ("refine_steps", "trajectories"):
                kwargs[key] = int(value)
            elif key == "twirl":
                kwargs[key] = value.strip().lower() in ("1", "true", "yes")
            elif key == "mode":
                kwargs[key] = value.strip()
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


@dataclass
class ZneResult:
    value: float
    raw: float
    diagnostics: dict = field(default_factory=dict)


def _estimate(circuit: Circuit, energies: np.ndarray, noise: NoiseModel, shots: int,
              trajectories: int, seed: int) -> tuple[float, float]:
    """Noisy mean energy and the variance of that mean."""
    if shots == 0:
        samples = noisy_energy_samples(circuit, noise, trajectories, seed, energies)
        var = samples.var(ddof=1) / samples.size if samples.size > 1 else 0.0
        return float(samples.mean()), float(var)
    rng = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint32)
    probs = run_noisy(circuit, noise, trajectories, int(rng[0]))
    counts = sample_counts(probs, shots, int(rng[1]))
    vals = np.array([energies[int(b, 2)] for b in counts])
    weights = np.array(list(counts.values()), dtype=float)
    mean = float(weights @ vals / shots)
    var = float(weights @ (vals - mean) ** 2 / max(shots - 1, 1)) / shots
    return mean, var


def refine_scales(points: list[ScalePoint], lambdas: np.ndarray, config: ZneConfig,
                  c_conn: float, fold_scales: Sequence[int]) -> tuple[np.ndarray, list[dict]]:
    """Iterate the Bayesian update of the effective-scale vector ``config.refine_steps`` times."""
    y = np.array([p.expectation for p in points])
    sigma_shot2 = float(np.mean([p.variance for p in points]))
    history = []
    lam = np.asarray(lambdas, dtype=float)
    for _ in range(config.refine_steps):
        poly = fit_polynomial(lam, y)
        residual = y - poly(lam)
        jac = np.diag(poly.deriv()(lam))
        state = BayesState(lam, config.prior_var, sigma_shot2, config.sigma_gate2, jac, residual,
                           c_conn * np.asarray(fold_scales, dtype=float))
        lam = bayes_update(state)
        history.append({"lambda": lam.tolist(), "residual": residual.tolist()})
    return lam, history


def mitigated_expectation(
    builder: Callable[[QaoaParams], Circuit],
    theta: QaoaParams,
    hamiltonian: IsingHamiltonian,
    noise: NoiseModel,
    config: ZneConfig | None = None,
    shots: int = 1024,
    seed: int = 0,
    pair_scales: dict | None = None,
    c_conn: float = 0.0,
) -> ZneResult:
    """Fold, measure at each scale, refine the effective scales and extrapolate to zero noise."""
    config = config or ZneConfig()
    base = builder(theta)
    energies = hamiltonian.energies()
    ss = np.random.SeedSequence(int(seed))
    twirl_seed, sweep_seed = (int(v) for v in ss.generate_state(2, dtype=np.uint32))

    def runner(scale, sd):
        c = fold_circuit(base, int(scale), config.mode, pair_scales)
        if config.twirl:
            c = twirl_circuit(c, twirl_seed)
        return _estimate(c, energies, noise, shots, config.trajectories, sd)

    points = measure_at_scales(runner, config.scales, sweep_seed)
    lambdas = np.array([effective_scale(base, s, noise, pair_scales) for s in config.scales])
    raw = points[int(np.argmin(config.scales))].expectation
    diag = {
        "scales": list(config.scales),
        "raw": [p.expectation for p in points],
        "variance": [p.variance for p in points],
        "lambda_nominal": lambdas.tolist(),
        "lambda_gain": config.lambda_gain,
        "pair_scales": {f"{i}-{j}": v for (i, j), v in sorted((pair_scales or {}).items())},
    }
    if len(points) < 2:
        log.warning("a single noise scale cannot be extrapolated; returning the raw value")
        diag.update(extrapolated=raw, **{"lambda": lambdas.tolist()})
        return ZneResult(raw, raw, diag)
    refined = lambdas
    if config.refine_steps > 0:
        try:
            refined, history = refine_scales(points, lambdas, config, c_conn, config.scales)
            diag["refinement"] = history
        except NumericalError as exc:
            log.warning("lambda refinement skipped: %s", exc)
            diag["refinement_error"] = str(exc)
            refined = lambdas
    y = np.array([p.expectation for p in points])
    value = float(extrapolation_weights(refined) @ y)
    if not math.isfinite(value):
        value = float(extrapolation_weights(lambdas) @ y)
    diag["lambda"] = np.asarray(refined).tolist()
    diag["extrapolated"] = value
    return ZneResult(value, raw, diag)
