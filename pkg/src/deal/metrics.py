"""Solution-quality metrics: relative energy error, success rate, KL divergence, CDFs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError


def qnre(e_obs: float, e_opt: float) -> float:
    """Relative gap ``(e_obs - e_opt) / |e_opt|``."""
    if e_opt == 0:
        raise UndefinedMetricError("relative error is undefined for a zero optimum")
    return (e_obs - e_opt) / abs(e_opt)


def qnre_noise_floored(e_obs: float, e_opt: float, e_noise: float) -> float:
    """Gap with the noise budget subtracted, clamped at zero."""
    if e_noise < 0:
        raise ValueError("noise budget must be non-negative")
    if e_opt == 0:
        raise UndefinedMetricError("relative error is undefined for a zero optimum")
    return max(abs(e_obs - e_opt) - e_noise, 0.0) / abs(e_opt)


def success_rate(counts: dict[str, int], optima) -> float:
    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty histogram")
    optima = set(optima)
    return sum(c for b, c in counts.items() if b in optima) / total


def _distribution(probabilities) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    return p


def kl_to_uniform(probabilities) -> float:
    """``sum p_k ln(p_k * N)`` over the ``N`` outcomes, with ``0 ln 0 = 0``."""
    p = _distribution(probabilities)
    nz = p[p > 0]
    return float(np.sum(nz * np.log(nz * p.size)))


def cdf_outcomes(probabilities) -> np.ndarray:
    """Outcome probabilities sorted ascending and accumulated."""
    return np.cumsum(np.sort(_distribution(probabilities)))


def noise_energy_spread(samples) -> float:
    """Sample standard deviation of repeated noisy energy evaluations at a fixed angle."""
    samples = np.asarray(samples, dtype=float)
    return float(samples.std(ddof=1)) if samples.size > 1 else 0.0


def lowest_sampled_energies(counts: dict[str, int], energies: np.ndarray, k: int = 50) -> list[tuple[str, float]]:
    """The ``k`` lowest energies among distinct sampled bitstrings, ascending."""
    pairs = sorted(((float(energies[int(b, 2)]), b) for b in counts), key=lambda t: (t[0], t[1]))
    return [(b, e) for e, b in pairs[:k]]


@dataclass
class MetricReport:
    qnre: float | None
    qnre_noise_floored: float | None
    success_rate: float
    kl_uniform: float
    cdf: np.ndarray

    def to_dict(self) -> dict:
        return {
            "qnre": self.qnre,
            "qnre_noise_floored": self.qnre_noise_floored,
            "success_rate": self.success_rate,
            "kl_uniform": self.kl_uniform,
            "cdf": [float(x) for x in self.cdf],
        }


def metric_report(e_obs: float, e_opt: float, e_noise: float, counts: dict[str, int],
                  optima, probabilities) -> MetricReport:
    if e_opt == 0:
        rel = floored = None
    else:
        rel = qnre(e_obs, e_opt)
        floored = qnre_noise_floored(e_obs, e_opt, e_noise)
    return MetricReport(rel, floored, success_rate(counts, optima),
                        kl_to_uniform(probabilities), cdf_outcomes(probabilities))
