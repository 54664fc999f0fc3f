"""Qubit-prioritized normalization (QPN): problem-derived QAOA starting angles.

Each qubit's importance is the absolute row sum of the symmetrized QUBO
matrix. The normalized weights are pushed through ``arccos(1 - 2w)`` for the
cost angles and ``arcsin(sqrt(w))`` for the mixer angles, graded by layer,
then averaged over qubits to give one ``(gamma_k, beta_k)`` pair per layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import QuboInstance

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class ImportanceWeights:
    raw: np.ndarray
    normalized: np.ndarray

    @property
    def n(self) -> int:
        return self.normalized.shape[0]


@dataclass(frozen=True)
class AngleTensors:
    phi_gamma: np.ndarray  # (p, n), row k-1 holds layer k
    phi_beta: np.ndarray
    lambda_gamma: float
    lambda_beta: float

    @property
    def depth(self) -> int:
        return self.phi_gamma.shape[0]


@dataclass(frozen=True)
class QaoaParams:
    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if g.shape != b.shape or g.ndim != 1:
            raise ValueError(f"gammas {g.shape} and betas {b.shape} must be equal-length vectors")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return self.gammas.shape[0]

    def to_vector(self) -> np.ndarray:
        """``theta = (gamma_1..gamma_p, beta_1..beta_p)``."""
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, theta) -> QaoaParams:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.shape[0] % 2:
            raise ValueError("theta must have even length 2p")
        p = theta.shape[0] // 2
        return cls(theta[:p], theta[p:])


def importance_scores(q: QuboInstance) -> np.ndarray:
    """``s_i = sum_j |Q_ij|`` over the symmetrized matrix, diagonal included."""
    return np.abs(q.symmetric).sum(axis=1)


def normalize_weights(s) -> ImportanceWeights:
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("importance scores must be non-negative")
    total = s.sum()
    # zero matrix: no structure to exploit, fall back to uniform
    w = np.full_like(s, 1.0 / s.size) if total == 0 else s / total
    return ImportanceWeights(s, w)


def qubit_weights(q: QuboInstance) -> ImportanceWeights:
    return normalize_weights(importance_scores(q))


def angle_tensors(
    w: ImportanceWeights | np.ndarray,
    p: int,
    lambda_gamma: float = math.pi,
    lambda_beta: float = math.pi / 2,
) -> AngleTensors:
    w = np.asarray(w.normalized if isinstance(w, ImportanceWeights) else w, dtype=float)
    if p < 1:
        raise ValueError("depth p must be >= 1")
    for name, lam in (("lambda_gamma", lambda_gamma), ("lambda_beta", lambda_beta)):
        if not 0 < lam <= math.pi:
            raise ValueError(f"{name} must lie in (0, pi], got {lam}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must form a probability distribution")
    w = np.clip(w, 0.0, 1.0)
    frac = np.arange(1, p + 1)[:, None] / p
    phi_gamma = lambda_gamma * frac * np.arccos(1 - 2 * w)[None, :]
    phi_beta = lambda_beta * (1 - frac) * np.arcsin(np.sqrt(w))[None, :]
    return AngleTensors(phi_gamma, phi_beta, float(lambda_gamma), float(lambda_beta))


def initial_params(t: AngleTensors, mixer_floor: float = 0.0) -> QaoaParams:
    """Average the angle tensors over qubits; ``mixer_floor`` lifts every beta to at least that value."""
    gammas = t.phi_gamma.mean(axis=1)
    betas = t.phi_beta.mean(axis=1)
    if mixer_floor > 0:
        betas = np.maximum(betas, mixer_floor)
    return QaoaParams(gammas, betas)


def qpn_params(
    q: QuboInstance,
    p: int,
    lambda_gamma: float = math.pi,
    lambda_beta: float = math.pi / 2,
    mixer_floor: float = 0.0,
) -> QaoaParams:
    w = qubit_weights(q)
    return initial_params(angle_tensors(w, p, lambda_gamma, lambda_beta), mixer_floor)


def random_params(p: int, seed) -> QaoaParams:
    """Every angle i.i.d. uniform on ``[0, 2*pi)``."""
    if p < 1:
        raise ValueError("depth p must be >= 1")
    theta = np.random.default_rng(seed).uniform(0.0, TWO_PI, size=2 * p)
    return QaoaParams.from_vector(theta)
