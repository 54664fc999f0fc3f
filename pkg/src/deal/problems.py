"""QUBO problem generators, the QUBO -> Ising bridge and brute-force oracles.

Conventions used throughout the package:

* QUBO variables are binary, ``x_i in {0, 1}``; the objective is
  ``offset + sum_{i<=j} Q_ij x_i x_j`` with ``Q`` upper triangular.
* Ising spins are ``z_i in {-1, +1}`` with ``x_i = (1 - z_i) / 2``, so the
  computational basis state ``|1>`` of qubit ``i`` has ``z_i = -1``.
* Qubit 0 is the least-significant bit of a basis index. Bitstrings are
  written most-significant first, i.e. ``format(index, f"0{n}b")``, so the
  string ``"10"`` means qubit 1 is set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ResourceLimitError

BRUTE_FORCE_LIMIT = 24
AUTO_OPTIMUM_LIMIT = 20
ENERGY_TOL = 1e-9


def index_to_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def bits_to_index(bits: str) -> int:
    return int(bits, 2)


def bits_to_array(bits: str) -> np.ndarray:
    """Bitstring -> array ``x`` with ``x[i]`` the value of qubit ``i``."""
    return np.array([int(c) for c in reversed(bits)], dtype=np.int8)


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        seen = set()
        clean = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if i > j:
                i, j = j, i
            if not 0 <= i < j < self.node_count:
                raise ValueError(f"edge ({i}, {j}) out of range for {self.node_count} nodes")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
        object.__setattr__(self, "edges", tuple(sorted(clean)))

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> Graph:
        return cls(n, tuple((i, j, weight) for i, j in itertools.combinations(range(n), 2)))

    def to_dict(self) -> dict:
        return {"nodes": self.node_count, "edges": [[i, j, w] for i, j, w in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> Graph:
        return cls(int(data["nodes"]), tuple(tuple(e) for e in data["edges"]))


def erdos_renyi(n: int, edge_prob: float, seed: int) -> Graph:
    """G(n, p) with unit weights; pairs are visited in lexicographic order."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < edge_prob
    return Graph(n, tuple((i, j, 1.0) for (i, j), k in zip(pairs, keep) if k))


def _table(coeffs: np.ndarray, base: float = 0.0, spin: bool = False) -> np.ndarray:
    """Return ``base + sum_j coeffs[j] * v_j(k)`` for every ``k < 2**len(coeffs)``.

    ``v_j`` is the bit ``j`` of ``k`` (``spin=False``) or ``1 - 2 * bit`` (``spin=True``).
    Built by doubling, O(2**m) time and memory.
    """
    out = np.array([float(base)])
    for c in coeffs:
        if spin:
            out = np.concatenate([out + c, out - c])
        else:
            out = np.concatenate([out, out + c])
    return out


@dataclass
class QuboInstance:
    """Upper-triangular QUBO ``offset + sum_{i<=j} q[i, j] x_i x_j``.

    Lower-triangular input is folded into the upper triangle. ``offset`` is a
    constant that keeps encoded objectives equal to their natural values
    (tour length, negated knapsack value).
    """

    n: int
    q: np.ndarray
    label: str = "qubo"
    known_optimum: tuple[str, float] | None = None
    offset: float = 0.0
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if q.shape != (self.n, self.n):
            raise ValueError(f"q has shape {q.shape}, expected {(self.n, self.n)}")
        self.q = np.triu(q) + np.triu(q.T, 1)
        self.offset = float(self.offset)
        if self.known_optimum is not None:
            bits, energy = self.known_optimum
            if len(bits) != self.n:
                raise ValueError("known_optimum bitstring has wrong length")
            if abs(self.evaluate(bits) - float(energy)) > ENERGY_TOL:
                raise ValueError("known_optimum energy does not match its bitstring")
            self.known_optimum = (bits, float(energy))

    @property
    def symmetric(self) -> np.ndarray:
        """Symmetric matrix with the off-diagonal couplings mirrored (not halved)."""
        return self.q + np.triu(self.q, 1).T

    def evaluate(self, bits: str | np.ndarray) -> float:
        x = bits_to_array(bits) if isinstance(bits, str) else np.asarray(bits)
        x = x.astype(float)
        return float(self.offset + x @ self.q @ x)

    def energies(self) -> np.ndarray:
        """Objective for every basis index ``0 .. 2**n - 1``."""
        if self.n > BRUTE_FORCE_LIMIT:
            raise ResourceLimitError(f"{self.n} variables exceed the {BRUTE_FORCE_LIMIT}-bit limit")
        out = np.array([self.offset])
        for i in range(self.n):
            # contribution of setting bit i given the lower bits
            field_i = _table(self.q[:i, i], self.q[i, i])
            out = np.concatenate([out, out + field_i])
        return out

    def to_dict(self) -> dict:
        rows, cols = np.nonzero(self.q)
        opt = None
        if self.known_optimum is not None:
            opt = {"bits": self.known_optimum[0], "energy": self.known_optimum[1]}
        return {
            "n": self.n,
            "q": [[int(i), int(j), float(self.q[i, j])] for i, j in zip(rows, cols)],
            "label": self.label,
            "optimum": opt,
            "offset": self.offset,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> QuboInstance:
        n = int(data["n"])
        q = np.zeros((n, n))
        for i, j, v in data["q"]:
            q[int(i), int(j)] += float(v)
        opt = data.get("optimum")
        return cls(
            n=n,
            q=q,
            label=data.get("label", "qubo"),
            known_optimum=None if opt is None else (opt["bits"], float(opt["energy"])),
            offset=float(data.get("offset", 0.0)),
            meta=dict(data.get("meta", {})),
        )


@dataclass
class IsingHamiltonian:
    """Diagonal observable ``offset + sum h_i Z_i + sum_{i<j} J_ij Z_i Z_j``."""

    offset: float
    linear: np.ndarray
    quadratic: np.ndarray

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        n = self.linear.shape[0]
        quad = np.asarray(self.quadratic, dtype=float)
        if quad.shape != (n, n):
            raise ValueError("quadratic must be n x n")
        self.quadratic = np.triu(quad, 1) + np.triu(quad.T, 1)
        self.offset = float(self.offset)

    @property
    def n(self) -> int:
        return self.linear.shape[0]

    def linear_terms(self) -> list[tuple[int, float]]:
        return [(i, float(h)) for i, h in enumerate(self.linear) if h != 0.0]

    def quadratic_terms(self) -> list[tuple[int, int, float]]:
        rows, cols = np.nonzero(self.quadratic)
        return [(int(i), int(j), float(self.quadratic[i, j])) for i, j in zip(rows, cols)]

    def evaluate(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(self.offset + self.linear @ z + z @ self.quadratic @ z)

    def energies(self) -> np.ndarray:
        """Diagonal of the operator in the computational basis (qubit 0 = LSB)."""
        out = np.array([self.offset])
        for i in range(self.n):
            field_i = _table(self.quadratic[:i, i], self.linear[i], spin=True)
            out = np.concatenate([out + field_i, out - field_i])
        return out

    def interaction_graph(self) -> Graph:
        return Graph(self.n, tuple((i, j, w) for i, j, w in self.quadratic_terms()))


def qubo_to_ising(q: QuboInstance) -> IsingHamiltonian:
    """Substitute ``x_i = (1 - z_i) / 2`` exactly."""
    diag = np.diag(q.q)
    upper = np.triu(q.q, 1)
    offset = q.offset + diag.sum() / 2 + upper.sum() / 4
    linear = -diag / 2 - (upper.sum(axis=1) + upper.sum(axis=0)) / 4
    return IsingHamiltonian(offset, linear, upper / 4)


def brute_force_optimum(q: QuboInstance) -> tuple[str, float, int]:
    """Exhaustive scan. Returns the lowest-index optimal bitstring and the optimum count."""
    if q.n > BRUTE_FORCE_LIMIT:
        raise ResourceLimitError(f"{q.n} variables exceed the {BRUTE_FORCE_LIMIT}-bit limit")
    e = q.energies()
    best = e.min()
    k = int(np.argmin(e))
    degeneracy = int(np.count_nonzero(e <= best + ENERGY_TOL))
    return index_to_bits(k, q.n), float(best), degeneracy


def optimal_bitstrings(q: QuboInstance, tol: float = ENERGY_TOL) -> set[str]:
    e = q.energies()
    return {index_to_bits(int(k), q.n) for k in np.flatnonzero(e <= e.min() + tol)}


def _with_optimum(inst: QuboInstance) -> QuboInstance:
    if inst.n <= AUTO_OPTIMUM_LIMIT:
        bits, energy, _ = brute_force_optimum(inst)
        inst.known_optimum = (bits, energy)
    return inst


def maxcut_qubo(g: Graph) -> QuboInstance:
    """Minimise ``-cut(x)``; ``cut = sum w_ij (x_i + x_j - 2 x_i x_j)``."""
    n = g.node_count
    q = np.zeros((n, n))
    for i, j, w in g.edges:
        q[i, i] -= w
        q[j, j] -= w
        q[i, j] += 2 * w
    return _with_optimum(QuboInstance(n, q, label="maxcut", meta={"graph": g.to_dict()}))


def tsp_qubo(distances, penalty: float | None = None) -> QuboInstance:
    """One-hot (city, position) encoding; bit ``c * n + t`` means city ``c`` is visited at step ``t``.

    Valid tours evaluate to their closed-tour length; each violated one-hot
    constraint adds ``penalty`` times its squared deviation.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(d, d.T) or np.any(d < 0) or np.any(np.diag(d) != 0):
        raise ValueError("distances must be symmetric, non-negative with zero diagonal")
    n = d.shape[0]
    max_tour = n * float(d.max()) if n > 1 else 0.0
    if penalty is None:
        penalty = max_tour + 1.0
    if penalty <= max_tour:
        raise ValueError(f"penalty {penalty} must exceed the tour-length bound {max_tour}")
    m = n * n
    q = np.zeros((m, m))

    def var(c, t):
        return c * n + t

    for t in range(n):
        t_next = (t + 1) % n
        for c in range(n):
            for c2 in range(n):
                if c == c2 or t == t_next:
                    continue
                u, v = var(c, t), var(c2, t_next)
                q[min(u, v), max(u, v)] += d[c, c2]
    # (1 - sum x)^2 = 1 - sum x + 2 sum_{a<b} x_a x_b for binary x
    groups = [[var(c, t) for t in range(n)] for c in range(n)]
    groups += [[var(c, t) for c in range(n)] for t in range(n)]
    for group in groups:
        for u in group:
            q[u, u] -= penalty
        for u, v in itertools.combinations(group, 2):
            q[min(u, v), max(u, v)] += 2 * penalty
    inst = QuboInstance(
        m, q, label="tsp", offset=penalty * len(groups),
        meta={"cities": n, "distances": d.tolist(), "penalty": penalty},
    )
    return _with_optimum(inst)


def slack_coefficients(capacity: int) -> list[int]:
    """Binary slack weights summing exactly to ``capacity``; ``ceil(log2(capacity + 1))`` of them."""
    k = math.ceil(math.log2(capacity + 1)) if capacity > 0 else 0
    coeffs = [1 << b for b in range(k)]
    if coeffs:
        coeffs[-1] = capacity - sum(coeffs[:-1])
    return coeffs


def knapsack_qubo(values, weights, capacity: int, penalty: float | None = None) -> QuboInstance:
    """Items first, then slack bits; feasible states evaluate to ``-total_value``."""
    values = [float(v) for v in values]
    weights = [float(w) for w in weights]
    if len(values) != len(weights):
        raise ValueError("values and weights must have equal length")
    if capacity < 0:
        raise ValueError(f"capacity must be non-negative, got {capacity}")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    if penalty is None:
        penalty = sum(abs(v) for v in values) + 1.0
    if penalty <= sum(values):
        raise ValueError("penalty must exceed the total item value")
    coeffs = weights + [float(c) for c in slack_coefficients(capacity)]
    m = len(coeffs)
    q = np.zeros((m, m))
    for u, a in enumerate(coeffs):
        q[u, u] = penalty * (a * a - 2 * capacity * a)
        if u < len(values):
            q[u, u] -= values[u]
    for u, v in itertools.combinations(range(m), 2):
        q[u, v] = 2 * penalty * coeffs[u] * coeffs[v]
    inst = QuboInstance(
        m, q, label="knapsack", offset=penalty * capacity**2,
        meta={"values": values, "weights": weights, "capacity": capacity, "penalty": penalty},
    )
    return _with_optimum(inst)


def qubit_requirement(problem: str, size: int, capacity: int | None = None) -> int:
    """Qubits needed by each encoding: MaxCut ``n``, TSP ``n**2``, knapsack ``n + ceil(log2(W + 1))``."""
    if problem == "maxcut":
        return size
    if problem == "tsp":
        return size * size
    if problem == "knapsack":
        if capacity is None:
            raise ValueError("knapsack needs a capacity")
        return size + len(slack_coefficients(capacity))
    raise ValueError(f"unknown problem {problem!r}")


def decode_tour(bits: str, cities: int) -> list[int] | None:
    """City order for a valid one-hot assignment, else ``None``."""
    x = bits_to_array(bits).reshape(cities, cities)
    if not (np.all(x.sum(axis=0) == 1) and np.all(x.sum(axis=1) == 1)):
        return None
    return [int(np.argmax(x[:, t])) for t in range(cities)]


def knapsack_selection(bits: str, items: int) -> list[int]:
    x = bits_to_array(bits)
    return [i for i in range(items) if x[i]]
