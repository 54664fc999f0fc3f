"""Error-aware placement of logical qubits on a device coupling map.

The placement objective is ``sum_{i<j} |Q_ij| * d(pi_i, pi_j) * E(pi_i, pi_j)``
where ``d`` is the hop distance and ``E`` the two-qubit error of the pair. For
non-adjacent physical pairs ``E`` is the mean edge error along the BFS
shortest path (lowest-index neighbours explored first).
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import CapacityError
from .problems import QuboInstance
from .qpn import ImportanceWeights, qubit_weights
from .simulator import Circuit

PRESETS = ("heavyhex20_a", "heavyhex20_b")
_TIE = 1e-12


@dataclass
class CouplingMap:
    physical_count: int
    edges: list[tuple[int, int]]
    edge_error: dict[tuple[int, int], float]
    readout_error: list[float] | None = None

    def __post_init__(self):
        clean = []
        errs = {}
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b or not (0 <= a < self.physical_count and 0 <= b < self.physical_count):
                raise ValueError(f"bad coupling edge ({a}, {b})")
            key = (min(a, b), max(a, b))
            e = self.edge_error.get(key, self.edge_error.get((key[1], key[0]), 0.0))
            if not 0.0 <= e < 1.0:
                raise ValueError(f"edge error {e} on {key} outside [0, 1)")
            clean.append(key)
            errs[key] = float(e)
        self.edges = sorted(set(clean))
        self.edge_error = errs
        self._adj = [[] for _ in range(self.physical_count)]
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for nbrs in self._adj:
            nbrs.sort()

    def neighbors(self, a: int) -> list[int]:
        return self._adj[a]

    def error(self, a: int, b: int) -> float:
        return self.edge_error[(min(a, b), max(a, b))]

    @classmethod
    def complete(cls, n: int, error: float = 0.01) -> CouplingMap:
        edges = list(itertools.combinations(range(n), 2))
        return cls(n, edges, {e: error for e in edges})

    @classmethod
    def line(cls, n: int, error: float = 0.01) -> CouplingMap:
        edges = [(i, i + 1) for i in range(n - 1)]
        return cls(n, edges, {e: error for e in edges})

    def to_dict(self) -> dict:
        d = {"qubits": self.physical_count,
             "edges": [[a, b, self.edge_error[(a, b)]] for a, b in self.edges]}
        if self.readout_error is not None:
            d["readout"] = list(self.readout_error)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CouplingMap:
        edges = [(int(a), int(b)) for a, b, _ in d["edges"]]
        errs = {(min(int(a), int(b)), max(int(a), int(b))): float(e) for a, b, e in d["edges"]}
        readout = d.get("readout")
        return cls(int(d["qubits"]), edges, errs, None if readout is None else list(readout))


def load_device(path_or_preset: str | Path) -> CouplingMap:
    """Read a device JSON file, or one of the bundled presets by name."""
    name = str(path_or_preset)
    if name in PRESETS:
        text = resources.files("deal.devices").joinpath(f"{name}.json").read_text()
    else:
        text = Path(name).read_text()
    return CouplingMap.from_dict(json.loads(text))


def _bfs(cm: CouplingMap, src: int) -> tuple[np.ndarray, np.ndarray]:
    dist = np.full(cm.physical_count, -1, dtype=int)
    parent = np.full(cm.physical_count, -1, dtype=int)
    dist[src] = 0
    queue = deque([src])
    while queue:
        a = queue.popleft()
        for b in cm.neighbors(a):
            if dist[b] < 0:
                dist[b] = dist[a] + 1
                parent[b] = a
                queue.append(b)
    return dist, parent


def distance_matrix(cm: CouplingMap) -> np.ndarray:
    """All-pairs hop counts."""
    d = np.vstack([_bfs(cm, s)[0] for s in range(cm.physical_count)])
    if np.any(d < 0):
        raise ValueError("coupling map is disconnected")
    return d


def path_error_matrix(cm: CouplingMap) -> np.ndarray:
    """Mean edge error along the BFS shortest path between every physical pair."""
    m = cm.physical_count
    out = np.zeros((m, m))
    for s in range(m):
        dist, parent = _bfs(cm, s)
        if np.any(dist < 0):
            raise ValueError("coupling map is disconnected")
        for t in range(m):
            if t == s:
                continue
            total, node = 0.0, t
            while node != s:
                total += cm.error(node, parent[node])
                node = parent[node]
            out[s, t] = total / dist[t]
    # BFS trees from s and t can pick different paths; keep the matrix symmetric
    return np.minimum(out, out.T)


@dataclass(frozen=True)
class QubitMapping:
    pi: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.pi)) != len(self.pi):
            raise ValueError("mapping is not injective")

    def __getitem__(self, i: int) -> int:
        return self.pi[i]

    def __len__(self) -> int:
        return len(self.pi)


class PlacementObjective:
    """Precomputed ``|Q_ij| * d * E`` evaluator for one (instance, device) pair."""

    def __init__(self, q: QuboInstance, cm: CouplingMap):
        self.coupling = np.abs(np.triu(q.q, 1))
        self.pair_cost = distance_matrix(cm) * path_error_matrix(cm)
        self.n = q.n
        self.m = cm.physical_count

    def __call__(self, pi) -> float:
        pi = np.asarray(pi)
        return float((self.coupling * self.pair_cost[np.ix_(pi, pi)]).sum())


def _grow(start: int, order: list[int], obj: PlacementObjective, cm: CouplingMap,
          node_err: np.ndarray) -> list[int]:
    pi = [-1] * obj.n
    pi[order[0]] = start
    used = {start}
    sym = obj.coupling + obj.coupling.T
    for l in order[1:]:
        frontier = sorted({b for a in used for b in cm.neighbors(a)} - used)
        candidates = frontier or sorted(set(range(obj.m)) - used)
        placed = [j for j in range(obj.n) if pi[j] >= 0]

        def incremental(c):
            return sum(sym[l, j] * obj.pair_cost[c, pi[j]] for j in placed)

        best = min(candidates, key=lambda c: (round(incremental(c), 12), node_err[c], c))
        pi[l] = best
        used.add(best)
    return pi


def _hill_climb(pi: list[int], obj: PlacementObjective, max_sweeps: int) -> tuple[list[int], float]:
    cost = obj(pi)
    for _ in range(max_sweeps):
        improved = False
        for a in range(obj.n):
            free = sorted(set(range(obj.m)) - set(pi))
            moves = [("swap", b) for b in range(a + 1, obj.n)] + [("move", f) for f in free]
            for kind, x in moves:
                trial = list(pi)
                if kind == "swap":
                    trial[a], trial[x] = trial[x], trial[a]
                else:
                    trial[a] = x
                c = obj(trial)
                if c < cost - _TIE:
                    pi, cost, improved = trial, c, True
        if not improved:
            break
    return pi, cost


def map_qubits(w: ImportanceWeights | None, q: QuboInstance, cm: CouplingMap,
               max_sweeps: int | None = None) -> QubitMapping:
    """Greedy region growth in descending-weight order from every seed node, then
    swap/move hill climbing; the cheapest result wins, ties to the smallest ``pi``."""
    n, m = q.n, cm.physical_count
    if n > m:
        raise CapacityError(f"{n} logical qubits do not fit on {m} physical qubits")
    if w is None:
        w = qubit_weights(q)
    weights = np.asarray(w.normalized)
    order = sorted(range(n), key=lambda i: (-weights[i], i))
    obj = PlacementObjective(q, cm)
    node_err = np.array([
        np.mean([cm.error(a, b) for b in cm.neighbors(a)]) if cm.neighbors(a) else 1.0
        for a in range(m)
    ])
    sweeps = max_sweeps if max_sweeps is not None else n * n + 1
    starts = [list(range(n))] + [_grow(s, order, obj, cm, node_err) for s in range(m)]
    best_pi, best_cost = None, np.inf
    for start in starts:
        pi, cost = _hill_climb(start, obj, sweeps)
        if cost < best_cost - _TIE or (abs(cost - best_cost) <= _TIE and tuple(pi) < tuple(best_pi)):
            best_pi, best_cost = pi, cost
    return QubitMapping(tuple(int(x) for x in best_pi))


def brute_force_mapping(q: QuboInstance, cm: CouplingMap) -> tuple[QubitMapping, float]:
    """Exhaustive search over injective placements (small instances only)."""
    obj = PlacementObjective(q, cm)
    best, best_cost = None, np.inf
    for pi in itertools.permutations(range(cm.physical_count), q.n):
        c = obj(pi)
        if c < best_cost - _TIE:
            best, best_cost = pi, c
    return QubitMapping(tuple(best)), best_cost


@dataclass(frozen=True)
class ConnectivityReport:
    cost: float
    pair_distances: np.ndarray
    pair_gate_counts: np.ndarray
    weights: np.ndarray

    def recompute(self) -> float:
        w = self.weights
        return float(np.sum(np.triu(np.outer(w, w) * self.pair_distances * self.pair_gate_counts, 1)))


def connectivity_report(pi: QubitMapping, q: QuboInstance, c: Circuit, cm: CouplingMap,
                        w: ImportanceWeights | None = None) -> ConnectivityReport:
    """``C_conn = sum_{i<j} w_i w_j d_ij n_ij`` with ``n_ij`` the two-qubit gate count on pair (i, j)."""
    if len(pi) < c.n:
        raise ValueError("mapping does not cover every circuit qubit")
    weights = np.asarray((w or qubit_weights(q)).normalized, dtype=float)
    d_phys = distance_matrix(cm)
    idx = np.asarray(pi.pi[: c.n])
    dist = d_phys[np.ix_(idx, idx)].astype(float)
    counts = np.zeros((c.n, c.n))
    for (i, j), k in c.two_qubit_pairs().items():
        counts[i, j] = k
    cost = float(np.sum(np.triu(np.outer(weights, weights) * dist * counts, 1)))
    return ConnectivityReport(cost, dist, counts, weights)
