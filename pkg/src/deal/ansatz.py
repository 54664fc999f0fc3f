"""DEAL and vanilla QAOA circuit construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import Graph, IsingHamiltonian
from .qpn import QaoaParams
from .simulator import Circuit, Gate

STYLES = ("DEAL", "VANILLA")


@dataclass(frozen=True)
class MixerCouplings:
    edges: tuple[tuple[int, int], ...]
    k: np.ndarray

    def items(self):
        return zip(self.edges, self.k)


def mixer_couplings(g: Graph) -> MixerCouplings:
    """``K_ij = |w_ij| / sum |w|`` over the mixer edges."""
    if not g.edges:
        raise ValueError("the XY mixer needs at least one edge")
    mags = np.array([abs(w) for _, _, w in g.edges], dtype=float)
    total = mags.sum()
    k = np.full(mags.size, 1.0 / mags.size) if total == 0 else mags / total
    return MixerCouplings(tuple((i, j) for i, j, _ in g.edges), k)


@dataclass(frozen=True)
class AnsatzSpec:
    hamiltonian: IsingHamiltonian
    mixer_graph: Graph | None
    depth: int
    style: str = "DEAL"
    init_state: str = "plus"
    multiplicities: dict | None = None

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}, got {self.style!r}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.mixer_graph is not None and self.mixer_graph.node_count != self.hamiltonian.n:
            raise ValueError("mixer graph and Hamiltonian disagree on qubit count")
        if self.style == "DEAL" and self.depth > 0 and (self.mixer_graph is None or not self.mixer_graph.edges):
            raise ValueError("DEAL style needs a mixer graph with at least one edge")
        if self.init_state != "plus" and (
            len(self.init_state) != self.hamiltonian.n or set(self.init_state) - {"0", "1"}
        ):
            raise ValueError("init_state must be 'plus' or a bitstring of length n")

    @property
    def n(self) -> int:
        return self.hamiltonian.n


def default_mixer_graph(h: IsingHamiltonian, problem_graph: Graph | None = None) -> Graph:
    """The problem graph when one exists, else the nonzero-coupling adjacency of ``h``."""
    if problem_graph is not None and problem_graph.edges:
        return problem_graph
    return h.interaction_graph()


def cost_gate_terms(h: IsingHamiltonian, gamma: float) -> list[Gate]:
    """``h_i Z_i -> RZ(2 gamma h_i)`` and ``J_ij Z_i Z_j -> RZZ(2 gamma J_ij)``; the offset is dropped."""
    gates = [Gate("RZ", (i,), 2 * gamma * hi) for i, hi in h.linear_terms()]
    gates += [Gate("RZZ", (i, j), 2 * gamma * jij) for i, j, jij in h.quadratic_terms()]
    return gates


def compensate_duplicates(terms, multiplicity: dict) -> list[tuple[int, int, float]]:
    """Split a coupling emitted ``m`` times into ``m`` copies of ``J / m``."""
    out = []
    for i, j, coeff in terms:
        m = int(multiplicity.get((i, j), multiplicity.get((j, i), 1)))
        if m < 1:
            raise ValueError(f"multiplicity of ({i}, {j}) must be >= 1")
        out.extend([(i, j, coeff / m)] * m)
    return out


def truncate_small_terms(h: IsingHamiltonian, threshold: float = 1e-4) -> IsingHamiltonian:
    """Drop linear and pairwise coefficients with magnitude below ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    lin = np.where(np.abs(h.linear) < threshold, 0.0, h.linear)
    quad = np.where(np.abs(h.quadratic) < threshold, 0.0, h.quadratic)
    return IsingHamiltonian(h.offset, lin, quad)


def _prep(spec: AnsatzSpec) -> list[Gate]:
    if spec.init_state == "plus":
        return [Gate("H", (i,)) for i in range(spec.n)]
    return [Gate("X", (i,)) for i, b in enumerate(reversed(spec.init_state)) if b == "1"]


def build_circuit(spec: AnsatzSpec, theta: QaoaParams) -> Circuit:
    if theta.p != spec.depth:
        raise ValueError(f"parameters have depth {theta.p}, ansatz has {spec.depth}")
    h = spec.hamiltonian
    c = Circuit(spec.n, _prep(spec))
    couplings = mixer_couplings(spec.mixer_graph) if spec.style == "DEAL" and spec.depth else None
    zz = h.quadratic_terms()
    if spec.multiplicities:
        zz = compensate_duplicates(zz, spec.multiplicities)
    for gamma, beta in zip(theta.gammas, theta.betas):
        c.extend(Gate("RZ", (i,), 2 * gamma * hi) for i, hi in h.linear_terms())
        c.extend(Gate("RZZ", (i, j), 2 * gamma * jij) for i, j, jij in zz)
        if couplings is None:
            c.extend(Gate("RX", (i,), 2 * beta) for i in range(spec.n))
        else:
            c.extend(Gate("RXXplusYY", e, 2 * beta * k) for e, k in couplings.items())
    return c


def expected_gate_count(spec: AnsatzSpec) -> int:
    h = spec.hamiltonian
    mixer = len(spec.mixer_graph.edges) if spec.style == "DEAL" else spec.n
    prep = spec.n if spec.init_state == "plus" else spec.init_state.count("1")
    return prep + spec.depth * (len(h.linear_terms()) + len(h.quadratic_terms()) + mixer)
