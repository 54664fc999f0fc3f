"""Dense statevector simulation with a stochastic-Pauli noise model.

Qubit 0 is the least-significant bit of an amplitude index. Gate conventions:

========== =====================================================
RX(t)      exp(-i t/2 X)
RZ(t)      exp(-i t/2 Z) = diag(e^{-it/2}, e^{it/2})
RZZ(t)     exp(-i t/2 Z⊗Z)
RXXplusYY  exp(-i t/2 (XX + YY)/2); rotates within span{|01>, |10>}
S, SDG     diag(1, i), diag(1, -i)
CZ         diag(1, 1, 1, -1)
========== =====================================================

All kernels accept a leading batch axis, which the trajectory sampler uses
to push many noisy realisations through a circuit at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .problems import IsingHamiltonian, index_to_bits

ARITY = {
    "H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "SDG": 1, "RX": 1, "RZ": 1,
    "RZZ": 2, "RXXplusYY": 2, "CZ": 2, "BARRIER": None,
}
PARAMETRIC = {"RX", "RZ", "RZZ", "RXXplusYY"}
SELF_INVERSE = {"H", "X", "Y", "Z", "CZ", "BARRIER"}

_SQ2 = 1 / math.sqrt(2)
_FIXED_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        arity = ARITY[self.kind]
        if arity is not None and len(targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {len(targets)}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"repeated target in {self.kind}{targets}")
        if any(t < 0 for t in targets):
            raise ValueError("negative qubit index")
        if self.kind in PARAMETRIC:
            if self.angle is None:
                raise ValueError(f"{self.kind} needs an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return ARITY[self.kind] == 2

    def inverse(self) -> Gate:
        if self.kind in SELF_INVERSE:
            return self
        if self.kind == "S":
            return Gate("SDG", self.targets)
        if self.kind == "SDG":
            return Gate("S", self.targets)
        return Gate(self.kind, self.targets, -self.angle)

    def to_dict(self) -> dict:
        return {"gate": self.kind, "targets": list(self.targets), "angle": self.angle}

    @classmethod
    def from_dict(cls, d: dict) -> Gate:
        return cls(d["gate"], tuple(d["targets"]), d.get("angle"))


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        self.gates = list(self.gates)
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        if any(t >= self.n for t in g.targets):
            raise ValueError(f"{g.kind}{g.targets} out of range for {self.n} qubits")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> Circuit:
        return Circuit(self.n, [g.inverse() for g in reversed(self.gates)])

    def two_qubit_pairs(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for g in self.gates:
            if g.is_two_qubit:
                key = tuple(sorted(g.targets))
                counts[key] = counts.get(key, 0) + 1
        return counts

    def to_json_list(self) -> list[dict]:
        return [g.to_dict() for g in self.gates]

    @classmethod
    def from_json_list(cls, n: int, items: list[dict]) -> Circuit:
        return cls(n, [Gate.from_dict(d) for d in items])


@dataclass
class Statevector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got {self.amplitudes.shape}")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> Statevector:
        return Statevector(self.n, self.amplitudes.copy())


def zero_state(n: int) -> Statevector:
    amp = np.zeros(1 << n, dtype=complex)
    amp[0] = 1.0
    return Statevector(n, amp)


def basis_state(bits: str) -> Statevector:
    n = len(bits)
    amp = np.zeros(1 << n, dtype=complex)
    amp[int(bits, 2)] = 1.0
    return Statevector(n, amp)


def plus_state(n: int) -> Statevector:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Statevector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


@lru_cache(maxsize=None)
def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n)


@lru_cache(maxsize=None)
def _zeros_of(n: int, qubits: tuple[int, ...]) -> np.ndarray:
    """Indices whose bits at ``qubits`` are all zero."""
    idx = _indices(n)
    mask = 0
    for q in qubits:
        mask |= 1 << q
    return idx[(idx & mask) == 0]


@lru_cache(maxsize=None)
def _spin(n: int, q: int) -> np.ndarray:
    """``z_q`` for every index: +1 where bit q is 0, -1 where it is 1."""
    return 1.0 - 2.0 * ((_indices(n) >> q) & 1)


def _mix_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    i0 = _zeros_of(n, (q,))
    i1 = i0 | (1 << q)
    a0 = psi[..., i0]
    a1 = psi[..., i1]
    out = np.empty_like(psi)
    out[..., i0] = u[0, 0] * a0 + u[0, 1] * a1
    out[..., i1] = u[1, 0] * a0 + u[1, 1] * a1
    return out


def apply_gate_array(psi: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to amplitude array(s) of shape ``(..., 2**n)``; returns a new array."""
    k = g.kind
    if k == "BARRIER":
        return psi
    if k in _FIXED_1Q:
        return _mix_1q(psi, _FIXED_1Q[k], g.targets[0], n)
    if k == "RX":
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        return _mix_1q(psi, np.array([[c, -1j * s], [-1j * s, c]]), g.targets[0], n)
    if k == "Z":
        return psi * _spin(n, g.targets[0])
    if k in ("S", "SDG"):
        phase = 1j if k == "S" else -1j
        bit = (1 - _spin(n, g.targets[0])) / 2
        return psi * np.where(bit == 1, phase, 1.0)
    if k == "RZ":
        return psi * np.exp(-0.5j * g.angle * _spin(n, g.targets[0]))
    a, b = g.targets
    if k == "RZZ":
        return psi * np.exp(-0.5j * g.angle * _spin(n, a) * _spin(n, b))
    if k == "CZ":
        both = (_spin(n, a) < 0) & (_spin(n, b) < 0)
        return psi * np.where(both, -1.0, 1.0)
    if k == "RXXplusYY":
        i00 = _zeros_of(n, tuple(sorted((a, b))))
        ia = i00 | (1 << a)
        ib = i00 | (1 << b)
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        pa = psi[..., ia]
        pb = psi[..., ib]
        out = psi.copy()
        out[..., ia] = c * pa - 1j * s * pb
        out[..., ib] = -1j * s * pa + c * pb
        return out
    raise ValueError(f"unsupported gate {k!r}")


def apply_circuit(state: Statevector, c: Circuit) -> Statevector:
    if state.n != c.n:
        raise ValueError(f"state has {state.n} qubits, circuit has {c.n}")
    psi = state.amplitudes
    for g in c.gates:
        psi = apply_gate_array(psi, g, c.n)
    return Statevector(c.n, psi.copy() if psi is state.amplitudes else psi)


def run_circuit(c: Circuit, initial: Statevector | None = None) -> Statevector:
    return apply_circuit(initial if initial is not None else zero_state(c.n), c)


def expectation_ising(state: Statevector | np.ndarray, h: IsingHamiltonian) -> float:
    """``<psi|H|psi>`` for a diagonal Ising observable; also accepts a probability vector."""
    probs = state.probabilities() if isinstance(state, Statevector) else np.asarray(state, float)
    if probs.shape != (1 << h.n,):
        raise ValueError("state and Hamiltonian dimensions differ")
    return float(probs @ h.energies())


def sample_counts(state: Statevector | np.ndarray, shots: int, seed) -> dict[str, int]:
    """Multinomial sample of ``shots`` outcomes; keys are bitstrings, sorted."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities() if isinstance(state, Statevector) else np.asarray(state, float)
    n = int(round(math.log2(probs.shape[0])))
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    draws = np.random.default_rng(seed).multinomial(shots, probs)
    return {index_to_bits(int(k), n): int(draws[k]) for k in np.flatnonzero(draws)}


def counts_to_vector(counts: dict[str, int], n: int) -> np.ndarray:
    v = np.zeros(1 << n)
    for bits, c in counts.items():
        v[int(bits, 2)] += c
    return v


def basis_change(basis: str, qubit: int) -> list[Gate]:
    """Gates rotating the X or Y eigenbasis onto the computational basis."""
    basis = basis.upper()
    if basis == "X":
        return [Gate("H", (qubit,))]
    if basis == "Y":
        return [Gate("SDG", (qubit,)), Gate("H", (qubit,))]
    if basis == "Z":
        return []
    raise ValueError(f"unknown basis {basis!r}")


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing-style noise: after each gate a uniformly random non-identity Pauli
    strikes its qubits with probability ``p1`` (1-qubit gates) or ``p2`` (2-qubit gates);
    every measured bit flips with probability ``readout_flip``."""

    p1: float = 0.0
    p2: float = 0.0
    readout_flip: float = 0.0
    seed_stream: int = 0

    def __post_init__(self):
        for name in ("p1", "p2", "readout_flip"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.readout_flip == 0

    @classmethod
    def parse(cls, text: str, seed_stream: int = 0) -> NoiseModel:
        """``"p1,p2,readout"`` as used on the command line."""
        parts = [float(x) for x in text.split(",")]
        parts += [0.0] * (3 - len(parts))
        return cls(parts[0], parts[1], parts[2], seed_stream)

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "readout_flip": self.readout_flip,
                "seed_stream": self.seed_stream}


_PAULI = ("I", "X", "Y", "Z")


def _apply_pauli_rows(psi: np.ndarray, rows: np.ndarray, pauli: str, q: int, n: int) -> None:
    if pauli == "I" or rows.size == 0:
        return
    psi[rows] = apply_gate_array(psi[rows], Gate(pauli, (q,)), n)


def _inject_noise(psi: np.ndarray, g: Gate, noise: NoiseModel, n: int, rng) -> None:
    if g.kind == "BARRIER":
        return
    batch = psi.shape[0]
    if g.is_two_qubit:
        if noise.p2 == 0:
            return
        hit = np.flatnonzero(rng.random(batch) < noise.p2)
        if hit.size == 0:
            return
        choice = rng.integers(1, 16, size=hit.size)
        for code in np.unique(choice):
            rows = hit[choice == code]
            pa, pb = divmod(int(code), 4)
            _apply_pauli_rows(psi, rows, _PAULI[pa], g.targets[0], n)
            _apply_pauli_rows(psi, rows, _PAULI[pb], g.targets[1], n)
    else:
        if noise.p1 == 0:
            return
        hit = np.flatnonzero(rng.random(batch) < noise.p1)
        if hit.size == 0:
            return
        choice = rng.integers(1, 4, size=hit.size)
        for code in np.unique(choice):
            _apply_pauli_rows(psi, hit[choice == code], _PAULI[int(code)], g.targets[0], n)


def apply_readout(probs: np.ndarray, flip: float, n: int) -> np.ndarray:
    """Exact classical bit-flip channel on each qubit; acts on the last axis."""
    if flip == 0:
        return probs
    idx = _indices(n)
    for q in range(n):
        probs = (1 - flip) * probs + flip * probs[..., idx ^ (1 << q)]
    return probs


def _trajectory_batches(c: Circuit, noise: NoiseModel, trajectories: int, seed,
                        initial: Statevector | None, max_batch_amplitudes: int):
    """Yield ``(batch, 2**n)`` arrays of per-trajectory outcome probabilities (before readout)."""
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    n = c.n
    init = (initial if initial is not None else zero_state(n)).amplitudes
    chunk = max(1, min(trajectories, max_batch_amplitudes >> n))
    n_chunks = -(-trajectories // chunk)
    children = np.random.SeedSequence([noise.seed_stream, _as_entropy(seed)]).spawn(n_chunks)
    remaining = trajectories
    for child in children:
        b = min(chunk, remaining)
        remaining -= b
        rng = np.random.default_rng(child)
        psi = np.tile(init, (b, 1))
        for g in c.gates:
            psi = apply_gate_array(psi, g, n)
            _inject_noise(psi, g, noise, n, rng)
        yield np.abs(psi) ** 2


def run_noisy(
    c: Circuit,
    noise: NoiseModel,
    trajectories: int,
    seed,
    initial: Statevector | None = None,
    max_batch_amplitudes: int = 1 << 22,
) -> np.ndarray:
    """Trajectory-averaged outcome distribution of ``c`` under ``noise``.

    Trajectories run in batches; each batch draws from its own child of
    ``SeedSequence([noise.seed_stream, seed])`` so results depend only on
    the seed and the batch size.
    """
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    n = c.n
    if noise.p1 == 0 and noise.p2 == 0:
        probs = apply_circuit(initial if initial is not None else zero_state(n), c).probabilities()
        return apply_readout(probs, noise.readout_flip, n)
    acc = np.zeros(1 << n)
    for batch in _trajectory_batches(c, noise, trajectories, seed, initial, max_batch_amplitudes):
        acc += batch.sum(axis=0)
    probs = acc / acc.sum()
    return apply_readout(probs, noise.readout_flip, n)


def noisy_energy_samples(
    c: Circuit,
    noise: NoiseModel,
    trajectories: int,
    seed,
    energies: np.ndarray,
    initial: Statevector | None = None,
    max_batch_amplitudes: int = 1 << 22,
) -> np.ndarray:
    """Exact diagonal-observable expectation of each noisy trajectory (readout flips included)."""
    n = c.n
    out = []
    for batch in _trajectory_batches(c, noise, trajectories, seed, initial, max_batch_amplitudes):
        batch = apply_readout(batch, noise.readout_flip, n)
        out.append(batch @ energies)
    return np.concatenate(out)


def _as_entropy(seed) -> int:
    if seed is None:
        return 0
    return int(seed) & ((1 << 63) - 1)
