from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deal.ansatz import AnsatzSpec, build_circuit
from deal.errors import CapacityError
from deal.mapping import (PRESETS, CouplingMap, QubitMapping, brute_force_mapping, connectivity_report,
                          distance_matrix, load_device, map_qubits)
from deal.problems import Graph, QuboInstance, maxcut_qubo, qubo_to_ising
from deal.qpn import qpn_params, qubit_weights
from deal.simulator import Circuit, Gate


def ring(n, error=0.01):
    edges = [(i, (i + 1) % n) for i in range(n)]
    return CouplingMap(n, edges, {(min(a, b), max(a, b)): error for a, b in edges})


def random_device(m, rng):
    """Random spanning tree plus a few extra edges, with random error rates."""
    edges = {(min(i, int(rng.integers(i))), i) for i in range(1, m)}
    for a, b in itertools.combinations(range(m), 2):
        if rng.random() < 0.2:
            edges.add((a, b))
    edges = sorted(edges)
    return CouplingMap(m, edges, {e: float(rng.uniform(0.001, 0.05)) for e in edges})


def test_distances():
    assert distance_matrix(CouplingMap.line(3))[0, 2] == 2
    d = distance_matrix(CouplingMap.complete(4))
    assert np.all(d[~np.eye(4, dtype=bool)] == 1)
    r = distance_matrix(ring(5))
    assert r[0, 2] == 2 and r[0, 3] == 2


def test_disconnected_device_rejected():
    cm = CouplingMap(4, [(0, 1), (2, 3)], {(0, 1): 0.01, (2, 3): 0.01})
    with pytest.raises(ValueError):
        distance_matrix(cm)


def test_bad_edges_rejected():
    with pytest.raises(ValueError):
        CouplingMap(2, [(0, 0)], {})
    with pytest.raises(ValueError):
        CouplingMap(2, [(0, 1)], {(0, 1): 1.5})


def test_two_qubit_tie_goes_to_identity():
    q = maxcut_qubo(Graph(2, ((0, 1, 1.0),)))
    assert map_qubits(None, q, CouplingMap.line(2)).pi == (0, 1)


def test_heaviest_qubit_goes_to_line_centre():
    q = QuboInstance(3, [[0, 3, 3], [0, 0, 1], [0, 0, 0]])
    w = qubit_weights(q)
    heavy = int(np.argmax(w.normalized))
    pi = map_qubits(w, q, CouplingMap.line(3))
    assert pi[heavy] == 1
    best, cost = brute_force_mapping(q, CouplingMap.line(3))
    assert best[heavy] == 1


def test_capacity_error():
    with pytest.raises(CapacityError):
        map_qubits(None, maxcut_qubo(Graph.complete(4)), CouplingMap.line(3))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_heuristic_close_to_brute_force(n, extra, seed):
    rng = np.random.default_rng(seed)
    cm = random_device(n + extra, rng)
    q = QuboInstance(n, rng.normal(size=(n, n)))
    pi = map_qubits(None, q, cm)
    from deal.mapping import PlacementObjective
    cost = PlacementObjective(q, cm)(pi.pi)
    _, best = brute_force_mapping(q, cm)
    assert cost <= 1.2 * best + 1e-12


def test_mapping_is_deterministic():
    rng = np.random.default_rng(5)
    cm = random_device(7, rng)
    q = QuboInstance(5, rng.normal(size=(5, 5)))
    assert map_qubits(None, q, cm) == map_qubits(None, q, cm)


def test_mapping_must_be_injective():
    with pytest.raises(ValueError):
        QubitMapping((0, 0))


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load_and_roundtrip(name):
    cm = load_device(name)
    assert cm.physical_count == 20
    distance_matrix(cm)
    back = CouplingMap.from_dict(cm.to_dict())
    assert back.edges == cm.edges and back.edge_error == cm.edge_error


def test_connectivity_examples():
    q = maxcut_qubo(Graph.complete(2))
    w = qubit_weights(q)
    assert connectivity_report(QubitMapping((0, 1)), q, Circuit(2, [Gate("H", (0,))]), CouplingMap.line(2)).cost == 0
    c = Circuit(2, [Gate("RZZ", (0, 1), 0.3)])
    rep = connectivity_report(QubitMapping((0, 1)), q, c, CouplingMap.line(2), w)
    assert rep.cost == pytest.approx(w.normalized[0] * w.normalized[1])


def test_connectivity_recompute_on_line_device():
    q = maxcut_qubo(Graph.complete(4))
    h = qubo_to_ising(q)
    c = build_circuit(AnsatzSpec(h, Graph.complete(4), 2, "DEAL"), qpn_params(q, 2))
    cm = CouplingMap.line(4)
    pi = map_qubits(None, q, cm)
    rep = connectivity_report(pi, q, c, cm)
    d = distance_matrix(cm)
    w = qubit_weights(q).normalized
    by_hand = 0.0
    for i, j in itertools.combinations(range(4), 2):
        gates = sum(1 for g in c.gates if g.is_two_qubit and set(g.targets) == {i, j})
        by_hand += w[i] * w[j] * d[pi[i], pi[j]] * gates
    assert rep.cost == pytest.approx(by_hand)
    assert rep.recompute() == pytest.approx(rep.cost)
