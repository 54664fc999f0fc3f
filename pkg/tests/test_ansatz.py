from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deal.ansatz import (AnsatzSpec, build_circuit, compensate_duplicates, cost_gate_terms,
                         default_mixer_graph, expected_gate_count, mixer_couplings, truncate_small_terms)
from deal.problems import Graph, IsingHamiltonian, QuboInstance, maxcut_qubo, qubo_to_ising
from deal.qpn import QaoaParams, qpn_params
from deal.simulator import Circuit, Gate, basis_state, expectation_ising, plus_state, run_circuit
from oracles import X, Y, Z, embed


def edge_h():
    return qubo_to_ising(maxcut_qubo(Graph(2, ((0, 1, 1.0),))))


def test_depth_zero_gives_plus_state():
    h = edge_h()
    c = build_circuit(AnsatzSpec(h, None, 0, "VANILLA"), QaoaParams(np.array([]), np.array([])))
    np.testing.assert_allclose(run_circuit(c).amplitudes, plus_state(2).amplitudes, atol=1e-12)


@pytest.mark.parametrize("style", ["DEAL", "VANILLA"])
def test_zero_angles_are_identity_after_prep(style):
    h = qubo_to_ising(maxcut_qubo(Graph.complete(3)))
    spec = AnsatzSpec(h, Graph.complete(3), 2, style)
    sv = run_circuit(build_circuit(spec, QaoaParams(np.zeros(2), np.zeros(2))))
    np.testing.assert_allclose(sv.amplitudes, plus_state(3).amplitudes, atol=1e-12)


def test_cost_gate_examples():
    h = IsingHamiltonian(0.0, np.array([0.5, 0.0]), np.zeros((2, 2)))
    assert cost_gate_terms(h, 1.0) == [Gate("RZ", (0,), 1.0)]
    h = IsingHamiltonian(0.0, np.zeros(2), np.array([[0, 0.25], [0, 0]]))
    assert cost_gate_terms(h, 2.0) == [Gate("RZZ", (0, 1), 1.0)]
    assert cost_gate_terms(IsingHamiltonian(0.0, np.zeros(2), np.zeros((2, 2))), 1.0) == []


def test_ising_examples():
    h = qubo_to_ising(QuboInstance(2, [[0, 1], [0, 0]]))
    assert h.offset == pytest.approx(0.25)
    np.testing.assert_allclose(h.linear, [-0.25, -0.25])
    assert h.quadratic[0, 1] == pytest.approx(0.25)
    h = qubo_to_ising(QuboInstance(1, [[2.0]]))
    assert (h.offset, h.linear[0]) == (1.0, -1.0)


def test_duplicate_compensation():
    assert compensate_duplicates([(0, 1, 0.5)], {(0, 1): 2}) == [(0, 1, 0.25), (0, 1, 0.25)]
    assert compensate_duplicates([(0, 1, 0.5)], {}) == [(0, 1, 0.5)]


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.integers(1, 6))
def test_duplicate_compensation_preserves_sum(j, m):
    out = compensate_duplicates([(0, 1, j)], {(0, 1): m})
    assert sum(c for *_, c in out) == pytest.approx(j)


def test_duplicates_leave_unitary_unchanged():
    h = qubo_to_ising(maxcut_qubo(Graph.complete(3)))
    theta = QaoaParams(np.array([0.4]), np.array([0.3]))
    a = build_circuit(AnsatzSpec(h, None, 1, "VANILLA"), theta)
    b = build_circuit(AnsatzSpec(h, None, 1, "VANILLA", multiplicities={(0, 1): 3}), theta)
    assert len(b) == len(a) + 2
    np.testing.assert_allclose(run_circuit(a).amplitudes, run_circuit(b).amplitudes, atol=1e-12)


def test_truncation():
    h = IsingHamiltonian(0.0, np.zeros(2), np.array([[0, 1e-6], [0, 0]]))
    assert truncate_small_terms(h, 1e-4).quadratic_terms() == []
    same = truncate_small_terms(h, 0.0)
    np.testing.assert_array_equal(same.quadratic, h.quadratic)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_truncation_error_bound(n, seed):
    rng = np.random.default_rng(seed)
    thr = 1e-2
    q = rng.normal(size=(n, n)) * rng.choice([1e-3, 1.0], size=(n, n))
    h = qubo_to_ising(QuboInstance(n, q))
    ht = truncate_small_terms(h, thr)
    theta = QaoaParams(rng.uniform(0, 1, 1), rng.uniform(0, 1, 1))
    sv = run_circuit(build_circuit(AnsatzSpec(h, None, 1, "VANILLA"), theta))
    dropped = sum(abs(v) < thr for v in h.linear if v) + sum(abs(v) < thr for *_, v in h.quadratic_terms())
    assert abs(expectation_ising(sv, h) - expectation_ising(sv, ht)) <= thr * max(dropped, 0) + 1e-12


@pytest.mark.parametrize("w,k", [((1, 1, 1, 1), (0.25,) * 4), ((2, 1, 1, 0), (0.5, 0.25, 0.25, 0)), ((1,), (1,))])
def test_mixer_couplings(w, k):
    edges = tuple((i, i + 1, float(x)) for i, x in enumerate(w))
    np.testing.assert_allclose(mixer_couplings(Graph(len(w) + 1, edges)).k, k)


def test_mixer_needs_edges():
    with pytest.raises(ValueError):
        mixer_couplings(Graph(3, ()))
    with pytest.raises(ValueError):
        AnsatzSpec(edge_h(), Graph(2, ()), 1, "DEAL")


def test_single_edge_vanilla_against_matrix_oracle():
    h = edge_h()
    gamma, beta = np.pi / 2, 3 * np.pi / 8
    sv = run_circuit(build_circuit(AnsatzSpec(h, None, 1, "VANILLA"), QaoaParams([gamma], [beta])))
    hc = h.offset * np.eye(4) + h.quadratic[0, 1] * embed({0: Z, 1: Z}, 2)
    from scipy.linalg import expm
    mixer = embed({0: X}, 2) + embed({1: X}, 2)
    psi = expm(-1j * beta * mixer) @ expm(-1j * gamma * hc) @ np.full(4, 0.5)
    assert np.abs(np.vdot(psi, sv.amplitudes)) == pytest.approx(1.0, abs=1e-12)
    assert expectation_ising(sv, h) == pytest.approx(-1.0, abs=1e-12)


def test_deal_mixer_matches_matrix_oracle():
    g = Graph(3, ((0, 1, 2.0), (1, 2, 1.0)))
    h = qubo_to_ising(maxcut_qubo(g))
    beta = 0.7
    spec = AnsatzSpec(h, g, 1, "DEAL")
    c = build_circuit(spec, QaoaParams([0.0], [beta]))
    from scipy.linalg import expm
    u = np.eye(8, dtype=complex)
    for (i, j), k in mixer_couplings(g).items():
        gen = (embed({i: X, j: X}, 3) + embed({i: Y, j: Y}, 3)) / 2
        u = expm(-1j * beta * k * gen) @ u
    np.testing.assert_allclose(run_circuit(c).amplitudes, u @ plus_state(3).amplitudes, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_xy_mixer_conserves_hamming_weight(n, seed):
    rng = np.random.default_rng(seed)
    g = Graph.complete(n)
    mixer_only = AnsatzSpec(IsingHamiltonian(0.0, np.zeros(n), np.zeros((n, n))), g, 3, "DEAL",
                            init_state="".join(rng.choice(["0", "1"], size=n)))
    theta = QaoaParams(rng.uniform(0, 2 * np.pi, 3), rng.uniform(0, 2 * np.pi, 3))
    probs = run_circuit(build_circuit(mixer_only, theta)).probabilities()
    weight = mixer_only.init_state.count("1")
    support = [i for i in range(1 << n) if probs[i] > 1e-12]
    assert all(bin(i).count("1") == weight for i in support)


def test_gate_count_and_default_mixer():
    h = qubo_to_ising(maxcut_qubo(Graph.complete(4)))
    spec = AnsatzSpec(h, default_mixer_graph(h), 3, "DEAL")
    assert len(build_circuit(spec, qpn_params(maxcut_qubo(Graph.complete(4)), 3))) == expected_gate_count(spec)
    assert len(default_mixer_graph(h).edges) == 6


def test_bitstring_init_state():
    h = edge_h()
    spec = AnsatzSpec(h, Graph(2, ((0, 1, 1.0),)), 1, "DEAL", init_state="01")
    c = build_circuit(spec, QaoaParams([0.0], [0.0]))
    np.testing.assert_allclose(run_circuit(c).amplitudes, basis_state("01").amplitudes)
    with pytest.raises(ValueError):
        AnsatzSpec(h, None, 1, "VANILLA", init_state="012")
    with pytest.raises(ValueError):
        build_circuit(spec, QaoaParams([0.0, 0.1], [0.0, 0.1]))
