from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deal.errors import ResourceLimitError
from deal.problems import (Graph, QuboInstance, bits_to_array, brute_force_optimum, decode_tour,
                           erdos_renyi, index_to_bits, knapsack_qubo, knapsack_selection, maxcut_qubo,
                           optimal_bitstrings, qubit_requirement, qubo_to_ising, slack_coefficients,
                           tsp_qubo)
from oracles import brute_qubo


@st.composite
def qubo_matrices(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, n)), float(rng.normal())


@settings(max_examples=60, deadline=None)
@given(qubo_matrices())
def test_energy_table_matches_enumeration(data):
    q, offset = data
    inst = QuboInstance(q.shape[0], q, offset=offset)
    np.testing.assert_allclose(inst.energies(), brute_qubo(q, offset), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(qubo_matrices())
def test_ising_equals_qubo_everywhere(data):
    q, offset = data
    inst = QuboInstance(q.shape[0], q, offset=offset)
    h = qubo_to_ising(inst)
    np.testing.assert_allclose(h.energies(), inst.energies(), atol=1e-9)
    for idx in range(0, 1 << inst.n, max(1, (1 << inst.n) // 7)):
        x = bits_to_array(index_to_bits(idx, inst.n))
        assert abs(h.evaluate(1 - 2 * x) - inst.evaluate(x)) < 1e-9


def test_lower_triangle_folds_into_upper():
    a = QuboInstance(2, [[1, 0], [3, 2]])
    b = QuboInstance(2, [[1, 3], [0, 2]])
    np.testing.assert_array_equal(a.q, b.q)


def test_bit_conventions():
    assert index_to_bits(2, 3) == "010"
    np.testing.assert_array_equal(bits_to_array("10"), [0, 1])


def test_single_edge_maxcut():
    inst = maxcut_qubo(Graph(2, ((0, 1, 1.0),)))
    bits, e, deg = brute_force_optimum(inst)
    assert (bits, e, deg) == ("01", -1.0, 2)
    assert optimal_bitstrings(inst) == {"01", "10"}


def test_k4_maxcut_optimum_and_degeneracy():
    inst = maxcut_qubo(Graph.complete(4))
    _, e, deg = brute_force_optimum(inst)
    assert e == -4 and deg == 6
    assert inst.known_optimum[1] == -4


def test_maxcut_matches_cut_value():
    g = erdos_renyi(6, 0.6, seed=3)
    inst = maxcut_qubo(g)
    for idx in range(64):
        x = [(idx >> i) & 1 for i in range(6)]
        cut = sum(w for i, j, w in g.edges if x[i] != x[j])
        assert inst.energies()[idx] == pytest.approx(-cut)


def test_erdos_renyi_seeded():
    assert erdos_renyi(7, 0.4, 5) == erdos_renyi(7, 0.4, 5)
    assert len(erdos_renyi(5, 1.0, 0).edges) == 10
    assert erdos_renyi(5, 0.0, 0).edges == ()


def test_graph_validation_and_roundtrip():
    with pytest.raises(ValueError):
        Graph(2, ((0, 0, 1.0),))
    with pytest.raises(ValueError):
        Graph(2, ((0, 2, 1.0),))
    g = erdos_renyi(5, 0.5, 1)
    assert Graph.from_dict(g.to_dict()) == g


def test_instance_roundtrip():
    inst = maxcut_qubo(erdos_renyi(5, 0.7, 2))
    back = QuboInstance.from_dict(inst.to_dict())
    np.testing.assert_array_equal(back.q, inst.q)
    assert back.known_optimum == inst.known_optimum


def test_known_optimum_is_checked():
    with pytest.raises(ValueError):
        QuboInstance(2, [[-1, 0], [0, 0]], known_optimum=("00", -1.0))


def test_resource_limit():
    with pytest.raises(ResourceLimitError):
        QuboInstance(30, np.zeros((30, 30))).energies()


def test_tsp_valid_tours_have_tour_length():
    d = np.array([[0, 2, 9], [2, 0, 6], [9, 6, 0]], dtype=float)
    inst = tsp_qubo(d)
    assert inst.n == 9 == qubit_requirement("tsp", 3)
    for perm in itertools.permutations(range(3)):
        x = np.zeros((3, 3), dtype=int)
        for t, c in enumerate(perm):
            x[c, t] = 1
        bits = "".join(str(b) for b in reversed(x.reshape(-1)))
        length = sum(d[perm[t], perm[(t + 1) % 3]] for t in range(3))
        assert inst.evaluate(bits) == pytest.approx(length)
        assert decode_tour(bits, 3) == list(perm)
    bits, e, deg = brute_force_optimum(inst)
    assert e == pytest.approx(17.0) and deg == 6
    assert decode_tour("0" * 9, 3) is None


def test_tsp_infeasible_states_are_penalised():
    d = np.ones((3, 3)) - np.eye(3)
    inst = tsp_qubo(d)
    e = inst.energies()
    valid = [i for i in range(512) if decode_tour(index_to_bits(i, 9), 3) is not None]
    assert len(valid) == 6
    assert np.min(np.delete(e, valid)) > np.max(e[valid])


def test_tsp_rejects_low_penalty():
    with pytest.raises(ValueError):
        tsp_qubo(np.ones((3, 3)) - np.eye(3), penalty=2.0)


@pytest.mark.parametrize("capacity", [1, 2, 3, 5, 7, 10, 13])
def test_slack_covers_every_value(capacity):
    coeffs = slack_coefficients(capacity)
    assert sum(coeffs) == capacity
    sums = {sum(c for c, b in zip(coeffs, bits) if b) for bits in itertools.product([0, 1], repeat=len(coeffs))}
    assert sums == set(range(capacity + 1))


def test_knapsack_optimum_matches_enumeration():
    values, weights, cap = [6, 5, 4], [3, 2, 2], 4
    inst = knapsack_qubo(values, weights, cap)
    assert inst.n == qubit_requirement("knapsack", 3, cap)
    best = max(sum(v for v, s in zip(values, sel) if s)
               for sel in itertools.product([0, 1], repeat=3)
               if sum(w for w, s in zip(weights, sel) if s) <= cap)
    bits, e, _ = brute_force_optimum(inst)
    assert e == pytest.approx(-best)
    chosen = knapsack_selection(bits, 3)
    assert sum(weights[i] for i in chosen) <= cap and sum(values[i] for i in chosen) == best


def test_knapsack_validation():
    with pytest.raises(ValueError):
        knapsack_qubo([1, 2], [1], 3)
    with pytest.raises(ValueError):
        knapsack_qubo([1], [0], 3)
    with pytest.raises(ValueError):
        knapsack_qubo([5], [1], 1, penalty=4)
