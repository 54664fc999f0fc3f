from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deal.ansatz import AnsatzSpec, build_circuit
from deal.errors import NumericalError
from deal.problems import Graph, maxcut_qubo, qubo_to_ising
from deal.qpn import QaoaParams
from deal.simulator import NoiseModel, expectation_ising, run_circuit
from deal.zne import (BayesState, ScalePoint, ZneConfig, bayes_update, effective_scale, extrapolate_zero,
                      fold_circuit, measure_at_scales, mitigated_expectation, pair_scale_factors, to_odd,
                      twirl_circuit)
from oracles import circuit_unitary, random_circuit


def test_scale_one_is_unchanged():
    c = random_circuit(3, 10, np.random.default_rng(0))
    assert fold_circuit(c, 1).gates == c.gates


def test_gate_count_triples():
    c = random_circuit(3, 10, np.random.default_rng(0))
    assert len(fold_circuit(c, 3)) == 30
    assert len(fold_circuit(c, 5, mode="global")) == 50


@pytest.mark.parametrize("bad", [0, 2, 4, 1.5, -1])
def test_invalid_scales(bad):
    with pytest.raises(ValueError):
        fold_circuit(random_circuit(2, 3, np.random.default_rng(0)), bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 20), st.sampled_from([3, 5, 7]), st.sampled_from(["per_gate", "global"]),
       st.integers(0, 2**32 - 1))
def test_folding_preserves_unitary(n, depth, scale, mode, seed):
    c = random_circuit(n, depth, np.random.default_rng(seed))
    np.testing.assert_allclose(circuit_unitary(fold_circuit(c, scale, mode)), circuit_unitary(c), atol=1e-9)


def test_pair_scales_fold_only_their_pair():
    c = random_circuit(3, 20, np.random.default_rng(1), kinds=["RZZ", "RX"])
    folded = fold_circuit(c, 3, pair_scales={(0, 1): 3})
    n01 = sum(1 for g in c.gates if g.is_two_qubit and set(g.targets) == {0, 1})
    assert len(folded) == 3 * len(c) + 6 * n01
    np.testing.assert_allclose(run_circuit(folded).amplitudes, run_circuit(c).amplitudes, atol=1e-9)


@pytest.mark.parametrize("x,odd", [(0.06, 1), (2.6, 3), (4.0, 5), (1.0, 1), (2.5, 3), (3.5, 5), (-3, 1)])
def test_to_odd(x, odd):
    assert to_odd(x) == odd


def test_pair_scale_factors_examples():
    w = np.array([0.2, 0.3])
    d = np.array([[0, 1], [1, 0]])
    assert pair_scale_factors(w, d, [(0, 1)]).lambdas == {(0, 1): 1}
    assert pair_scale_factors(w, d * 2.6 / 0.06, [(0, 1)]).lambdas == {(0, 1): 3}


def test_effective_scale_weights_by_error_probability():
    c = random_circuit(3, 12, np.random.default_rng(3), kinds=["RZZ", "RX"])
    assert effective_scale(c, 3, NoiseModel(0.001, 0.01)) == 3
    eff = effective_scale(c, 3, NoiseModel(0.0, 0.01), {(0, 1): 3, (0, 2): 3, (1, 2): 3})
    assert eff == pytest.approx(9)


def test_measure_at_scales_rules():
    with pytest.raises(ValueError):
        measure_at_scales(lambda s, sd: 0.0, [1, 3, 3])
    with pytest.raises(ValueError):
        measure_at_scales(lambda s, sd: 0.0, [0.5, 3])
    pts = measure_at_scales(lambda s, sd: -1.0, [1, 3, 5])
    assert [p.expectation for p in pts] == [-1.0] * 3


def test_linear_runner_points_on_line():
    rng_seed = 4
    e0, a, shots = -1.0, 0.05, 4096

    def runner(scale, sd):
        p = (1 - (e0 + a * scale)) / 2          # energy as a +/-1 observable
        k = np.random.default_rng(sd).binomial(shots, p)
        mean = 1 - 2 * k / shots
        return mean, 4 * p * (1 - p) / shots

    pts = measure_at_scales(runner, [1, 3, 5], rng_seed)
    for pt in pts:
        assert abs(pt.expectation - (e0 + a * pt.scale)) < 5 * np.sqrt(pt.variance)


def test_extrapolation_examples():
    e0, a = -0.7, 0.1
    assert extrapolate_zero([(1, e0 + a), (3, e0 + 3 * a)]) == pytest.approx(e0, abs=1e-12)
    assert extrapolate_zero([(1, 0.3), (3, 0.3), (5, 0.3)]) == pytest.approx(0.3, abs=1e-12)
    q = lambda x: e0 + a * x + 0.02 * x * x
    assert abs(extrapolate_zero([ScalePoint(s, q(s)) for s in (1, 3, 5)]) - e0) < 1e-9
    with pytest.raises(ValueError):
        extrapolate_zero([(1, 0.0)])


def test_bayes_zero_residual_or_jacobian_keeps_lambda():
    lam = np.array([1.0, 3.0, 5.0])
    same = bayes_update(BayesState(lam, 0.25, 1e-3, 1e-4, np.eye(3), np.zeros(3)))
    np.testing.assert_array_equal(same, lam)
    same = bayes_update(BayesState(lam, 0.25, 1e-3, 1e-4, np.zeros((3, 3)), np.ones(3)))
    np.testing.assert_array_equal(same, lam)


def test_bayes_scalar_by_hand():
    sp2, j, r, ss2, sg2, c = 0.25, 0.4, 0.01, 1e-3, 1e-4, 2.0
    out = bayes_update(BayesState(np.array([3.0]), sp2, ss2, sg2, np.array([[j]]), np.array([r]), c))
    assert out[0] == pytest.approx(3.0 + sp2 * j * r / (ss2 + sg2 * c), rel=1e-14)


def test_bayes_singular_noise_raises():
    with pytest.raises(NumericalError) as info:
        bayes_update(BayesState(np.ones(2), 0.25, 0.0, 0.0, np.eye(2), np.ones(2)))
    assert "sigma_noise" in info.value.diagnostic


def test_twirl_preserves_unitary_up_to_phase():
    c = random_circuit(3, 15, np.random.default_rng(6), kinds=["RZZ", "RX", "H"])
    tw = twirl_circuit(c, 2)
    u, v = circuit_unitary(c), circuit_unitary(tw)
    overlap = np.trace(u.conj().T @ v) / u.shape[0]
    assert abs(abs(overlap) - 1) < 1e-9


def edge_builder():
    h = qubo_to_ising(maxcut_qubo(Graph(2, ((0, 1, 1.0),))))
    spec = AnsatzSpec(h, None, 1, "VANILLA")
    return h, (lambda theta: build_circuit(spec, theta))


def test_zero_noise_mitigation_is_exact():
    h, builder = edge_builder()
    theta = QaoaParams([0.6], [0.3])
    exact = expectation_ising(run_circuit(builder(theta)), h)
    res = mitigated_expectation(builder, theta, h, NoiseModel(), ZneConfig(trajectories=4), shots=0)
    assert res.value == pytest.approx(exact, abs=1e-9)
    assert res.raw == pytest.approx(exact, abs=1e-9)


def test_single_scale_returns_raw_with_warning(caplog):
    h, builder = edge_builder()
    with caplog.at_level(logging.WARNING):
        res = mitigated_expectation(builder, QaoaParams([0.6], [0.3]), h, NoiseModel(0.01, 0.01),
                                    ZneConfig(scales=(1,), trajectories=64), shots=0, seed=2)
    assert res.value == res.raw
    assert "single" in caplog.text


def test_config_parse():
    cfg = ZneConfig.parse("scales=1,3,7;refine_steps=2;twirl=true")
    assert cfg.scales == (1, 3, 7) and cfg.refine_steps == 2 and cfg.twirl
    with pytest.raises(ValueError):
        ZneConfig(scales=(1, 1))


def test_mitigation_reduces_bias_on_single_edge():
    h, builder = edge_builder()
    theta = QaoaParams([np.pi / 2], [3 * np.pi / 8])
    noise = NoiseModel(0.01, 0.02)
    wins = 0
    for rep in range(10):
        res = mitigated_expectation(builder, theta, h, noise, ZneConfig(trajectories=2000), shots=0, seed=rep)
        wins += abs(res.value + 1) < abs(res.raw + 1)
    assert wins >= 8
