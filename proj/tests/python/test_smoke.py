"""Smoke tests for the probest Python module."""

import math

import pytest

import probest


def make_sample(rows):
    return probest.ProbabilitySample([(i, x, None) for i, x in rows])


def test_pi1_hand_value():
    sample = make_sample([(1, 0.3), (2, 0.7)])
    report = probest.pi1(sample, probest.Event([1]))
    assert report.estimate == pytest.approx(0.3 / 0.51, abs=1e-14)
    assert report.n == 2
    assert report.estimator == "pi1"


def test_pi0_and_pi2():
    sample = make_sample([(1, 0.5), (2, 0.3), (3, 0.2), (3, 0.2)])
    event = probest.Event([1, 2])
    assert probest.pi0(sample, event).estimate == pytest.approx(0.5)
    assert probest.pi2(sample, event).estimate == pytest.approx(0.75, abs=1e-14)
    with pytest.raises(probest.NoInformationError):
        probest.pi2(make_sample([(3, 0.2)]), event)


def test_chain_analytics_agree():
    params = probest.ChainParams(L=10, T=20, p1=0.3, p2=0.6)
    a = probest.chain_pi_analytic(params)
    b = probest.chain_pi_2f1(params)
    c = probest.chain_complement_prob(params)
    assert abs(a - b) <= 1e-10
    assert a + c == pytest.approx(1.0, abs=1e-12)
    assert probest.chain_event_cardinality(params) == 184756


def test_importance_reduction():
    event = probest.Event([1])
    is_sample = probest.ProbabilitySample([(1, 0.3, 0.3), (2, 0.7, 0.7)])
    plain = make_sample([(1, 0.3), (2, 0.7)])
    assert probest.pi1_is(is_sample, event).estimate == pytest.approx(
        probest.pi1(plain, event).estimate, abs=1e-14
    )


def test_enumeration_engine_unbiasedness():
    dist = probest.DiscreteDistribution([1, 2, 3], [0.5, 0.3, 0.2])
    event = probest.Event([1, 2])
    moments = probest.estimator_moments(
        dist, dist, event, 2,
        lambda s, ev: probest.pi1(s, ev).estimate,
        truth=0.8,
    )
    assert moments["bias"] == pytest.approx(0.0, abs=1e-12)
    assert moments["variance"] == pytest.approx(
        probest.v1_exact(dist, event, 2), abs=1e-12
    )


def test_simulator_determinism_and_logp():
    params = probest.ChainParams(L=2, T=3, p1=0.3, p2=0.4)
    model = probest.chain_model(params)
    t1 = probest.simulate(model, seed=42)
    t2 = probest.simulate(model, seed=42)
    assert t1.outcome_id == t2.outcome_id
    assert t1.logp == t2.logp
    assert t1.logp <= 0.0

    analytic = {o["id"]: o["prob"] for o in probest.enumerate_chain_outcomes(params, 3)}
    assert math.exp(t1.logp) == pytest.approx(analytic[t1.outcome_id], abs=1e-12)


def test_optimal_design():
    p = [0.001, 0.0046415888336127775, 0.021544346900318832, 0.1]
    dist = probest.DiscreteDistribution([1, 2, 3, 4, 5], p + [1.0 - sum(p)])
    event = probest.Event([1, 2, 3, 4])
    design = probest.optimal_design(dist, event, 10)
    assert sum(design.weights) == pytest.approx(1.0, abs=1e-12)
    grid = probest.simplex_grid_search(dist, event, 10, 0.05)
    assert design.objective <= grid["objective"] + 1e-12


def test_harness_compare_deterministic():
    config = """{
        "model": {"type": "chain", "L": 3, "T": 6, "p1": 0.3, "p2": 0.6},
        "n_grid": [2, 4], "replications": 50, "seed": 7
    }"""
    assert probest.run_compare(config) == probest.run_compare(config)


def test_hypothesis_test():
    params = probest.ChainParams(L=3, T=6, p1=1.0, p2=1.0)
    result = probest.run_hypothesis_test(params, level=0.01, n=50, estimator="pi1", seed=5)
    assert result["pi_hat"] == 0.0
    assert result["reject_point"]
