import math

import numpy as np
import pytest

import werate


def test_iid_rates_bernoulli():
    a0, a1 = werate.iid_additive_rates([0.5, 0.5], [1.0, 1.0])
    assert a0 == pytest.approx(math.log(2), abs=1e-15)
    assert a1 == pytest.approx(math.log(2), abs=1e-15)
    assert werate.iid_additive_we([0.5, 0.5], [1.0, 1.0], 4) == pytest.approx(16 * math.log(2), rel=1e-12)


def test_iid_multiplicative_identity():
    p, phi = [0.2, 0.3, 0.5], [0.5, 1.0, 2.0]
    b0, b1 = werate.iid_multiplicative_rates(p, phi)
    for n in range(1, 6):
        assert werate.iid_multiplicative_we(p, phi, n) == pytest.approx(n * b1 * b0 ** (n - 1), rel=1e-12)


def test_markov_stationary_and_rate():
    P = np.array([[0.9, 0.1], [0.5, 0.5]])
    pi = werate.stationary_distribution(P)
    assert pi == pytest.approx([5 / 6, 1 / 6], abs=1e-12)
    h = werate.entropy_rate(P)
    assert 0 < h < math.log(2)
    assert werate.markov_additive_we(P, [1.0, 1.0], 1) == pytest.approx(werate.standard_entropy(pi), rel=1e-12)


def test_two_state_example():
    P = np.full((2, 2), 0.5)
    r = werate.markov_multiplicative_rates(P, [1.0, 2.0])
    assert r["mu"] == pytest.approx(1.5, abs=1e-12)
    assert r["B0"] == pytest.approx(math.log(1.5), abs=1e-12)
    kr = werate.krein_rutman(np.array([[0.5, 0.5], [1.0, 1.0]]))
    assert kr["mu"] == pytest.approx(1.5, abs=1e-12)
    assert float(np.dot(kr["left"], kr["right"])) == pytest.approx(1.0, abs=1e-12)
    audit = werate.variational_audit(P, [1.0, 2.0], count=50, seed=3)
    assert audit["min_slack"] >= -1e-12
    assert audit["witness_residual"] < 1e-12


def test_gaussian_and_ar1():
    C = werate.ar1_covariance(0.5, 3)
    assert C[0, 0] == pytest.approx(4 / 3)
    assert np.linalg.det(werate.ar1_precision(0.5, 30)) == pytest.approx(0.75, rel=1e-10)
    H = werate.gaussian_entropy(C)
    assert H == pytest.approx(0.5 * math.log((2 * math.pi * math.e) ** 3 * np.linalg.det(C)), rel=1e-12)
    A = np.eye(3) * 0.3
    closed = werate.gaussian_we_quadratic(C, A)
    mean, se = werate.gaussian_we_monte_carlo(C, lambda x: float(x @ A @ x), samples=100_000, seed=4)
    assert abs(mean - closed) < 5 * se
    assert werate.ar1_log_mu(0.5, lambda x: 1.0) == pytest.approx(0.0, abs=1e-12)


def test_topological_entropy():
    assert abs(werate.topological_entropy(0.0)) < 1e-10
    kr = werate.topological_entropy(0.5)
    growth, _ = werate.topological_entropy_direct(0.5, 40)
    assert abs(growth - kr) < 1e-3


def test_simulation_is_seeded():
    P = np.array([[0.7, 0.3], [0.3, 0.7]])
    assert werate.simulate_markov(P, 100, 7) == werate.simulate_markov(P, 100, 7)
    assert werate.simulate_ar1(0.5, 50, 2) == werate.simulate_ar1(0.5, 50, 2)
    rep = werate.markov_smb(P, 20_000, 1)
    assert rep["final_error"] < 0.05 * rep["target"]


def test_errors_map_to_python():
    with pytest.raises(werate.ValidationError):
        werate.entropy_rate(np.eye(2))
    with pytest.raises(ValueError):
        werate.weighted_entropy([0.5, 0.5], [1.0])
    assert issubclass(werate.SizeGuardError, werate.WerateError)
