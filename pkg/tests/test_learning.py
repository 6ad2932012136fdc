import itertools
import math

import numpy as np
import pytest

from uqcpac.ansatz import AnsatzShape, ansatz_unitary, random_params
from uqcpac.compiler import compile_to_ansatz
from uqcpac.errors import DomainError
from uqcpac.learning import (
    ConceptClassParams, Dataset, ERMConfig, FinitePool, empirical_risk, erm_gap_check,
    estimate_risk, generate_dataset, grid_spacing, round_to_grid, sample_complexity, train_erm,
    unitary_risk,
)
from uqcpac.metrics import op_norm_distance
from uqcpac.statevector import CNOT, RX, Circuit, H, basis_state

# 50-digit mpmath evaluations of the calculator formulas, rounded to double
FROZEN = [
    # (eps, delta, n, c, K, M) -> e, N, l, ln|F'|, nu, ln nu
    ((0.1, 0.01, 2, 1, 12, 2), 3.472222222222222415e-4, 18095, 48, 470.56541752108328123, 856555, 13.660673485887769454),
    ((0.05, 0.1, 2, 2, 6, 1), 1.7361111111111112075e-4, 36191, 48, 503.83648218796065608, 3649192, 15.110016315877552858),
    ((0.2, 0.05, 3, 1, 16, 2), 2.3148148148148149433e-4, 27143, 144, 1470.0832281308255147, 663198, 13.404828035409244883),
]


def test_dataset_basics():
    d = generate_dataset(Circuit(2, [H(0)]), 0, 1)
    assert d.m == 0
    d = generate_dataset(Circuit(2), 5, 1)
    assert np.array_equal(d.xs, d.ys)
    a, b = generate_dataset(Circuit(2, [H(0)]), 6, 7), generate_dataset(Circuit(2, [H(0)]), 6, 7)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)
    assert len(a.pairs) == 6
    assert np.allclose(np.linalg.norm(a.xs, axis=1), 1)
    with pytest.raises(DomainError):
        generate_dataset(Circuit(2), -1, 0)


def test_dataset_prefix_stable():
    # per-index streams: a larger dataset extends a smaller one
    a = generate_dataset(Circuit(2, [H(1)]), 4, 3)
    b = generate_dataset(Circuit(2, [H(1)]), 9, 3)
    assert np.array_equal(a.xs, b.xs[:4])


def test_empirical_risk_examples():
    target = Circuit(3, [H(0), CNOT(1, 2), RX(2, 0.4)])
    comp = compile_to_ansatz(target)
    data = generate_dataset(target, 32, 11)
    assert empirical_risk(comp.shape, comp.theta, data) <= 1e-9

    # per-sample losses {0, 1}
    xs = np.array([basis_state(1, 0).amplitudes, basis_state(1, 0).amplitudes])
    ys = np.array([basis_state(1, 0).amplitudes, basis_state(1, 1).amplitudes])
    assert unitary_risk(np.eye(2), Dataset(1, xs, ys)) == pytest.approx(0.5)

    with pytest.raises(DomainError):
        empirical_risk(comp.shape, comp.theta, Dataset(3, np.zeros((0, 8)), np.zeros((0, 8))))


def test_empirical_risk_range(rng):
    shape = AnsatzShape(2, 2)
    data = generate_dataset(Circuit(2, [CNOT(1, 0)]), 16, 0)
    for _ in range(10):
        r = empirical_risk(shape, random_params(shape, rng), data)
        assert 0 <= r <= 1


def test_estimate_risk_examples():
    target = Circuit(2, [H(1), CNOT(0, 1)])
    comp = compile_to_ansatz(target)
    est = estimate_risk(comp.shape, comp.theta, target, 64, 5)
    assert est.mean <= 1e-9 and est.std_error <= 1e-9 and est.samples_used == 64
    with pytest.raises(DomainError):
        estimate_risk(comp.shape, comp.theta, target, 1, 0)


def test_estimate_matches_empirical(rng):
    target = Circuit(2, [RX(0, 0.8)])
    shape = AnsatzShape(2, 1)
    theta = random_params(shape, rng)
    data = generate_dataset(target, 40, 21)
    est = estimate_risk(shape, theta, target, 40, 21)
    assert abs(est.mean - empirical_risk(shape, theta, data)) <= 1e-12


def test_std_error_scaling():
    target = Circuit(2, [RX(0, 0.8)])
    shape = AnsatzShape(2, 1)
    theta = np.full(shape.num_params, 0.5)
    small = np.mean([estimate_risk(shape, theta, target, 256, s).std_error for s in range(20)])
    large = np.mean([estimate_risk(shape, theta, target, 512, 100 + s).std_error for s in range(20)])
    assert large / small == pytest.approx(1 / math.sqrt(2), rel=0.05)


def test_train_from_compiled_init():
    target = Circuit(2, [RX(1, 1.1), CNOT(0, 1)])
    comp = compile_to_ansatz(target)
    data = generate_dataset(target, 16, 0)
    res = train_erm(comp.shape, data, ERMConfig(init=comp.theta))
    assert res.risk <= 1e-9 and res.improving_steps == 0
    assert np.array_equal(res.theta, comp.theta)


def test_train_rx_target():
    target = Circuit(2, [RX(0, 0.3)])
    data = generate_dataset(target, 32, 0)
    res = train_erm(AnsatzShape(2, 1), data, ERMConfig(seed=0))
    assert res.risk <= 0.05
    assert res.risk == pytest.approx(empirical_risk(AnsatzShape(2, 1), res.theta, data), abs=1e-12)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))


def test_train_deterministic():
    data = generate_dataset(Circuit(2, [H(1), CNOT(1, 0)]), 12, 4)
    cfg = ERMConfig(sweeps=4, restarts=1, seed=9)
    a = train_erm(AnsatzShape(2, 1), data, cfg)
    b = train_erm(AnsatzShape(2, 1), data, ERMConfig(sweeps=4, restarts=1, seed=9))
    assert np.array_equal(a.theta, b.theta) and a.history == b.history


def test_train_invalid_config():
    data = generate_dataset(Circuit(2), 4, 0)
    with pytest.raises(DomainError):
        train_erm(AnsatzShape(2, 1), data, ERMConfig(sweeps=0))


def test_round_to_grid_examples():
    e = 0.04
    on_grid = np.array([0.0, 0.04, 0.4, 2.0])
    assert np.allclose(round_to_grid(on_grid, e), on_grid, atol=1e-15)
    assert round_to_grid([0.09], e)[0] == pytest.approx(0.08)
    assert round_to_grid([0.06], 0.04)[0] == pytest.approx(0.04)  # tie goes down
    with pytest.raises(DomainError):
        round_to_grid([0.1], 0.0)


def test_round_to_grid_distance(rng):
    for e in (0.3, 0.04, 1e-3):
        theta = rng.uniform(0, 2 * np.pi, 1000)
        out = round_to_grid(theta, e)
        N = math.floor(2 * np.pi / e)
        k = out / e
        assert np.allclose(k, np.round(k)) and np.all(k <= N + 1e-9)
        dist = np.abs(theta - out)
        dist = np.minimum(dist, 2 * np.pi - dist)  # a wrap to 0 counts from 2 pi
        assert np.all(dist <= e / 2 + 1e-12)


def test_round_to_grid_operator_bound(rng):
    for n in (2, 3):
        shape = AnsatzShape(n, 1)
        e = grid_spacing(0.3, 12, n, 1)
        l = shape.num_params
        for _ in range(10):
            theta = random_params(shape, rng)
            f = ansatz_unitary(shape, theta)
            g = ansatz_unitary(shape, round_to_grid(theta, e))
            # wrapped entries flip the sign of one rotation, i.e. of all of F
            d = min(op_norm_distance(f, g), op_norm_distance(f, -g))
            assert d <= l * e / 2 + 1e-9


def test_perturbation_risk_bound(rng):
    shape = AnsatzShape(2, 1)
    data = generate_dataset(Circuit(2, [H(0), CNOT(0, 1)]), 20, 2)
    for _ in range(20):
        s = rng.uniform(0, 0.05)
        theta = random_params(shape, rng)
        delta = rng.uniform(-s, s, shape.num_params)
        diff = abs(empirical_risk(shape, theta, data) - empirical_risk(shape, theta + delta, data))
        assert diff <= shape.num_params * s + 1e-9


@pytest.mark.parametrize("args,e,N,l,ln_f,nu,ln_nu", FROZEN)
def test_sample_complexity_frozen(args, e, N, l, ln_f, nu, ln_nu):
    eps, delta, n, c, K, M = args
    rep = sample_complexity(eps, delta, ConceptClassParams(n, c, K, M))
    assert rep.e == pytest.approx(e, rel=1e-12)
    assert rep.N == N and rep.param_count == l and rep.nu == nu
    assert rep.ln_hypothesis_count == pytest.approx(ln_f, rel=1e-12)
    assert rep.ln_nu == pytest.approx(ln_nu, rel=1e-12)
    assert not rep.saturated


def test_sample_complexity_monotone():
    p = ConceptClassParams(2, 1)
    eps = [0.02, 0.05, 0.1, 0.3, 0.6, 0.9]
    nus = [sample_complexity(x, 0.05, p).nu for x in eps]
    assert all(a >= b for a, b in zip(nus, nus[1:]))
    deltas = [0.001, 0.01, 0.1, 0.5, 0.99]
    nus = [sample_complexity(0.1, d, p).nu for d in deltas]
    assert all(a >= b for a, b in zip(nus, nus[1:]))


def test_sample_complexity_validation_and_saturation():
    with pytest.raises(DomainError):
        sample_complexity(1.0, 0.1, ConceptClassParams(2, 1))
    with pytest.raises(DomainError):
        sample_complexity(0.1, 0.0, ConceptClassParams(2, 1))
    with pytest.raises(DomainError):
        ConceptClassParams(1, 1)
    with pytest.raises(DomainError):
        sample_complexity(0.1, 0.1, ConceptClassParams(3, 1, K=12, M=2))  # needs K >= 16
    big = sample_complexity(1e-9, 1e-9, ConceptClassParams(60, 9, K=1e5, M=2))
    assert big.saturated and big.nu == 2**63 - 1 and math.isfinite(big.ln_nu)


def test_erm_gap_examples():
    g = erm_gap_check([(0.2, 0.2), (0.2, 0.2)])
    assert g.gap == 0 and g.holds
    g = erm_gap_check([(0.0, 0.3), (0.2, 0.1)])
    assert g.erm_index == 0 and g.risk_index == 1
    assert g.gap == pytest.approx(0.2) and g.bound == pytest.approx(0.6) and g.holds
    with pytest.raises(DomainError):
        erm_gap_check([])


def test_erm_gap_exhaustive():
    levels = [0.0, 0.25, 0.5, 1.0]
    pairs = list(itertools.product(levels, repeat=2))
    for size in (1, 2, 3):
        for combo in itertools.product(pairs, repeat=size):
            assert erm_gap_check(combo).holds


def test_finite_pool_exact_risk():
    target = Circuit(2, [H(0)])
    pool = FinitePool(target, 10, 3)
    comp = compile_to_ansatz(target)
    assert pool.risk(comp.shape, comp.theta) <= 1e-9
    sample = pool.sample(5, np.random.default_rng(0))
    assert sample.m == 5
    assert np.isin(sample.xs[:, 0], pool.data.xs[:, 0]).all()
