import itertools

import numpy as np
import pytest

from platoon.errors import CapError, ConfigError
from platoon.heuristics import make_batch
from platoon.qaoa import (
    CEConfig, LR_GRID, StateDistribution, calibrate_lr, ce_block_mixer, ce_grid_search, ce_qaoa_sample,
    ce_qaoa_simulate, default_ce_grid, feasibility_filter, lr_qaoa_sample, lr_schedule, simulate_qaoa_full,
)
from platoon.qubo import IsingModel, encode, normalize_ising, to_ising

from conftest import standin
from oracles import dense_ce_qaoa, dense_qaoa, manifold_index, restricted_block_mixer


def test_lr_schedule():
    s = lr_schedule(3, 0.9, 0.6)
    np.testing.assert_allclose(s.gammas, [0.3, 0.6, 0.9])
    np.testing.assert_allclose(s.betas, [0.6, 0.4, 0.2])
    one = lr_schedule(1, 0.7, 0.2)
    assert list(one.gammas) == [0.7] and list(one.betas) == [0.2]
    assert lr_schedule(6, 1.2, 0.5).gammas[-1] == 1.2
    with pytest.raises(ConfigError):
        lr_schedule(0, 1.0, 1.0)


def _model(num, seed):
    rng = np.random.default_rng(seed)
    return IsingModel(rng.uniform(-1, 1, num), np.triu(rng.uniform(-1, 1, (num, num)), 1), 0.3)


def test_uniform_limits():
    m = _model(4, 0)
    empty = simulate_qaoa_full(m, [], [])
    np.testing.assert_allclose(empty.probabilities, 1 / 16, atol=1e-15)
    zero_gamma = simulate_qaoa_full(m, [0.0, 0.0], [0.4, 1.3])
    np.testing.assert_allclose(zero_gamma.probabilities, 1 / 16, atol=1e-12)


@pytest.mark.parametrize("num, p, seed", [(2, 1, 0), (2, 1, 1), (2, 3, 2), (3, 2, 3), (4, 4, 4)])
def test_full_matches_dense(num, p, seed):
    m = _model(num, seed)
    rng = np.random.default_rng(100 + seed)
    gammas, betas = rng.uniform(-np.pi, np.pi, p), rng.uniform(-np.pi, np.pi, p)
    bits = ((np.arange(1 << num)[:, None] >> np.arange(num - 1, -1, -1)) & 1)
    diagonal = m.energies(1 - 2 * bits) + m.energy_offset
    got = simulate_qaoa_full(m, gammas, betas).probabilities
    np.testing.assert_allclose(got, dense_qaoa(diagonal, gammas, betas), atol=1e-9)
    assert got.sum() == pytest.approx(1.0, abs=1e-9)


def test_full_cap():
    _, _, q, _ = standin(6)
    with pytest.raises(CapError):
        lr_qaoa_sample(q, 1)
    with pytest.raises(CapError):
        simulate_qaoa_full(_model(4, 0), [0.1], [0.1], cap=3)


def test_calibrate_lr():
    _, _, q, _ = standin(3)
    m = normalize_ising(to_ising(q))
    g, b, surface = calibrate_lr(m, 2, grid=([0.3], [0.7]))
    assert (g, b) == (0.3, 0.7) and surface.shape == (1, 1)
    g, b, surface = calibrate_lr(m, 1)
    assert surface.shape == (len(LR_GRID), len(LR_GRID))
    # variational bound against the exact ground energy in model units
    bits = ((np.arange(512)[:, None] >> np.arange(8, -1, -1)) & 1)
    ground = (m.energies(1 - 2 * bits) + m.energy_offset).min()
    assert np.all(surface >= ground - 1e-12)
    a, c = np.unravel_index(np.argmin(surface), surface.shape)
    assert (g, b) == (LR_GRID[a], LR_GRID[c])


def test_lr_sample_deterministic():
    _, _, q, _ = standin(3)
    a = lr_qaoa_sample(q, 2, shots=300, seed=5)
    b = lr_qaoa_sample(q, 2, shots=300, seed=5)
    np.testing.assert_array_equal(a.bits, b.bits)
    assert a.info["p"] == 2 and a.n_reads == 300


def test_block_mixer_examples():
    np.testing.assert_allclose(ce_block_mixer(0.0, 5), np.eye(5), atol=1e-15)
    beta = 0.37
    c, s = np.cos(2 * beta), np.sin(2 * beta)
    # exp(-i beta [[0, 2], [2, 0]])
    two = ce_block_mixer(beta, 2)
    ref = np.array([[c, -1j * s], [-1j * s, c]])
    np.testing.assert_allclose(two, ref, atol=1e-12)
    with pytest.raises(ConfigError):
        ce_block_mixer(0.1, 1)


@pytest.mark.parametrize("size", range(2, 9))
def test_block_mixer_dense(size):
    for beta in (0.0, 0.21, 1.3, -2.7):
        u = ce_block_mixer(beta, size)
        np.testing.assert_allclose(u, restricted_block_mixer(beta, size), atol=1e-9)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(size), atol=1e-12)


def test_ce_uniform_and_support():
    _, _, q, _ = standin(4)
    dist = ce_qaoa_simulate(q, CEConfig(0.0, 0.0))
    np.testing.assert_allclose(dist.probabilities, 4.0**-4, atol=1e-15)
    bits = dist.bitstrings(np.arange(4**4))
    assert np.all(bits.reshape(-1, 4, 4).sum(axis=2) == 1)


@pytest.mark.parametrize("seed", range(4))
def test_ce_matches_full_register(seed):
    _, _, q, _ = standin(3)
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 4))
    gammas, betas = rng.uniform(0, np.pi, p), rng.uniform(0, np.pi, p)
    model = normalize_ising(to_ising(q))
    dist = ce_qaoa_simulate(q, CEConfig(0.0, 0.0, p), model=model, gammas=gammas, betas=betas)
    full = dense_ce_qaoa(q, gammas, betas, model.scale)
    configs = list(itertools.product(range(3), repeat=3))
    on = np.array([manifold_index(c, 3) for c in configs])
    np.testing.assert_allclose(dist.probabilities, full[on], atol=1e-9)
    assert full[on].sum() == pytest.approx(1.0, abs=1e-9)


def test_ce_caps_and_config():
    with pytest.raises(ConfigError):
        CEConfig(0.1, 0.1, p=0)
    with pytest.raises(ConfigError):
        CEConfig(0.1, 0.1, shots=0)
    _, _, q, _ = standin(9)
    with pytest.raises(CapError):
        ce_qaoa_simulate(q, CEConfig(0.1, 0.1))


def test_feasibility_filter():
    _, _, q, _ = standin(3)
    feasible = encode((0, 1, 2), 3)
    cheaper = np.ones(9, dtype=np.uint8)
    batch = make_batch(q, np.stack([feasible, cheaper]), "test", 0, 0.0)
    best, _ = feasibility_filter(batch, q)
    assert best is not None and best.bits == tuple(feasible)
    none, bad = feasibility_filter(make_batch(q, np.zeros((3, 9)), "test", 0, 0.0), q)
    assert none is None and bad.best_feasible() is None


def test_feasibility_filter_prefers_feasible_over_cheaper():
    # hand-built: the infeasible state has lower energy than the feasible one
    from platoon.matching import WeightMatrix
    from platoon.qubo import build_qubo
    q = build_qubo(WeightMatrix(np.array([[1.0, 2.0], [3.0, 4.0]])), 1.0)
    feasible = encode((0, 1), 2)
    infeasible = np.array([1, 0, 0, 0])
    assert q.energy(infeasible) < q.energy(feasible)
    best, _ = feasibility_filter(make_batch(q, np.stack([infeasible, feasible]), "t", 0, 0.0), q)
    assert best.bits == tuple(feasible)


def test_grid_search():
    _, _, q, e_star = standin(3)
    single = ce_grid_search(q, ([0.4], [1.1]), shots=200)
    assert (single.gamma, single.beta, single.evaluations) == (0.4, 1.1, 1)
    grid = (np.linspace(0.1, 2.0, 4), np.linspace(0.1, 2.0, 3))
    found = ce_grid_search(q, grid, shots=300, seed=2)
    assert found.evaluations == 12
    assert np.all(found.best_energy <= found.table)
    assert found.best_energy >= e_star - 1e-9 * abs(e_star)


def test_parameter_transfer():
    _, _, q, e_star = standin(3)
    res = ce_grid_search(q, ([1.215], [0.65]), shots=2025, seed=0)
    assert res.evaluations == 1
    assert res.best_energy == pytest.approx(e_star, abs=1e-9 * abs(e_star))


def test_ce_sample_and_distribution_sampling():
    _, _, q, _ = standin(3)
    a = ce_qaoa_sample(q, CEConfig(0.5, 0.3, shots=500, seed=3))
    b = ce_qaoa_sample(q, CEConfig(0.5, 0.3, shots=500, seed=3))
    np.testing.assert_array_equal(a.bits, b.bits)
    assert a.bits.reshape(-1, 3, 3).sum(axis=2).min() == 1
    dist = StateDistribution("hypercube", 2, np.eye(16)[5])
    np.testing.assert_array_equal(dist.bitstrings(dist.sample(4, 0)), [[0, 1, 0, 1]] * 4)
    g, b2 = default_ce_grid()
    assert g.size == 16 and g[0] == 0 and g[-1] < np.pi
