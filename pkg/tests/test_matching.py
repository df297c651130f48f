import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platoon.errors import DomainError, ShapeError
from platoon.matching import (
    WeightMatrix, edge_weight, slipstream_efficiency, time_mismatch, velocity_mismatch, weight_matrix,
)
from platoon.model import Breaker, Instance, Surfer, generate_instance


def surfer(c=1, v=30.0, t=10.0, dt=4.0, dv=4.0):
    return Surfer(c, v, t, dt, dv)


@pytest.mark.parametrize("d, f", [(-4, 0.0), (4, 1 / 3), (0, 1 / 6)])
def test_slipstream(d, f):
    assert slipstream_efficiency(d) == pytest.approx(f, abs=1e-15)


def test_slipstream_domain():
    with pytest.raises(DomainError):
        slipstream_efficiency(5)


@pytest.mark.parametrize("tb, expected", [(11.0, 0.0), (14.0, 4.0), (10.0, 0.0), (12.0, 0.0)])
def test_time_mismatch(tb, expected):
    # gap exactly half the window (12 - 10 = 4/2) is still tolerated
    assert time_mismatch(surfer(), Breaker(1, 30.0, tb)) == expected


@pytest.mark.parametrize("vb, expected", [(31.0, 0.0), (36.0, 6.0), (30.0, 0.0)])
def test_velocity_mismatch(vb, expected):
    assert velocity_mismatch(surfer(), Breaker(1, vb, 10.0)) == expected


def test_edge_weight_examples():
    assert edge_weight(surfer(c=1), Breaker(5, 30.0, 10.0), 0, 0) == pytest.approx(600.0)
    assert edge_weight(surfer(c=5, v=10.0), Breaker(1, 10.0, 10.0)) == pytest.approx(500.0)
    s, b = surfer(c=2), Breaker(2, 36.0, 14.0)
    aero = edge_weight(s, b, 0, 0)
    assert edge_weight(s, b, 1, 1) == pytest.approx(aero + 10.0)


def test_n1_matrix():
    inst = Instance((surfer(),), (Breaker(3, 33.0, 12.0),))
    w = weight_matrix(inst, 2.0, 0.5)
    assert w.weights.shape == (1, 1)
    assert w.weights[0, 0] == pytest.approx(edge_weight(inst.surfers[0], inst.breakers[0], 2.0, 0.5), rel=1e-15)


def _loop_oracle(inst, l1, l2):
    # independent scalar re-derivation of every entry
    n = inst.n
    out = np.empty((n, n))
    for i, s in enumerate(inst.surfers):
        for j, b in enumerate(inst.breakers):
            f = ((b.class_id - s.class_id) + 4) / 24
            gap_t = abs(s.departure - b.departure)
            gap_v = abs(s.pref_velocity - b.velocity)
            dt = gap_t if gap_t > s.dt_flex / 2 else 0.0
            dv = gap_v if gap_v > s.dv_flex / 2 else 0.0
            out[i, j] = s.class_id * b.velocity**2 * (1 - f) + l1 * dt + l2 * dv
    return out


@pytest.mark.parametrize("n, seed, l1, l2", [(4, 7, 1.0, 1.0), (6, 3, 2.5, 0.0), (9, 11, 0.0, 3.0)])
def test_matrix_matches_loop(n, seed, l1, l2):
    inst = generate_instance(n, seed)
    np.testing.assert_allclose(weight_matrix(inst, l1, l2).weights, _loop_oracle(inst, l1, l2), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**63), st.floats(0, 10), st.floats(0, 10))
def test_matrix_property(n, seed, l1, l2):
    inst = generate_instance(n, seed)
    w = weight_matrix(inst, l1, l2)
    np.testing.assert_allclose(w.weights, _loop_oracle(inst, l1, l2), rtol=1e-12, atol=1e-9)
    # larger multipliers never lower a weight
    assert np.all(weight_matrix(inst, l1 + 1, l2 + 1).weights >= w.weights - 1e-9)


def test_weight_matrix_validation():
    with pytest.raises(ShapeError):
        WeightMatrix(np.ones((2, 3)))
    with pytest.raises(DomainError):
        WeightMatrix(np.array([[np.inf]]))
    w = WeightMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        w.weights[0, 0] = 5.0
    assert WeightMatrix(np.array([[1.0, 2.0], [3.0, 4.0]])).cost((1, 0)) == 5.0
