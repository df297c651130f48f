"""Edge weights of the bipartite surfer/breaker graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .model import CLASS_DIFF_LIMIT, Breaker, Instance, Surfer


def slipstream_efficiency(d: int) -> float:
    """Drag-reduction fraction for class difference ``d = C_b - c_s``."""
    if not -CLASS_DIFF_LIMIT <= d <= CLASS_DIFF_LIMIT:
        raise DomainError(f"class difference {d} outside [-4, 4]")
    return (d + 4) / 24


def _mismatch(gap: float, window: float) -> float:
    # strict comparison: a gap of exactly half the window is still tolerated
    gap = abs(gap)
    return gap if gap > window / 2 else 0.0


def time_mismatch(surfer: Surfer, breaker: Breaker) -> float:
    return _mismatch(surfer.departure - breaker.departure, surfer.dt_flex)


def velocity_mismatch(surfer: Surfer, breaker: Breaker) -> float:
    return _mismatch(surfer.pref_velocity - breaker.velocity, surfer.dv_flex)


def aero_energy(surfer: Surfer, breaker: Breaker) -> float:
    """Drafting energy per unit distance for ``surfer`` behind ``breaker``."""
    f = slipstream_efficiency(breaker.class_id - surfer.class_id)
    return surfer.class_id * breaker.velocity**2 * (1.0 - f)


def edge_weight(surfer: Surfer, breaker: Breaker, lambda1: float = 1.0, lambda2: float = 1.0) -> float:
    return (
        aero_energy(surfer, breaker)
        + lambda1 * time_mismatch(surfer, breaker)
        + lambda2 * velocity_mismatch(surfer, breaker)
    )


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Row ``s``, column ``b`` holds the cost of pairing surfer ``s`` with breaker ``b``."""

    weights: np.ndarray
    lambda1: float = 1.0
    lambda2: float = 1.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ShapeError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DomainError("weight matrix has non-finite entries")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise DomainError("lambda1 and lambda2 must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def cost(self, perm) -> float:
        """Total weight of the assignment surfer ``s`` -> breaker ``perm[s]``."""
        perm = np.asarray(perm)
        return float(self.weights[np.arange(self.n), perm].sum())


def weight_matrix(instance: Instance, lambda1: float = 1.0, lambda2: float = 1.0) -> WeightMatrix:
    n = instance.n
    sc = instance.surfer_classes.astype(float)
    bc = instance.breaker_classes
    bv = np.array([b.velocity for b in instance.breakers])
    bt = np.array([b.departure for b in instance.breakers])
    sv = np.array([s.pref_velocity for s in instance.surfers])
    st = np.array([s.departure for s in instance.surfers])
    sdt = np.array([s.dt_flex for s in instance.surfers])
    sdv = np.array([s.dv_flex for s in instance.surfers])

    # class differences are already validated by Instance
    f = (bc[None, :] - instance.surfer_classes[:, None] + 4) / 24
    aero = sc[:, None] * bv[None, :] ** 2 * (1.0 - f)
    dt = np.abs(st[:, None] - bt[None, :])
    dv = np.abs(sv[:, None] - bv[None, :])
    dt = np.where(dt > sdt[:, None] / 2, dt, 0.0)
    dv = np.where(dv > sdv[:, None] / 2, dv, 0.0)
    w = aero + lambda1 * dt + lambda2 * dv
    assert w.shape == (n, n)
    return WeightMatrix(w, lambda1, lambda2)
