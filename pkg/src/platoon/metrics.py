"""Quality metrics of a sample batch against an exact reference energy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, EmptyError
from .heuristics import SampleBatch
from .qubo import Qubo

DEFAULT_REL_TOL = 1e-6
EXACT_TOL = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    e_star: float
    e_best: float
    e_mean: float
    gap_best: float
    gap_mean: float
    variance: float
    p_feas: float
    p_succ_exact: float
    p_succ_tol: float
    sts: float
    tts_seconds: float
    n_reads: int
    n_unique: int
    n_feas: int
    n_succ_exact: int
    n_succ_tol: int
    # gaps are absolute differences because the reference energy is zero
    gap_absolute: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def tts(sts: float, mean_sample_seconds: float) -> float:
    """Expected wall time to the first success."""
    if sts < 0 or mean_sample_seconds < 0:
        raise DomainError("samples-to-solution and time per sample must be non-negative")
    if math.isinf(sts):
        return math.inf
    return sts * mean_sample_seconds


def evaluate_batch(batch: SampleBatch, e_star: float, rel_tol: float = DEFAULT_REL_TOL) -> MetricsReport:
    """Best/mean energy, relative gaps, population variance and success statistics.

    A read succeeds when it is a permutation and its energy matches ``e_star``:
    within ``rel_tol * |e_star|`` for the tolerance count, within ``1e-9``
    relative for the exact count. Degenerate optima all count.
    """
    if batch.n_reads == 0:
        raise EmptyError("cannot evaluate an empty batch")
    if not math.isfinite(e_star):
        raise DomainError("reference energy must be finite")
    energies = np.asarray(batch.energies, dtype=float)
    feasible = np.asarray(batch.penalty_counts) == 0
    e_best = float(energies.min())
    e_mean = float(energies.mean())
    variance = float(np.mean((energies - e_mean) ** 2))

    absolute = e_star == 0
    denom = 1.0 if absolute else abs(e_star)
    gap_best = (e_best - e_star) / denom
    gap_mean = (e_mean - e_star) / denom

    err = np.abs(energies - e_star)
    succ_tol = feasible & (err <= rel_tol * abs(e_star))
    succ_exact = feasible & (err <= EXACT_TOL * max(1.0, abs(e_star)))
    succ_tol |= succ_exact  # keeps p_succ_exact <= p_succ_tol when e_star == 0
    reads = batch.n_reads
    p_tol = float(succ_tol.sum() / reads)
    sts = math.inf if p_tol == 0 else 1.0 / p_tol
    return MetricsReport(
        e_star=float(e_star),
        e_best=e_best,
        e_mean=e_mean,
        gap_best=float(gap_best),
        gap_mean=float(gap_mean),
        variance=variance,
        p_feas=float(feasible.sum() / reads),
        p_succ_exact=float(succ_exact.sum() / reads),
        p_succ_tol=p_tol,
        sts=sts,
        tts_seconds=tts(sts, batch.total_wall_time / reads),
        n_reads=reads,
        n_unique=int(np.unique(np.asarray(batch.bits), axis=0).shape[0]),
        n_feas=int(feasible.sum()),
        n_succ_exact=int(succ_exact.sum()),
        n_succ_tol=int(succ_tol.sum()),
        gap_absolute=absolute,
    )


def tamper_check(batch: SampleBatch, q: Qubo, rel: float = 1e-9) -> bool:
    """True when every stored energy matches a recomputation from its bits."""
    recomputed = q.energies(batch.bits)
    scale = np.maximum(1.0, np.abs(recomputed))
    return bool(np.all(np.abs(recomputed - batch.energies) <= rel * scale))
