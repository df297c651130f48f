"""Seeded metaheuristic QUBO samplers: simulated annealing and tabu search.

Every random number a read consumes comes from its own Philox stream keyed by
``(seed, read_index)``, so a read never depends on how many others run with it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import stream
from .errors import ConfigError
from .qubo import Qubo, Sample, penalty_counts

_PROBE_STREAM = (1 << 64) - 1
_TARGET_ACCEPT = 0.8


def default_reads(n: int) -> int:
    return 50 * n**3


@dataclass(frozen=True, eq=False)
class SampleBatch:
    bits: np.ndarray  # (n_reads, N) uint8
    energies: np.ndarray
    penalty_counts: np.ndarray
    wall_times: np.ndarray
    solver_name: str
    seed: int
    total_wall_time: float
    info: dict = field(default_factory=dict)

    @property
    def n_reads(self) -> int:
        return int(self.bits.shape[0])

    @property
    def samples(self) -> list[Sample]:
        return [
            Sample(tuple(int(b) for b in self.bits[k]), float(self.energies[k]),
                   int(self.penalty_counts[k]), float(self.wall_times[k]))
            for k in range(self.n_reads)
        ]

    def best_feasible(self) -> int | None:
        """Index of the lowest-energy feasible read (first on ties), or None."""
        feasible = np.flatnonzero(self.penalty_counts == 0)
        if feasible.size == 0:
            return None
        return int(feasible[np.argmin(self.energies[feasible])])


def make_batch(q: Qubo, bits, solver_name: str, seed: int, total_wall_time: float,
               info: dict | None = None) -> SampleBatch:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1, q.dim)
    reads = bits.shape[0]
    per = total_wall_time / reads if reads else 0.0
    return SampleBatch(
        bits=bits,
        energies=q.energies(bits),
        penalty_counts=penalty_counts(bits, q.n),
        wall_times=np.full(reads, per),
        solver_name=solver_name,
        seed=seed,
        total_wall_time=total_wall_time,
        info=info or {},
    )


def flip_deltas(q: np.ndarray, x: np.ndarray, fields: np.ndarray | None = None) -> np.ndarray:
    """Energy change of flipping each bit, for one state or a stack of states.

    ``fields`` is ``x @ Q``; pass it to avoid recomputing.
    """
    diag = np.diag(q)
    if fields is None:
        fields = x @ q
    d = 1.0 - 2.0 * x
    return d * (diag + 2.0 * (fields - diag * x))


# --------------------------------------------------------------- annealing


@dataclass(frozen=True)
class SaConfig:
    n_reads: int | None = None  # default 50 n^3
    sweeps: int | None = None  # default 100 N; one sweep is N proposals
    t_initial: float | None = None  # default: 80 % initial acceptance of the worst probed flip
    t_final: float | None = None  # default 1e-3 * t_initial
    ratio: float | None = None  # default spans t_initial..t_final over the sweeps
    seed: int = 0

    def resolve(self, q: Qubo) -> "SaConfig":
        n_reads = default_reads(q.n) if self.n_reads is None else self.n_reads
        sweeps = 100 * q.dim if self.sweeps is None else self.sweeps
        t_initial = _probe_temperature(q, self.seed) if self.t_initial is None else self.t_initial
        t_final = 1e-3 * t_initial if self.t_final is None else self.t_final
        if n_reads < 1 or sweeps < 1:
            raise ConfigError("n_reads and sweeps must be positive")
        if not (t_final > 0 and t_initial >= t_final):
            raise ConfigError(f"need t_initial >= t_final > 0, got {t_initial}, {t_final}")
        ratio = self.ratio
        if ratio is None:
            ratio = (t_final / t_initial) ** (1.0 / (sweeps - 1)) if sweeps > 1 else 1.0
        # ratio 1 only arises for a flat schedule (t_initial == t_final)
        if not 0 < ratio <= 1 or (ratio == 1 and t_initial != t_final):
            raise ConfigError(f"geometric ratio must lie in (0, 1), got {ratio}")
        return SaConfig(n_reads, sweeps, t_initial, t_final, ratio, self.seed)

    def temperatures(self) -> np.ndarray:
        k = np.arange(self.sweeps)
        return np.maximum(self.t_initial * self.ratio**k, self.t_final)


def _probe_temperature(q: Qubo, seed: int, states: int = 100) -> float:
    rng = stream(seed, _PROBE_STREAM)
    x = rng.integers(0, 2, size=(states, q.dim)).astype(float)
    worst = float(np.abs(flip_deltas(q.q, x)).max())
    if worst == 0:
        return 1.0
    return worst / math.log(1.0 / _TARGET_ACCEPT)


@njit(cache=True)
def _anneal_chain(q, x, idx, u, temps, trace):  # pragma: no cover - compiled
    dim = x.size
    g = q @ x
    energy = 0.0
    for i in range(dim):
        energy += x[i] * g[i]
    record = trace.size > 0
    if record:
        trace[0] = energy
    step = 0
    for temp in temps:
        for _ in range(dim):
            i = idx[step]
            xi = x[i]
            d = 1.0 - 2.0 * xi
            de = d * (q[i, i] + 2.0 * (g[i] - q[i, i] * xi))
            if de <= 0.0 or u[step] < np.exp(-de / temp):
                x[i] = 1.0 - xi
                for j in range(dim):
                    g[j] += d * q[i, j]
                energy += de
            step += 1
            if record:
                trace[step] = energy
    return energy


def simulated_annealing(q: Qubo, cfg: SaConfig = SaConfig(), record: bool = False) -> SampleBatch:
    """Metropolis single-bit-flip annealing from uniform random starts.

    Each sweep makes ``N`` proposals at one temperature, temperatures falling
    geometrically sweep by sweep. The final state of each chain is its sample.
    With ``record=True`` the per-proposal energy traces land in ``info["trace"]``.
    """
    cfg = cfg.resolve(q)
    mat = np.ascontiguousarray(q.q, dtype=float)
    temps = cfg.temperatures()
    steps = cfg.sweeps * q.dim
    start = time.perf_counter()
    out = np.empty((cfg.n_reads, q.dim))
    traces = np.empty((cfg.n_reads, steps + 1)) if record else None
    for k in range(cfg.n_reads):
        rng = stream(cfg.seed, k)
        x = rng.integers(0, 2, size=q.dim).astype(float)
        idx = rng.integers(0, q.dim, size=steps)
        u = rng.random(steps)
        trace = traces[k] if record else np.empty(0)
        _anneal_chain(mat, x, idx, u, temps, trace)
        out[k] = x
    elapsed = time.perf_counter() - start
    info = {"sweeps": cfg.sweeps, "t_initial": cfg.t_initial, "t_final": cfg.t_final,
            "ratio": cfg.ratio}
    if record:
        info["trace"] = traces
    return make_batch(q, out, "sa", cfg.seed, elapsed, info)


# -------------------------------------------------------------------- tabu


@dataclass(frozen=True)
class TabuConfig:
    n_reads: int | None = None  # default 50 n^3
    tenure: int | None = None  # default min(20, N)
    max_iters: int | None = None  # default 50 N
    seed: int = 0

    def resolve(self, q: Qubo) -> "TabuConfig":
        n_reads = default_reads(q.n) if self.n_reads is None else self.n_reads
        tenure = min(20, q.dim) if self.tenure is None else self.tenure
        max_iters = 50 * q.dim if self.max_iters is None else self.max_iters
        if tenure < 1:
            raise ConfigError(f"tabu tenure must be >= 1, got {tenure}")
        if n_reads < 1 or max_iters < 0:
            raise ConfigError("n_reads must be positive and max_iters non-negative")
        return TabuConfig(n_reads, tenure, max_iters, self.seed)


def tabu_walk(q: np.ndarray, x0: np.ndarray, tenure: int, max_iters: int, record: bool = False):
    """Run tabu search from each row of ``x0``; returns best states and their energies.

    A bit flipped at iteration ``t`` stays tabu through iteration ``t + tenure``,
    which is exactly membership in a FIFO list of the last ``tenure`` moves.
    Tabu moves are still taken when they reach a new best for that read. If
    every move is tabu and none aspires, the longest-tabu bit is released.
    With ``record`` the flipped index per iteration is also returned.
    """
    q = np.asarray(q, dtype=float)
    x = np.array(x0, dtype=float, ndmin=2)
    reads, dim = x.shape
    rows = np.arange(reads)
    diag = np.diag(q)
    g = x @ q
    energy = np.einsum("ki,ki->k", x, g)
    best_x, best_e = x.copy(), energy.copy()
    last = np.full((reads, dim), -(tenure + 1), dtype=np.int64)
    moves = []
    for it in range(max_iters):
        d = 1.0 - 2.0 * x
        de = d * (diag + 2.0 * (g - diag * x))
        tabu = last >= it - tenure
        aspire = energy[:, None] + de < best_e[:, None]
        allowed = ~tabu | aspire
        choice = np.argmin(np.where(allowed, de, np.inf), axis=1)
        stuck = ~allowed.any(axis=1)
        if stuck.any():
            choice[stuck] = np.argmin(last[stuck], axis=1)
        di = d[rows, choice]
        x[rows, choice] = 1.0 - x[rows, choice]
        g += di[:, None] * q[choice]
        energy += de[rows, choice]
        last[rows, choice] = it
        better = energy < best_e
        best_e[better] = energy[better]
        best_x[better] = x[better]
        if record:
            moves.append(choice.copy())
    if record:
        return best_x, best_e, np.array(moves, dtype=np.int64).T.reshape(reads, -1)
    return best_x, best_e


def tabu_search(q: Qubo, cfg: TabuConfig = TabuConfig()) -> SampleBatch:
    """Steepest-descent tabu search over Hamming-1 moves; best state per read is its sample."""
    cfg = cfg.resolve(q)
    start = time.perf_counter()
    x0 = np.stack([stream(cfg.seed, k).integers(0, 2, size=q.dim) for k in range(cfg.n_reads)])
    best_x, _ = tabu_walk(q.q, x0, cfg.tenure, cfg.max_iters)
    elapsed = time.perf_counter() - start
    info = {"tenure": cfg.tenure, "max_iters": cfg.max_iters}
    return make_batch(q, best_x, "tabu", cfg.seed, elapsed, info)
