"""Exact classical simulation of linear-ramp QAOA and constraint-enhanced QAOA.

Both simulators act on the normalised Ising model. Probabilities are the only
output, so global phases (including the Ising offset) are irrelevant.

Qubit ``i`` of the full register is QUBO variable ``x_i``; basis index ``k``
sets ``x_i = (k >> (N - 1 - i)) & 1``, so ``x_0`` is the most significant bit.
The constraint-enhanced variant groups the ``n*n`` qubits into ``n`` blocks of
``n`` consecutive qubits, one per surfer row. A block holding its single
excitation on qubit ``b`` means the surfer rides behind breaker ``b``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .errors import CapError, ConfigError
from .exact import enumerate_bits
from .heuristics import SampleBatch, default_reads, make_batch
from .qubo import IsingModel, Qubo, Sample, normalize_ising, to_ising

FULL_QUBIT_CAP = 25
CE_BLOCK_CAP = 8
LR_GRID = tuple(round(0.1 * k, 10) for k in range(1, 11))
CE_GRID_POINTS = 16
_CHUNK = 1 << 15
_SAMPLE_STREAM = 1 << 32


@dataclass(frozen=True)
class LRSchedule:
    p: int
    dgamma: float
    dbeta: float
    gammas: np.ndarray
    betas: np.ndarray


def lr_schedule(p: int, dgamma: float, dbeta: float) -> LRSchedule:
    """Cost angles ``(l/p) dgamma`` ramp up while mixer angles ``((p+1-l)/p) dbeta`` ramp down."""
    if p < 1:
        raise ConfigError(f"layer count must be >= 1, got {p}")
    layers = np.arange(1, p + 1)
    return LRSchedule(p, dgamma, dbeta, layers / p * dgamma, (p + 1 - layers) / p * dbeta)


@dataclass(frozen=True, eq=False)
class StateDistribution:
    """Measurement distribution over the full hypercube or over block configurations.

    For ``kind == "blocks"`` entry ``k`` is the configuration
    ``np.unravel_index(k, (n,) * n)``: block ``s`` excited on qubit ``b_s``.
    """

    kind: str
    n: int
    probabilities: np.ndarray

    @property
    def num_qubits(self) -> int:
        return self.n * self.n

    def bitstrings(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if self.kind == "hypercube":
            return enumerate_bits(self.num_qubits, 0, 0) if indices.size == 0 else (
                (indices[:, None] >> np.arange(self.num_qubits - 1, -1, -1)) & 1
            ).astype(np.uint8)
        configs = np.stack(np.unravel_index(indices, (self.n,) * self.n), axis=1)
        bits = np.zeros((indices.size, self.num_qubits), dtype=np.uint8)
        cols = np.arange(self.n) * self.n + configs
        bits[np.arange(indices.size)[:, None], cols] = 1
        return bits

    def sample(self, shots: int, seed: int) -> np.ndarray:
        """Draw ``shots`` basis indices from the distribution."""
        if shots < 1:
            raise ConfigError("shots must be >= 1")
        probs = np.clip(self.probabilities, 0.0, None)
        probs = probs / probs.sum()
        return stream(seed, _SAMPLE_STREAM).choice(probs.size, size=shots, p=probs)


def _ising_diagonal(m: IsingModel) -> np.ndarray:
    """``E(z) + offset`` for every basis state, in the model's own units."""
    num = m.num_spins
    total = 1 << num
    out = np.empty(total)
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        z = 1.0 - 2.0 * enumerate_bits(num, start, stop)
        out[start:stop] = m.energies(z) + m.energy_offset
    return out


def _apply_x_mixer(psi: np.ndarray, beta: float, num: int) -> np.ndarray:
    """Apply ``exp(-i beta H_D)`` with the transverse-field driver ``H_D = -sum X``."""
    c, s = np.cos(beta), 1j * np.sin(beta)
    for i in range(num):
        view = psi.reshape(1 << i, 2, -1)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        view[:, 0, :] = c * a0 + s * a1
        view[:, 1, :] = s * a0 + c * a1
    return psi


def simulate_qaoa_full(m: IsingModel, gammas, betas, cap: int = FULL_QUBIT_CAP,
                       diagonal: np.ndarray | None = None) -> StateDistribution:
    """Statevector QAOA from ``|+>^N``, the ground state of the driver ``-sum X``.

    Each layer applies the diagonal phase ``exp(-i gamma E(z))`` and then the
    driver evolution ``exp(+i beta sum X)``. With that sign a positive linear
    ramp is a discretised anneal towards the *lowest* energies.
    """
    num = m.num_spins
    if num > cap:
        raise CapError(f"full statevector simulation is capped at {cap} qubits, got {num}")
    gammas, betas = np.atleast_1d(gammas), np.atleast_1d(betas)
    if gammas.shape != betas.shape:
        raise ConfigError("gammas and betas must have equal length")
    n = int(round(num**0.5))
    diag = _ising_diagonal(m) if diagonal is None else diagonal
    psi = np.full(1 << num, (1 << num) ** -0.5, dtype=complex)
    for gamma, beta in zip(gammas, betas):
        psi *= np.exp(-1j * gamma * diag)
        _apply_x_mixer(psi, beta, num)
    return StateDistribution("hypercube", n, np.abs(psi) ** 2)


def calibrate_lr(m: IsingModel, p: int, grid=None, cap: int = FULL_QUBIT_CAP):
    """Grid search of the ramp slopes minimising the exact expected energy.

    Returns ``(dgamma, dbeta, surface)`` where ``surface[a, b]`` is the expected
    energy (model units, offset included) at ``(grid_gamma[a], grid_beta[b])``.
    Ties resolve to the smaller ``dgamma``, then the smaller ``dbeta``.
    """
    if grid is None:
        grid = (LR_GRID, LR_GRID)
    g_vals, b_vals = (np.sort(np.asarray(v, dtype=float)) for v in grid)
    if g_vals.size == 0 or b_vals.size == 0:
        raise ConfigError("calibration grid is empty")
    if m.num_spins > cap:
        raise CapError(f"full statevector simulation is capped at {cap} qubits, got {m.num_spins}")
    diag = _ising_diagonal(m)
    surface = np.empty((g_vals.size, b_vals.size))
    for a, dg in enumerate(g_vals):
        for b, db in enumerate(b_vals):
            sched = lr_schedule(p, dg, db)
            dist = simulate_qaoa_full(m, sched.gammas, sched.betas, cap, diagonal=diag)
            surface[a, b] = dist.probabilities @ diag
    a, b = np.unravel_index(int(np.argmin(surface)), surface.shape)
    return float(g_vals[a]), float(b_vals[b]), surface


def lr_qaoa_sample(q: Qubo, p: int, shots: int | None = None, seed: int = 0, grid=None,
                   cap: int = FULL_QUBIT_CAP, angles: tuple[float, float] | None = None) -> SampleBatch:
    """Calibrate (unless ``angles`` is given), simulate and sample LR-QAOA on ``q``."""
    if q.dim > cap:
        raise CapError(f"full statevector simulation is capped at {cap} qubits, got {q.dim}")
    shots = default_reads(q.n) if shots is None else shots
    start = time.perf_counter()
    model = normalize_ising(to_ising(q))
    if angles is None:
        dgamma, dbeta, _ = calibrate_lr(model, p, grid, cap)
    else:
        dgamma, dbeta = angles
    sched = lr_schedule(p, dgamma, dbeta)
    dist = simulate_qaoa_full(model, sched.gammas, sched.betas, cap)
    bits = dist.bitstrings(dist.sample(shots, seed))
    elapsed = time.perf_counter() - start
    return make_batch(q, bits, "lrqaoa", seed, elapsed, {"p": p, "dgamma": dgamma, "dbeta": dbeta})


# ------------------------------------------------------------ constraint-enhanced


@dataclass(frozen=True)
class CEConfig:
    gamma: float
    beta: float
    p: int = 1
    shots: int | None = None  # default 50 n^3
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError(f"layer count must be >= 1, got {self.p}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be >= 1")


def ce_block_mixer(beta: float, size: int) -> np.ndarray:
    """Block XY mixer restricted to the single-excitation subspace of ``size`` qubits.

    On that subspace the normalised XY Hamiltonian is ``2 (J - I)/(size - 1)``,
    which has eigenvalue 2 on the uniform vector and ``-2/(size - 1)`` on its
    complement.
    """
    if size < 2:
        raise ConfigError(f"block mixer needs at least 2 qubits, got {size}")
    uniform = np.full((size, size), 1.0 / size)
    return np.exp(-2j * beta) * uniform + np.exp(2j * beta / (size - 1)) * (np.eye(size) - uniform)


def block_energies(q: Qubo, scale: float = 1.0) -> np.ndarray:
    """``x^T Q x / scale`` for every block configuration, flattened C-order."""
    n = q.n
    configs = np.indices((n,) * n).reshape(n, -1)  # configs[s] = breaker of surfer s
    var = np.arange(n)[:, None] * n + configs
    energy = np.zeros(configs.shape[1])
    for s in range(n):
        for t in range(n):
            energy += q.q[var[s], var[t]]
    return energy / scale


def ce_qaoa_simulate(q: Qubo, cfg: CEConfig, cap: int = CE_BLOCK_CAP,
                     model: IsingModel | None = None, gammas=None, betas=None) -> StateDistribution:
    """Simulate CE-QAOA inside the ``n**n`` block one-hot subspace.

    Uses ``cfg.gamma``/``cfg.beta`` for every layer unless per-layer ``gammas``
    and ``betas`` are given.
    """
    n = q.n
    if n > cap:
        raise CapError(f"CE-QAOA subspace simulation is capped at n={cap}, got n={n}")
    if n < 2:
        raise ConfigError("CE-QAOA needs blocks of at least 2 qubits")
    model = normalize_ising(to_ising(q)) if model is None else model
    if gammas is None:
        gammas, betas = [cfg.gamma] * cfg.p, [cfg.beta] * cfg.p
    diag = block_energies(q, model.scale).reshape((n,) * n)
    psi = np.full((n,) * n, n ** (-n / 2), dtype=complex)
    for gamma, beta in zip(gammas, betas):
        psi = psi * np.exp(-1j * gamma * diag)
        mixer = ce_block_mixer(beta, n)
        for axis in range(n):
            psi = np.moveaxis(np.tensordot(mixer, psi, axes=(1, axis)), 0, axis)
    return StateDistribution("blocks", n, (np.abs(psi) ** 2).reshape(-1))


def feasibility_filter(source: StateDistribution | SampleBatch, q: Qubo, shots: int | None = None,
                       seed: int = 0) -> tuple[Sample | None, SampleBatch]:
    """Sample (when given a distribution) and keep the best feasible read.

    Returns ``(None, batch)`` when no read is a permutation.
    """
    if isinstance(source, SampleBatch):
        batch = source
    else:
        shots = default_reads(q.n) if shots is None else shots
        start = time.perf_counter()
        bits = source.bitstrings(source.sample(shots, seed))
        batch = make_batch(q, bits, "ceqaoa", seed, time.perf_counter() - start)
    k = batch.best_feasible()
    return (None if k is None else batch.samples[k]), batch


def ce_qaoa_sample(q: Qubo, cfg: CEConfig, cap: int = CE_BLOCK_CAP) -> SampleBatch:
    start = time.perf_counter()
    dist = ce_qaoa_simulate(q, cfg, cap)
    shots = default_reads(q.n) if cfg.shots is None else cfg.shots
    bits = dist.bitstrings(dist.sample(shots, cfg.seed))
    elapsed = time.perf_counter() - start
    info = {"p": cfg.p, "gamma": cfg.gamma, "beta": cfg.beta}
    return make_batch(q, bits, "ceqaoa", cfg.seed, elapsed, info)


def default_ce_grid(points: int = CE_GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    axis = np.arange(points) * np.pi / points
    return axis, axis.copy()


@dataclass(frozen=True)
class GridResult:
    gamma: float
    beta: float
    best_energy: float
    evaluations: int
    table: np.ndarray = field(repr=False)  # best feasible energy per (gamma, beta), inf if none


def ce_grid_search(q: Qubo, grid=None, p: int = 1, shots: int | None = None, seed: int = 0,
                   cap: int = CE_BLOCK_CAP) -> GridResult:
    """Pick the grid angles whose sampled best feasible energy is lowest.

    Every grid point is sampled with the same seed and shot budget. Ties go to
    the smaller gamma, then the smaller beta. A single-point grid reproduces
    the fixed-angle (parameter transfer) mode.
    """
    gammas, betas = default_ce_grid() if grid is None else grid
    gammas = np.sort(np.atleast_1d(np.asarray(gammas, dtype=float)))
    betas = np.sort(np.atleast_1d(np.asarray(betas, dtype=float)))
    if gammas.size == 0 or betas.size == 0:
        raise ConfigError("CE grid is empty")
    model = normalize_ising(to_ising(q))
    table = np.full((gammas.size, betas.size), np.inf)
    for a, gamma in enumerate(gammas):
        for b, beta in enumerate(betas):
            cfg = CEConfig(float(gamma), float(beta), p, shots, seed)
            dist = ce_qaoa_simulate(q, cfg, cap, model=model)
            best, _ = feasibility_filter(dist, q, shots, seed)
            if best is not None:
                table[a, b] = best.energy
    a, b = np.unravel_index(int(np.argmin(table)), table.shape)
    return GridResult(float(gammas[a]), float(betas[b]), float(table[a, b]), table.size, table)
