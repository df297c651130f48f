"""Penalised QUBO for the matching problem and its Ising form.

Variables are laid out row-major: bit ``e = n*s + b`` is 1 when surfer ``s``
rides behind breaker ``b``. The canonical matrix is symmetric, so a pair of
variables sharing a row or column carries ``lambda3`` in both ``(e, e')`` and
``(e', e)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateError, DomainError, ShapeError
from .matching import WeightMatrix

DEFAULT_SAFETY = 1.1


@dataclass(frozen=True, eq=False)
class Qubo:
    q: np.ndarray
    lambda3: float
    n: int

    @property
    def dim(self) -> int:
        return self.n * self.n

    @property
    def const_offset(self) -> float:
        """Constant dropped when expanding the squared penalties, ``2*n*lambda3``."""
        return 2 * self.n * self.lambda3

    def energy(self, x) -> float:
        return qubo_energy(self, x)

    def energies(self, xs: np.ndarray) -> np.ndarray:
        """Row-wise ``x^T Q x`` for a stack of bitstrings."""
        xs = np.asarray(xs, dtype=float)
        return np.einsum("ki,ij,kj->k", xs, self.q, xs)


@dataclass(frozen=True)
class Sample:
    bits: tuple[int, ...]
    energy: float
    penalty_count: int
    wall_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.penalty_count == 0


@dataclass(frozen=True)
class InfeasibleReport:
    """Rows (surfers) and columns (breakers) whose one-hot constraint fails."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]


def calibrate_penalty(w: WeightMatrix, safety: float = DEFAULT_SAFETY) -> float:
    """Smallest safe penalty weight: ``safety * n * (max w - min w)``.

    A constant weight matrix makes that bound zero, so we fall back to
    ``safety * max(1, |w|)``.
    """
    if not safety > 1:
        raise DomainError(f"safety factor must exceed 1, got {safety}")
    weights = w.weights
    if not np.all(np.isfinite(weights)):
        raise DomainError("weight matrix has non-finite entries")
    hi, lo = float(weights.max()), float(weights.min())
    if hi == lo:
        return safety * max(1.0, abs(hi))
    return safety * w.n * (hi - lo)


def build_qubo(w: WeightMatrix, lambda3: float) -> Qubo:
    if not lambda3 > 0:
        raise DomainError(f"lambda3 must be positive, got {lambda3}")
    n = w.n
    q = np.diag(w.weights.reshape(-1).astype(float))
    index = np.arange(n * n).reshape(n, n)
    # lambda3 * (1 - sum x)^2 = lambda3 - 2 lambda3 sum x + lambda3 sum_ij x_i x_j
    for group in (*index, *index.T):
        q[np.ix_(group, group)] += lambda3
        q[group, group] -= 2 * lambda3
    q.setflags(write=False)
    return Qubo(q=q, lambda3=float(lambda3), n=n)


def tensor_form(w: WeightMatrix, lambda3: float) -> np.ndarray:
    """Closed form ``diag(w - 4 lambda3) + lambda3 (I (x) J + J (x) I)``."""
    n = w.n
    eye, ones = np.eye(n), np.ones((n, n))
    return np.diag(w.weights.reshape(-1) - 4 * lambda3) + lambda3 * (
        np.kron(eye, ones) + np.kron(ones, eye)
    )


def upper_triangular(q: np.ndarray) -> np.ndarray:
    """Fold a symmetric matrix into the equivalent upper-triangular one."""
    return np.triu(q) + np.triu(q.T, k=1)


def _bits(x, size: int) -> np.ndarray:
    x = np.asarray(x).reshape(-1)
    if x.size != size:
        raise ShapeError(f"bitstring has length {x.size}, expected {size}")
    return x


def qubo_energy(q: Qubo, x) -> float:
    x = _bits(x, q.dim).astype(float)
    return float(x @ q.q @ x)


def penalty_count(x, n: int) -> int:
    """Number of rows plus columns that do not contain exactly one 1."""
    grid = _bits(x, n * n).reshape(n, n)
    return int((grid.sum(axis=1) != 1).sum() + (grid.sum(axis=0) != 1).sum())


def penalty_counts(xs: np.ndarray, n: int) -> np.ndarray:
    grid = np.asarray(xs).reshape(-1, n, n)
    return (grid.sum(axis=2) != 1).sum(axis=1) + (grid.sum(axis=1) != 1).sum(axis=1)


def encode(perm, n: int) -> np.ndarray:
    x = np.zeros(n * n, dtype=np.uint8)
    x[np.arange(n) * n + np.asarray(perm, dtype=int)] = 1
    return x


def decode(x, n: int) -> tuple[int, ...] | InfeasibleReport:
    """Map a bitstring to ``perm`` (surfer ``s`` -> breaker ``perm[s]``) if it is a permutation."""
    grid = _bits(x, n * n).reshape(n, n)
    rows = tuple(int(i) for i in np.flatnonzero(grid.sum(axis=1) != 1))
    cols = tuple(int(i) for i in np.flatnonzero(grid.sum(axis=0) != 1))
    if rows or cols:
        return InfeasibleReport(rows, cols)
    return tuple(int(b) for b in grid.argmax(axis=1))


def partial_assignment(x, n: int) -> tuple[int | None, ...]:
    """Keep only pairings whose row and column are both one-hot; others map to None."""
    grid = _bits(x, n * n).reshape(n, n)
    row_ok = grid.sum(axis=1) == 1
    col_ok = grid.sum(axis=0) == 1
    out = []
    for s in range(n):
        b = int(grid[s].argmax())
        out.append(b if row_ok[s] and col_ok[b] else None)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """``scale * (sum h_i z_i + sum_{i<j} J_ij z_i z_j + energy_offset)`` with ``z = 1 - 2x``."""

    h: np.ndarray
    j: np.ndarray  # strictly upper triangular
    energy_offset: float
    scale: float = 1.0

    @property
    def num_spins(self) -> int:
        return self.h.size

    def energy(self, z) -> float:
        """Ising energy without the offset, in the model's own units."""
        z = np.asarray(z, dtype=float)
        return float(self.h @ z + z @ self.j @ z)

    def energies(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=float)
        return zs @ self.h + np.einsum("ki,ij,kj->k", zs, self.j, zs)

    def qubo_frame(self, z) -> float:
        return self.scale * (self.energy(z) + self.energy_offset)

    def max_coefficient(self) -> float:
        return float(max(np.abs(self.h).max(initial=0.0), np.abs(self.j).max(initial=0.0)))


def spins(x) -> np.ndarray:
    return 1 - 2 * np.asarray(x, dtype=float)


def to_ising(q: Qubo | np.ndarray) -> IsingModel:
    """Substitute ``x_i = (1 - z_i)/2`` into ``x^T Q x``.

    ``Q_ii x_i -> Q_ii/2 (1 - z_i)`` and, with ``U`` the upper-triangular
    fold, ``U_ij x_i x_j -> U_ij/4 (1 - z_i - z_j + z_i z_j)``.
    """
    mat = q.q if isinstance(q, Qubo) else np.asarray(q, dtype=float)
    u = upper_triangular(mat)
    diag = np.diag(u).copy()
    j = np.triu(u, k=1) / 4
    h = -diag / 2 - (j.sum(axis=1) + j.sum(axis=0))
    offset = diag.sum() / 2 + j.sum()
    return IsingModel(h=h, j=j, energy_offset=float(offset), scale=1.0)


def normalize_ising(m: IsingModel) -> IsingModel:
    """Divide every coefficient by the largest ``|h|`` or ``|J|``."""
    divisor = m.max_coefficient()
    if divisor == 0:
        raise DegenerateError("cannot normalise an all-zero Ising model")
    return IsingModel(
        h=m.h / divisor,
        j=m.j / divisor,
        energy_offset=m.energy_offset / divisor,
        scale=m.scale * divisor,
    )


def export_ising(m: IsingModel, path: str | Path) -> None:
    lines = [f"ising N {m.num_spins} scale {m.scale!r} offset {m.energy_offset!r}"]
    lines += [f"h {i} {float(v)!r}" for i, v in enumerate(m.h)]
    for i, k in zip(*np.nonzero(m.j)):
        lines.append(f"J {i} {k} {float(m.j[i, k])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def import_ising(path: str | Path) -> IsingModel:
    records = Path(path).read_text(encoding="ascii").split("\n")
    head = records[0].split()
    if len(head) != 7 or head[0] != "ising" or head[1] != "N" or head[3] != "scale" or head[5] != "offset":
        raise DomainError(f"bad Ising header: {records[0]!r}")
    size = int(head[2])
    h = np.zeros(size)
    j = np.zeros((size, size))
    for line in records[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "h" and len(parts) == 3:
            h[int(parts[1])] = float(parts[2])
        elif parts[0] == "J" and len(parts) == 4:
            a, b = int(parts[1]), int(parts[2])
            if not a < b:
                raise DomainError(f"coupling indices must satisfy i < j: {line!r}")
            j[a, b] = float(parts[3])
        else:
            raise DomainError(f"bad Ising record: {line!r}")
    return IsingModel(h=h, j=j, energy_offset=float(head[6]), scale=float(head[4]))
