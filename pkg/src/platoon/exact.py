"""Exact baselines: Hungarian assignment and exhaustive oracles."""

from __future__ import annotations

import math

import numpy as np

from .errors import CapError, DomainError
from .matching import WeightMatrix
from .qubo import Qubo

BRUTE_ASSIGNMENT_CAP = 12
BRUTE_QUBO_CAP = 20
_CHUNK_BITS = 14


def _matrix(w) -> np.ndarray:
    mat = w.weights if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError(f"cost matrix must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DomainError("cost matrix has non-finite entries")
    return mat


def hungarian(w) -> tuple[tuple[int, ...], float]:
    """Minimum-cost perfect matching by shortest augmenting paths with potentials.

    Rows are inserted one at a time; each insertion runs a Dijkstra-style scan
    over columns using reduced costs ``c[i, j] - u[i] - v[j]``. Among columns
    with equal slack the smallest index wins, so the returned permutation is
    reproducible. O(n^3).
    """
    c = _matrix(w)
    n = c.shape[0]
    inf = math.inf
    # 1-based arrays with a virtual column 0, as in the classic formulation
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match_col = [0] * (n + 1)  # match_col[j] = row matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            delta, j1 = inf, 0
            row = c[i0 - 1]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
    perm = [0] * n
    for j in range(1, n + 1):
        perm[match_col[j] - 1] = j - 1
    perm = tuple(perm)
    return perm, float(c[np.arange(n), perm].sum())


def brute_force_assignment(w, cap: int = BRUTE_ASSIGNMENT_CAP) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum over all ``n!`` permutations.

    The permutation tree is collapsed on the set of columns already used: every
    prefix that consumes the same columns shares one optimal completion, so the
    enumeration costs ``n * 2**n`` steps instead of ``n!``. The permutation is
    then read off front to back taking the smallest optimal column at each row,
    which yields the lexicographically smallest optimum.
    """
    c = _matrix(w)
    n = c.shape[0]
    if n > cap:
        raise CapError(f"brute-force assignment is capped at n={cap}, got n={n}")
    rows = [list(map(float, r)) for r in c]
    full = (1 << n) - 1
    # rest[mask]: cheapest way to give rows popcount(mask).. the columns outside mask
    rest = [math.inf] * (1 << n)
    rest[full] = 0.0
    popcount = [bin(m).count("1") for m in range(1 << n)]
    for mask in range(full - 1, -1, -1):
        row = rows[popcount[mask]]
        best = math.inf
        for j in range(n):
            bit = 1 << j
            if not mask & bit:
                cand = row[j] + rest[mask | bit]
                if cand < best:
                    best = cand
        rest[mask] = best

    tol = 1e-12 * max(1.0, abs(rest[0]))
    perm = []
    mask = 0
    for r in range(n):
        for j in range(n):
            bit = 1 << j
            if not mask & bit and rows[r][j] + rest[mask | bit] <= rest[mask] + tol:
                perm.append(j)
                mask |= bit
                break
    perm_t = tuple(perm)
    return perm_t, float(c[np.arange(n), perm_t].sum())


def enumerate_bits(num_bits: int, start: int, stop: int) -> np.ndarray:
    """Bitstrings for integers ``start..stop-1``; bit 0 is the most significant."""
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(num_bits - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def qubo_energy_table(q: Qubo | np.ndarray, cap: int = BRUTE_QUBO_CAP) -> np.ndarray:
    """``x^T Q x`` for every bitstring, indexed by its integer encoding."""
    mat = q.q if isinstance(q, Qubo) else np.asarray(q, dtype=float)
    dim = mat.shape[0]
    if dim > cap:
        raise CapError(f"hypercube enumeration is capped at {cap} variables, got {dim}")
    total = 1 << dim
    out = np.empty(total)
    chunk = 1 << min(dim, _CHUNK_BITS)
    for start in range(0, total, chunk):
        x = enumerate_bits(dim, start, start + chunk).astype(float)
        out[start : start + chunk] = np.einsum("ki,ij,kj->k", x, mat, x)
    return out


def brute_force_qubo(q: Qubo | np.ndarray, cap: int = BRUTE_QUBO_CAP) -> tuple[np.ndarray, float]:
    """Global minimiser over the full hypercube; ties go to the smallest integer encoding."""
    energies = qubo_energy_table(q, cap)
    k = int(np.argmin(energies))
    dim = int(round(math.log2(energies.size)))
    return enumerate_bits(dim, k, k + 1)[0], float(energies[k])
