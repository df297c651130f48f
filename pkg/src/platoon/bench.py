"""Benchmark orchestration: run the solver zoo on shared instances and emit tables.

A bench config is TOML::

    seeds = [0, 1]
    rel_tol = 1e-6

    [[instances]]
    path = "data/3"                  # dataset pair, or
    [[instances]]
    generate = { n = 3, seed = 7 }   # a generated stand-in

    [[solvers]]
    name = "sa"
    reads = 200

Solver keys: ``hungarian`` and ``brute`` take none; ``sa`` takes reads, sweeps,
t_initial, t_final; ``tabu`` takes reads, tenure, max_iters; ``lrqaoa`` takes
p (int or list), shots, grid (``"coarse"``); ``ceqaoa`` takes p, shots, gamma,
beta (omit both for a grid search) and grid_points.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from . import npy
from .errors import CapError, ConfigError, EmptyError
from .exact import brute_force_assignment, hungarian
from .heuristics import SaConfig, SampleBatch, TabuConfig, make_batch, simulated_annealing, tabu_search
from .matching import weight_matrix
from .metrics import DEFAULT_REL_TOL, MetricsReport, evaluate_batch
from .model import Instance, generate_instance, load_instance_ref
from .qaoa import CEConfig, ce_grid_search, ce_qaoa_sample, default_ce_grid, lr_qaoa_sample
from .qubo import DEFAULT_SAFETY, Qubo, build_qubo, calibrate_penalty, encode, partial_assignment
from .savings import SavingsReport, eta_report

SOLVERS = ("hungarian", "brute", "sa", "tabu", "lrqaoa", "ceqaoa")
_SOLVER_KEYS = {
    "hungarian": set(),
    "brute": set(),
    "sa": {"reads", "sweeps", "t_initial", "t_final"},
    "tabu": {"reads", "tenure", "max_iters"},
    "lrqaoa": {"p", "shots", "grid"},
    "ceqaoa": {"p", "shots", "gamma", "beta", "grid_points"},
}
SEEDED = {"sa", "tabu", "lrqaoa", "ceqaoa"}
WALL_TIME_COLUMNS = ("TTS_s", "wall_s")

METRIC_COLUMNS = (
    "instance", "n", "solver", "p", "seed", "status",
    "E_star", "E_best", "E_mean", "gap_best", "gap_mean", "variance",
    "p_feas", "p_succ_exact", "p_succ_tol", "STS", "TTS_s",
    "N_reads", "N_unique", "N_feas", "N_succ_exact", "N_succ_tol", "gap_absolute", "wall_s",
)
SAVINGS_COLUMNS = (
    "instance", "n", "solver", "p", "seed", "status",
    "F_ref", "F_ref_vel", "F1", "F1_mod", "η_speed", "η_F1", "η_F1mod",
)
SWEEP_COLUMNS = ("instance", "n", "solver", "p", "seed", "p_succ", "STS", "TTS")


@dataclass(frozen=True)
class InstanceSpec:
    path: str | None = None
    n: int | None = None
    seed: int | None = None

    def load(self, base: Path) -> Instance:
        if self.path is not None:
            path = Path(self.path)
            return load_instance_ref(path if path.is_absolute() else base / path)
        return generate_instance(self.n, self.seed)


@dataclass(frozen=True)
class SolverSpec:
    name: str
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.name not in SOLVERS:
            raise ConfigError(f"unknown solver {self.name!r}; choose from {', '.join(SOLVERS)}")
        extra = set(self.options) - _SOLVER_KEYS[self.name]
        if extra:
            raise ConfigError(f"solver {self.name!r} does not take {sorted(extra)}")
        if any(not isinstance(p, int) or p < 1 for p in self.depths() if p is not None):
            raise ConfigError(f"solver {self.name!r}: p must be a positive integer or list of them")

    def depths(self) -> tuple[int | None, ...]:
        if self.name not in ("lrqaoa", "ceqaoa"):
            return (None,)
        p = self.options.get("p", 1)
        return tuple(p) if isinstance(p, list) else (p,)


@dataclass(frozen=True)
class BenchConfig:
    instances: tuple[InstanceSpec, ...]
    solvers: tuple[SolverSpec, ...]
    seeds: tuple[int, ...] = (0,)
    rel_tol: float = DEFAULT_REL_TOL
    lambda1: float = 1.0
    lambda2: float = 1.0
    safety: float = DEFAULT_SAFETY
    base_dir: Path = Path(".")

    def __post_init__(self):
        if not self.instances:
            raise ConfigError("bench config lists no instances")
        if not self.solvers:
            raise ConfigError("bench config lists no solvers")
        if not self.seeds:
            raise ConfigError("bench config lists no seeds")
        for spec in self.solvers:
            spec.validate()
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path = Path(".")) -> "BenchConfig":
        known = {"instances", "solvers", "seeds", "rel_tol", "lambda1", "lambda2", "safety"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown bench config keys {sorted(unknown)}")
        instances = []
        for item in data.get("instances", []):
            if "path" in item and "generate" not in item:
                instances.append(InstanceSpec(path=str(item["path"])))
            elif "generate" in item and "path" not in item:
                gen = item["generate"]
                if set(gen) != {"n", "seed"}:
                    raise ConfigError("generate needs exactly the keys n and seed")
                instances.append(InstanceSpec(n=int(gen["n"]), seed=int(gen["seed"])))
            else:
                raise ConfigError("each instance needs either path or generate")
        solvers = []
        for item in data.get("solvers", []):
            item = dict(item)
            if "name" not in item:
                raise ConfigError("each solver needs a name")
            name = item.pop("name")
            solvers.append(SolverSpec(name, item))
        try:
            return cls(
                instances=tuple(instances),
                solvers=tuple(solvers),
                seeds=tuple(int(s) for s in data.get("seeds", [0])),
                rel_tol=float(data.get("rel_tol", DEFAULT_REL_TOL)),
                lambda1=float(data.get("lambda1", 1.0)),
                lambda2=float(data.get("lambda2", 1.0)),
                safety=float(data.get("safety", DEFAULT_SAFETY)),
                base_dir=base_dir,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad bench config value: {exc}") from exc

    @classmethod
    def from_toml(cls, path: str | Path) -> "BenchConfig":
        path = Path(path)
        try:
            data = tomli.loads(path.read_text(encoding="utf-8"))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)


@dataclass(frozen=True, eq=False)
class BenchRow:
    instance: str
    n: int
    solver: str
    p: int | None
    seed: int | None
    status: str  # "ok" or "skipped: <reason>"
    lambda3: float
    metrics: MetricsReport | None = None
    savings: SavingsReport | None = None
    assignment: tuple | None = None
    batch: SampleBatch | None = None
    wall_time: float = 0.0

    @property
    def key(self) -> str:
        parts = [self.instance, self.solver]
        if self.p is not None:
            parts.append(f"p{self.p}")
        if self.seed is not None:
            parts.append(f"s{self.seed}")
        return "_".join(parts)


@dataclass(frozen=True, eq=False)
class BenchResult:
    rows: tuple[BenchRow, ...]
    instances: dict

    def solvers(self) -> list[str]:
        return sorted({row.solver for row in self.rows})


def _exact_batch(q: Qubo, solve, w, name: str) -> tuple[SampleBatch, float]:
    start = time.perf_counter()
    perm, cost = solve(w)
    elapsed = time.perf_counter() - start
    return make_batch(q, encode(perm, q.n)[None, :], name, 0, elapsed), cost


def _run_solver(spec: SolverSpec, q: Qubo, w, p: int | None, seed: int | None) -> SampleBatch:
    opts = spec.options
    if spec.name == "hungarian":
        return _exact_batch(q, hungarian, w, "hungarian")[0]
    if spec.name == "brute":
        return _exact_batch(q, brute_force_assignment, w, "brute")[0]
    if spec.name == "sa":
        cfg = SaConfig(n_reads=opts.get("reads"), sweeps=opts.get("sweeps"),
                       t_initial=opts.get("t_initial"), t_final=opts.get("t_final"), seed=seed)
        return simulated_annealing(q, cfg)
    if spec.name == "tabu":
        cfg = TabuConfig(n_reads=opts.get("reads"), tenure=opts.get("tenure"),
                         max_iters=opts.get("max_iters"), seed=seed)
        return tabu_search(q, cfg)
    if spec.name == "lrqaoa":
        if opts.get("grid", "coarse") != "coarse":
            raise ConfigError("lrqaoa grid must be 'coarse'")
        return lr_qaoa_sample(q, p, shots=opts.get("shots"), seed=seed)
    shots = opts.get("shots")
    gamma, beta = opts.get("gamma"), opts.get("beta")
    if (gamma is None) != (beta is None):
        raise ConfigError("ceqaoa needs both gamma and beta, or neither")
    if gamma is None:
        grid = default_ce_grid(opts.get("grid_points", 16))
        found = ce_grid_search(q, grid, p=p, shots=shots, seed=seed)
        gamma, beta = found.gamma, found.beta
    return ce_qaoa_sample(q, CEConfig(float(gamma), float(beta), p, shots, seed))


def _row_assignment(batch: SampleBatch) -> tuple:
    k = batch.best_feasible()
    if k is None:
        k = int(np.argmin(batch.energies))
    return partial_assignment(batch.bits[k], int(round(batch.bits.shape[1] ** 0.5)))


def run_zoo(cfg: BenchConfig) -> BenchResult:
    """Run every solver on every instance; rows are ordered by (instance, solver, p, seed)."""
    rows = []
    instances = {}
    for spec in cfg.instances:
        inst = spec.load(cfg.base_dir)
        label = inst.label if inst.label not in instances else f"{inst.label}-{len(instances)}"
        w = weight_matrix(inst, cfg.lambda1, cfg.lambda2)
        lambda3 = calibrate_penalty(w, cfg.safety)
        q = build_qubo(w, lambda3)
        _, cost = hungarian(w.weights)
        e_star = cost - q.const_offset
        instances[label] = {"n": inst.n, "lambda3": lambda3, "hungarian_cost": cost, "E_star": e_star}
        for solver in sorted(cfg.solvers, key=lambda s: s.name):
            seeds = cfg.seeds if solver.name in SEEDED else (None,)
            for p in solver.depths():
                for seed in seeds:
                    base = dict(instance=label, n=inst.n, solver=solver.name, p=p, seed=seed, lambda3=lambda3)
                    try:
                        batch = _run_solver(solver, q, w, p, seed)
                    except CapError as exc:
                        rows.append(BenchRow(status=f"skipped: {exc}", **base))
                        continue
                    assignment = _row_assignment(batch)
                    rows.append(BenchRow(
                        status="ok",
                        metrics=evaluate_batch(batch, e_star, cfg.rel_tol),
                        savings=eta_report(inst, assignment),
                        assignment=assignment,
                        batch=batch,
                        wall_time=batch.total_wall_time,
                        **base,
                    ))
    if not rows:
        raise EmptyError("bench produced no rows")
    return BenchResult(tuple(rows), instances)


# ------------------------------------------------------------------ output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_num(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _metric_cells(row: BenchRow) -> dict:
    cells = {"instance": row.instance, "n": row.n, "solver": row.solver, "p": row.p,
             "seed": row.seed, "status": row.status}
    m = row.metrics
    if m is not None:
        cells.update({
            "E_star": m.e_star, "E_best": m.e_best, "E_mean": m.e_mean,
            "gap_best": m.gap_best, "gap_mean": m.gap_mean, "variance": m.variance,
            "p_feas": m.p_feas, "p_succ_exact": m.p_succ_exact, "p_succ_tol": m.p_succ_tol,
            "STS": m.sts, "TTS_s": m.tts_seconds, "N_reads": m.n_reads, "N_unique": m.n_unique,
            "N_feas": m.n_feas, "N_succ_exact": m.n_succ_exact, "N_succ_tol": m.n_succ_tol,
            "gap_absolute": m.gap_absolute, "wall_s": row.wall_time,
        })
    return cells


def _savings_cells(row: BenchRow) -> dict:
    cells = {"instance": row.instance, "n": row.n, "solver": row.solver, "p": row.p,
             "seed": row.seed, "status": row.status}
    s = row.savings
    if s is not None:
        cells.update({
            "F_ref": s.f_ref, "F_ref_vel": s.f_ref_vel, "F1": s.f1, "F1_mod": s.f1_mod,
            "η_speed": s.eta_speed, "η_F1": s.eta_f1, "η_F1mod": s.eta_f1_mod,
        })
    return cells


def _sweep_cells(row: BenchRow) -> dict:
    m = row.metrics
    return {"instance": row.instance, "n": row.n, "solver": row.solver, "p": row.p, "seed": row.seed,
            "p_succ": m.p_succ_tol, "STS": m.sts, "TTS": m.tts_seconds}


def _csv_text(columns, records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def _sweep_rows(r: BenchResult) -> list[BenchRow]:
    return [row for row in r.rows if row.p is not None and row.metrics is not None]


def result_document(r: BenchResult) -> dict:
    """The JSON form of a bench result (non-finite numbers become null)."""
    def clean(d):
        return {k: _json_num(v) for k, v in d.items()}

    rows = []
    for row in r.rows:
        rows.append({
            "instance": row.instance, "n": row.n, "solver": row.solver, "p": row.p, "seed": row.seed,
            "status": row.status, "lambda3": row.lambda3,
            "assignment": None if row.assignment is None else list(row.assignment),
            "batch": None if row.batch is None else f"batches/{row.key}.npy",
            "wall_s": row.wall_time,
            "metrics": None if row.metrics is None else clean(row.metrics.to_dict()),
            "savings": None if row.savings is None else clean(row.savings.to_dict()),
        })
    return {
        "instances": {k: clean(v) for k, v in sorted(r.instances.items())},
        "rows": rows,
        "depth_sweep": [clean(_sweep_cells(row)) for row in _sweep_rows(r)],
    }


def load_schema() -> dict:
    text = resources.files("platoon").joinpath("schemas/bench_result.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def emit_tables(r: BenchResult, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write per-solver metrics and savings tables, the depth sweep and the raw batches.

    ``fmt`` is ``csv`` or ``json``; batches are always stored as ``.npy`` bit
    matrices so every row can be re-derived.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown table format {fmt!r}")
    if not r.rows:
        raise EmptyError("nothing to emit")
    out = Path(out_dir)
    (out / "batches").mkdir(parents=True, exist_ok=True)
    written = []

    def write(name: str, text: str):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    for row in r.rows:
        if row.batch is not None:
            path = out / "batches" / f"{row.key}.npy"
            npy.write_npy(path, row.batch.bits.astype(np.int64))
            written.append(path)

    if fmt == "json":
        doc = result_document(r)
        write("results.json", json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
        return written

    for solver in r.solvers():
        rows = [row for row in r.rows if row.solver == solver]
        write(f"metrics_{solver}.csv", _csv_text(METRIC_COLUMNS, [_metric_cells(x) for x in rows]))
        write(f"savings_{solver}.csv", _csv_text(SAVINGS_COLUMNS, [_savings_cells(x) for x in rows]))
    write("depth_sweep.csv", _csv_text(SWEEP_COLUMNS, [_sweep_cells(x) for x in _sweep_rows(r)]))
    return written


def read_table(path: str | Path) -> list[dict]:
    """Parse an emitted CSV back into typed records (empty cells become None)."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            parsed = {}
            for key, cell in rec.items():
                if cell == "":
                    parsed[key] = None
                elif key in ("instance", "solver", "status"):
                    parsed[key] = cell
                elif cell in ("true", "false"):
                    parsed[key] = cell == "true"
                elif key in ("n", "p", "seed") or key.startswith("N_"):
                    parsed[key] = int(cell)
                else:
                    parsed[key] = float(cell)
            records.append(parsed)
    return records


# ------------------------------------------------------------ single solves


def solve_document(inst: Instance, solver: str, options: dict | None = None, seed: int = 0,
                   p: int = 1, lambda1: float = 1.0, lambda2: float = 1.0,
                   safety: float = DEFAULT_SAFETY, rel_tol: float = DEFAULT_REL_TOL,
                   include_samples: bool = True) -> dict:
    """Solve one instance with one solver and return a JSON-ready result.

    ``assignment`` is the best feasible permutation (0-based breaker per
    surfer) or None when no read is feasible.
    """
    spec = SolverSpec(solver, dict(options or {}))
    spec.validate()
    w = weight_matrix(inst, lambda1, lambda2)
    lambda3 = calibrate_penalty(w, safety)
    q = build_qubo(w, lambda3)
    _, cost = hungarian(w.weights)
    e_star = cost - q.const_offset
    batch = _run_solver(spec, q, w, p, seed)
    k = batch.best_feasible()
    assignment = None if k is None else list(_row_assignment(batch))
    doc = {
        "solver": solver,
        "instance": inst.label,
        "n": inst.n,
        "lambda1": lambda1,
        "lambda2": lambda2,
        "lambda3": lambda3,
        "assignment": assignment,
    }
    if solver in ("hungarian", "brute"):
        doc["cost"] = float(w.cost(assignment))
        doc["energy"] = float(batch.energies[0])
    else:
        doc["seed"] = seed
        if solver in ("lrqaoa", "ceqaoa"):
            doc["p"] = p
        doc["info"] = {k: v for k, v in batch.info.items() if k != "trace"}
        doc["cost"] = None if assignment is None else float(w.cost(assignment))
        doc["metrics"] = {k: _json_num(v) for k, v in evaluate_batch(batch, e_star, rel_tol).to_dict().items()}
        if include_samples:
            doc["samples"] = {
                "bits": ["".join(map(str, b)) for b in batch.bits.tolist()],
                "energies": batch.energies.tolist(),
                "penalty_counts": batch.penalty_counts.tolist(),
            }
    doc["wall_s"] = batch.total_wall_time
    return doc


def sweep_config(instance_path: str | Path, depths, seeds, shots: int | None = None,
                 rel_tol: float = DEFAULT_REL_TOL, lambda1: float = 1.0, lambda2: float = 1.0,
                 safety: float = DEFAULT_SAFETY) -> BenchConfig:
    """A bench config running only LR-QAOA over a list of depths."""
    options = {"p": list(depths)}
    if shots is not None:
        options["shots"] = shots
    return BenchConfig(
        instances=(InstanceSpec(path=str(Path(instance_path).resolve())),),
        solvers=(SolverSpec("lrqaoa", options),),
        seeds=tuple(seeds), rel_tol=rel_tol, lambda1=lambda1, lambda2=lambda2, safety=safety,
    )


def sweep_table(r: BenchResult) -> str:
    return _csv_text(SWEEP_COLUMNS, [_sweep_cells(x) for x in _sweep_rows(r)])
