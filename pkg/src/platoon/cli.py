"""Command-line entry point: ``platoon <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 cap or
config error. Every subcommand writes its result to ``--out`` and prints a
one-line summary.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import tomli

from . import bench
from .errors import ConfigError, PlatoonError, ShapeError
from .matching import weight_matrix
from .model import generate_instance, load_instance_ref, write_instance
from .qubo import build_qubo, calibrate_penalty, export_ising, normalize_ising, to_ising
from .savings import eta_report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONFIG = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")


def _weights_args(p):
    p.add_argument("--instance", required=True, help="instance directory, or <dir>/<n>")
    p.add_argument("--lambda1", type=float, default=1.0, help="weight of the timing mismatch")
    p.add_argument("--lambda2", type=float, default=1.0, help="weight of the velocity mismatch")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="platoon", description="Surfer/breaker platoon matching benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("weights", help="write the surfer x breaker weight matrix")
    _weights_args(p)
    p.add_argument("--out", default="weights.csv")

    p = sub.add_parser("qubo", help="write the QUBO matrix and penalty weight")
    _weights_args(p)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--out", default="qubo.json")

    p = sub.add_parser("export-ising", help="write the Ising model in the text exchange format")
    _weights_args(p)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--raw", action="store_true", help="skip normalisation to max |coefficient| = 1")
    p.add_argument("--out", default="ising.txt")

    p = sub.add_parser("solve", help="solve one instance with one solver")
    _weights_args(p)
    p.add_argument("--solver", required=True, choices=bench.SOLVERS)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--reads", type=int, help="SA/tabu reads (default 50 n^3)")
    p.add_argument("--sweeps", type=int, help="SA sweeps (default 100 N)")
    p.add_argument("--tenure", type=int, help="tabu tenure (default min(20, N))")
    p.add_argument("--max-iters", type=int, help="tabu iterations per read (default 50 N)")
    p.add_argument("--p", type=int, default=1, help="QAOA depth")
    p.add_argument("--grid", default="coarse", choices=["coarse"], help="LR-QAOA slope grid")
    p.add_argument("--shots", type=int, help="QAOA shots (default 50 n^3)")
    p.add_argument("--gamma", type=float, help="CE-QAOA cost angle (omit with --beta for a grid search)")
    p.add_argument("--beta", type=float, help="CE-QAOA mixer angle")
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--no-samples", action="store_true", help="omit raw samples from the output")
    p.add_argument("--out", default="result.json")

    p = sub.add_parser("savings", help="energy accounting of an assignment")
    p.add_argument("--instance", required=True)
    p.add_argument("--assignment", required=True, help="JSON file with an 'assignment' list")
    p.add_argument("--out", default="savings.csv")

    p = sub.add_parser("bench", help="run a benchmark config")
    p.add_argument("--config", help="TOML bench config (default: $PLATOON_CONFIG)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="results")

    p = sub.add_parser("qaoa-sweep", help="LR-QAOA depth sweep")
    _weights_args(p)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--p-list", type=_int_list, required=True)
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--shots", type=int)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--out", default="sweep.csv")
    return parser


def _apply_env_defaults(parser: argparse.ArgumentParser, command: str | None) -> None:
    """Take subcommand defaults from the TOML file named by ``PLATOON_CONFIG``.

    The file may hold a ``[<subcommand>]`` table of flag defaults; a file that
    is itself a bench config also serves as the ``bench --config`` default.
    """
    path = os.environ.get("PLATOON_CONFIG")
    if not path or command is None:
        return
    try:
        data = tomli.loads(Path(path).read_text(encoding="utf-8"))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"PLATOON_CONFIG {path}: {exc}") from exc
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    target = sub.choices.get(command)
    if target is None:
        return
    known = {a.dest for a in target._actions}
    table = data.get(command, {})
    if not isinstance(table, dict):
        raise ConfigError(f"PLATOON_CONFIG: [{command}] must be a table")
    defaults = {k.replace("-", "_"): v for k, v in table.items()}
    unknown = set(defaults) - known
    if unknown:
        raise ConfigError(f"PLATOON_CONFIG: unknown {command} options {sorted(unknown)}")
    if command == "bench" and "instances" in data:
        defaults.setdefault("config", path)
    target.set_defaults(**defaults)
    for action in target._actions:
        if action.dest in defaults:
            action.required = False


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _cmd_gen(args) -> str:
    inst = generate_instance(args.n, args.seed)
    breakers, surfers = write_instance(inst, args.out)
    return f"wrote {breakers} and {surfers}"


def _cmd_weights(args) -> str:
    inst = load_instance_ref(args.instance)
    w = weight_matrix(inst, args.lambda1, args.lambda2)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "b", "w"])
        for s in range(w.n):
            for b in range(w.n):
                writer.writerow([s, b, repr(float(w.weights[s, b]))])
    return f"n={w.n} weights -> {out}"


def _qubo(args):
    inst = load_instance_ref(args.instance)
    w = weight_matrix(inst, args.lambda1, args.lambda2)
    return inst, build_qubo(w, calibrate_penalty(w, args.safety))


def _cmd_qubo(args) -> str:
    inst, q = _qubo(args)
    doc = {
        "instance": inst.label, "n": q.n, "lambda1": args.lambda1, "lambda2": args.lambda2,
        "lambda3": q.lambda3, "const_offset": q.const_offset, "q": q.q.tolist(),
    }
    _write_json(Path(args.out), doc)
    return f"n={q.n} N={q.dim} lambda3={q.lambda3!r} -> {args.out}"


def _cmd_export_ising(args) -> str:
    _, q = _qubo(args)
    model = to_ising(q)
    if not args.raw:
        model = normalize_ising(model)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    export_ising(model, args.out)
    return f"N={model.num_spins} scale={model.scale!r} -> {args.out}"


def _cmd_solve(args) -> str:
    inst = load_instance_ref(args.instance)
    keys = {
        "sa": {"reads": args.reads, "sweeps": args.sweeps},
        "tabu": {"reads": args.reads, "tenure": args.tenure, "max_iters": args.max_iters},
        "lrqaoa": {"shots": args.shots, "grid": args.grid},
        "ceqaoa": {"shots": args.shots, "gamma": args.gamma, "beta": args.beta},
    }.get(args.solver, {})
    options = {k: v for k, v in keys.items() if v is not None}
    doc = bench.solve_document(
        inst, args.solver, options, seed=args.seed, p=args.p, lambda1=args.lambda1,
        lambda2=args.lambda2, safety=args.safety, rel_tol=args.rel_tol,
        include_samples=not args.no_samples,
    )
    _write_json(Path(args.out), doc)
    summary = f"{args.solver} n={inst.n} assignment={doc['assignment']} cost={doc['cost']!r}"
    if "metrics" in doc:
        summary += f" p_succ={doc['metrics']['p_succ_tol']!r}"
    return summary + f" -> {args.out}"


def _read_assignment(path: str, n: int) -> list:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    a = doc.get("assignment") if isinstance(doc, dict) else doc
    if not isinstance(a, list) or len(a) != n:
        raise ShapeError(f"{path}: expected an assignment list of length {n}")
    for b in a:
        if b is not None and (not isinstance(b, int) or isinstance(b, bool) or not 0 <= b < n):
            raise ShapeError(f"{path}: breaker index {b!r} out of range")
    used = [b for b in a if b is not None]
    if len(set(used)) != len(used):
        raise ShapeError(f"{path}: a breaker is assigned twice")
    return a


def _cmd_savings(args) -> str:
    inst = load_instance_ref(args.instance)
    report = eta_report(inst, _read_assignment(args.assignment, inst.n))
    cells = [report.f_ref, report.f_ref_vel, report.f1, report.f1_mod,
             report.eta_speed, report.eta_f1, report.eta_f1_mod]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["F_ref", "F_ref_vel", "F1", "F1_mod", "η_speed", "η_F1", "η_F1mod"])
        writer.writerow([repr(float(c)) for c in cells])
    return f"η_speed={report.eta_speed:.6g}% η_F1={report.eta_f1:.6g}% η_F1mod={report.eta_f1_mod:.6g}% -> {out}"


def _cmd_bench(args) -> str:
    if not args.config:
        raise ConfigError("bench needs --config or PLATOON_CONFIG")
    cfg = bench.BenchConfig.from_toml(args.config)
    result = bench.run_zoo(cfg)
    files = bench.emit_tables(result, args.out, args.format)
    skipped = sum(row.status != "ok" for row in result.rows)
    return f"{len(result.rows)} rows ({skipped} skipped), {len(files)} files -> {args.out}"


def _cmd_qaoa_sweep(args) -> str:
    cfg = bench.sweep_config(args.instance, args.p_list, args.seeds, args.shots, args.rel_tol,
                             args.lambda1, args.lambda2, args.safety)
    result = bench.run_zoo(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(bench.sweep_table(result), encoding="utf-8")
    return f"{len(result.rows)} sweep rows -> {out}"


_COMMANDS = {
    "gen": _cmd_gen,
    "weights": _cmd_weights,
    "qubo": _cmd_qubo,
    "export-ising": _cmd_export_ising,
    "solve": _cmd_solve,
    "savings": _cmd_savings,
    "bench": _cmd_bench,
    "qaoa-sweep": _cmd_qaoa_sweep,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        command = next((a for a in argv if not a.startswith("-")), None)
        _apply_env_defaults(parser, command)
        args = parser.parse_args(argv)
        print(_COMMANDS[args.command](args))
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except PlatoonError as exc:
        print(f"platoon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"platoon: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
