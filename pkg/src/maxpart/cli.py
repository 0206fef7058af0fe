"""Command line: ``maxpart solve``, ``maxpart bench`` and ``maxpart gen-suite``.

Exit codes of ``solve`` follow the MaxSAT Evaluation convention: 30 optimum,
20 hard clauses unsatisfiable, 0 unknown (timeout), 1 error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import multiprocessing as mp
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from .engine import ALGORITHMS, GRAPH_MODELS, MERGE_MODES, MaxSatResult, Status, brute_force_optimum, solve
from .generators import write_minisuite
from .graphrep import build_cvig, build_res
from .satcore import SolveTimeout
from .wcnf import WcnfParseError, read_wcnf

EXIT_OPTIMUM, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 30, 20, 0, 1

logger = logging.getLogger("maxpart")

NAMED_CONFIGS = {
    "linear-su": ("linear-su", "res", "balanced"),
    "linear-us": ("linear-us", "res", "balanced"),
    "msu3": ("msu3", "res", "balanced"),
    "S-CVIG": ("part-msu3", "cvig", "seq"),
    "S-RES": ("part-msu3", "res", "seq"),
    "W-CVIG": ("part-msu3", "cvig", "balanced"),
    "W-RES": ("part-msu3", "res", "balanced"),
}


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "part-msu3"
    graph_model: str = "res"
    merge: str = "balanced"
    seed: int = 0
    timeout: float | None = None
    memory_limit: int | None = None  # bytes, advisory

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.graph_model not in GRAPH_MODELS:
            raise ValueError(f"unknown graph model {self.graph_model!r}")
        if self.merge not in MERGE_MODES:
            raise ValueError(f"unknown merge mode {self.merge!r}")

    @property
    def name(self) -> str:
        if self.algorithm != "part-msu3":
            return self.algorithm
        return f"{'S' if self.merge == 'seq' else 'W'}-{self.graph_model.upper()}"

    @classmethod
    def named(cls, name: str, **kw) -> "RunConfig":
        try:
            algorithm, graph_model, merge = NAMED_CONFIGS[name]
        except KeyError:
            raise ValueError(f"unknown configuration {name!r}; choose from {', '.join(NAMED_CONFIGS)}") from None
        return cls(algorithm, graph_model, merge, **kw)


@dataclass
class BenchRecord:
    instance: str
    config: str
    status: str
    cost: int | None
    wall_time: float
    sat_calls: int | None
    unsat_calls: int | None
    partitions: int | None
    modularity: float | None


BENCH_COLUMNS = [f.name for f in fields(BenchRecord)]


def _setup_logging() -> None:
    level = os.environ.get("MAXPART_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="c %(name)s: %(message)s", stream=sys.stderr)


# -- solve ----------------------------------------------------------------


def _write(dump_dir: Path, name: str, text: str) -> None:
    dump_dir.mkdir(parents=True, exist_ok=True)
    (dump_dir / name).write_text(text)
    print(f"c wrote {dump_dir / name}")


def solve_command(args: argparse.Namespace) -> int:
    try:
        formula = read_wcnf(args.instance)
    except (OSError, WcnfParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    config = RunConfig(args.algorithm, args.graph, args.merge, args.seed, args.timeout)
    stem = Path(args.instance).stem if args.instance != "-" else "stdin"
    dump_dir = Path(args.dump_dir)
    captured: dict = {}
    print(f"c maxpart {config.name}: {formula.num_vars} vars, {len(formula.hard)} hard, {len(formula.soft)} soft")

    def on_event(event: str, info: dict) -> None:
        if event == "partitions":
            captured.update(info)
            print(f"c partitions: {info['count']}  modularity: {info['modularity']:.6f}")
        elif event == "lambda":
            where = "" if info["partition"] is None else f"[{info['partition']}]"
            print(f"c lambda{where} = {info['value']}")
        elif event == "upper":
            print(f"o {info['value']}")
        elif event == "schedule":
            captured["schedule"] = info["schedule"]
        elif event == "solver":
            captured["solver"] = info["solver"]
        sys.stdout.flush()

    try:
        result = solve(formula, config.algorithm, config.graph_model, config.merge, config.seed, config.timeout, on_event)
    except SolveTimeout:
        print("s UNKNOWN")
        return EXIT_UNKNOWN

    if args.dump_graph:
        graph = captured.get("graph")
        if graph is None or config.algorithm != "part-msu3":
            graph = build_cvig(formula) if args.graph == "cvig" else build_res(formula)
        assignment = captured.get("assignment")
        text = graph.to_dot(assignment.community_of if assignment else None) if args.dump_graph == "dot" else graph.to_csv()
        _write(dump_dir, f"{stem}.{args.graph}.{args.dump_graph}", text)
    if args.dump_communities and "assignment" in captured:
        _write(dump_dir, f"{stem}.communities.csv", captured["assignment"].to_csv())
    if args.dump_schedule and "schedule" in captured:
        _write(dump_dir, f"{stem}.schedule.txt", captured["schedule"].render())
    if args.dump_cnf and "solver" in captured:
        _write(dump_dir, f"{stem}.db.cnf", captured["solver"].to_dimacs())

    if result.status is Status.HARD_UNSAT:
        print("s UNSATISFIABLE")
        return EXIT_UNSAT
    return _print_optimum(formula, result, config, args.verify_model)


def _print_optimum(formula, result: MaxSatResult, config: RunConfig, verify: bool) -> int:
    values = [l > 0 for l in result.model]
    cost = formula.cost(values)
    if not formula.hard_satisfied(values) or cost != result.cost:
        print(f"c model check failed (reported {result.cost}, recomputed {cost})")
        print("s UNKNOWN")
        return EXIT_ERROR
    if verify:
        if formula.num_vars > 24:
            print("c brute-force verification skipped: more than 24 variables")
        else:
            opt = brute_force_optimum(formula)
            print(f"c brute-force optimum: {opt}")
            if opt != cost:
                print("s UNKNOWN")
                return EXIT_ERROR
    if config.algorithm != "linear-su":
        print(f"o {cost}")
    st = result.stats
    print(f"c sat calls: {st.sat_calls}  unsat calls: {st.unsat_calls}  time: {st.wall_time:.3f}s")
    print("s OPTIMUM FOUND")
    print("v " + " ".join(map(str, result.model)))
    return EXIT_OPTIMUM


# -- bench ----------------------------------------------------------------


def _bench_child(path: str, config: RunConfig, conn) -> None:
    if config.memory_limit:
        import resource

        resource.setrlimit(resource.RLIMIT_AS, (config.memory_limit, config.memory_limit))
    start = time.monotonic()
    try:
        formula = read_wcnf(path)
        r = solve(formula, config.algorithm, config.graph_model, config.merge, config.seed, config.timeout)
        st = r.stats
        rec = BenchRecord(path, config.name, r.status.value, r.cost, time.monotonic() - start,
                          st.sat_calls, st.unsat_calls, st.partitions, st.modularity)
    except SolveTimeout:
        rec = BenchRecord(path, config.name, "TIMEOUT", None, time.monotonic() - start, None, None, None, None)
    except Exception as e:  # recorded as an ERROR row, the run continues
        logger.warning("%s [%s]: %s", path, config.name, e)
        rec = BenchRecord(path, config.name, "ERROR", None, time.monotonic() - start, None, None, None, None)
    conn.send(rec)
    conn.close()


def run_isolated(path: str, config: RunConfig, grace: float = 5.0) -> BenchRecord:
    """Run one (instance, config) pair in a child process with a hard watchdog."""
    recv, send = mp.Pipe(duplex=False)
    start = time.monotonic()
    proc = mp.Process(target=_bench_child, args=(path, config, send), daemon=True)
    proc.start()
    send.close()
    limit = None if config.timeout is None else config.timeout + grace
    rec = None
    if recv.poll(limit):
        try:
            rec = recv.recv()
        except EOFError:
            rec = None
    proc.join(1.0)
    if proc.is_alive():
        proc.kill()
        proc.join()
    if rec is None:
        status = "TIMEOUT" if limit is not None and time.monotonic() - start >= limit else "ERROR"
        rec = BenchRecord(path, config.name, status, None, time.monotonic() - start, None, None, None, None)
    return rec


def run_bench(instances: list[str], configs: list[RunConfig], jobs: int = 1) -> list[BenchRecord]:
    pairs = [(p, c) for p in instances for c in configs]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda pc: run_isolated(*pc), pairs))


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in records:
        row = list(astuple(r))
        row[4] = f"{r.wall_time:.3f}"
        w.writerow(["" if x is None else x for x in row])
    return buf.getvalue()


def cactus_tsv(records: list[BenchRecord]) -> str:
    """Per configuration: solve times in increasing order against the solved count."""
    out = ["config\tsolved\ttime"]
    by_config: dict[str, list[float]] = {}
    for r in records:
        if r.status in ("OPTIMUM", "HARD-UNSAT"):
            by_config.setdefault(r.config, []).append(r.wall_time)
        else:
            by_config.setdefault(r.config, [])
    for name, times in by_config.items():
        for k, t in enumerate(sorted(times), start=1):
            out.append(f"{name}\t{k}\t{t:.3f}")
    return "\n".join(out) + "\n"


def bench_command(args: argparse.Namespace) -> int:
    root = Path(args.directory)
    instances = sorted(str(p) for p in root.glob("*.wcnf"))
    if not instances:
        print(f"error: no .wcnf files in {root}", file=sys.stderr)
        return EXIT_ERROR
    try:
        configs = [RunConfig.named(n.strip(), seed=args.seed, timeout=args.timeout, memory_limit=args.memory_limit)
                   for n in args.configs.split(",")]
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    records = run_bench(instances, configs, args.jobs)
    Path(args.out).write_text(records_to_csv(records))
    Path(args.cactus).write_text(cactus_tsv(records))
    for c in configs:
        solved = sum(r.config == c.name and r.status in ("OPTIMUM", "HARD-UNSAT") for r in records)
        print(f"{c.name}: {solved}/{len(instances)} solved")
    return 0


def gen_suite_command(args: argparse.Namespace) -> int:
    paths = write_minisuite(args.directory, args.count, args.seed)
    print(f"wrote {len(paths)} instances to {args.directory}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxpart", description="Partition-based partial MaxSAT solving")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one WCNF instance ('-' reads standard input)")
    p.add_argument("instance")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="part-msu3")
    p.add_argument("--graph", choices=GRAPH_MODELS, default="res")
    p.add_argument("--merge", choices=MERGE_MODES, default="balanced")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=None, help="seconds")
    p.add_argument("--dump-graph", choices=("dot", "csv"))
    p.add_argument("--dump-communities", action="store_true")
    p.add_argument("--dump-schedule", action="store_true")
    p.add_argument("--dump-cnf", action="store_true", help="DIMACS dump of the solver clause database")
    p.add_argument("--dump-dir", default=".")
    p.add_argument("--verify-model", action="store_true", help="also compare with a brute-force optimum")
    p.set_defaults(func=solve_command)

    b = sub.add_parser("bench", help="run every *.wcnf in a directory under several configurations")
    b.add_argument("directory")
    b.add_argument("--configs", default="msu3,W-RES", help=f"comma-separated, from {','.join(NAMED_CONFIGS)}")
    b.add_argument("--timeout", type=float, default=60.0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--memory-limit", type=int, default=None, help="bytes per run")
    b.add_argument("--out", default="bench.csv")
    b.add_argument("--cactus", default="cactus.tsv")
    b.set_defaults(func=bench_command)

    g = sub.add_parser("gen-suite", help="write the block-structured mini-suite")
    g.add_argument("directory")
    g.add_argument("--count", type=int, default=50)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=gen_suite_command)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
