"""MaxSAT search algorithms over one incremental solver instance.

Every soft clause ``w`` is added once as ``w or -s`` with a fresh selector
``s``. An unrelaxed clause is enforced by assuming ``s``; relaxing it just
stops assuming ``s`` and feeds ``-s`` (the relaxation variable) into a
totalizer. Clauses never need to be rewritten or removed, so a single solver
serves the whole run.

Algorithms: linear SAT-UNSAT search, linear UNSAT-SAT search, MSU3, and
partition-based MSU3 (soft clauses split by community detection on a CVIG or
RES graph, refined per partition, then merged sequentially or by weighted
balanced pairing).
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cardenc
from .cardenc import TotalizerTree
from .community import detect_communities
from .graphrep import build_cvig, build_res
from .partition import (
    Partition,
    connection_strengths,
    extract_partitions,
    schedule_balanced,
    schedule_sequential,
)
from .satcore import SolveOutcome, Solver, SolveTimeout
from .wcnf import WcnfFormula, normalize

logger = logging.getLogger(__name__)

ALGORITHMS = ("linear-su", "linear-us", "msu3", "part-msu3")
GRAPH_MODELS = ("cvig", "res")
MERGE_MODES = ("seq", "balanced")

Callback = Callable[[str, dict], None]


class Status(enum.Enum):
    OPTIMUM = "OPTIMUM"
    HARD_UNSAT = "HARD-UNSAT"


@dataclass
class Stats:
    sat_calls: int = 0
    unsat_calls: int = 0
    partitions: int = 0
    merges: int = 0
    modularity: float | None = None
    wall_time: float = 0.0
    solver_instances: int = 0
    card_inputs_at_first_sat: int | None = None
    max_card_inputs: int = 0
    card_clauses: int = 0
    communities: tuple[int, ...] | None = None


@dataclass
class MaxSatResult:
    status: Status
    cost: int | None = None
    model: tuple[int, ...] | None = None  # signed literals over the original variables
    stats: Stats = field(default_factory=Stats)

    @property
    def optimum(self) -> bool:
        return self.status is Status.OPTIMUM


class _Run:
    """State of one algorithm run: the solver, selectors and statistics."""

    def __init__(self, formula: WcnfFormula, seed: int, timeout: float | None, callback: Callback | None):
        self.start = time.monotonic()
        self.deadline = None if timeout is None else self.start + timeout
        self.callback = callback
        self.formula = normalize(formula)
        self.stats = Stats()
        self.solver = self._new_solver(seed)
        s = self.solver
        s.ensure_vars(self.formula.num_vars)
        for c in self.formula.hard:
            s.add_clause(c.lits)
        self.selector: dict[int, int] = {}
        self.owner: dict[int, int] = {}
        for c in self.formula.soft:
            sel = s.new_var()
            s.add_clause(c.lits + (-sel,))
            self.selector[c.id] = sel
            self.owner[sel] = c.id
        self.relaxed: set[int] = set()
        self._base_clauses = s.num_clauses
        self.emit("solver", solver=s)

    def _new_solver(self, seed: int) -> Solver:
        self.stats.solver_instances += 1
        assert self.stats.solver_instances == 1, "one solver instance per run"
        return Solver(seed=seed)

    def emit(self, event: str, **info) -> None:
        if self.callback is not None:
            self.callback(event, info)

    def check_hard(self) -> SolveOutcome:
        """SAT call with no assumptions: selectors are free, so only hard clauses bind."""
        return self.solver.solve([], deadline=self.deadline)

    def call(self, assumptions: list[int], tree: TotalizerTree | None) -> SolveOutcome:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolveTimeout()
        out = self.solver.solve(assumptions, deadline=self.deadline)
        inputs = len(tree.inputs) if tree is not None else 0
        self.stats.max_card_inputs = max(self.stats.max_card_inputs, inputs)
        if out.sat:
            self.stats.sat_calls += 1
            if self.stats.card_inputs_at_first_sat is None:
                self.stats.card_inputs_at_first_sat = inputs
        else:
            self.stats.unsat_calls += 1
        return out

    def relax(self, soft_ids: Iterable[int]) -> list[int]:
        lits = []
        for i in soft_ids:
            assert i not in self.relaxed, f"soft clause {i} relaxed twice"
            self.relaxed.add(i)
            lits.append(-self.selector[i])
        return lits

    def core_softs(self, core: Sequence[int]) -> list[int]:
        return sorted(self.owner[l] for l in core if l in self.owner)

    def finish(self, model: Sequence[bool]) -> MaxSatResult:
        n = self.formula.num_vars
        vals = model[:n]
        assert self.formula.hard_satisfied(vals), "model violates a hard clause"
        self.stats.wall_time = time.monotonic() - self.start
        self.stats.card_clauses = self.solver.num_clauses - self._base_clauses
        lits = tuple(v if vals[v - 1] else -v for v in range(1, n + 1))
        return MaxSatResult(Status.OPTIMUM, self.formula.cost(vals), lits, self.stats)

    def hard_unsat(self) -> MaxSatResult:
        self.stats.wall_time = time.monotonic() - self.start
        return MaxSatResult(Status.HARD_UNSAT, stats=self.stats)


def check_hard(formula: WcnfFormula, seed: int = 0) -> Status:
    run = _Run(formula, seed, None, None)
    return Status.OPTIMUM if run.check_hard().sat else Status.HARD_UNSAT


def solve_linear_sat_unsat(
    formula: WcnfFormula, seed: int = 0, timeout: float | None = None, callback: Callback | None = None
) -> MaxSatResult:
    """Linear search on the number of falsified soft clauses, from above."""
    run = _Run(formula, seed, timeout, callback)
    first = run.check_hard()
    if not first.sat:
        return run.hard_unsat()
    softs = [c.id for c in run.formula.soft]
    if not softs:
        return run.finish(first.model)
    inputs = run.relax(softs)
    out = run.call([], None)
    best = out.model
    ub = run.formula.cost(best[: run.formula.num_vars])
    run.emit("upper", value=ub)
    tree = None
    while ub > 0:
        if tree is None:
            tree = cardenc.build(run.solver, inputs, ub - 1)
        out = run.call(cardenc.enforce_bound(tree, ub - 1), tree)
        if not out.sat:
            break
        best = out.model
        ub = run.formula.cost(best[: run.formula.num_vars])
        run.emit("upper", value=ub)
    return run.finish(best)


def solve_linear_unsat_sat(
    formula: WcnfFormula, seed: int = 0, timeout: float | None = None, callback: Callback | None = None
) -> MaxSatResult:
    """Relax every soft clause, then raise the bound from 0 until SAT."""
    run = _Run(formula, seed, timeout, callback)
    first = run.check_hard()
    if not first.sat:
        return run.hard_unsat()
    softs = [c.id for c in run.formula.soft]
    if not softs:
        return run.finish(first.model)
    tree = cardenc.build(run.solver, run.relax(softs), 0)
    lam = 0
    while True:
        out = run.call(cardenc.enforce_bound(tree, lam), tree)
        if out.sat:
            return run.finish(out.model)
        lam += 1
        cardenc.extend_bound(run.solver, tree, lam)
        run.emit("lambda", partition=None, scope=frozenset(softs), relaxed=frozenset(run.relaxed), value=lam)


def _refine(run: _Run, part: Partition, tree: TotalizerTree | None) -> tuple[TotalizerTree | None, tuple[bool, ...]]:
    """MSU3 iterations over the soft clauses of ``part`` until SAT.

    Soft clauses outside ``part`` are neither enforced nor relaxed.
    Updates ``part.lower_bound`` and ``part.relax_vars`` in place.
    """
    scope = sorted(part.soft_ids)
    while True:
        assumptions = [run.selector[i] for i in scope if i not in run.relaxed]
        if tree is not None:
            assumptions += cardenc.enforce_bound(tree, part.lower_bound)
        out = run.call(assumptions, tree)
        if out.sat:
            return tree, out.model
        if not out.core:
            raise RuntimeError("hard clauses unsatisfiable within scope")
        new = [i for i in run.core_softs(out.core) if i in part.soft_ids]
        part.lower_bound += 1
        if new:
            lits = run.relax(new)
            part.relax_vars.update(-l for l in lits)
            sub = cardenc.build(run.solver, lits, part.lower_bound)
            tree = sub if tree is None else cardenc.join(run.solver, tree, sub, part.lower_bound)
        else:
            # core made of the cardinality assumption alone: the bound is too tight
            cardenc.extend_bound(run.solver, tree, part.lower_bound)
        logger.debug("partition %s: lambda=%d |V_R|=%d", part.id, part.lower_bound, len(part.relax_vars))
        run.emit(
            "lambda",
            partition=part.id,
            scope=part.soft_ids,
            relaxed=frozenset(i for i in part.soft_ids if i in run.relaxed),
            value=part.lower_bound,
        )


def solve_msu3(
    formula: WcnfFormula, seed: int = 0, timeout: float | None = None, callback: Callback | None = None
) -> MaxSatResult:
    """Core-guided UNSAT-SAT search relaxing soft clauses only when they appear in a core."""
    run = _Run(formula, seed, timeout, callback)
    first = run.check_hard()
    if not first.sat:
        return run.hard_unsat()
    if not run.formula.soft:
        return run.finish(first.model)
    part = Partition(0, frozenset(c.id for c in run.formula.soft))
    _, model = _refine(run, part, None)
    return run.finish(model)


def solve_partition_msu3(
    formula: WcnfFormula,
    graph_model: str = "res",
    merge_mode: str = "balanced",
    seed: int = 0,
    timeout: float | None = None,
    callback: Callback | None = None,
    max_res_pairs: int | None = None,
) -> MaxSatResult:
    """MSU3 per soft-clause partition, then merge partitions until one remains.

    A merged partition starts from the sum of its parts' lower bounds and
    reuses both totalizers through a join.
    """
    if graph_model not in GRAPH_MODELS:
        raise ValueError(f"unknown graph model {graph_model!r}")
    if merge_mode not in MERGE_MODES:
        raise ValueError(f"unknown merge mode {merge_mode!r}")
    run = _Run(formula, seed, timeout, callback)
    first = run.check_hard()
    if not first.sat:
        return run.hard_unsat()
    f = run.formula
    graph = build_cvig(f) if graph_model == "cvig" else build_res(f, max_pairs=max_res_pairs)
    assignment = detect_communities(graph, seed=seed)
    parts = extract_partitions(f, assignment)
    run.stats.partitions = len(parts)
    run.stats.modularity = assignment.modularity
    run.stats.communities = tuple(assignment.community_of[u] for u in graph.nodes)
    run.emit("partitions", count=len(parts), modularity=assignment.modularity, assignment=assignment, graph=graph)
    logger.info("%d partitions, modularity %.4f", len(parts), assignment.modularity)
    if not parts:
        return run.finish(first.model)

    live: dict[int, Partition] = {}
    trees: dict[int, TotalizerTree | None] = {}
    model = first.model
    for p in parts:
        trees[p.id], model = _refine(run, p, None)
        live[p.id] = p
    if len(parts) == 1:
        return run.finish(model)

    if merge_mode == "seq":
        schedule = schedule_sequential(parts)
    else:
        schedule = schedule_balanced(parts, connection_strengths(graph, assignment, parts))
    run.emit("schedule", schedule=schedule)
    for step in schedule.steps:
        a, b = live.pop(step.left), live.pop(step.right)
        ta, tb = trees.pop(step.left), trees.pop(step.right)
        k = Partition(
            step.result,
            a.soft_ids | b.soft_ids,
            relax_vars=a.relax_vars | b.relax_vars,
            lower_bound=a.lower_bound + b.lower_bound,
        )
        if ta is not None and tb is not None:
            tree = cardenc.join(run.solver, ta, tb, k.lower_bound)
        else:
            tree = ta if ta is not None else tb
            if tree is not None:
                cardenc.extend_bound(run.solver, tree, k.lower_bound)
        run.stats.merges += 1
        run.emit(
            "lambda",
            partition=k.id,
            scope=k.soft_ids,
            relaxed=frozenset(i for i in k.soft_ids if i in run.relaxed),
            value=k.lower_bound,
        )
        trees[k.id], model = _refine(run, k, tree)
        live[k.id] = k
    return run.finish(model)


def solve(
    formula: WcnfFormula,
    algorithm: str = "part-msu3",
    graph_model: str = "res",
    merge_mode: str = "balanced",
    seed: int = 0,
    timeout: float | None = None,
    callback: Callback | None = None,
) -> MaxSatResult:
    if algorithm == "linear-su":
        return solve_linear_sat_unsat(formula, seed, timeout, callback)
    if algorithm == "linear-us":
        return solve_linear_unsat_sat(formula, seed, timeout, callback)
    if algorithm == "msu3":
        return solve_msu3(formula, seed, timeout, callback)
    if algorithm == "part-msu3":
        return solve_partition_msu3(formula, graph_model, merge_mode, seed, timeout, callback)
    raise ValueError(f"unknown algorithm {algorithm!r}")


_CHUNK = 1 << 16


def min_cost(num_vars: int, hard: Sequence[Sequence[int]], soft: Sequence[Sequence[int]], max_vars: int = 24) -> int | None:
    """Minimum number of falsified ``soft`` clauses over assignments satisfying ``hard``.

    Plain enumeration of all ``2**num_vars`` assignments; ``None`` if ``hard``
    has no model.
    """
    if num_vars > max_vars:
        raise ValueError(f"{num_vars} variables exceed the brute-force budget of {max_vars}")
    best: int | None = None
    shifts = np.arange(num_vars, dtype=np.int64)
    for start in range(0, 1 << num_vars, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, 1 << num_vars), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(bool)

        def sat(clause: Sequence[int]) -> np.ndarray:
            out = np.zeros(len(idx), dtype=bool)
            for l in clause:
                col = bits[:, abs(l) - 1]
                out |= col if l > 0 else ~col
            return out

        ok = np.ones(len(idx), dtype=bool)
        for c in hard:
            ok &= sat(c)
        if not ok.any():
            continue
        cost = np.zeros(len(idx), dtype=np.int64)
        for c in soft:
            cost += ~sat(c)
        chunk_best = int(cost[ok].min())
        best = chunk_best if best is None else min(best, chunk_best)
    return best


def brute_force_optimum(formula: WcnfFormula, max_vars: int = 24) -> int | None:
    """Optimum cost by enumeration; ``None`` when the hard clauses are unsatisfiable."""
    return min_cost(
        formula.num_vars,
        [c.lits for c in formula.hard],
        [c.lits for c in formula.soft],
        max_vars=max_vars,
    )
