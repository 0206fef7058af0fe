"""Incremental CDCL SAT solver with assumptions and failed-assumption cores.

The solver follows the usual MiniSat layout: two watched literals, first-UIP
learning with local minimization, VSIDS-style activities over a lazy binary
heap, phase saving, geometric restarts and LBD-based learnt clause reduction.
Clauses can be added and variables allocated between ``solve`` calls, so one
instance serves a whole MaxSAT run.

Externally literals are DIMACS integers; internally literal ``2*v`` is ``v``
and ``2*v + 1`` is ``-v``.
"""
from __future__ import annotations

import enum
import heapq
import itertools
import random
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

_TRUE, _FALSE, _UNDEF = 1, -1, 0


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


class SolveTimeout(Exception):
    """The deadline passed to :meth:`Solver.solve` expired."""


@dataclass(frozen=True)
class SolveOutcome:
    """Result triple of one SAT call.

    ``model[v - 1]`` is the value of variable ``v`` (present iff SAT);
    ``core`` is a subset of the assumption literals (present iff UNSAT).
    """

    status: Status
    model: tuple[bool, ...] | None = None
    core: tuple[int, ...] | None = None

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


def _ilit(lit: int) -> int:
    return (lit << 1) if lit > 0 else ((-lit) << 1) | 1


def _elit(ilit: int) -> int:
    return -(ilit >> 1) if ilit & 1 else ilit >> 1


class Solver:
    """Incremental CDCL solver. A handle is single-threaded."""

    instances_created = itertools.count()  # process-wide, for tests

    def __init__(self, seed: int = 0, shrink_cores: bool = True):
        next(Solver.instances_created)
        self.shrink_cores = shrink_cores
        self.num_vars = 0
        self.num_solve_calls = 0
        self.num_conflicts = 0
        self.num_decisions = 0
        self.num_propagations = 0
        self.added: list[tuple[int, ...]] = []  # every clause as passed to add_clause
        self._rng = random.Random(seed)
        self._ok = True
        # per internal literal
        self._val: list[int] = [_UNDEF, _UNDEF]
        self._watches: list[list[list[int]]] = [[], []]
        # per variable
        self._level: list[int] = [0]
        self._reason: list[list[int] | None] = [None]
        self._phase: list[bool] = [False]
        self._activity: list[float] = [0.0]
        self._seen: list[bool] = [False]
        self._trail: list[int] = []
        self._trail_lim: list[int] = []
        self._qhead = 0
        self._heap: list[tuple[float, int]] = []
        self._var_inc = 1.0
        self._var_decay = 0.95
        self._learnts: list[list[int]] = []
        self._lbd: dict[int, int] = {}
        self._max_learnts = 2000.0

    # -- variables and clauses ------------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        v = self.num_vars
        self._val += [_UNDEF, _UNDEF]
        self._watches += [[], []]
        self._level.append(0)
        self._reason.append(None)
        self._phase.append(False)
        self._activity.append(self._rng.random() * 1e-5)
        self._seen.append(False)
        heapq.heappush(self._heap, (-self._activity[v], v))
        return v

    def ensure_vars(self, n: int) -> None:
        while self.num_vars < n:
            self.new_var()

    def add_clause(self, lits: Iterable[int]) -> None:
        """Add a clause permanently. Literals must reference allocated variables."""
        lits = tuple(lits)
        for l in lits:
            if l == 0 or abs(l) > self.num_vars:
                raise ValueError(f"literal {l} references an unallocated variable")
        self.added.append(lits)
        if not self._ok:
            return
        if self._trail_lim:
            self._backtrack(0)
        val = self._val
        clause: list[int] = []
        seen: set[int] = set()
        for l in lits:
            il = _ilit(l)
            if il ^ 1 in seen or val[il] == _TRUE:
                return  # tautology or satisfied at level 0
            if il in seen or val[il] == _FALSE:
                continue
            seen.add(il)
            clause.append(il)
        if not clause:
            self._ok = False
        elif len(clause) == 1:
            self._assign(clause[0], None)
            if self._propagate() is not None:
                self._ok = False
        else:
            self._watches[clause[0]].append(clause)
            self._watches[clause[1]].append(clause)

    @property
    def num_clauses(self) -> int:
        return len(self.added)

    def to_dimacs(self) -> str:
        """The clause database as passed in, in DIMACS CNF."""
        out = [f"p cnf {self.num_vars} {len(self.added)}"]
        out += [" ".join(map(str, (*c, 0))) for c in self.added]
        return "\n".join(out) + "\n"

    # -- solving --------------------------------------------------------------

    def solve(self, assumptions: Sequence[int] = (), deadline: float | None = None) -> SolveOutcome:
        """Solve under ``assumptions``; returns the (status, model, core) triple.

        On UNSAT the core is shrunk once by re-solving under the core itself.
        Raises :class:`SolveTimeout` once ``time.monotonic()`` passes ``deadline``.
        """
        for l in assumptions:
            if l == 0 or abs(l) > self.num_vars:
                raise ValueError(f"assumption {l} references an unallocated variable")
        self.num_solve_calls += 1
        out = self._search([_ilit(l) for l in assumptions], deadline)
        if self.shrink_cores and not out.sat and out.core and len(out.core) > 1:
            again = self._search([_ilit(l) for l in reversed(out.core)], deadline)
            assert not again.sat, "core re-solve must be UNSAT"
            if len(again.core) < len(out.core):
                out = again
        return out

    def _search(self, assumptions: list[int], deadline: float | None) -> SolveOutcome:
        if not self._ok:
            return SolveOutcome(Status.UNSAT, core=())
        self._backtrack(0)
        if self._propagate() is not None:
            self._ok = False
            return SolveOutcome(Status.UNSAT, core=())
        val = self._val
        restart_limit = 100.0
        conflicts_since_restart = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.num_conflicts += 1
                conflicts_since_restart += 1
                if not self._trail_lim:
                    self._ok = False
                    return SolveOutcome(Status.UNSAT, core=())
                learnt, bt_level, lbd = self._analyze(confl)
                self._backtrack(bt_level)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self._watches[learnt[0]].append(learnt)
                    self._watches[learnt[1]].append(learnt)
                    self._learnts.append(learnt)
                    self._lbd[id(learnt)] = lbd
                    self._assign(learnt[0], learnt)
                self._var_inc /= self._var_decay
                if deadline is not None and self.num_conflicts % 64 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    raise SolveTimeout()
                continue
            if conflicts_since_restart >= restart_limit:
                conflicts_since_restart = 0
                restart_limit *= 1.5
                self._backtrack(0)
                if len(self._learnts) >= self._max_learnts:
                    self._reduce_db()
                if deadline is not None and time.monotonic() > deadline:
                    raise SolveTimeout()
                continue
            nxt = -1
            while len(self._trail_lim) < len(assumptions):
                p = assumptions[len(self._trail_lim)]
                if val[p] == _TRUE:
                    self._trail_lim.append(len(self._trail))
                elif val[p] == _FALSE:
                    core = self._analyze_final(p)
                    self._backtrack(0)
                    return SolveOutcome(Status.UNSAT, core=core)
                else:
                    nxt = p
                    break
            if nxt < 0:
                nxt = self._pick_branch()
                if nxt < 0:
                    model = tuple(val[v << 1] == _TRUE for v in range(1, self.num_vars + 1))
                    self._backtrack(0)
                    return SolveOutcome(Status.SAT, model=model)
                self.num_decisions += 1
            self._trail_lim.append(len(self._trail))
            self._assign(nxt, None)

    # -- internals ------------------------------------------------------------

    def _assign(self, lit: int, reason: list[int] | None) -> None:
        v = lit >> 1
        self._val[lit] = _TRUE
        self._val[lit ^ 1] = _FALSE
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(lit)

    def _propagate(self) -> list[int] | None:
        val = self._val
        watches = self._watches
        trail = self._trail
        level = self._level
        reason = self._reason
        dl = len(self._trail_lim)
        confl = None
        while self._qhead < len(trail):
            p = trail[self._qhead]
            self._qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == _TRUE:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != _FALSE:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == _FALSE:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        confl = c
                    else:
                        v = first >> 1
                        val[first] = _TRUE
                        val[first ^ 1] = _FALSE
                        level[v] = dl
                        reason[v] = c
                        trail.append(first)
                        self.num_propagations += 1
            del ws[j:]
            if confl is not None:
                self._qhead = len(trail)
                return confl
        return None

    def _bump(self, v: int) -> None:
        act = self._activity
        act[v] += self._var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self._var_inc *= 1e-100
            self._rebuild_heap()

    def _rebuild_heap(self) -> None:
        val, act = self._val, self._activity
        self._heap = [(-act[v], v) for v in range(1, self.num_vars + 1) if val[v << 1] == _UNDEF]
        heapq.heapify(self._heap)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int, int]:
        seen, level, reason, trail = self._seen, self._level, self._reason, self._trail
        dl = len(self._trail_lim)
        learnt = [0]
        path = 0
        idx = len(trail) - 1
        c = confl
        p = -1
        while True:
            for q in (c if p < 0 else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            c = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        # local minimization: drop literals implied by the rest of the clause
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or any(not seen[x >> 1] and level[x >> 1] > 0 for x in r[1:]):
                keep.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = False
        learnt = keep
        bt = 0
        if len(learnt) > 1:
            best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = level[learnt[1] >> 1]
        lbd = len({level[q >> 1] for q in learnt})
        return learnt, bt, lbd

    def _analyze_final(self, p: int) -> tuple[int, ...]:
        """Failed assumption ``p`` (currently false): assumptions implying ``-p``."""
        seen, reason, level, trail = self._seen, self._reason, self._level, self._trail
        core = [_elit(p)]
        if not self._trail_lim:
            return tuple(core)
        seen[p >> 1] = True
        for i in range(len(trail) - 1, self._trail_lim[0] - 1, -1):
            x = trail[i] >> 1
            if seen[x]:
                r = reason[x]
                if r is None:
                    core.append(_elit(trail[i]))
                else:
                    for q in r[1:]:
                        if level[q >> 1] > 0:
                            seen[q >> 1] = True
                seen[x] = False
        seen[p >> 1] = False
        return tuple(core)

    def _backtrack(self, lvl: int) -> None:
        if len(self._trail_lim) <= lvl:
            return
        val, phase, act, heap, trail = self._val, self._phase, self._activity, self._heap, self._trail
        stop = self._trail_lim[lvl]
        for i in range(len(trail) - 1, stop - 1, -1):
            lit = trail[i]
            v = lit >> 1
            val[lit] = _UNDEF
            val[lit ^ 1] = _UNDEF
            phase[v] = not (lit & 1)
            heapq.heappush(heap, (-act[v], v))
        del trail[stop:]
        del self._trail_lim[lvl:]
        self._qhead = stop
        if len(heap) > 8 * self.num_vars + 64:
            self._rebuild_heap()

    def _pick_branch(self) -> int:
        heap, val = self._heap, self._val
        while heap:
            _, v = heapq.heappop(heap)
            if val[v << 1] == _UNDEF:
                return (v << 1) | (0 if self._phase[v] else 1)
        return -1

    def _reduce_db(self) -> None:
        """Drop the worse half of learnt clauses (by LBD, then length). Level 0 only."""
        lbd = self._lbd
        ranked = sorted(self._learnts, key=lambda c: (lbd[id(c)], len(c)))
        half = len(ranked) // 2
        keep, drop = ranked[:half], ranked[half:]
        keep += [c for c in drop if lbd[id(c)] <= 2]
        removed = {id(c) for c in drop if lbd[id(c)] > 2}
        if removed:
            self._watches = [[c for c in ws if id(c) not in removed] for ws in self._watches]
            for k in removed:
                del lbd[k]
        self._learnts = keep
        self._max_learnts *= 1.1
