"""Weighted graph models of a partial MaxSAT formula.

* CVIG: bipartite clause/variable incidence graph; edge ``(clause, x)``
  weighs ``I(x) / |clause|`` where ``I(x) = 1 + sum(1/|w|)`` over the soft
  clauses ``w`` mentioning ``x`` in either polarity.
* RES: one node per clause; two clauses are joined when they resolve to a
  non-tautological resolvent, with weight ``1 / |resolvent|``.

Node and edge iteration is sorted so that community detection downstream is
reproducible.
"""
from __future__ import annotations

import io
from collections import defaultdict
from itertools import product
from typing import Iterable, Iterator, NamedTuple

from .wcnf import Clause, WcnfFormula

CLAUSE, VAR = 0, 1


class Node(NamedTuple):
    """Graph vertex: ``Node(CLAUSE, clause_id)`` or ``Node(VAR, variable)``."""

    kind: int
    index: int

    def __str__(self) -> str:
        return f"{'w' if self.kind == CLAUSE else 'x'}{self.index}"


def ClauseNode(clause_id: int) -> Node:
    return Node(CLAUSE, clause_id)


def VarNode(var: int) -> Node:
    return Node(VAR, var)


class WeightedGraph:
    """Undirected graph with positive edge weights and no self-loops."""

    def __init__(self, nodes: Iterable[Node] = ()):
        self._adj: dict[Node, dict[Node, float]] = {n: {} for n in sorted(set(nodes))}

    def add_node(self, u: Node) -> None:
        self._adj.setdefault(u, {})

    def add_edge(self, u: Node, v: Node, weight: float) -> None:
        if u == v:
            raise ValueError(f"self-loop on {u}")
        if weight <= 0:
            raise ValueError(f"non-positive weight {weight} on ({u}, {v})")
        self.add_node(u)
        self.add_node(v)
        self._adj[u][v] = weight
        self._adj[v][u] = weight

    @property
    def nodes(self) -> list[Node]:
        return sorted(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, u: Node) -> bool:
        return u in self._adj

    def neighbors(self, u: Node) -> dict[Node, float]:
        return self._adj[u]

    def weight(self, u: Node, v: Node) -> float:
        """Edge weight, 0.0 if ``u`` and ``v`` are not adjacent."""
        return self._adj.get(u, {}).get(v, 0.0)

    def degree(self, u: Node) -> int:
        return len(self._adj[u])

    def edges(self) -> Iterator[tuple[Node, Node, float]]:
        """Each edge once as ``(u, v, w)`` with ``u < v``, sorted."""
        for u in self.nodes:
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self._adj.values()) // 2

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges())

    def edge_set(self) -> set[frozenset[Node]]:
        return {frozenset((u, v)) for u, v, _ in self.edges()}

    def to_dot(self, communities: dict[Node, int] | None = None) -> str:
        out = ["graph G {"]
        for u in self.nodes:
            label = f' [label="{u}"' + (f", group={communities[u]}" if communities else "") + "]"
            out.append(f'  "{u}"{label};')
        for u, v, w in self.edges():
            out.append(f'  "{u}" -- "{v}" [weight={w:.6g}];')
        out.append("}")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("u,v,weight\n")
        for u, v, w in self.edges():
            buf.write(f"{u},{v},{w!r}\n")
        return buf.getvalue()


def incidence(formula: WcnfFormula, var: int) -> float:
    """``1 + sum(1/|w|)`` over soft clauses ``w`` containing ``var`` in either polarity."""
    if not 1 <= var <= formula.num_vars:
        raise ValueError(f"variable {var} out of range 1..{formula.num_vars}")
    return 1.0 + sum(1.0 / len(c) for c in formula.soft if var in c.variables)


def _incidences(formula: WcnfFormula) -> dict[int, float]:
    inc: dict[int, float] = defaultdict(lambda: 1.0)
    for c in formula.soft:
        for v in c.variables:
            inc[v] += 1.0 / len(c)
    return inc


def build_cvig(formula: WcnfFormula) -> WeightedGraph:
    inc = _incidences(formula)
    g = WeightedGraph(ClauseNode(c.id) for c in formula.clauses)
    for c in formula.clauses:
        for v in sorted(c.variables):
            g.add_edge(ClauseNode(c.id), VarNode(v), inc[v] / len(c))
    return g


def resolvent(a: Clause, b: Clause, var: int) -> tuple[int, ...] | None:
    """Resolvent of ``a`` and ``b`` on ``var``; ``None`` if it is a tautology."""
    lits = dict.fromkeys(l for l in a.lits + b.lits if abs(l) != var)
    if any(-l in lits for l in lits):
        return None
    return tuple(lits)


class ResPairLimitExceeded(RuntimeError):
    pass


def build_res(formula: WcnfFormula, max_pairs: int | None = None) -> WeightedGraph:
    """RES graph; ``max_pairs`` bounds the clash pairs examined (``None``: no limit)."""
    clauses = formula.clauses
    by_id = {c.id: c for c in clauses}
    pos: dict[int, list[int]] = defaultdict(list)
    neg: dict[int, list[int]] = defaultdict(list)
    for c in clauses:
        for l in c.lits:
            (pos if l > 0 else neg)[abs(l)].append(c.id)
    g = WeightedGraph(ClauseNode(c.id) for c in clauses)
    examined = 0
    done: set[tuple[int, int]] = set()
    for v in sorted(pos):
        for i, j in product(pos[v], neg.get(v, ())):
            key = (i, j) if i < j else (j, i)
            if key in done:
                continue
            done.add(key)
            examined += 1
            if max_pairs is not None and examined > max_pairs:
                raise ResPairLimitExceeded(f"RES construction exceeded {max_pairs} clause pairs")
            r = resolvent(by_id[i], by_id[j], v)
            if r is None:
                continue
            g.add_edge(ClauseNode(i), ClauseNode(j), 1.0 / len(r) if r else 1.0)
    return g
