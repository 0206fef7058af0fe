"""Greedy modularity maximization (Louvain method) on a :class:`WeightedGraph`.

Local moving visits nodes in ascending order and only accepts strictly
improving moves (by more than ``EPS``), so the result is a deterministic
function of the graph. With ``shuffle=True`` the visiting order of every
pass is permuted by ``random.Random(seed)`` instead.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .graphrep import Node, WeightedGraph

EPS = 1e-9


@dataclass
class CommunityAssignment:
    community_of: dict[Node, int]
    num_communities: int
    modularity: float
    history: list[float] = field(default_factory=list, compare=False)  # Q after each pass

    def members(self) -> list[list[Node]]:
        out: list[list[Node]] = [[] for _ in range(self.num_communities)]
        for u in sorted(self.community_of):
            out[self.community_of[u]].append(u)
        return out

    def to_csv(self) -> str:
        rows = ["node_id,community_index"]
        rows += [f"{u},{c}" for u, c in sorted(self.community_of.items())]
        rows.append(f"# modularity,{self.modularity!r}")
        return "\n".join(rows) + "\n"


def modularity(g: WeightedGraph, community_of: dict[Node, int] | CommunityAssignment) -> float:
    """Weighted Newman-Girvan modularity; 0.0 for a graph without edges."""
    if isinstance(community_of, CommunityAssignment):
        community_of = community_of.community_of
    m = g.total_weight()
    if m == 0:
        return 0.0
    internal: dict[int, float] = {}
    tot: dict[int, float] = {}
    for u in g.nodes:
        c = community_of[u]
        tot[c] = tot.get(c, 0.0) + sum(g.neighbors(u).values())
    for u, v, w in g.edges():
        if community_of[u] == community_of[v]:
            c = community_of[u]
            internal[c] = internal.get(c, 0.0) + w
    return sum(internal.get(c, 0.0) / m - (t / (2 * m)) ** 2 for c, t in tot.items())


class _Level:
    """Aggregated graph: ``adj[i][j]`` over node indices, ``loops[i]`` = internal weight."""

    def __init__(self, adj: list[dict[int, float]], loops: list[float]):
        self.adj = adj
        self.loops = loops
        self.k = [sum(a.values()) + 2 * s for a, s in zip(adj, loops)]
        self.m2 = sum(self.k)

    def quality(self, comm: list[int]) -> float:
        if self.m2 == 0:
            return 0.0
        inside: dict[int, float] = {}
        tot: dict[int, float] = {}
        for i, c in enumerate(comm):
            tot[c] = tot.get(c, 0.0) + self.k[i]
            s = 2 * self.loops[i] + sum(w for j, w in self.adj[i].items() if comm[j] == c)
            inside[c] = inside.get(c, 0.0) + s
        return sum(inside.get(c, 0.0) / self.m2 - (t / self.m2) ** 2 for c, t in tot.items())

    def move_nodes(self, order: list[int], start: list[int] | None = None) -> tuple[list[int], bool]:
        n = len(self.adj)
        comm = list(range(n)) if start is None else list(start)
        if self.m2 == 0:
            return comm, False
        tot = [0.0] * n
        for i, c in enumerate(comm):
            tot[c] += self.k[i]
        m2 = self.m2
        improved = False
        moved = True
        while moved:
            moved = False
            for i in order:
                ci = comm[i]
                ki = self.k[i]
                links: dict[int, float] = {}
                for j, w in self.adj[i].items():
                    links[comm[j]] = links.get(comm[j], 0.0) + w
                tot[ci] -= ki
                best, best_gain = ci, links.get(ci, 0.0) - tot[ci] * ki / m2
                for c in sorted(links):
                    gain = links[c] - tot[c] * ki / m2
                    if gain > best_gain + EPS:
                        best, best_gain = c, gain
                tot[best] += ki
                if best != ci:
                    comm[i] = best
                    moved = improved = True
        return comm, improved

    def aggregate(self, comm: list[int]) -> tuple["_Level", list[int]]:
        labels: dict[int, int] = {}
        for c in comm:
            labels.setdefault(c, len(labels))
        dense = [labels[c] for c in comm]
        adj: list[dict[int, float]] = [{} for _ in labels]
        loops = [0.0] * len(labels)
        for i, a in enumerate(self.adj):
            ci = dense[i]
            loops[ci] += self.loops[i]
            for j, w in a.items():
                cj = dense[j]
                if ci == cj:
                    loops[ci] += w / 2  # each internal edge is seen from both ends
                else:
                    adj[ci][cj] = adj[ci].get(cj, 0.0) + w
        return _Level(adj, loops), dense


def _louvain(base: _Level, order_for, refine: bool) -> tuple[list[int], list[float]]:
    level = base
    levels = [level]
    maps: list[list[int]] = []  # maps[i][node of levels[i]] -> node of levels[i + 1]
    history = [level.quality(list(range(len(level.adj))))]
    while True:
        comm, improved = level.move_nodes(order_for(level))
        if not improved:
            break
        q = level.quality(comm)
        if q <= history[-1] + EPS:
            break
        history.append(q)
        level, dense = level.aggregate(comm)
        levels.append(level)
        maps.append(dense)
    comm = list(range(len(level.adj)))
    for depth in range(len(maps) - 1, -1, -1):
        comm = [comm[c] for c in maps[depth]]
        if refine:
            lv = levels[depth]
            moved, improved = lv.move_nodes(order_for(lv), start=comm)
            if improved and lv.quality(moved) > lv.quality(comm) + EPS:
                comm = moved
                history.append(lv.quality(comm))
    return comm, history


def detect_communities(
    g: WeightedGraph,
    seed: int = 0,
    shuffle: bool = False,
    refine: bool = True,
    restarts: int = 8,
) -> CommunityAssignment:
    """Louvain: local moving plus aggregation until a pass yields no gain.

    With ``refine`` the final partition is projected back through every
    level and local moving resumes from it there (multi-level refinement).
    ``restarts`` extra runs visit nodes in orders drawn from
    ``random.Random(seed)``; the best modularity wins, ties going to the
    earliest run. The result is a deterministic function of ``(g, seed)``.
    """
    nodes = g.nodes
    index = {u: i for i, u in enumerate(nodes)}
    adj = [{index[v]: w for v, w in g.neighbors(u).items()} for u in nodes]
    base = _Level(adj, [0.0] * len(nodes))
    rng = random.Random(seed)

    def shuffled(lv: _Level) -> list[int]:
        order = list(range(len(lv.adj)))
        rng.shuffle(order)
        return order

    def ascending(lv: _Level) -> list[int]:
        return list(range(len(lv.adj)))

    best, history = _louvain(base, shuffled if shuffle else ascending, refine)
    best_q = base.quality(best)
    if base.m2 > 0:
        for _ in range(restarts):
            comm, hist = _louvain(base, shuffled, refine)
            q = base.quality(comm)
            if q > best_q + EPS:
                best, best_q, history = comm, q, hist
    # relabel densely in order of each community's smallest node
    relabel: dict[int, int] = {}
    for c in best:
        relabel.setdefault(c, len(relabel))
    community_of = {u: relabel[best[i]] for i, u in enumerate(nodes)}
    return CommunityAssignment(community_of, len(relabel), modularity(g, community_of), history)
