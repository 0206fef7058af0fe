"""Soft-clause partitions and the order in which they are merged.

Partitions come from the communities that contain at least one soft clause
node. Two merge orders are supported: sequential (left fold in partition id
order) and weighted balanced, which pairs partitions round by round, always
taking the strongest remaining connection first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .community import CommunityAssignment
from .graphrep import CLAUSE, ClauseNode, WeightedGraph
from .wcnf import WcnfFormula


@dataclass
class Partition:
    id: int
    soft_ids: frozenset[int]
    community: int | None = None
    relax_vars: set[int] = field(default_factory=set)
    lower_bound: int = 0


class StrengthMatrix:
    """Symmetric connection strengths between partition ids."""

    def __init__(self, values: Mapping[tuple[int, int], float] | None = None):
        self._d: dict[frozenset[int], float] = {}
        for (i, j), w in (values or {}).items():
            self[i, j] = w

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, j = key
        return self._d.get(frozenset((i, j)), 0.0)

    def __setitem__(self, key: tuple[int, int], value: float) -> None:
        i, j = key
        if i == j:
            raise KeyError("diagonal strengths are undefined")
        self._d[frozenset((i, j))] = value

    def merged(self, i: int, j: int, k: int, others: Sequence[int]) -> None:
        """Record ``d[k, l] = d[i, l] + d[j, l]`` for every ``l`` in ``others``."""
        for l in others:
            if l not in (i, j, k):
                self[k, l] = self[i, l] + self[j, l]


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    result: int


@dataclass
class MergeSchedule:
    steps: list[MergeStep]
    leaves: list[int]

    def __len__(self) -> int:
        return len(self.steps)

    def depths(self) -> dict[int, int]:
        """Number of merges each initial partition goes through."""
        depth = {p: 0 for p in self.leaves}
        members = {p: [p] for p in self.leaves}
        for s in self.steps:
            group = members.pop(s.left) + members.pop(s.right)
            for p in group:
                depth[p] += 1
            members[s.result] = group
        return depth

    def render(self) -> str:
        """Text tree of the merge order, root first."""
        children = {s.result: (s.left, s.right) for s in self.steps}
        root = self.steps[-1].result if self.steps else (self.leaves[0] if self.leaves else None)
        lines: list[str] = []

        def walk(node: int, prefix: str) -> None:
            kids = children.get(node)
            lines.append(f"{prefix}{'M' if kids else 'P'}{node}")
            if kids:
                for k in kids:
                    walk(k, prefix + "  ")

        if root is not None:
            walk(root, "")
        return "\n".join(lines) + "\n"


def extract_partitions(formula: WcnfFormula, a: CommunityAssignment) -> list[Partition]:
    """One partition per community holding soft clauses, in community index order."""
    soft_ids = {c.id for c in formula.soft}
    groups: dict[int, set[int]] = {}
    for node, comm in a.community_of.items():
        if node.kind == CLAUSE and node.index in soft_ids:
            groups.setdefault(comm, set()).add(node.index)
    missing = soft_ids - set().union(*groups.values()) if groups else soft_ids
    if missing:
        raise ValueError(f"soft clauses {sorted(missing)} missing from the assignment")
    return [Partition(i, frozenset(groups[c]), community=c) for i, c in enumerate(sorted(groups))]


def connection_strengths(g: WeightedGraph, a: CommunityAssignment, parts: Sequence[Partition]) -> StrengthMatrix:
    """``d[i, j]``: total weight of edges between the communities of partitions i and j."""
    part_of = {p.community: p.id for p in parts}
    d = StrengthMatrix()
    for u, v, w in g.edges():
        pu = part_of.get(a.community_of[u])
        pv = part_of.get(a.community_of[v])
        if pu is not None and pv is not None and pu != pv:
            d[pu, pv] += w
    return d


def _check(parts: Sequence[Partition]) -> list[int]:
    if len(parts) < 2:
        raise ValueError("merging needs at least two partitions")
    return [p.id for p in parts]


def schedule_sequential(parts: Sequence[Partition]) -> MergeSchedule:
    ids = sorted(_check(parts))
    next_id = max(ids) + 1
    steps = []
    acc = ids[0]
    for p in ids[1:]:
        steps.append(MergeStep(acc, p, next_id))
        acc = next_id
        next_id += 1
    return MergeSchedule(steps, ids)


def schedule_balanced(parts: Sequence[Partition], d: StrengthMatrix) -> MergeSchedule:
    """Round-based greedy pairing by decreasing strength.

    Ties go to the lexicographically smallest ``(min id, partner id)`` pair.
    An odd partition left over in a round is carried into the next round as is.
    """
    ids = sorted(_check(parts))
    d = StrengthMatrix({(i, j): d[i, j] for i in ids for j in ids if i < j})
    next_id = max(ids) + 1
    steps: list[MergeStep] = []
    live = ids
    while len(live) > 1:
        unpaired = list(live)
        merged: list[int] = []
        while len(unpaired) > 1:
            pos = {p: k for k, p in enumerate(unpaired)}
            best = max(
                ((i, j) for i in unpaired for j in unpaired if i < j),
                key=lambda ij: (d[ij], -ij[0], -ij[1]),
            )
            i, j = sorted(best, key=pos.__getitem__)
            unpaired.remove(i)
            unpaired.remove(j)
            k = next_id
            next_id += 1
            d.merged(i, j, k, unpaired + merged)
            steps.append(MergeStep(i, j, k))
            merged.append(k)
        live = merged + unpaired
    return MergeSchedule(steps, ids)
