"""Incremental totalizer for upper-bound cardinality constraints.

A tree node counts the true literals among its inputs in unary: output
``o_j`` is forced true whenever at least ``j`` inputs are true. Only that
(upward) direction is encoded, which is all an ``at most`` constraint needs:
``sum(inputs) <= k`` is enforced by assuming ``-o_{k+1}``.

Outputs are allocated lazily, ``bound + 1`` at a time, so a tree can be
extended to larger bounds and joined with another tree without touching any
clause already in the solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .satcore import Solver


@dataclass(eq=False)
class TotalizerTree:
    inputs: tuple[int, ...]
    outputs: list[int] = field(default_factory=list)
    encoded_up_to: int = 0
    left: "TotalizerTree | None" = None
    right: "TotalizerTree | None" = None
    clauses: list[tuple[int, ...]] = field(default_factory=list)  # added at this node

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def total_clauses(self) -> int:
        n = len(self.clauses)
        if not self.is_leaf:
            n += self.left.total_clauses() + self.right.total_clauses()
        return n

    def iter_clauses(self):
        yield from self.clauses
        if not self.is_leaf:
            yield from self.left.iter_clauses()
            yield from self.right.iter_clauses()


def _leaf(lit: int) -> TotalizerTree:
    return TotalizerTree(inputs=(lit,), outputs=[lit], encoded_up_to=1)


def _grow(s: Solver, node: TotalizerTree, width: int) -> None:
    """Materialize outputs ``o_1..o_width`` of ``node`` (``width`` capped at its size)."""
    width = min(width, len(node.inputs))
    old = len(node.outputs)
    if node.is_leaf or width <= old:
        return
    a, b = node.left, node.right
    _grow(s, a, width)
    _grow(s, b, width)
    for _ in range(old, width):
        node.outputs.append(s.new_var())
    out = node.outputs
    for i in range(0, len(a.outputs) + 1):
        for j in range(0, len(b.outputs) + 1):
            if old < i + j <= width:
                lits = [out[i + j - 1]]
                if i:
                    lits.append(-a.outputs[i - 1])
                if j:
                    lits.append(-b.outputs[j - 1])
                clause = tuple(lits)
                s.add_clause(clause)
                node.clauses.append(clause)


def _tree(inputs: Sequence[int]) -> TotalizerTree:
    if len(inputs) == 1:
        return _leaf(inputs[0])
    mid = len(inputs) // 2
    left, right = _tree(inputs[:mid]), _tree(inputs[mid:])
    return TotalizerTree(inputs=tuple(inputs), left=left, right=right)


def build(s: Solver, inputs: Sequence[int], bound: int) -> TotalizerTree:
    """Encode ``sum(inputs) <= bound`` (enforced later via :func:`enforce_bound`)."""
    if not inputs:
        raise ValueError("totalizer needs at least one input")
    if bound < 0:
        raise ValueError(f"negative bound {bound}")
    if len(set(abs(l) for l in inputs)) != len(inputs):
        raise ValueError("totalizer inputs must be distinct variables")
    t = _tree(list(inputs))
    _grow(s, t, bound + 1)
    t.encoded_up_to = bound
    return t


def enforce_bound(t: TotalizerTree, bound: int) -> list[int]:
    """Assumption literals enforcing ``sum(inputs) <= bound``."""
    if bound >= len(t.inputs):
        return []
    if bound < 0:
        raise ValueError(f"negative bound {bound}")
    if bound > t.encoded_up_to:
        raise ValueError(f"bound {bound} not encoded (encoded up to {t.encoded_up_to})")
    return [-t.outputs[bound]]


def extend_bound(s: Solver, t: TotalizerTree, new_bound: int) -> None:
    """Add only the clauses needed to enforce bounds up to ``new_bound``."""
    if new_bound <= t.encoded_up_to:
        return
    _grow(s, t, new_bound + 1)
    t.encoded_up_to = new_bound


def join(s: Solver, a: TotalizerTree, b: TotalizerTree, bound: int) -> TotalizerTree:
    """New root over ``a`` and ``b``; the subtrees' clauses are reused."""
    if bound < 0:
        raise ValueError(f"negative bound {bound}")
    if set(map(abs, a.inputs)) & set(map(abs, b.inputs)):
        raise ValueError("joined totalizers must have disjoint inputs")
    t = TotalizerTree(inputs=a.inputs + b.inputs, left=a, right=b)
    _grow(s, t, bound + 1)
    t.encoded_up_to = bound
    return t
