"""Instance generators: random fuzz formulas and block-structured formulas."""
from __future__ import annotations

import random
from pathlib import Path

from .wcnf import WcnfFormula, dump_wcnf, make_formula


def example_formula(with_blocked: bool = False) -> WcnfFormula:
    """Three hard clauses, two unit soft clauses; optimum 1.

    ``with_blocked`` appends the soft clause ``(-x1 or -x2)``, which has no
    non-tautological resolvent with any other clause.
    """
    hard = [(1, 2), (-2, 3), (-1, -3)]
    soft = [(-1,), (-3,)]
    if with_blocked:
        soft.append((-1, -2))
    return make_formula(hard, soft, num_vars=3)


def random_formula(
    rng: random.Random, max_vars: int = 15, max_clauses: int = 60, max_soft: int = 12, max_len: int = 3
) -> WcnfFormula:
    """Random partial MaxSAT formula; hard clauses may well be unsatisfiable."""
    n = rng.randint(1, max_vars)
    n_soft = rng.randint(0, max_soft)
    n_hard = rng.randint(0, max_clauses - n_soft)

    def clause() -> tuple[int, ...]:
        k = rng.randint(1, max_len)
        return tuple(rng.choice((-1, 1)) * rng.randint(1, n) for _ in range(k))

    return make_formula([clause() for _ in range(n_hard)], [clause() for _ in range(n_soft)], num_vars=n)


def ring_blocks(blocks: int, conflicts: int, size: int = 4) -> WcnfFormula:
    """Independent blocks with a known optimum of ``conflicts``.

    Each block is an implication ring ``v1 -> v2 -> ... -> v1`` (hard) with
    unit softs ``(v_i)``. The first ``conflicts`` blocks also get a soft
    ``(-v1)``, which costs exactly one clause in that block. Blocks share no
    variables, so each forms its own community.
    """
    hard, soft = [], []
    for b in range(blocks):
        v = [b * size + i + 1 for i in range(size)]
        for i in range(size):
            hard.append((-v[i], v[(i + 1) % size]))
        soft += [(x,) for x in v]
        if b < conflicts:
            soft.append((-v[0],))
    return make_formula(hard, soft, num_vars=blocks * size)


def community_formula(
    rng: random.Random,
    blocks: int = 5,
    block_vars: int = 12,
    hard_ratio: float = 2.0,
    soft_per_block: int = 8,
    links: int = 2,
) -> WcnfFormula:
    """Block-structured formula: dense random 3-clauses inside blocks, few links between.

    Hard clauses are built to agree with a planted assignment, so the hard
    part is satisfiable; soft units pick random polarities and conflict with
    the planted structure at random.
    """
    n = blocks * block_vars
    planted = [rng.random() < 0.5 for _ in range(n + 1)]

    def lit(v: int) -> int:
        return v if rng.random() < 0.5 else -v

    def satisfied(c: tuple[int, ...]) -> bool:
        return any(planted[abs(l)] == (l > 0) for l in c)

    hard, soft = [], []
    for b in range(blocks):
        lo = b * block_vars + 1
        vars_ = list(range(lo, lo + block_vars))
        target = int(hard_ratio * block_vars)
        while target:
            c = tuple(lit(v) for v in rng.sample(vars_, 3))
            if satisfied(c):
                hard.append(c)
                target -= 1
        for v in rng.sample(vars_, min(soft_per_block, block_vars)):
            soft.append((lit(v),))
    for _ in range(links * blocks):
        a, b = rng.sample(range(blocks), 2)
        u = rng.randint(a * block_vars + 1, (a + 1) * block_vars)
        w = rng.randint(b * block_vars + 1, (b + 1) * block_vars)
        c = (lit(u), lit(w))
        while not satisfied(c):
            c = (lit(u), lit(w))
        hard.append(c)
    return make_formula(hard, soft, num_vars=n)


def write_minisuite(directory: str | Path, count: int = 50, seed: int = 0) -> list[Path]:
    """Write ``count`` block-structured instances to ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    paths = []
    for i in range(count):
        f = community_formula(
            rng,
            blocks=rng.randint(4, 8),
            block_vars=rng.randint(10, 16),
            hard_ratio=rng.uniform(1.5, 2.5),
            soft_per_block=rng.randint(6, 10),
            links=rng.randint(1, 2),
        )
        p = out / f"block-{i:03d}.wcnf"
        p.write_text(f"c block-structured instance {i} (seed {seed})\n" + dump_wcnf(f))
        paths.append(p)
    return paths
