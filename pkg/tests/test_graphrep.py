import random
from fractions import Fraction

import pytest

from maxpart.generators import example_formula, random_formula
from maxpart.graphrep import (
    ClauseNode,
    ResPairLimitExceeded,
    VarNode,
    WeightedGraph,
    build_cvig,
    build_res,
    incidence,
    resolvent,
)
from maxpart.wcnf import Clause, make_formula, normalize


def w(i):
    """Clause node for the 1-based clause label used in hand examples."""
    return ClauseNode(i - 1)


def x(v):
    return VarNode(v)


def test_incidence_values():
    f = example_formula()
    assert incidence(f, 1) == 2
    assert incidence(f, 2) == 1
    assert incidence(f, 3) == 2
    with pytest.raises(ValueError):
        incidence(f, 0)
    with pytest.raises(ValueError):
        incidence(f, 4)


def test_incidence_counts_either_polarity():
    f = make_formula([], [(1, 2), (-1,), (2, 3, -1)])
    assert incidence(f, 1) == pytest.approx(1 + 1 / 2 + 1 + 1 / 3)


def test_cvig_worked_example():
    g = build_cvig(example_formula())
    expected = {
        frozenset(e)
        for e in [(x(1), w(1)), (x(1), w(3)), (x(1), w(4)), (x(2), w(1)), (x(2), w(2)), (x(3), w(2)), (x(3), w(3)), (x(3), w(5))]
    }
    assert g.edge_set() == expected
    assert g.weight(w(4), x(1)) == 2
    assert g.weight(w(1), x(2)) == pytest.approx(1 / 2)
    assert g.weight(w(3), x(3)) == pytest.approx(1)


def test_res_worked_example():
    g = build_res(example_formula())
    weights = {frozenset((u, v)): wt for u, v, wt in g.edges()}
    assert weights == {
        frozenset((w(4), w(1))): 1.0,
        frozenset((w(1), w(3))): 0.5,
        frozenset((w(1), w(2))): 0.5,
        frozenset((w(2), w(3))): 0.5,
        frozenset((w(2), w(5))): 1.0,
    }
    assert all(u.kind == v.kind == 0 for u, v, _ in g.edges())


def test_blocked_clause_is_isolated():
    g = build_res(example_formula(with_blocked=True))
    assert w(6) in g
    assert g.degree(w(6)) == 0
    assert g.num_edges == 5


def test_empty_formula():
    f = make_formula([], [], num_vars=0)
    assert len(build_cvig(f)) == 0
    assert len(build_res(f)) == 0


def test_empty_clause_resolves_to_nothing():
    f = make_formula([(1,)], [(-1,)])
    g = build_res(f)
    assert g.weight(ClauseNode(0), ClauseNode(1)) == 1.0


def test_resolvent():
    a, b = Clause(0, (1, 2)), Clause(1, (-1, 3, 2))
    assert resolvent(a, b, 1) == (2, 3)
    assert resolvent(Clause(0, (1, 2)), Clause(1, (-1, -2)), 1) is None


def clash_vars(a, b):
    return {abs(l) for l in a if -l in b}


def test_res_edge_iff_single_clash():
    rng = random.Random(3)
    for _ in range(2000):
        n = rng.randint(1, 5)
        lits = lambda: tuple(dict.fromkeys(rng.choice((-1, 1)) * rng.randint(1, n) for _ in range(rng.randint(1, 4))))
        a, b = lits(), lits()
        if Clause(0, a).is_tautology or Clause(1, b).is_tautology:
            continue
        f = make_formula([a, b], [], num_vars=n)
        edge = build_res(f).weight(ClauseNode(0), ClauseNode(1)) > 0
        assert edge == (len(clash_vars(a, b)) == 1), (a, b)


def test_res_weights_in_unit_interval():
    rng = random.Random(8)
    for _ in range(100):
        f = normalize(random_formula(rng))
        for u, v, wt in build_res(f).edges():
            assert 0 < wt <= 1
            a, b = f.clauses[u.index], f.clauses[v.index]
            (var,) = clash_vars(a.lits, b.lits)
            r = resolvent(a, b, var)
            assert Fraction(wt).limit_denominator(100) == Fraction(1, max(len(r), 1))
            assert (wt == 1) == (len(r) <= 1)


def test_cvig_degree_and_symmetry():
    rng = random.Random(9)
    for _ in range(100):
        f = normalize(random_formula(rng))
        g = build_cvig(f)
        for c in f.clauses:
            assert g.degree(ClauseNode(c.id)) == len(c.variables)
        for u, v, wt in g.edges():
            assert g.weight(u, v) == g.weight(v, u) == wt
            assert {u.kind, v.kind} == {0, 1}


def test_iteration_is_sorted():
    f = normalize(random_formula(random.Random(4)))
    g = build_res(f)
    assert g.nodes == sorted(g.nodes)
    edges = list(g.edges())
    assert edges == sorted(edges)


def test_max_pairs_limit():
    f = make_formula([(1, 2), (-1, 3), (-1, 4), (-1, 5)], [])
    build_res(f, max_pairs=3)
    with pytest.raises(ResPairLimitExceeded):
        build_res(f, max_pairs=2)


def test_graph_rejects_bad_edges():
    g = WeightedGraph()
    with pytest.raises(ValueError):
        g.add_edge(x(1), x(1), 1.0)
    with pytest.raises(ValueError):
        g.add_edge(x(1), x(2), 0.0)


def test_exports():
    g = build_res(example_formula())
    csv = g.to_csv().splitlines()
    assert csv[0] == "u,v,weight" and len(csv) == 6
    assert "w0,w1,0.5" in csv
    dot = g.to_dot({u: 0 for u in g.nodes})
    assert dot.startswith("graph G {") and dot.count("--") == 5
