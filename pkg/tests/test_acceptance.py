"""Acceptance criteria; each test records one PASS/FAIL line (see conftest)."""
import itertools
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from acceptance_report import report
from corpus import exhaustive_modularity, feasible_corpus, formula_corpus, graph_corpus, is_connected, trap_graphs
from maxpart import cardenc
from maxpart.community import detect_communities, modularity
from maxpart.engine import Status, brute_force_optimum, min_cost, solve
from maxpart.generators import example_formula, ring_blocks
from maxpart.graphrep import ClauseNode, VarNode, build_cvig, build_res
from maxpart.partition import extract_partitions
from maxpart.satcore import SolveTimeout, Solver
from maxpart.wcnf import normalize, read_wcnf

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parents[1]
MINISUITE = ROOT / "benchmarks" / "minisuite"

CONFIGS = [("linear-su", "res", "balanced"), ("linear-us", "res", "balanced"), ("msu3", "res", "balanced")] + [
    ("part-msu3", g, m) for g in ("cvig", "res") for m in ("seq", "balanced")
]
CORPUS_SIZE = 500


@pytest.fixture(scope="module")
def corpus():
    # hard parts of uniform random formulas are mostly unsatisfiable, so feasible
    # instances are drawn until there are enough; 10% infeasible ones ride along
    return feasible_corpus(CORPUS_SIZE, seed=2024, max_vars=15, max_clauses=60, max_soft=12)


def model_ok(formula, result):
    vals = [l > 0 for l in result.model]
    return len(vals) == formula.num_vars and formula.hard_satisfied(vals) and formula.cost(vals) == result.cost


def test_c1_oracle_equivalence(corpus):
    start = time.monotonic()
    failures = []
    unsat = 0
    for k, f in enumerate(corpus):
        expected = brute_force_optimum(f)
        unsat += expected is None
        for algo, graph, merge in CONFIGS:
            r = solve(f, algo, graph, merge)
            if expected is None:
                ok = r.status is Status.HARD_UNSAT
            else:
                ok = r.status is Status.OPTIMUM and r.cost == expected and model_ok(f, r)
            if not ok:
                failures.append((k, algo, graph, merge, r.cost, expected))
    elapsed = time.monotonic() - start
    ok = not failures and elapsed < 300
    report(1, "oracle equivalence", ok,
           f"{len(corpus)} instances x {len(CONFIGS)} configs ({unsat} hard-unsat), "
           f"{len(failures)} mismatches, {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed < 300


def test_c2_worked_example():
    start = time.monotonic()
    f = example_formula()
    w = lambda i: ClauseNode(i - 1)
    x = VarNode
    cvig_expected = {frozenset(e) for e in [(x(1), w(1)), (x(1), w(3)), (x(1), w(4)), (x(2), w(1)),
                                            (x(2), w(2)), (x(3), w(2)), (x(3), w(3)), (x(3), w(5))]}
    res_expected = {frozenset((w(4), w(1))): 1.0, frozenset((w(1), w(3))): 0.5, frozenset((w(1), w(2))): 0.5,
                    frozenset((w(2), w(3))): 0.5, frozenset((w(2), w(5))): 1.0}
    cvig_ok = build_cvig(f).edge_set() == cvig_expected
    res_ok = {frozenset((u, v)): wt for u, v, wt in build_res(f).edges()} == res_expected
    g6 = build_res(example_formula(with_blocked=True))
    isolated_ok = w(6) in g6 and g6.degree(w(6)) == 0
    costs = {f"{a}/{g}/{m}": solve(f, a, g, m).cost for a, g, m in CONFIGS}
    cost_ok = set(costs.values()) == {1}
    elapsed = time.monotonic() - start
    ok = cvig_ok and res_ok and isolated_ok and cost_ok and elapsed < 1
    report(2, "worked example", ok,
           f"cvig edges {cvig_ok}, res edges+weights {res_ok}, w6 isolated {isolated_ok}, "
           f"all costs 1 {cost_ok}, {elapsed:.2f}s")
    assert cvig_ok and res_ok and isolated_ok, (cvig_ok, res_ok, isolated_ok)
    assert cost_ok, costs
    assert elapsed < 1


# (blocks, conflicts, ring size, graph) -> partitions found by community detection on the
# constructed instance; frozen after the first run so a change in Louvain shows up here
GOLDEN_PARTITIONS = {
    (1, 0, 4, "res"): 4, (1, 1, 4, "res"): 4,
    (2, 0, 4, "res"): 4, (2, 1, 4, "res"): 4, (2, 2, 4, "res"): 4,
    (3, 1, 4, "res"): 4, (3, 3, 4, "res"): 6,
    (4, 2, 4, "cvig"): 6, (4, 4, 4, "res"): 4,
    (5, 0, 3, "res"): 5, (5, 2, 3, "cvig"): 5, (5, 5, 3, "res"): 5,
    (5, 0, 2, "cvig"): 5, (5, 5, 2, "res"): 5,
}


def test_c3_sat_call_identities():
    start = time.monotonic()
    bad = []
    for (blocks, conflicts, size, graph), n in GOLDEN_PARTITIONS.items():
        f = ring_blocks(blocks, conflicts, size)
        nf = normalize(f)
        g = build_cvig(nf) if graph == "cvig" else build_res(nf)
        found = len(extract_partitions(nf, detect_communities(g, seed=0)))
        us = solve(f, "linear-us")
        ms = solve(f, "msu3")
        checks = {
            "n": found == n,
            "optimum": us.cost == ms.cost == conflicts,
            "linear-us unsat": us.stats.unsat_calls == conflicts,
            "msu3 unsat": ms.stats.unsat_calls == conflicts,
            "msu3 sat": ms.stats.sat_calls == 1,
        }
        for merge in ("seq", "balanced"):
            pm = solve(f, "part-msu3", graph, merge)
            checks[f"{merge} partitions"] = pm.stats.partitions == n
            checks[f"{merge} sat 2n-1"] = pm.stats.sat_calls == 2 * n - 1
            checks[f"{merge} unsat"] = pm.stats.unsat_calls == ms.stats.unsat_calls == conflicts
            checks[f"{merge} cost"] = pm.cost == conflicts
        failed = [k for k, v in checks.items() if not v]
        if failed:
            bad.append(((blocks, conflicts, size, graph), failed))
    elapsed = time.monotonic() - start
    ok = not bad and elapsed < 30
    with_zero = sum(1 for k in GOLDEN_PARTITIONS if k[1] == 0)
    report(3, "SAT-call identities", ok,
           f"{len(GOLDEN_PARTITIONS)} constructed instances ({with_zero} with c=0), {len(bad)} violations, {elapsed:.1f}s")
    assert not bad, bad
    assert elapsed < 30


def test_c4_lambda_invariant(corpus):
    start = time.monotonic()
    events = 0
    violations = []
    for k, f in enumerate(corpus):
        nf = normalize(f)
        hard = [c.lits for c in nf.hard]
        cache: dict[frozenset, int | None] = {}

        def floor(ids):
            if ids not in cache:
                cache[ids] = min_cost(nf.num_vars, hard, [c.lits for c in nf.soft if c.id in ids])
            return cache[ids]

        for algo, graph, merge in CONFIGS:
            if algo == "linear-su":
                continue
            seen = []
            solve(f, algo, graph, merge, callback=lambda e, info: seen.append(info) if e == "lambda" else None)
            for info in seen:
                events += 1
                # hard clauses plus the partition's relaxed soft clauses already force lambda falsifications
                bound = floor(info["relaxed"])
                if bound is None or info["value"] > bound:
                    violations.append((k, algo, graph, merge, info["partition"], info["value"], bound))
    elapsed = time.monotonic() - start
    ok = not violations and elapsed < 600
    report(4, "lambda lower-bound invariant", ok,
           f"{events} intermediate lambdas over {len(corpus)} instances, {len(violations)} above the optimum of "
           f"hard + relaxed softs of their partition, {elapsed:.1f}s")
    assert not violations, violations[:5]
    assert elapsed < 600


def _semantics_ok(s, t, inputs, bound):
    for bits in itertools.product((False, True), repeat=len(inputs)):
        fix = [v if b else -v for v, b in zip(inputs, bits)]
        if s.solve(fix + cardenc.enforce_bound(t, bound)).sat != (sum(bits) <= bound):
            return False
    return True


def test_c5_cardinality_semantics():
    start = time.monotonic()
    checked = 0
    failed = []
    for n in range(1, 9):
        xs = list(range(1, n + 1))
        for k in range(n + 1):
            s = Solver()
            s.ensure_vars(n)
            checked += 1
            if not _semantics_ok(s, cardenc.build(s, xs, k), xs, k):
                failed.append(("build", n, k))
        s = Solver()
        s.ensure_vars(n)
        t = cardenc.build(s, xs, 0)
        for k in range(n + 1):
            cardenc.extend_bound(s, t, k)
            checked += 1
            if not _semantics_ok(s, t, xs, k):
                failed.append(("extend", n, k))
        for split in range(1, n):
            for k in range(n + 1):
                s = Solver()
                s.ensure_vars(n)
                a = cardenc.build(s, xs[:split], min(k, split))
                b = cardenc.build(s, xs[split:], 0)
                checked += 1
                if not _semantics_ok(s, cardenc.join(s, a, b, k), xs, k):
                    failed.append(("join", n, k, split))
    elapsed = time.monotonic() - start
    ok = not failed and elapsed < 60
    report(5, "cardinality encoding semantics", ok,
           f"{checked} (operation, size, bound) cases over all assignments, {len(failed)} failures, {elapsed:.1f}s")
    assert not failed, failed[:5]
    assert elapsed < 60


def _graph_fuzz_corpus():
    graphs = graph_corpus(300, seed=1, max_nodes=8)
    rng = random.Random(3)
    for f in formula_corpus(300, seed=77, max_vars=5, max_clauses=8, max_soft=4):
        nf = normalize(f)
        for g in (build_res(nf), build_cvig(nf)):
            if 2 <= len(g) <= 8 and g.num_edges and is_connected(g):
                graphs.append(g)
    rng.shuffle(graphs)
    return graphs + trap_graphs()


def test_c6_community_quality():
    start = time.monotonic()
    graphs = _graph_fuzz_corpus()
    below, above, nonmono = [], [], []
    worst = 1.0
    for k, g in enumerate(graphs):
        a = detect_communities(g)
        best = exhaustive_modularity(g, modularity)
        if a.modularity > best + 1e-9:
            above.append(k)
        if a.modularity < 0.9 * best - 1e-9:
            below.append((k, a.modularity, best, list(g.edges())))
        if best > 1e-9:
            worst = min(worst, a.modularity / best)
        if any(b < c - 1e-9 for c, b in zip(a.history, a.history[1:])):
            nonmono.append(k)
    elapsed = time.monotonic() - start
    ok = not below and not above and not nonmono and elapsed < 120
    report(6, "community detection quality", ok,
           f"{len(graphs)} connected graphs <= 8 nodes, {len(below)} below 0.9 x optimum, {len(above)} above optimum, "
           f"{len(nonmono)} non-monotone, worst ratio {worst:.3f}, {elapsed:.1f}s")
    assert not above and not nonmono
    assert not below, [(k, q, best) for k, q, best, _ in below]
    assert elapsed < 120


def test_c7_single_solver_instance(corpus):
    counts = []
    for f in corpus[:100] + [example_formula(), ring_blocks(4, 2)]:
        for algo, graph, merge in CONFIGS:
            before = next(Solver.instances_created)
            r = solve(f, algo, graph, merge)
            created = next(Solver.instances_created) - before - 1
            counts.append((created, r.stats.solver_instances))
    bad = [c for c in counts if c != (1, 1)]
    report(7, "full incrementality", not bad, f"{len(counts)} runs, {len(bad)} runs with a solver count other than 1")
    assert not bad


def _run_signature(f, algo, graph, merge, seed):
    r = solve(f, algo, graph, merge, seed)
    st = r.stats
    return r.status, r.cost, r.model, st.sat_calls, st.unsat_calls, st.partitions, st.communities, st.modularity


BENCH_SCRIPT = """
import sys
from maxpart.cli import main
sys.exit(main(["bench", sys.argv[1], "--configs", "msu3,S-CVIG,W-RES", "--timeout", "30", "--out", sys.argv[2],
               "--cactus", sys.argv[2] + ".tsv"]))
"""


def test_c8_determinism(corpus, tmp_path):
    mismatches = []
    instances = corpus[:60] + [read_wcnf(p) for p in sorted(MINISUITE.glob("*.wcnf"))[:5]]
    for k, f in enumerate(instances):
        for algo, graph, merge in CONFIGS:
            for seed in (0, 7):
                if _run_signature(f, algo, graph, merge, seed) != _run_signature(f, algo, graph, merge, seed):
                    mismatches.append((k, algo, graph, merge, seed))
    # separate interpreters with different hash seeds
    suite = tmp_path / "suite"
    suite.mkdir()
    for p in sorted(MINISUITE.glob("*.wcnf"))[:4]:
        (suite / p.name).write_text(p.read_text())
    tables = []
    for hashseed in ("1", "2"):
        out = tmp_path / f"bench{hashseed}.csv"
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        subprocess.run([sys.executable, "-c", BENCH_SCRIPT, str(suite), str(out)], env=env, check=True,
                       capture_output=True)
        rows = [line.split(",") for line in out.read_text().splitlines()]
        tables.append([row[:4] + row[5:] for row in rows])  # drop wall_time
    cross_ok = tables[0] == tables[1]
    ok = not mismatches and cross_ok
    report(8, "determinism", ok,
           f"{len(instances)} instances x {len(CONFIGS)} configs x 2 seeds, {len(mismatches)} mismatches; "
           f"cross-process bench CSV identical: {cross_ok}")
    assert not mismatches, mismatches[:5]
    assert cross_ok


def _bench(formula, algo, graph, merge, timeout):
    try:
        r = solve(formula, algo, graph, merge, 0, timeout)
    except SolveTimeout:
        return None
    return r


def test_c9_minisuite_smoke():
    paths = sorted(MINISUITE.glob("*.wcnf"))
    assert len(paths) == 50, "bundled mini-suite missing; run `maxpart gen-suite benchmarks/minisuite`"
    results = {"msu3": [], "W-RES": [], "W-CVIG": []}
    for p in paths:
        f = read_wcnf(p)
        results["msu3"].append(_bench(f, "msu3", "res", "balanced", 10.0))
        results["W-RES"].append(_bench(f, "part-msu3", "res", "balanced", 10.0))
        results["W-CVIG"].append(_bench(f, "part-msu3", "cvig", "balanced", 10.0))
    solved = {k: sum(r is not None for r in v) for k, v in results.items()}

    def mean_card(name):
        both = [(a, b) for a, b in zip(results[name], results["msu3"]) if a is not None and b is not None]
        return sum(a.stats.card_inputs_at_first_sat for a, _ in both) / max(len(both), 1), sum(
            b.stats.card_inputs_at_first_sat for _, b in both
        ) / max(len(both), 1)

    card_res, card_msu3 = mean_card("W-RES")
    card_cvig, _ = mean_card("W-CVIG")
    agree = all(
        a is None or b is None or a.cost == b.cost for a, b in zip(results["W-RES"], results["msu3"])
    )
    ok = solved["W-RES"] >= solved["msu3"] and card_res <= card_msu3 and agree
    report(9, "mini-suite smoke benchmark", ok,
           f"solved msu3 {solved['msu3']}/50, W-RES {solved['W-RES']}/50, W-CVIG {solved['W-CVIG']}/50; "
           f"mean totalizer inputs at first SAT msu3 {card_msu3:.2f}, W-RES {card_res:.2f}, W-CVIG {card_cvig:.2f}")
    assert agree
    assert solved["W-RES"] >= solved["msu3"]
    assert card_res <= card_msu3


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
