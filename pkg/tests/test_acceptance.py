"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
and enforcing its runtime budget.  Run with `pytest -s tests/test_acceptance.py`
to see the per-criterion lines.
"""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from conftest import (
    exists_proper_coloring,
    matched_triple_instance,
    random_graph,
    random_out_regular_digraph,
)
from locallemma import criteria, depgraph, digraph_cycles, hypergraph, moser_tardos, ramsey
from locallemma.cli import main
from locallemma.criteria import Verdict
from locallemma.depgraph import DependencyGraph
from locallemma.numeric import RealInterval, e_interval


@contextmanager
def criterion(number: int, name: str, budget_seconds: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} ({name}): FAIL")
        raise
    elapsed = time.monotonic() - start
    within = elapsed <= budget_seconds
    print(f"ACCEPTANCE {number} ({name}): PASS in {elapsed:.2f}s (budget {budget_seconds:.0f}s)")
    assert within, f"runtime {elapsed:.2f}s exceeded budget {budget_seconds}s"


# ---------------------------------------------------------------------------
# 1. Table of diagonal Ramsey lower bounds
# ---------------------------------------------------------------------------

TABLE1_EXPECTED = [
    (10, 99, 105),
    (15, 948, 956),
    (20, 7742, 7754),
    (25, 57725, 57740),
    (30, 406672, 406691),
    (35, 2758419, 2758441),
    (40, 18213023, 18213048),
]


def test_acceptance_01_ramsey_table(capsys):
    with criterion(1, "Ramsey lower-bound table", 60):
        rc = main(["ramsey", "--k", "10..40", "--step", "5", "--format", "csv"])
        assert rc == 0
        captured = capsys.readouterr()
        rows = [
            tuple(int(x) for x in line.split(","))
            for line in captured.out.strip().splitlines()[1:]
        ]
        assert rows == TABLE1_EXPECTED
        # the convention in force must be flagged on every run
        assert "convention" in captured.err
        assert "largest certified n, plus one" in ramsey.TABLE_CONVENTION
    with capsys.disabled():
        print(f"\nACCEPTANCE 1 note: all 14 values match under the convention "
              f"'{ramsey.TABLE_CONVENTION}'")


# ---------------------------------------------------------------------------
# 2. Rainbow intersection-cap table and sweep
# ---------------------------------------------------------------------------

def test_acceptance_02_rainbow_table():
    with criterion(2, "rainbow cap table and sweep", 10):
        expected = {
            (21, 5): (7, 8), (22, 5): (9, 10), (19, 6): (1, 2), (28, 7): (3, 4),
            (35, 8): (4, 5), (41, 8): (10, 11), (48, 8): (27, 28),
        }
        for r, k, a, b in hypergraph.table2_rows():
            assert (a, b) == expected[(r, k)]
        for k in range(2, 11):
            for r in range(k, 61):
                t = hypergraph.rainbow_thresholds(r, k)
                assert t.B - t.A in (0, 1)


# ---------------------------------------------------------------------------
# 3. Threshold ordering across all symmetric criteria
# ---------------------------------------------------------------------------

def test_acceptance_03_threshold_ordering():
    with criterion(3, "symmetric threshold ordering", 5):
        e128 = e_interval(128)
        for d in range(1, 1001):
            spencer = Fraction(d**d, (d + 1) ** (d + 1))
            f = criteria.shearer_threshold(d).lo
            # 1/(e(d+1)) <= 1/(e(d+1/2)): exact denominators
            assert d + Fraction(1, 2) <= d + 1
            # 1/(e(d+1/2)) <= spencer, rigorously
            assert criteria.half_vs_spencer_holds(d)
            # spencer <= f(d): both exact rationals
            assert spencer <= f
            # 1/(e d) < f(d): e*d*f certainly exceeds 1
            assert (e128 * (d * f)).lo > 1
        # d*f(d) -> 1/e: |10^4 f(10^4) - 1/e| <= 10^-4
        d = 10**4
        diff = RealInterval.point(d * criteria.shearer_threshold(d).lo, 128) - e128.reciprocal()
        assert diff.abs().hi <= Fraction(1, 10**4)


# ---------------------------------------------------------------------------
# 4. Half-constant domination and optimality witness
# ---------------------------------------------------------------------------

def test_acceptance_04_half_constant():
    with criterion(4, "half-constant domination to 1e5", 30):
        assert criteria.verify_half_threshold(10**5)


# ---------------------------------------------------------------------------
# 5. Smallest valid k: closed form versus scan
# ---------------------------------------------------------------------------

def test_acceptance_05_smallest_valid_k():
    with criterion(5, "closed form equals scan on 50-point grid", 5):
        lo, hi = Fraction(1, 1000), Fraction(95, 100)
        grid = [lo + (hi - lo) * i / 49 for i in range(50)]
        rows = ramsey.asymptotic_threshold_curve(grid)
        for row, eps in zip(rows, grid):
            assert not row.used_scan_fallback
            assert row.k_exact == ramsey.min_valid_k_scan(eps)
        beta = ramsey.beta_interval(128)
        assert abs(float(beta.mid) - 0.183242) <= 1e-6
        assert ramsey.min_valid_k_scan(Fraction(1, 2)) == 10


# ---------------------------------------------------------------------------
# 6. Resampling solver: empirical expectation bounds
# ---------------------------------------------------------------------------

def test_acceptance_06_solver_empirical_bounds():
    with criterion(6, "solver termination and resampling bounds", 120):
        rng = random.Random(606)
        num_instances, seeds_per_instance = 10, 100
        total_runs = 0
        totals = []
        per_event_counts: list[int] = []
        for inst in range(num_instances):
            h = matched_triple_instance(15, rng)  # 30 edges, d = 1
            assert hypergraph.max_edge_intersections(h) == 1
            space, events = hypergraph.coloring_instance(h, 2, "proper")
            # the weighted condition holds with uniform x = 1/(d+1) = 1/2:
            # P = 1/4 <= (1/2) * (1/2)^(#neighbors), equality at one neighbor
            g = moser_tardos.build_dependency_graph(events)
            dig = depgraph.DependencyDigraph.from_arcs(
                g.n, [(a, b) for a, b in g.edges] + [(b, a) for a, b in g.edges]
            )
            probs = [moser_tardos.exact_event_probability(space, ev) for ev in events]
            assert all(p == Fraction(1, 4) for p in probs)
            assert criteria.abstract_lll(probs, dig, [Fraction(1, 2)] * g.n).passed()
            for seed in range(seeds_per_instance):
                sp = moser_tardos.VariableSpace(space.variables, seed * num_instances + inst)
                log, stats = moser_tardos.run(sp, events, max_steps=10**5)
                assert log.terminated  # 100% termination
                assert hypergraph.is_proper_coloring(h, log.final_assignment)
                totals.append(stats.total)
                per_event_counts.extend(stats.per_event.values())
                total_runs += 1
        assert total_runs >= 1000
        mean_total = sum(totals) / len(totals)
        stderr_total = (
            sum((t - mean_total) ** 2 for t in totals) / (len(totals) - 1)
        ) ** 0.5 / len(totals) ** 0.5
        bound_total = 30 / 1  # |events| / d with d = 1
        assert mean_total <= bound_total + 3 * stderr_total
        mean_event = sum(per_event_counts) / len(per_event_counts)
        stderr_event = (
            sum((c - mean_event) ** 2 for c in per_event_counts)
            / (len(per_event_counts) - 1)
        ) ** 0.5 / len(per_event_counts) ** 0.5
        assert mean_event <= 1 + 3 * stderr_event  # x/(1-x) = 1 per event


# ---------------------------------------------------------------------------
# 7. Witness trees: distinctness, appearance bound, branching frequencies
# ---------------------------------------------------------------------------

def test_acceptance_07_witness_tree_suite():
    with criterion(7, "witness-tree suite", 120):
        # (a) pairwise-distinct proper witness trees on executions with T <= 200
        fano = hypergraph.fano_plane()
        space, events = hypergraph.coloring_instance(fano, 2, "proper")
        for seed in (1, 2, 3):
            sp = moser_tardos.VariableSpace(space.variables, seed)
            log, _ = moser_tardos.run(sp, events, max_steps=200)
            trees = [
                moser_tardos.witness_tree(log, events, t)
                for t in range(1, len(log.steps) + 1)
            ]
            assert len(log.steps) == 200
            canons = [t.canonical() for t in trees]
            assert len(set(canons)) == len(canons)
            assert all(moser_tardos.is_proper_witness_tree(t, events) for t in trees)

        # (b) Monte-Carlo appearance probability <= product of event
        #     probabilities, for three hand-built trees
        pair_space = moser_tardos.VariableSpace(
            (moser_tardos.Variable(2), moser_tardos.Variable(2), moser_tardos.Variable(2)), 0
        )
        pair_events = [
            moser_tardos.EventSpec(1, (0, 1), bad_assignments=frozenset({(1, 1)})),
            moser_tardos.EventSpec(2, (1, 2), bad_assignments=frozenset({(1, 1)})),
        ]
        p_event = {
            ev.id: moser_tardos.exact_event_probability(pair_space, ev)
            for ev in pair_events
        }
        hand_trees = [
            moser_tardos.WitnessTree(1),
            moser_tardos.WitnessTree(1, (moser_tardos.WitnessTree(2),)),
            moser_tardos.WitnessTree(1, (moser_tardos.WitnessTree(1),)),
        ]
        trials = 3000
        for tree in hand_trees:
            est, _half = moser_tardos.estimate_appearance_probability(
                tree, pair_space, pair_events, trials=trials, max_steps=100
            )
            product = float(
                math.prod(p_event[node.label] for node in tree.vertices())
            )
            sigma = math.sqrt(max(est * (1 - est), 1e-9) / trials)
            assert est <= product + 3 * sigma

        # (c) branching-process frequencies match exact tree probabilities
        g2 = DependencyGraph.from_edges(2, [(1, 2)])
        x = [Fraction(3, 10), Fraction(1, 4)]
        small_trees = moser_tardos.enumerate_proper_trees(1, g2, 3)
        assert len(small_trees) == 8
        samples = 40000
        counts: dict = {}
        for seed in range(samples):
            tree = moser_tardos.galton_watson_sample(1, x, g2, seed=seed, depth_cap=80)
            counts[tree.canonical()] = counts.get(tree.canonical(), 0) + 1
        for tree in small_trees:
            p = float(moser_tardos.tree_probability(tree, x, g2).lo)
            freq = counts.get(tree.canonical(), 0) / samples
            sigma = math.sqrt(p * (1 - p) / samples)
            assert abs(freq - p) <= 3 * sigma, (tree.canonical(), freq, p)

        # (d) total tree probability over small proper trees is below one
        g3 = DependencyGraph.from_edges(3, [(1, 2), (2, 3)])
        for g, weights in ((g2, x), (g3, [Fraction(1, 4)] * 3)):
            trees4 = moser_tardos.enumerate_proper_trees(1, g, 4)
            assert sum(moser_tardos.tree_probability(t, weights, g).lo for t in trees4) <= 1


# ---------------------------------------------------------------------------
# 8. Cluster-expansion bound dominates the product bound
# ---------------------------------------------------------------------------

def test_acceptance_08_cluster_vs_product():
    with criterion(8, "cluster bound dominates product bound", 30):
        rng = random.Random(808)
        seen_edgeless = seen_edged = False
        for _ in range(500):
            n = rng.randint(1, 8)
            g = random_graph(n, rng.random(), rng)
            y = [Fraction(rng.randint(1, 200), 100) for _ in range(n)]  # (0, 2]
            report = criteria.cluster_vs_product(g, y)
            assert report.cluster_geq_product
            equal = report.cluster_bound.lo == report.product_bound.lo
            assert equal == (len(g.edges) == 0)
            seen_edgeless |= equal
            seen_edged |= not equal
        assert seen_edgeless and seen_edged
        triangle = DependencyGraph.from_edges(3, [(1, 2), (2, 3), (1, 3)])
        path = DependencyGraph.from_edges(3, [(1, 2), (2, 3)])
        assert criteria.cluster_vs_product(triangle, [1, 1, 1]).cluster_bound.lo == Fraction(1, 4)
        assert criteria.cluster_vs_product(path, [1, 1, 1]).cluster_bound.lo == Fraction(1, 5)


# ---------------------------------------------------------------------------
# 9. Directed-cycle pipeline
# ---------------------------------------------------------------------------

def test_acceptance_09_digraph_pipeline():
    with criterion(9, "mod-k cycle pipeline", 60):
        assert digraph_cycles.even_cycle_condition(8, 8).passed()
        assert digraph_cycles.even_cycle_condition(7, 7).holds is Verdict.FAIL
        root = digraph_cycles.even_cycle_regular_root()
        assert abs(float(root.mid) - 7.09719) <= 1e-5
        rng = random.Random(909)
        verified = 0
        for i in range(200):
            n = rng.randint(9, 12)
            d = random_out_regular_digraph(n, 8, rng)
            delta, Delta = digraph_cycles.degree_profile(d)
            k = 2
            assert digraph_cycles.alon_linial_condition(delta, Delta, k, relaxed=True).passed()
            reduced = digraph_cycles.reduce_out_degree(d, delta)
            res = digraph_cycles.find_mod_k_coloring(reduced, k, seed=i)
            assert res.coloring is not None
            cert = digraph_cycles.extract_mod_k_cycle(reduced, res.coloring)
            assert digraph_cycles.verify_cycle_certificate(reduced, cert)
            assert digraph_cycles.verify_cycle_certificate(d, cert)
            # independent exhaustive confirmation that a divisible cycle exists
            independent = digraph_cycles.find_divisible_cycle(d, k)
            assert independent is not None and (len(independent) - 1) % k == 0
            verified += 1
        assert verified == 200


# ---------------------------------------------------------------------------
# 10. Fano plane negative control
# ---------------------------------------------------------------------------

def test_acceptance_10_fano_negative_control(capsys):
    with criterion(10, "Fano plane negative control", 10):
        fano = hypergraph.fano_plane()
        assert not exists_proper_coloring(fano, 2)  # exhaustive over 2^7
        result = hypergraph.solve_coloring(fano, 2, "proper", seed=10, max_steps=400)
        assert result.colors is None and not result.terminated
        assert result.stats.total == 400
        d = hypergraph.max_edge_intersections(fano)
        assert d == 6
        assert hypergraph.k_colorability_criterion(3, d, 2).holds is Verdict.FAIL
