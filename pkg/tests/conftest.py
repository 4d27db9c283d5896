"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from locallemma.depgraph import DependencyGraph
from locallemma.digraph_cycles import Digraph
from locallemma.hypergraph import Hypergraph


def random_graph(n: int, edge_prob: float, rng: random.Random) -> DependencyGraph:
    edges = [
        (a, b)
        for a in range(1, n + 1)
        for b in range(a + 1, n + 1)
        if rng.random() < edge_prob
    ]
    return DependencyGraph.from_edges(n, edges)


def random_out_regular_digraph(n: int, d: int, rng: random.Random) -> Digraph:
    arcs = []
    for v in range(1, n + 1):
        heads = rng.sample([u for u in range(1, n + 1) if u != v], d)
        arcs.extend((v, u) for u in heads)
    return Digraph.from_arcs(n, arcs)


def brute_force_independent_sets(g: DependencyGraph, restrict) -> set[frozenset[int]]:
    """Subset-filter oracle: every subset of `restrict` with no internal edge."""
    verts = sorted(restrict)
    out = set()
    for r in range(len(verts) + 1):
        for combo in itertools.combinations(verts, r):
            if all(not g.has_edge(a, b) for a, b in itertools.combinations(combo, 2)):
                out.add(frozenset(combo))
    return out


def exists_proper_coloring(h: Hypergraph, k: int) -> bool:
    """Exhaustive oracle over all k^n colorings."""
    for colors in itertools.product(range(k), repeat=h.num_vertices):
        if all(len({colors[v - 1] for v in e}) > 1 for e in h.edges):
            return True
    return False


def pairs_intersecting(h: Hypergraph) -> int:
    """Pairwise-intersection oracle for the max edge-intersection count."""
    best = 0
    for i, e in enumerate(h.edges):
        best = max(best, sum(1 for j, f in enumerate(h.edges) if i != j and e & f))
    return best


def matched_triple_instance(num_pairs: int, rng: random.Random) -> Hypergraph:
    """3-uniform hypergraph of `2*num_pairs` edges arranged in pairs sharing
    exactly one vertex, so every edge intersects exactly one other edge."""
    n = 5 * num_pairs
    labels = list(range(1, n + 1))
    rng.shuffle(labels)
    edges = []
    for i in range(num_pairs):
        block = labels[5 * i : 5 * i + 5]
        shared = block[0]
        edges.append(frozenset([shared, block[1], block[2]]))
        edges.append(frozenset([shared, block[3], block[4]]))
    rng.shuffle(edges)
    return Hypergraph(n, tuple(edges))
