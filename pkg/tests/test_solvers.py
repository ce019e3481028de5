import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackrefine.solvers import components_from_edges, connected_components, max_weight_matching


def brute_force_matching(n, edges):
    """Best total weight over every matching, by recursion on the lowest free node."""
    w = {}
    for i, j, wt in edges:
        w[(min(i, j), max(i, j))] = max(wt, w.get((min(i, j), max(i, j)), -np.inf))

    def best(free):
        if not free:
            return 0.0
        u, rest = free[0], free[1:]
        top = best(rest)
        for k, v in enumerate(rest):
            if (u, v) in w:
                top = max(top, w[(u, v)] + best(rest[:k] + rest[k + 1:]))
        return top

    return best(tuple(range(n)))


def total(edges, pairs):
    w = {(min(i, j), max(i, j)): wt for i, j, wt in edges}
    return sum(w[p] for p in pairs)


def is_matching(pairs):
    nodes = [v for p in pairs for v in p]
    return len(nodes) == len(set(nodes))


def random_graph(rng, n, p, integer=False):
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((i, j, float(rng.integers(1, 6)) if integer else float(rng.uniform(0.01, 1))))
    return edges


def test_single_edge():
    assert max_weight_matching([(0, 1, 0.5)]) == [(0, 1)]


def test_path_prefers_heavy_middle_edge():
    assert max_weight_matching([(0, 1, 0.1), (1, 2, 0.4), (2, 3, 0.1)]) == [(1, 2)]


def test_equal_weight_triangle_picks_lexicographically_smallest_pair():
    assert max_weight_matching([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]) == [(0, 1)]


def test_max_cardinality_option():
    edges = [(0, 1, 0.1), (1, 2, 0.4), (2, 3, 0.1)]
    assert max_weight_matching(edges, max_cardinality=True) == [(0, 1), (2, 3)]


def test_nonpositive_and_empty():
    assert max_weight_matching([]) == []
    assert max_weight_matching([(0, 1, -1.0)]) == []


@pytest.mark.parametrize("seed", range(40))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    edges = random_graph(rng, n, rng.uniform(0.2, 0.9), integer=seed % 2 == 0)
    pairs = max_weight_matching(edges)
    assert is_matching(pairs)
    assert total(edges, pairs) == pytest.approx(brute_force_matching(n, edges), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_independent_of_edge_order(seed):
    rng = np.random.default_rng(seed)
    edges = random_graph(rng, int(rng.integers(2, 10)), 0.6, integer=True)
    shuffled = list(edges)
    random.Random(seed).shuffle(shuffled)
    flipped = [(j, i, w) for i, j, w in shuffled]
    assert max_weight_matching(edges) == max_weight_matching(flipped)


def reachability(adj):
    """Floyd-Warshall transitive closure."""
    n = len(adj)
    r = (np.asarray(adj, dtype=bool) | np.asarray(adj, dtype=bool).T) | np.eye(n, dtype=bool)
    for k in range(n):
        r = r | (r[:, k:k + 1] & r[k:k + 1, :])
    return r


def test_component_examples():
    assert components_from_edges(4, [(0, 1), (1, 2)]) == [[0, 1, 2], [3]]
    assert connected_components(np.zeros((3, 3), dtype=bool)) == [[0], [1], [2]]


@pytest.mark.parametrize("seed", range(30))
def test_components_match_transitive_closure(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    adj = rng.random((n, n)) < rng.uniform(0.02, 0.3)
    adj = adj | adj.T
    comps = connected_components(adj)
    assert sorted(v for c in comps for v in c) == list(range(n))
    r = reachability(adj)
    label = {v: k for k, c in enumerate(comps) for v in c}
    for i in range(n):
        for j in range(n):
            assert (label[i] == label[j]) == bool(r[i, j])
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if adj[i, j]]
    assert components_from_edges(n, edges) == comps
