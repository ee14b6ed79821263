from __future__ import annotations

import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsefo.errors import InputError
from sparsefo.generators import random_degenerate_graph, random_forest
from sparsefo.graph import Graph, grid_graph
from sparsefo.treedepth import (
    ForestDepthError,
    RootedForest,
    certify_low_treedepth,
    depth_certifying_forest,
    dfs_forest,
    exact_treedepth,
    low_treedepth_coloring,
    rounds_for_order,
    verify_low_treedepth,
)


def closure_treedepth(g: Graph) -> int:
    """Least depth of a rooted forest whose closure contains g, by enumerating parent arrays."""
    if g.n == 0:
        return 0
    best = g.n
    for parent in itertools.product(range(g.n), repeat=g.n):
        try:
            f = RootedForest.from_parents(parent)
        except InputError:
            continue
        if f.max_depth < best and f.closure_contains(g):
            best = f.max_depth
    return best


@st.composite
def tiny_graphs(draw):
    n = draw(st.integers(0, 5))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph.from_edges(n, chosen)


@settings(max_examples=40, deadline=None)
@given(tiny_graphs())
def test_exact_treedepth_matches_forest_closure_definition(g):
    assert exact_treedepth(g) == closure_treedepth(g)


@pytest.mark.parametrize("n", range(1, 16))
def test_treedepth_of_paths(n):
    path = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    assert exact_treedepth(path) == math.ceil(math.log2(n + 1))


def test_treedepth_of_standard_graphs():
    assert exact_treedepth(Graph.from_edges(0, [])) == 0
    assert exact_treedepth(Graph.from_edges(4, [])) == 1
    assert exact_treedepth(Graph.from_edges(6, list(itertools.combinations(range(6), 2)))) == 6
    assert exact_treedepth(Graph.from_edges(7, [(0, i) for i in range(1, 7)])) == 2
    cycle = Graph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)])
    assert exact_treedepth(cycle) == 1 + math.ceil(math.log2(8))
    with pytest.raises(InputError):
        exact_treedepth(Graph.from_edges(21, []))


def test_rooted_forest_queries():
    f = RootedForest.from_parents([0, 0, 1, 3, -1, 1])
    assert f.depth == (1, 2, 3, 1, 0, 3)
    assert f.roots == (0, 3)
    assert f.children[1] == (2, 5)
    assert f.is_ancestor(0, 5) and f.is_ancestor(2, 2) and not f.is_ancestor(2, 5)
    assert not f.related(3, 2) and not f.is_ancestor(4, 4)
    assert f.path_to_root(5) == [5, 1, 0]
    assert f.parent_fn(0) == 0 and f.parent_fn(4) == 4 and f.parent_fn(2) == 1
    assert f.ancestor_at_depth(5, 1) == 0
    with pytest.raises(InputError):
        RootedForest.from_parents([1, 0])


def test_dfs_forest_has_no_cross_edges():
    rng = random.Random(2)
    for _ in range(40):
        g = random_degenerate_graph(rng, rng.randint(1, 30), 3)
        members = [v for v in range(g.n) if rng.random() < 0.6]
        f = dfs_forest(g, members)
        assert f.members == frozenset(members)
        assert f.closure_contains(g)
        for v in members:
            p = f.parent[v]
            assert p == v or g.has_edge(v, p)


def test_depth_certifying_forest_rejects_deep_union():
    path = Graph.from_edges(8, [(i, i + 1) for i in range(7)])
    assert depth_certifying_forest(path, range(8)).max_depth == 8
    with pytest.raises(ForestDepthError):
        depth_certifying_forest(path, range(8), 2)


def test_random_forest_depth_bound():
    rng = random.Random(4)
    for _ in range(20):
        f = random_forest(rng, 15, 3)
        assert f.max_depth <= 3 and f.members == frozenset(range(15))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_low_treedepth_coloring_is_valid(d):
    rng = random.Random(100 + d)
    for _ in range(12):
        g = random_degenerate_graph(rng, rng.randint(1, 16), 3)
        ltd = low_treedepth_coloring(g, d)
        assert ltd.certified
        assert verify_low_treedepth(ltd, g) == []
        assert ltd.k_target == rounds_for_order(d) == 3 * (d + 1) ** 2
        assert ltd.rounds <= ltd.k_target


def test_literal_mode_runs_every_round():
    g = grid_graph(4)
    ltd = low_treedepth_coloring(g, 1, adaptive=False)
    assert ltd.rounds == rounds_for_order(1)
    assert verify_low_treedepth(ltd, g) == []


def test_grid_needs_augmentation_for_order_two():
    g = grid_graph(6)
    ltd = low_treedepth_coloring(g, 2)
    assert ltd.certified and ltd.rounds >= 1
    # a proper 2-coloring of the grid fails: the two classes form the whole grid
    two = low_treedepth_coloring(g, 1)
    assert not certify_low_treedepth(g, two.coloring, 2)


def test_verify_reports_a_bad_coloring():
    g = grid_graph(4)
    ltd = low_treedepth_coloring(g, 1)
    fake = type(ltd)(ltd.chain, ltd.coloring, 2, ltd.k_target, ltd.rounds, False)
    assert verify_low_treedepth(fake, g)


def test_order_must_be_positive():
    with pytest.raises(InputError):
        low_treedepth_coloring(grid_graph(2), 0)
