from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsefo.counters import Counters
from sparsefo.errors import GuardednessError, InputError
from sparsefo.generators import (
    random_degenerate_graph,
    random_forest,
    random_forest_structure,
    random_guarded_structure,
    random_sigma1,
)
from sparsefo.graph import Graph, grid_graph
from sparsefo.logic.semantics import eval_oracle
from sparsefo.logic.structure import Language, Structure
from sparsefo.logic.syntax import parse_formula, sigma1_parts
from sparsefo.sigma1.be_index import build_be_index, query_sigma1
from sparsefo.sigma1.forest_index import build_forest_index, reference_snapshot
from sparsefo.sigma1.matching import assignment_bruteforce, max_matching, perfect_matching
from sparsefo.sigma1.script import parse_script, run_script
from sparsefo.sigma1.small import (
    KLabelledStructure,
    TypeTable,
    canonical_key,
    canonicalize,
    sigma1_models,
    structure_classes,
)
from sparsefo.treedepth import RootedForest

LANG = Language({"Edge": 2, "P": 1})


# -- matching -----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), max_size=4, unique=True), max_size=5))
def test_matching_agrees_with_brute_force(adj):
    m = max_matching(adj)
    assert len(set(m.values())) == len(m)
    assert all(w in adj[i] for i, w in m.items())
    pm = perfect_matching(adj)
    assert (pm is not None) == assignment_bruteforce(adj)
    if pm is not None:
        assert len(set(pm)) == len(adj)


def test_matching_augments_through_a_conflict():
    # the greedy choice 0 -> "a" must be undone for 1 to be matched
    assert perfect_matching([["a", "b"], ["a"]]) == ["b", "a"]
    assert perfect_matching([["a"], ["a"]]) is None


# -- small structures --------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2), st.integers(0, 3), st.data())
def test_canonical_key_ignores_unlabelled_order(nl, u, data):
    labels = tuple(range(1, nl + 1))
    m = nl + u
    if m == 0:
        return
    slots = [(0, (a, b)) for a in range(m) for b in range(m)] + [(1, (a,)) for a in range(m)]
    ts = data.draw(st.frozensets(st.sampled_from(slots)))
    perm = list(range(nl)) + data.draw(st.permutations(list(range(nl, m))))
    moved = frozenset((r, tuple(perm[p] for p in pos)) for r, pos in ts)
    assert canonicalize(labels, u, ts)[0] == canonicalize(labels, u, moved)[0]


def test_canonical_key_respects_labels_and_trunk():
    lang = Language({"Edge": 2})
    a = Structure(2, lang, {"Edge": [(0, 1)]})
    b = Structure(2, lang, {"Edge": [(1, 0)]})
    assert canonical_key(KLabelledStructure(a)) == canonical_key(KLabelledStructure(b))
    la = KLabelledStructure(a, {1: 0}, 2)
    lb = KLabelledStructure(b, {1: 0}, 2)
    assert canonical_key(la) != canonical_key(lb)
    # a tuple on labelled elements only belongs to the labelled part and is dropped
    both = KLabelledStructure(a, {1: 0, 2: 1}, 3)
    assert not both.is_hollow() and both.trunk().is_hollow()
    assert canonical_key(both) == canonical_key(KLabelledStructure(Structure(2, lang), {1: 0, 2: 1}, 3))
    with pytest.raises(InputError):
        KLabelledStructure(a, {1: 0, 2: 0}, 3)
    with pytest.raises(InputError):
        canonical_key(KLabelledStructure(Structure(3, lang)), d0=2)


def test_structure_class_counts():
    assert len(structure_classes([1], 2)) == 3
    assert len(structure_classes([2], 1)) == 2
    # digraphs with loops on two vertices
    assert len(structure_classes([2], 2)) == 10


def test_sigma1_models_are_surjective_witnesses():
    table = TypeTable(LANG, 2)
    phi = parse_formula("E x. E y. Edge(x, y) & !P(y)")
    variables, matrix = sigma1_parts(phi)
    models = sigma1_models(table, variables, matrix)
    assert models
    for _, key, assign in models:
        _, m, _ = key
        assert sorted(set(assign)) == list(range(m))
    loop_only = [k for _, k, a in models if a == (0, 0)]
    assert all(k[1] == 1 for k in loop_only)


# -- forest index ---------------------------------------------------------------------


def forest_case(seed: int, n_max: int = 10):
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    forest = random_forest(rng, n, 4)
    s = random_forest_structure(rng, forest, LANG)
    return rng, forest, s


@pytest.mark.parametrize("seed", range(25))
def test_forest_index_lists_match_definition(seed):
    rng, forest, s = forest_case(seed, 9)
    d0 = 1 + seed % 3
    idx = build_forest_index(forest, s, d0)
    snap = idx.snapshot()
    list2, glob = reference_snapshot(forest, s, d0)
    assert snap.global_list == glob
    assert snap.list2 == list2


@pytest.mark.parametrize("seed", range(40))
def test_forest_index_queries_match_oracle(seed):
    rng, forest, s = forest_case(seed, 12)
    d0 = 3
    idx = build_forest_index(forest, s, d0)
    for _ in range(6):
        phi = random_sigma1(rng, rng.randint(1, 3), LANG.relations, 2)
        res = query_sigma1(idx, phi, s)
        assert res.sat == eval_oracle(s, phi)
        if res.sat:
            _, matrix = sigma1_parts(phi)
            assert eval_oracle(s, matrix, res.witness)


def test_forest_index_updates_match_rebuild():
    rng, forest, s = forest_case(7, 14)
    idx = build_forest_index(forest, s, 2)
    for _ in range(150):
        v = rng.randrange(forest.n)
        a = rng.choice(forest.path_to_root(v))
        rel, tup = ("P", (v,)) if rng.random() < 0.4 else ("Edge", (a, v))
        if tup in s.relations[rel]:
            s.remove_tuple(rel, tup)
            idx.remove_tuple(rel, tup)
        else:
            s.add_tuple(rel, tup)
            idx.insert_tuple(rel, tup)
        assert idx.snapshot() == build_forest_index(forest, s, 2, cache=idx.cache).snapshot()


def test_skipping_the_third_list_is_detected():
    caught = False
    for seed in range(30):
        rng, forest, s = forest_case(seed, 10)
        idx = build_forest_index(forest, s, 2)
        idx.fault_skip_list3 = True
        for _ in range(20):
            v = rng.randrange(forest.n)
            a = rng.choice(forest.path_to_root(v))
            tup = (v, a)
            if tup in s.relations["Edge"]:
                s.remove_tuple("Edge", tup)
                idx.remove_tuple("Edge", tup)
            else:
                s.add_tuple("Edge", tup)
                idx.insert_tuple("Edge", tup)
            if idx.snapshot() != build_forest_index(forest, s, 2, cache=idx.cache).snapshot():
                caught = True
                break
        if caught:
            break
    assert caught


def test_update_counters_follow_the_root_path():
    forest = RootedForest.from_parents([0, 0, 1, 2, 0])
    s = Structure(5, LANG)
    c = Counters()
    idx = build_forest_index(forest, s, 2, counters=c)
    before = c.snapshot()
    idx.insert_tuple("Edge", (1, 3))
    spent = c.diff(before)
    assert spent["update_touched"] == 4 and spent["update_recomputed"] == 5
    with pytest.raises(GuardednessError):
        idx.insert_tuple("Edge", (3, 4))
    with pytest.raises(InputError):
        idx.remove_tuple("P", (0,))


# -- bounded-expansion index ---------------------------------------------------------------


@pytest.mark.parametrize("seed", range(30))
def test_be_index_matches_oracle(seed):
    rng = random.Random(1000 + seed)
    g = random_degenerate_graph(rng, rng.randint(1, 25), 3)
    s = random_guarded_structure(rng, g, LANG)
    idx = build_be_index(g, s, 3)
    for _ in range(5):
        phi = random_sigma1(rng, rng.randint(1, 3), LANG.relations)
        res = idx.query(phi)
        assert res.sat == eval_oracle(s, phi)
        if res.sat:
            assert eval_oracle(s, sigma1_parts(phi)[1], res.witness)


def test_be_index_updates_and_errors():
    g = grid_graph(4)
    s = Structure(g.n, LANG)
    idx = build_be_index(g, s, 2)
    ask = parse_formula("E x. E y. Edge(x, y) & P(y)")
    assert not idx.query(ask).sat
    assert idx.insert_tuple("Edge", (0, 1)) and idx.insert_tuple("P", (1,))
    assert not idx.insert_tuple("P", (1,))
    assert idx.query(ask).witness == {"x": 0, "y": 1}
    assert idx.remove_tuple("P", (1,))
    assert not idx.query(ask).sat
    with pytest.raises(GuardednessError):
        idx.insert_tuple("Edge", (0, 5))
    with pytest.raises(InputError):
        idx.remove_tuple("P", (1,))
    with pytest.raises(InputError):
        idx.query(parse_formula("E x. E y. E z. Edge(x, y) & Edge(y, z)"))
    with pytest.raises(InputError):
        idx.query(parse_formula("E x. A y. Edge(x, y)"))
    with pytest.raises(InputError):
        build_be_index(g, Structure(g.n, Language({"P": 1}, ("f",))), 2)
    with pytest.raises(InputError):
        build_be_index(Graph.from_edges(3, []), s, 2)


def test_nullary_relations_are_global_flags():
    lang = Language({"Edge": 2, "Q": 0})
    g = Graph.from_edges(2, [(0, 1)])
    idx = build_be_index(g, Structure(2, lang), 2)
    assert not idx.query(parse_formula("Q")).sat
    idx.insert_tuple("Q", ())
    assert idx.query(parse_formula("Q")).sat
    assert idx.query(parse_formula("E x. Q & x = x")).sat


def test_script_parsing_and_answers():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    idx = build_be_index(g, Structure(3, LANG), 2)
    ops = parse_script(
        ["# comment", "add Edge 1 2", "ask E x. E y. Edge(x, y)", "del Edge 1 2", "", "ask E x. Edge(x, x)"],
        LANG,
    )
    assert [op.kind for op in ops] == ["add", "ask", "del", "ask"]
    answers = [a for _, a in run_script(idx, ops) if a is not None]
    assert answers == ["SAT x=1,y=2", "UNSAT"]
    for bad in (["add"], ["add P x"], ["frob P 1"], ["ask E x. Nope(x)"]):
        with pytest.raises(InputError):
            parse_script(bad, LANG)
