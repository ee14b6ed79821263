from __future__ import annotations

import itertools
import random

import pytest

from sparsefo.counters import Counters
from sparsefo.errors import InputError, ResourceCap
from sparsefo.generators import random_degenerate_graph, random_forest, random_forest_structure, random_guarded_structure
from sparsefo.graph import Graph
from sparsefo.logic.semantics import compile_formula, eval_oracle
from sparsefo.logic.structure import Language, Structure, gaifman_graph, is_guarded
from sparsefo.logic.syntax import App, Var, format_formula, parse_formula, quantifier_depth
from sparsefo.qelim.eliminate import (
    EliminationStep,
    clause_terms,
    dnf,
    eliminate_exists,
    eliminate_template,
    realized_templates,
    split_exists,
)
from sparsefo.qelim.reduce import ReduceConfig, innermost_exists, reduce_sentence
from sparsefo.qelim.simple import FreshNames, eliminate_forall, to_simple
from sparsefo.qelim.templates import canonical_template, enumerate_templates
from sparsefo.treedepth import RootedForest

LANG = Language({"R": 2, "P": 1}, ("f", "g"))


# -- simple terms -------------------------------------------------------------


def nested_case():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    s = Structure(5, LANG, {"P": [(2,), (4,)]}, {"f": [1, 2, 3, 4, 4], "g": [0, 0, 1, 2, 3]})
    assert is_guarded(s, g)
    return g, s


def test_to_simple_leaves_simple_formulas_alone():
    g, s = nested_case()
    phi = parse_formula("E x. P(f(x)) & R(x, g(x))", LANG)
    res = to_simple(phi, s, g)
    assert res.rounds == 0 and res.formula == phi
    assert res.structure is s and res.guard is g


def test_to_simple_composes_one_pair():
    g, s = nested_case()
    phi = parse_formula("E x. P(g(f(x)))", LANG)
    res = to_simple(phi, s, g)
    assert res.rounds == 1
    assert res.composed == {"_h1": ("g", "f")}
    assert res.formula == parse_formula("E x. P(_h1(x))")
    assert res.structure.functions["_h1"] == [s.functions["g"][s.functions["f"][v]] for v in range(5)]
    assert is_guarded(res.structure, res.guard)
    assert eval_oracle(res.structure, res.formula) == eval_oracle(s, phi)


def test_to_simple_triple_nesting_takes_two_rounds():
    g, s = nested_case()
    phi = parse_formula("A x. P(f(f(f(x)))) | P(g(f(x)))", LANG)
    res = to_simple(phi, s, g)
    assert res.rounds == 2
    text = format_formula(res.formula)
    assert "f(f(" not in text and "g(f(" not in text
    assert is_guarded(res.structure, res.guard)
    assert eval_oracle(res.structure, res.formula) == eval_oracle(s, phi)


def test_fresh_names_avoid_taken_symbols():
    fresh = FreshNames({"_U1", "_U3"})
    assert [fresh.make("_U") for _ in range(3)] == ["_U2", "_U4", "_U5"]


def test_forall_is_rewritten():
    phi = parse_formula("A x. E y. R(x, y)")
    out = eliminate_forall(phi)
    assert "A " not in format_formula(out)
    s = Structure(2, LANG, {"R": [(0, 1), (1, 1)]})
    assert eval_oracle(s, out) == eval_oracle(s, phi) is True


# -- normal forms -------------------------------------------------------------------


def test_dnf_is_equivalent_and_drops_contradictions():
    phi = parse_formula("(P(x) | R(x, y)) & !(P(x) & x = y)")
    clauses = dnf(phi)
    s = Structure(3, LANG, {"P": [(0,)], "R": [(1, 2), (0, 0)]})
    for vals in itertools.product(range(3), repeat=2):
        env = {"x": vals[0], "y": vals[1]}
        want = eval_oracle(s, phi, env)
        got = any(all(eval_oracle(s, lit, env) for lit in c) for c in clauses)
        assert got == want
    assert dnf(parse_formula("P(x) & !P(x)")) == []
    with pytest.raises(ResourceCap):
        dnf(parse_formula(" & ".join(f"(P(x{i}) | R(x{i}, y))" for i in range(13))), cap=4096)


def test_split_exists_adds_a_trivial_equality():
    x0, body = split_exists(parse_formula("E z. P(x)"))
    assert x0 == "z" and "z" in body.free_vars
    with pytest.raises(InputError):
        split_exists(parse_formula("P(x)"))


# -- one template ------------------------------------------------------------------


def run_elimination(el, forest, s, free):
    step = EliminationStep(None, el.formula, "p", [el.expander] if el.expander else [], [el])
    return compile_formula(step.expand(forest, s), el.formula, free)


def template_oracle(lits, terms, t, forest, s, x0, free):
    """Values of ``free`` for which some x0 satisfies the literals and realizes ``t``."""
    names = [x0, *free]
    good = set()
    for vals in itertools.product(range(forest.n), repeat=len(names)):
        env = dict(zip(names, vals))
        if all(eval_oracle(s, lit, env) for lit in lits) and canonical_template(terms, forest, s, env) == t:
            good.add(vals[1:])
    return good


CLAUSES = [
    "R(x0, x1)",
    "P(x0) & !R(x0, x1)",
    "R(x1, x0) & P(f(x0))",
    "f(x0) = x1 & P(x0)",
    "x0 != x1 & !P(x0) & R(x0, x0)",
    "R(x0, x1) & R(x0, x2) & x1 != x2",
    "P(x0) & P(x2) & !P(x1)",
]


@pytest.mark.parametrize("text", CLAUSES)
def test_eliminate_template_against_definition(text):
    rng = random.Random(text)
    for _ in range(6):
        forest = random_forest(rng, rng.randint(1, 6), 3)
        s = random_forest_structure(rng, forest, Language({"R": 2, "P": 1}, ("f",)), density=0.5)
        lits = dnf(parse_formula(text))[0]
        free = sorted({v for lit in lits for v in lit.free_vars} - {"x0"})
        terms = clause_terms(lits, "x0", free)
        for t in enumerate_templates(terms, forest.max_depth):
            el = eliminate_template(lits, t, "x0", "p", FreshNames())
            got = run_elimination(el, forest, s, free)
            want = template_oracle(lits, terms, t, forest, s, "x0", free)
            for vals in itertools.product(range(forest.n), repeat=len(free)):
                assert got(vals) == (vals in want), (str(t), el.case, vals)


def test_eliminate_template_cases_by_shape():
    lits = (parse_formula("R(x0, x1)"),)
    terms = [Var("x0"), Var("x1")]
    by_str = {str(t): t for t in enumerate_templates(terms, 2)}
    assert len(by_str) == 9 and "{}({x0,x1})" in by_str
    fresh = FreshNames()
    assert eliminate_template(lits, by_str["{x0}({x1})"], "x0", "p", fresh).case == "subst"
    assert eliminate_template(lits, by_str["{x1}({x0})"], "x0", "p", fresh).case == "stat0"
    # R needs its arguments on one root path, so separate trees give falsity
    assert eliminate_template(lits, by_str["{x0} {x1}"], "x0", "p", fresh).case == "bot"
    neg = (parse_formula("!R(x0, x1)"),)
    assert eliminate_template(neg, by_str["{x0} {x1}"], "x0", "p", fresh).case == "roots"
    f_lits = (parse_formula("P(f(x0))"),)
    f_terms = [App("f", Var("x0")), Var("x0")]
    apart = [t for t in enumerate_templates(f_terms, 2) if len(t.roots) == 2]
    assert apart and all(eliminate_template(f_lits, t, "x0", "p", fresh).case == "bot" for t in apart)
    with pytest.raises(InputError):
        eliminate_template(lits, enumerate_templates([Var("x1")], 1)[0], "x0", "p", fresh)


def test_expanders_are_pure():
    rng = random.Random(8)
    forest = random_forest(rng, 8, 3)
    s = random_forest_structure(rng, forest, Language({"R": 2, "P": 1}))
    step = eliminate_exists(parse_formula("E x0. R(x0, x1) & P(x0)"), forest.max_depth)
    assert step.expanders
    sp = s.expand(functions={"p": [forest.parent_fn(v) for v in range(forest.n)]})
    before = sp.copy()
    first = [ex.relations(forest, sp) for ex in step.expanders]
    second = [ex.relations(forest, sp) for ex in step.expanders]
    assert first == second
    assert sp == before


# -- one quantifier ---------------------------------------------------------------------


SWEEP = CLAUSES + [
    "E x0. R(x0, f(x1)) | (P(x0) & x0 != x1)",
    "!P(x0) & x0 != f(x0) & R(f(x0), x1)",
    "P(x0)",
    "x0 != x0",
]


@pytest.mark.parametrize("realized", [False, True])
@pytest.mark.parametrize("seed", range(8))
def test_eliminate_exists_matches_direct_evaluation(seed, realized):
    rng = random.Random(seed)
    forest = random_forest(rng, rng.randint(1, 7), 3)
    s = random_forest_structure(rng, forest, Language({"R": 2, "P": 1}, ("f",)))
    for text in SWEEP:
        xi = parse_formula(text if text.startswith("E") else f"E x0. {text}")
        free = sorted(xi.free_vars)
        src = realized_templates(forest, s, "x0", free) if realized else None
        c = Counters()
        step = eliminate_exists(xi, forest.max_depth, templates=src, counters=c)
        got = compile_formula(step.expand(forest, s), step.output, free)
        want = compile_formula(s, xi, free)
        for vals in itertools.product(range(forest.n), repeat=len(free)):
            assert got(vals) == want(vals), (text, vals)
        assert c["templates"] == len(step.eliminations)


def test_eliminate_exists_needs_templates():
    with pytest.raises(InputError):
        eliminate_exists(parse_formula("E x0. P(x0)"))
    with pytest.raises(ResourceCap):
        eliminate_exists(parse_formula("E x0. R(x0, x1) & R(x1, x2) & R(x2, x3)"), 4, template_cap=50)


# -- whole sentences -------------------------------------------------------------------------


def engine_case(seed: int, n: int = 10):
    rng = random.Random(seed)
    g = random_degenerate_graph(rng, n, 2)
    s = random_guarded_structure(rng, g, Language({"R": 2, "S": 2, "P": 1}, ("f",)))
    return g, s


SENTENCES = [
    "E x. P(x)",
    "A x. P(x) | !P(x)",
    "E x. E y. R(x, y) & S(y, x)",
    "A x. E y. R(x, y) | x = y",
    "E x. P(f(x)) & !P(x)",
    "A x. A y. !R(x, y) | R(y, x)",
    "E x. A y. !R(x, y) | P(f(y))",
    "!(E x. E y. x != y & P(x) & P(y))",
    "E x. E y. E z. R(x, y) & R(y, z) & x != z",
    "A x. E y. E z. f(f(x)) = y & S(y, z)",
]


@pytest.mark.parametrize("text", SENTENCES)
def test_reduce_sentence_examples(text):
    for seed in range(3):
        g, s = engine_case(seed)
        phi = parse_formula(text)
        res = reduce_sentence(phi, s, g, config=ReduceConfig(verify=True))
        assert res.value == eval_oracle(s, phi)
        assert len(res.rounds) == quantifier_depth(phi)
        assert res.trace().endswith(f"value: {res.value}\n")


def test_reduce_sentence_on_the_gaifman_guard():
    s = Structure(4, LANG, {"R": [(0, 1), (1, 2)], "P": [(2,)]}, {"f": [1, 2, 3, 3]})
    phi = parse_formula("E x. R(x, f(x)) & P(f(x))")
    assert reduce_sentence(phi, s, gaifman_graph(s)).value is True


def test_reduce_sentence_input_checks():
    g, s = engine_case(0, 6)
    with pytest.raises(InputError):
        reduce_sentence(parse_formula("P(x)"), s, g)
    with pytest.raises(InputError):
        reduce_sentence(parse_formula("E x. P(x)"), s, Graph.from_edges(5, []))
    with pytest.raises(InputError):
        reduce_sentence(parse_formula("E x. P(x)"), Structure(2, LANG, {"R": [(0, 1)]}), Graph.from_edges(2, []))
    deep = parse_formula("E x. E y. E z. R(x, y) & R(y, z)")
    with pytest.raises(ResourceCap):
        reduce_sentence(deep, s, g, config=ReduceConfig(max_quantifier_depth=2))


def test_innermost_exists_picks_a_quantifier_free_body():
    phi = eliminate_forall(parse_formula("E x. A y. R(x, y) & E z. S(y, z)"))
    inner = innermost_exists(phi)
    assert inner is not None and inner.var == "z"
    assert innermost_exists(parse_formula("P(x)")) is None
