"""Seeded random instances: sparse graphs, guarded structures, formulas.

Every generator takes an explicit ``random.Random``; nothing touches global state.
"""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from .graph import Graph
from .logic.structure import Language, Structure
from .logic.syntax import (
    App,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Rel,
    Term,
    Var,
    conj,
    disj,
)
from .treedepth import RootedForest

VARIABLES = ("x", "y", "z", "w", "u", "v")


def random_degenerate_graph(rng: random.Random, n: int, degeneracy: int = 3) -> Graph:
    """Every vertex picks at most ``degeneracy`` earlier neighbours, so the degeneracy is bounded."""
    edges = set()
    for v in range(1, n):
        k = rng.randint(0, min(v, degeneracy))
        for u in rng.sample(range(v), k):
            edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


def random_forest(rng: random.Random, n: int, max_depth: int = 4, root_rate: float = 0.2) -> RootedForest:
    parent: list[int] = []
    depth: list[int] = []
    for v in range(n):
        cands = [u for u in range(v) if depth[u] < max_depth]
        if not cands or rng.random() < root_rate:
            parent.append(v)
            depth.append(1)
        else:
            p = rng.choice(cands)
            parent.append(p)
            depth.append(depth[p] + 1)
    return RootedForest.from_parents(parent)


def random_guarded_structure(
    rng: random.Random,
    g: Graph,
    language: Language,
    *,
    density: float = 0.3,
    loop_rate: float = 0.1,
) -> Structure:
    """Random tuples on cliques of ``g`` (edges, loops and, for arity 3, triangles); functions follow edges."""
    s = Structure(g.n, language)
    edges = list(g.edges())
    for name, arity in sorted(language.relations.items()):
        if arity == 0:
            if rng.random() < 0.5:
                s.add_tuple(name, ())
        elif arity == 1:
            for v in range(g.n):
                if rng.random() < density:
                    s.add_tuple(name, (v,))
        else:
            for u, v in edges:
                for a, b in ((u, v), (v, u)):
                    if rng.random() < density:
                        s.add_tuple(name, tuple([a, b] + [rng.choice((a, b)) for _ in range(arity - 2)]))
            for v in range(g.n):
                if rng.random() < loop_rate:
                    s.add_tuple(name, (v,) * arity)
    for fn in language.functions:
        for v in range(g.n):
            s.set_function(fn, v, rng.choice(sorted(g.neighbor_sets[v]) + [v]))
    return s


def random_forest_structure(
    rng: random.Random, forest: RootedForest, language: Language, *, density: float = 0.3
) -> Structure:
    """Random structure guarded by the closure of ``forest`` (tuples on root paths)."""
    n = forest.n
    s = Structure(n, language)
    members = sorted(forest.members)
    for name, arity in sorted(language.relations.items()):
        if arity == 0:
            if rng.random() < 0.5:
                s.add_tuple(name, ())
            continue
        for v in members:
            path = forest.path_to_root(v)
            for a in path:
                if rng.random() < density / max(1, arity - 1):
                    t = [v, a] + [rng.choice(path) for _ in range(arity - 2)]
                    if arity == 1:
                        t = [v]
                    rng.shuffle(t)
                    s.add_tuple(name, tuple(t))
    for fn in language.functions:
        for v in members:
            related = forest.path_to_root(v) + [u for u in members if forest.is_ancestor(v, u)]
            s.set_function(fn, v, rng.choice(related))
    return s


def random_structure(rng: random.Random, n: int, language: Language, density: float = 0.2) -> Structure:
    """Unconstrained random structure (for format tests)."""
    s = Structure(n, language)
    for name, arity in sorted(language.relations.items()):
        if arity == 0:
            if rng.random() < 0.5:
                s.add_tuple(name, ())
            continue
        count = int(density * n ** min(arity, 2))
        for _ in range(count):
            s.add_tuple(name, tuple(rng.randrange(n) for _ in range(arity)))
    for fn in language.functions:
        for v in range(n):
            s.set_function(fn, v, rng.randrange(n))
    return s


def random_term(
    rng: random.Random, variables: Sequence[str], functions: Sequence[str], nest: float = 0.3, max_nest: int = 2
) -> Term:
    t: Term = Var(rng.choice(variables))
    for _ in range(max_nest):
        if functions and rng.random() < nest:
            t = App(rng.choice(functions), t)
        else:
            break
    return t


def random_atom(
    rng: random.Random,
    variables: Sequence[str],
    relations: Mapping[str, int],
    functions: Sequence[str] = (),
    nest: float = 0.3,
    max_nest: int = 2,
) -> Formula:
    names = sorted(r for r, a in relations.items() if a == 0 or variables)
    if names and (not variables or rng.random() < 0.8):
        name = rng.choice(names)
        args = tuple(random_term(rng, variables, functions, nest, max_nest) for _ in range(relations[name]))
        return Rel(name, args)
    if not variables:
        raise ValueError("no atoms available without variables or nullary relations")
    return Eq(
        random_term(rng, variables, functions, nest, max_nest),
        random_term(rng, variables, functions, nest, max_nest),
    )


def random_qf(
    rng: random.Random,
    variables: Sequence[str],
    relations: Mapping[str, int],
    functions: Sequence[str] = (),
    depth: int = 2,
    nest: float = 0.3,
    max_nest: int = 2,
) -> Formula:
    """Random quantifier-free formula with and/or/not over the given atoms."""
    if depth == 0 or rng.random() < 0.3:
        return random_atom(rng, variables, relations, functions, nest, max_nest)
    k = rng.random()
    sub = lambda: random_qf(rng, variables, relations, functions, depth - 1, nest, max_nest)  # noqa: E731
    if k < 0.2:
        return Not(sub())
    if k < 0.6:
        return conj(sub(), sub())
    return disj(sub(), sub())


def random_sigma1(
    rng: random.Random, nvars: int, relations: Mapping[str, int], depth: int = 3
) -> Formula:
    vs = list(VARIABLES[:nvars])
    phi = random_qf(rng, vs, relations, (), depth)
    for v in reversed(vs):
        phi = Exists(v, phi)
    return phi


def random_sentence(
    rng: random.Random,
    qdepth: int,
    relations: Mapping[str, int],
    functions: Sequence[str] = (),
    *,
    nest: float = 0.25,
    max_nest: int = 2,
) -> Formula:
    """Random sentence of quantifier depth exactly ``qdepth`` (mixed quantifiers, negations)."""

    def go(d: int, bound: list[str]) -> Formula:
        if d == 0:
            return random_qf(rng, bound, relations, functions, 2, nest, max_nest)
        x = VARIABLES[len(bound)]
        body = go(d - 1, bound + [x])
        if bound and rng.random() < 0.4:
            side = random_qf(rng, bound + [x], relations, functions, 1, nest, max_nest)
            body = conj(body, side) if rng.random() < 0.5 else disj(body, side)
        q: Formula = Exists(x, body) if rng.random() < 0.6 else Forall(x, body)
        if bound and rng.random() < 0.3:
            q = conj(q, random_atom(rng, bound, relations, functions, nest, max_nest))
        return Not(q) if rng.random() < 0.2 else q

    return go(qdepth, [])
