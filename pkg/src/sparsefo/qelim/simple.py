"""Rewriting to simple terms by composing nested function symbols."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..augment import kth_augmentation
from ..counters import NULL_COUNTERS, Counters
from ..graph import Graph
from ..logic.structure import Structure
from ..logic.syntax import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
    map_terms,
    neg,
    terms_of,
)


class FreshNames:
    """Generates symbol names unused by a language, tagged with a generation counter."""

    def __init__(self, taken=()) -> None:
        self.taken: set[str] = set(taken)
        self.counter = 0

    def make(self, prefix: str) -> str:
        while True:
            self.counter += 1
            name = f"{prefix}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def eliminate_forall(f: Formula) -> Formula:
    """Rewrite every universal quantifier as a negated existential."""
    if isinstance(f, (Top, Bot, Rel, Eq)):
        return f
    if isinstance(f, Not):
        return Not(eliminate_forall(f.sub))
    if isinstance(f, And):
        return And(tuple(eliminate_forall(g) for g in f.subs))
    if isinstance(f, Or):
        return Or(tuple(eliminate_forall(g) for g in f.subs))
    if isinstance(f, Exists):
        return Exists(f.var, eliminate_forall(f.body))
    if isinstance(f, Forall):
        return Not(Exists(f.var, neg(eliminate_forall(f.body))))
    raise TypeError(f"not a formula: {f!r}")


def _innermost_pairs(f: Formula) -> set[tuple[str, str]]:
    """Pairs ``(g, f)`` with a subterm ``g(f(x))`` for a variable ``x``."""
    out = set()
    for t in terms_of(f):
        if isinstance(t, App) and isinstance(t.arg, App) and isinstance(t.arg.arg, Var):
            out.add((t.fn, t.arg.fn))
    return out


@dataclass
class SimplifyResult:
    formula: Formula
    structure: Structure
    guard: Graph
    rounds: int = 0
    composed: dict[str, tuple[str, str]] = field(default_factory=dict)


def to_simple(
    phi: Formula,
    a: Structure,
    g: Graph,
    *,
    fresh: FreshNames | None = None,
    counters: Counters = NULL_COUNTERS,
) -> SimplifyResult:
    """Replace nested terms ``g(f(t))`` by ``h(t)`` with fresh ``h = g o f`` until all terms are simple.

    Each round composes every innermost nested pair at once.  The guard of
    the expanded structure is the first augmentation of the degeneracy
    orientation of ``g`` extended by the arcs ``f(v) -> v`` of the functions
    involved; the transitive arcs then cover every ``h(v) -- v`` edge.
    """
    fresh = fresh or FreshNames(set(a.language.relations) | set(a.language.functions))
    result = SimplifyResult(phi, a, g)
    while True:
        pairs = _innermost_pairs(result.formula)
        if not pairs:
            return result
        s, guard = result.structure, result.guard
        involved = sorted({x for p in pairs for x in p})
        arcs = [(s.functions[fn][v], v) for fn in involved for v in range(s.n)]
        guard = kth_augmentation(guard, 1, extra_arcs=arcs, counters=counters).augmented
        new_fns: dict[str, list[int]] = {}
        names: dict[tuple[str, str], str] = {}
        for outer, inner in sorted(pairs):
            h = fresh.make("_h")
            fo, fi = s.functions[outer], s.functions[inner]
            new_fns[h] = [fo[fi[v]] for v in range(s.n)]
            names[(outer, inner)] = h
            result.composed[h] = (outer, inner)

        def rewrite(t: Term) -> Term:
            if isinstance(t, App):
                if isinstance(t.arg, App) and isinstance(t.arg.arg, Var):
                    h = names.get((t.fn, t.arg.fn))
                    if h is not None:
                        return App(h, t.arg.arg)
                return App(t.fn, rewrite(t.arg))
            return t

        result.formula = map_terms(result.formula, rewrite)
        result.structure = s.expand(functions=new_fns)
        result.guard = guard
        result.rounds += 1
        counters.add("simplify_rounds", 1)
