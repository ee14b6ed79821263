"""Elimination of one existential quantifier relative to a rooted forest.

Given a conjunction of literals ``psi(x0, x1..xn)`` and a template ``T`` for its
terms, :func:`eliminate_template` produces a quantifier-free formula over the
language extended by the forest-parent function ``p`` and fresh unary (or
nullary) relations ``U0, U1, ...``.  The formula holds for ``x1..xn`` exactly when
some ``x0`` satisfies ``psi`` and the tuple is compatible with ``T``.  The
relations are computed from the forest and the structure alone by a
:class:`UExpander`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ..counters import NULL_COUNTERS, Counters
from ..errors import InputError, ResourceCap
from ..logic.semantics import compile_formula
from ..logic.structure import Structure
from ..logic.syntax import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Formula,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
    atom_terms,
    conj,
    disj,
    is_quantifier_free,
    iterate,
    map_terms,
    neg,
    substitute,
    term_var,
    terms_of,
)
from ..treedepth import RootedForest
from .simple import FreshNames
from .templates import Template, all_subterms, build_xi, canonical_template, enumerate_templates, term_key

Clause = tuple[Formula, ...]


# ---------------------------------------------------------------------------
# disjunctive normal form


def _nnf(f: Formula, positive: bool = True) -> Formula:
    if isinstance(f, Not):
        return _nnf(f.sub, not positive)
    if isinstance(f, (And, Or)):
        subs = tuple(_nnf(g, positive) for g in f.subs)
        conj_like = isinstance(f, And) == positive
        return And(subs) if conj_like else Or(subs)
    if isinstance(f, Top):
        return f if positive else Bot()
    if isinstance(f, Bot):
        return f if positive else Top()
    if isinstance(f, (Rel, Eq)):
        return f if positive else Not(f)
    raise InputError("DNF needs a quantifier-free formula")


def dnf(f: Formula, *, cap: int = 4096) -> list[Clause]:
    """Clauses (conjunctions of literals) whose disjunction is ``f``.

    Clauses containing a literal and its negation are dropped; an empty list
    means ``f`` is unsatisfiable, ``[()]`` means it is valid.
    """

    def go(g: Formula) -> list[frozenset]:
        if isinstance(g, Top):
            return [frozenset()]
        if isinstance(g, Bot):
            return []
        if isinstance(g, Or):
            out: list[frozenset] = []
            for h in g.subs:
                out.extend(go(h))
                if len(out) > cap:
                    raise ResourceCap(f"DNF has more than {cap} clauses")
            return out
        if isinstance(g, And):
            acc = [frozenset()]
            for h in g.subs:
                parts = go(h)
                acc = [a | b for a in acc for b in parts]
                if len(acc) > cap:
                    raise ResourceCap(f"DNF has more than {cap} clauses")
            return acc
        return [frozenset([g])]

    out = []
    seen = set()
    for c in go(_nnf(f)):
        if any(isinstance(lit, Not) and lit.sub in c for lit in c):
            continue
        if c in seen:
            continue
        seen.add(c)
        out.append(tuple(sorted(c, key=str)))
    return out


# ---------------------------------------------------------------------------
# expanders


@dataclass
class UExpander:
    """Computes ``U0`` and the counting relations ``U1..Um`` of one template.

    ``U0(w)`` holds for ``w`` at depth ``d_v + 1`` whose subtree contains some
    ``v0`` at depth ``d_x0`` such that the x0-part ``t0`` embeds admissibly with
    ``x0 -> v0`` and ``local(v0)`` holds.  For ``d_v >= 1``, ``Ui(w)`` holds for
    ``w`` at depth ``d_v`` with at least ``i`` children in ``U0``; for ``d_v = 0``
    (the roots case) ``Ui`` is nullary and counts roots in ``U0``.
    """

    u0: str
    counts: tuple[str, ...]
    x0: str
    t0: Template
    d_v: int
    d_x0: int
    local: Formula

    @property
    def nullary_counts(self) -> bool:
        return self.d_v == 0

    def relations(
        self, forest: RootedForest, s: Structure, counters: Counters = NULL_COUNTERS
    ) -> dict[str, tuple[int, set[tuple[int, ...]]]]:
        """New relations computed from ``(forest, s)``; ``s`` must interpret ``p``."""
        pred = compile_formula(s, self.local, [self.x0])
        terms = self.t0.terms
        marked: set[int] = set()
        work = 0
        for v0 in sorted(forest.members):
            work += 1
            if forest.depth[v0] != self.d_x0:
                continue
            w = forest.ancestor_at_depth(v0, self.d_v + 1)
            if w in marked:
                continue
            if not pred((v0,)):
                continue
            if canonical_template(terms, forest, s, {self.x0: v0}) != self.t0:
                continue
            marked.add(w)
        counters.add("expander_work", work)
        out: dict[str, tuple[int, set[tuple[int, ...]]]] = {self.u0: (1, {(w,) for w in marked})}
        if self.nullary_counts:
            for i, name in enumerate(self.counts, start=1):
                out[name] = (0, {()} if len(marked) >= i else set())
        else:
            cnt: dict[int, int] = {}
            for w in marked:
                p = forest.parent[w]
                cnt[p] = cnt.get(p, 0) + 1
            for i, name in enumerate(self.counts, start=1):
                out[name] = (1, {(w,) for w, c in cnt.items() if c >= i})
        return out


@dataclass
class TemplateElimination:
    template: Template
    case: str  # "bot", "subst", "stat0" or "roots"
    formula: Formula
    expander: UExpander | None = None


def _has_var(t: Term, x: str) -> bool:
    return term_var(t).name == x


def _literal_atom(lit: Formula) -> tuple[Formula, bool]:
    if isinstance(lit, Not):
        return lit.sub, False
    return lit, True


def _clique_literal(lit: Formula, t: Template) -> Formula:
    """The literal with atoms that cannot hold on a compatible tuple replaced by falsity."""
    atom, positive = _literal_atom(lit)
    alpha = t.alpha
    if isinstance(atom, Eq):
        ok = alpha[atom.left] == alpha[atom.right]
    elif isinstance(atom, Rel):
        vs = [alpha[a] for a in atom.args]
        ok = all(t.related(a, b) for a, b in itertools.combinations(vs, 2))
    else:
        return lit
    if ok:
        return lit
    return Bot() if positive else Top()


def eliminate_template(
    literals: Sequence[Formula],
    t: Template,
    x0: str,
    p: str,
    fresh: FreshNames,
    *,
    compact: bool = True,
) -> TemplateElimination:
    """Eliminate ``E x0`` from a conjunction of literals relative to template ``t``.

    ``t`` must be a template over all terms of the literals (including ``x0``).
    """
    alpha = t.alpha
    x0v = Var(x0)
    if x0v not in alpha:
        raise InputError(f"template does not place the quantified variable {x0}")
    for term in t.terms:
        if isinstance(term, App) and not t.related(alpha[term], alpha[term.arg]):
            return TemplateElimination(t, "bot", Bot())
    ax0 = alpha[x0v]
    dep = t.depth
    free_terms = [u for u in t.terms if not _has_var(u, x0)]
    x0_terms = [u for u in t.terms if _has_var(u, x0)]
    # x0 sits above a term of the other variables: it is determined by that term
    for u in free_terms:
        if t.is_ancestor(ax0, alpha[u]):
            k = dep[alpha[u]] - dep[ax0]
            body = conj(*literals, build_xi(t, p, compact=compact))
            return TemplateElimination(t, "subst", substitute(body, x0, iterate(p, k, u)))
    lits = [_clique_literal(lit, t) for lit in literals]
    if any(isinstance(lit, Bot) for lit in lits):
        return TemplateElimination(t, "bot", Bot())
    lits = [lit for lit in lits if not isinstance(lit, Top)]
    r0 = t.root_of(ax0)
    stat0 = any(t.root_of(alpha[u]) == r0 for u in free_terms)
    u0 = fresh.make("_U")
    if stat0:
        v = t.parent[ax0]
        while not any(t.is_ancestor(v, alpha[u]) for u in free_terms):
            v = t.parent[v]
        d_v = dep[v]
        t_v = next(u for u in free_terms if t.is_ancestor(v, alpha[u]))
        k_v = dep[alpha[t_v]] - d_v
        c0 = t.q(ax0, dep[ax0] - d_v - 1)
        branches = [c for c in t.children[v] if c != c0]
        x0_part = {term_key(u) for u in t.terms if t.is_ancestor(c0, alpha[u])}
        above = {term_key(u): u for u in t.terms if t.is_ancestor(alpha[u], v)}
        local_map = {k: iterate(p, dep[ax0] - dep[alpha[u]], x0v) for k, u in above.items()}
        rest_map = {
            k: iterate(p, dep[alpha[t_v]] - dep[alpha[u]], t_v)
            for k, u in above.items()
            if _has_var(u, x0)
        }
        anchor = iterate(p, k_v, t_v)
    else:
        d_v = 0
        branches = [r for r in t.roots if r != r0]
        x0_part = {term_key(u) for u in t.terms if t.root_of(alpha[u]) == r0}
        local_map = {}
        rest_map = {}
        anchor = None
    local_lits = []
    rest_lits = []
    for lit in lits:
        keys = {term_key(u) for u in atom_terms(_literal_atom(lit)[0])}
        if keys & x0_part:
            local_lits.append(map_terms(lit, lambda u: local_map.get(term_key(u), u)))
        else:
            rest_lits.append(map_terms(lit, lambda u: rest_map.get(term_key(u), u)))
    picks = []
    for c in branches:
        u = next(u for u in t.terms if t.is_ancestor(c, alpha[u]))
        assert not _has_var(u, x0)
        picks.append(iterate(p, dep[alpha[u]] - d_v - 1, u))
    m = len(branches) + 1
    counts = tuple(fresh.make("_U") for _ in range(m))
    clauses = []
    for r in range(len(picks) + 1):
        for ys in itertools.combinations(range(len(picks)), r):
            premise = conj(*(Rel(u0, (picks[i],)) for i in ys))
            target = Rel(counts[r], (anchor,)) if anchor is not None else Rel(counts[r], ())
            clauses.append(disj(neg(premise), target))
    rest_t = t.restrict(free_terms) if free_terms else None
    xi_rest = build_xi(rest_t, p, compact=compact) if rest_t is not None else Top()
    expander = UExpander(
        u0=u0,
        counts=counts,
        x0=x0,
        t0=t.restrict(x0_terms),
        d_v=d_v,
        d_x0=dep[ax0],
        local=conj(*local_lits),
    )
    formula = conj(*rest_lits, xi_rest, *clauses)
    return TemplateElimination(t, "stat0" if stat0 else "roots", formula, expander)


# ---------------------------------------------------------------------------
# one existential quantifier


@dataclass
class EliminationStep:
    """``E x0 psi`` and its quantifier-free replacement over the extended language."""

    source: Formula
    output: Formula
    p: str
    expanders: list[UExpander] = field(default_factory=list)
    eliminations: list[TemplateElimination] = field(default_factory=list)

    def expand(
        self, forest: RootedForest, s: Structure, counters: Counters = NULL_COUNTERS
    ) -> Structure:
        """``s`` expanded by the forest-parent function and every ``U`` relation."""
        if self.p not in s.functions:
            s = s.expand(functions={self.p: [forest.parent_fn(v) for v in range(s.n)]})
        rels: dict[str, tuple[int, set]] = {}
        for ex in self.expanders:
            rels.update(ex.relations(forest, s, counters))
        return s.expand(relations=rels) if rels else s


TemplateSource = Callable[[Sequence[Term]], Iterable[Template]]


def split_exists(xi: Formula) -> tuple[str, Formula]:
    if not isinstance(xi, Exists) or not is_quantifier_free(xi.body):
        raise InputError("expected E x. psi with quantifier-free psi")
    body = xi.body
    if xi.var not in body.free_vars:
        body = conj(body, Eq(Var(xi.var), Var(xi.var)))
    return xi.var, body


def clause_terms(clause: Sequence[Formula], x0: str, free: Iterable[str]) -> list[Term]:
    """Every term of the clause with its subterms, plus all the variables."""
    ts = [Var(x0)] + [Var(x) for x in free]
    for lit in clause:
        ts.extend(terms_of(lit))
    return all_subterms(ts)


def eliminate_exists(
    xi: Formula,
    d: int | None = None,
    *,
    templates: TemplateSource | None = None,
    extra: Sequence[Formula] = (),
    p: str = "p",
    fresh: FreshNames | None = None,
    compact: bool = True,
    dnf_cap: int = 4096,
    template_cap: int = 100_000,
    counters: Counters = NULL_COUNTERS,
) -> EliminationStep:
    """Replace ``E x0 psi`` by a disjunction over DNF clauses and templates.

    ``templates(terms)`` supplies the templates for a clause's term set; by
    default every template of depth at most ``d`` is enumerated.  ``extra``
    literals are conjoined to every clause.
    """
    x0, body = split_exists(xi)
    free = sorted(xi.free_vars)
    fresh = fresh or FreshNames({p})
    if templates is None:
        if d is None:
            raise InputError("either a depth bound or a template source is required")
        templates = lambda ts: enumerate_templates(ts, d, cap=template_cap)  # noqa: E731
    step = EliminationStep(xi, Bot(), p)
    outs = []
    for clause in dnf(body, cap=dnf_cap):
        lits = tuple(clause) + tuple(extra)
        terms = clause_terms(lits, x0, free)
        for t in templates(terms):
            counters.add("templates", 1)
            el = eliminate_template(lits, t, x0, p, fresh, compact=compact)
            step.eliminations.append(el)
            if el.expander is not None:
                step.expanders.append(el.expander)
            outs.append(el.formula)
            if len(step.eliminations) > template_cap:
                raise ResourceCap(f"more than {template_cap} templates in one elimination")
    step.output = disj(*outs)
    return step


def realized_templates(
    forest: RootedForest, s: Structure, x0: str, free: Sequence[str]
) -> TemplateSource:
    """Template source returning the templates of all value tuples over the forest's vertices."""
    members = sorted(forest.members)
    names = [x0, *free]

    def source(terms: Sequence[Term]) -> list[Template]:
        found = {}
        for vals in itertools.product(members, repeat=len(names)):
            env = dict(zip(names, vals))
            try:
                t = canonical_template(terms, forest, s, env)
            except ValueError:
                continue  # a function value left the forest
            found[t.encoding] = t
        return [found[k] for k in sorted(found)]

    return source
