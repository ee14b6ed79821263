"""Deciding first-order sentences by repeated elimination of innermost quantifiers.

Every round picks an innermost ``E x0. psi`` with free variables ``x1..xn``,
colors the guard with a low tree-depth coloring, and for every color
mapping ``alpha`` realized by a tuple of the structure eliminates ``x0`` inside
the substructure on the colors of ``alpha``.  The union over ``alpha`` of the
tuples satisfying the resulting quantifier-free formulas is stored as a fresh
relation ``W(x1..xn)`` that replaces the subformula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..counters import NULL_COUNTERS, Counters
from ..errors import InputError, ResourceCap, VerificationError
from ..graph import Graph
from ..logic.semantics import compile_formula, eval_oracle
from ..logic.structure import Structure, is_guarded
from ..logic.syntax import (
    And,
    App,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Rel,
    Term,
    Var,
    conj,
    format_formula,
    is_quantifier_free,
    quantifier_depth,
    walk,
)
from ..treedepth import RootedForest, dfs_forest, low_treedepth_coloring
from .eliminate import clause_terms, dnf, eliminate_template, split_exists
from .simple import FreshNames, eliminate_forall, to_simple
from .templates import Template, canonical_template


@dataclass
class ReduceConfig:
    """Resource caps and switches of the engine."""

    max_quantifier_depth: int = 6
    max_alphas: int = 5_000
    max_templates: int = 200_000
    max_dnf_clauses: int = 4096
    max_rounds: int = 2  # cap on the augmentation rounds of the per-round coloring
    max_tuples: int = 2_000_000  # cap on n^(free variables + 1) per elimination
    certify_budget: int = 200_000
    compact_xi: bool = True
    verify: bool = False


@dataclass
class RoundTrace:
    subformula: str
    free: tuple[str, ...]
    terms: int
    k_target: int
    rounds: int
    colors: int
    certified: bool
    palettes: int
    alphas: int
    templates: int
    clauses: int
    relation: str
    size: int
    verified: bool | None
    diagnostics: list[str] = field(default_factory=list)

    def format(self) -> str:
        lines = [
            f"round subformula: {self.subformula}",
            f"  free={','.join(self.free) or '-'} terms={self.terms} colors={self.colors}"
            f" rounds={self.rounds}/{self.k_target} certified={self.certified}",
            f"  palettes={self.palettes} realized_alpha={self.alphas} clauses={self.clauses}"
            f" templates={self.templates}",
            f"  {self.relation}: {self.size} tuples"
            + ("" if self.verified is None else f" verified={self.verified}"),
        ]
        lines += [f"  note: {d}" for d in self.diagnostics]
        return "\n".join(lines)


@dataclass
class ReduceResult:
    value: bool
    rounds: list[RoundTrace]
    final: Formula

    def trace(self) -> str:
        body = "\n".join(r.format() for r in self.rounds)
        return (body + "\n" if body else "") + f"final: {format_formula(self.final)}\nvalue: {self.value}\n"


def innermost_exists(f: Formula) -> Exists | None:
    """The first existential subformula (pre-order) whose body is quantifier-free."""
    for g in walk(f):
        if isinstance(g, Exists) and is_quantifier_free(g.body):
            return g
    return None


def replace_subformula(f: Formula, old: Formula, new: Formula) -> Formula:
    if f == old:
        return new
    if isinstance(f, Not):
        return Not(replace_subformula(f.sub, old, new))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(replace_subformula(g, old, new) for g in f.subs))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, replace_subformula(f.body, old, new))
    return f


def _palette_structure(s: Structure, members: frozenset[int]) -> Structure:
    """Relations restricted to ``members``; functions leaving ``members`` become the identity."""
    out = s.copy()
    for r, ts in out.relations.items():
        out.relations[r] = {t for t in ts if all(v in members for v in t)}
    for fn, vals in out.functions.items():
        out.functions[fn] = [w if v in members and w in members else v for v, w in enumerate(vals)]
    return out


class _Round:
    """State of one elimination: colorings, palettes and the realized color mappings."""

    def __init__(self, xi: Exists, s: Structure, g: Graph, fresh: FreshNames, cfg: ReduceConfig,
                 counters: Counters) -> None:
        self.xi = xi
        self.s = s
        self.g = g
        self.fresh = fresh
        self.cfg = cfg
        self.counters = counters
        self.x0, self.body = split_exists(xi)
        self.free = sorted(xi.free_vars)
        self.clauses = dnf(self.body, cap=cfg.max_dnf_clauses)
        self.terms = clause_terms(
            [lit for c in self.clauses for lit in c] or [self.body], self.x0, self.free
        )
        self.diagnostics: list[str] = []

    def run(self) -> tuple[set[tuple[int, ...]], RoundTrace]:
        cfg, s, n = self.cfg, self.s, self.s.n
        nterms = len(self.terms)
        k_target = 3 * (nterms * nterms + 1) ** 2
        rounds = min(k_target, cfg.max_rounds)
        ltd = low_treedepth_coloring(
            self.g, nterms, rounds=rounds, counters=self.counters, certify_budget=cfg.certify_budget
        )
        if rounds < k_target and not ltd.certified:
            self.diagnostics.append(
                f"augmentation capped at {rounds} of {k_target} rounds; coloring not certified"
            )
        colors = ltd.coloring.colors
        width = len(self.free) + 1
        if n**width > cfg.max_tuples:
            raise ResourceCap(f"{n}^{width} tuples exceed the cap of {cfg.max_tuples}")
        names = [self.x0, *self.free]
        slot = {x: i for i, x in enumerate(names)}
        getters = []
        for t in self.terms:
            fns = []
            u = t
            while isinstance(u, App):
                fns.append(s.functions[u.fn])
                u = u.arg
            getters.append((slot[u.name], fns[::-1]))
        clause_terms_ = [clause_terms(c, self.x0, self.free) for c in self.clauses]
        termsets = {tuple(str(t) for t in ts): ts for ts in clause_terms_}
        forests: dict[frozenset[int], RootedForest] = {}
        realized: dict[tuple[int, ...], dict[tuple, dict]] = {}
        for vals in itertools.product(range(n), repeat=width):
            alpha = []
            for i, fns in getters:
                v = vals[i]
                for f in fns:
                    v = f[v]
                alpha.append(colors[v])
            alpha = tuple(alpha)
            per = realized.get(alpha)
            if per is None:
                if len(realized) >= cfg.max_alphas:
                    raise ResourceCap(f"more than {cfg.max_alphas} realized color mappings")
                per = realized[alpha] = {k: {} for k in termsets}
            palette = frozenset(alpha)
            forest = forests.get(palette)
            if forest is None:
                members = [v for v in range(n) if colors[v] in palette]
                forest = forests[palette] = dfs_forest(self.g, members)
            env = dict(zip(names, vals))
            # on a tuple realizing alpha all term values stay inside the palette,
            # so evaluating in s agrees with the restricted structure
            for key, ts in termsets.items():
                t = canonical_template(ts, forest, s, env)
                per[key].setdefault(t.encoding, t)
        self.counters.add("qelim_tuples", n**width)
        total_templates = sum(len(b) for per in realized.values() for b in per.values())
        if total_templates * max(1, len(self.clauses)) > cfg.max_templates:
            raise ResourceCap(f"{total_templates} realized templates exceed the cap")
        rel_name = self.fresh.make("_W")
        w_tuples: set[tuple[int, ...]] = set()
        ntemplates = 0
        base: dict[frozenset[int], Structure] = {}
        cnames: dict[tuple, str] = {}

        def cname(key: tuple) -> str:
            if key not in cnames:
                cnames[key] = self.fresh.make("_C")
            return cnames[key]

        by_palette: dict[frozenset[int], list[tuple[int, ...]]] = {}
        for alpha in sorted(realized):
            by_palette.setdefault(frozenset(alpha), []).append(alpha)
        for palette in sorted(by_palette, key=sorted):
            forest = forests[palette]
            members = forest.members
            p = self.fresh.make("_p")
            sp = _palette_structure(s, members)
            # color predicates of the restricted structure
            crels: dict[str, tuple[int, set]] = {}
            for alpha in by_palette[palette]:
                for t, c in zip(self.terms, alpha):
                    if isinstance(t, Var):
                        key = ("C", c)
                        pick = lambda v: colors[v] == c  # noqa: E731
                    else:
                        key = ("C", t.fn, c)
                        fv = s.functions[t.fn]
                        pick = lambda v, fv=fv, c=c: colors[fv[v]] == c  # noqa: E731
                    name = cname(key)
                    if name not in crels:
                        crels[name] = (1, {(v,) for v in members if pick(v)})
            sp = sp.expand(
                relations=crels, functions={p: [forest.parent_fn(v) for v in range(n)]}
            )
            for alpha in by_palette[palette]:
                extra = []
                for t, c in zip(self.terms, alpha):
                    if isinstance(t, Var):
                        extra.append(Rel(cname(("C", c)), (t,)))
                    else:
                        extra.append(Rel(cname(("C", t.fn, c)), (t.arg,)))
                outs = []
                urels: dict[str, tuple[int, set]] = {}
                for clause, ts in zip(self.clauses, clause_terms_):
                    key = tuple(str(t) for t in ts)
                    lits = tuple(clause) + tuple(extra)
                    for enc in sorted(realized[alpha][key]):
                        tmpl = realized[alpha][key][enc]
                        ntemplates += 1
                        el = eliminate_template(
                            lits, tmpl, self.x0, p, self.fresh, compact=cfg.compact_xi
                        )
                        if el.expander is not None:
                            urels.update(el.expander.relations(forest, sp, self.counters))
                        outs.append(el.formula)
                if not outs:
                    continue
                sa = sp.expand(relations=urels) if urels else sp
                pred = compile_formula(sa, conj(Or(tuple(outs)) if len(outs) > 1 else outs[0]), self.free)
                cands = []
                for x in self.free:
                    ok = []
                    for v in sorted(members):
                        good = True
                        for t, c in zip(self.terms, alpha):
                            if t == Var(x):
                                good = good and colors[v] == c
                            elif isinstance(t, App) and t.arg == Var(x):
                                good = good and colors[s.functions[t.fn][v]] == c
                        if good:
                            ok.append(v)
                    cands.append(ok)
                for vs in itertools.product(*cands):
                    self.counters.add("qelim_evals", 1)
                    if vs not in w_tuples and pred(vs):
                        w_tuples.add(vs)
        verified = None
        if cfg.verify:
            verified = self.verify(w_tuples)
        trace = RoundTrace(
            subformula=format_formula(self.xi),
            free=tuple(self.free),
            terms=nterms,
            k_target=k_target,
            rounds=ltd.rounds,
            colors=ltd.K,
            certified=ltd.certified,
            palettes=len(by_palette),
            alphas=len(realized),
            templates=ntemplates,
            clauses=len(self.clauses),
            relation=rel_name,
            size=len(w_tuples),
            verified=verified,
            diagnostics=self.diagnostics,
        )
        self.rel_name = rel_name
        return w_tuples, trace

    def verify(self, w_tuples: set[tuple[int, ...]]) -> bool:
        want = compile_formula(self.s, self.xi, self.free)
        for vs in itertools.product(range(self.s.n), repeat=len(self.free)):
            if want(vs) != (vs in w_tuples):
                binding = dict(zip(self.free, vs))
                raise VerificationError(
                    f"elimination of {format_formula(self.xi)} disagrees with direct evaluation at {binding}"
                )
        return True


def reduce_sentence(
    phi: Formula,
    a: Structure,
    g: Graph,
    *,
    config: ReduceConfig | None = None,
    counters: Counters = NULL_COUNTERS,
) -> ReduceResult:
    """Decide ``a |= phi`` by quantifier elimination; ``a`` must be guarded by ``g``."""
    cfg = config or ReduceConfig()
    if phi.free_vars:
        raise InputError(f"formula has free variables {sorted(phi.free_vars)}")
    if a.n != g.n:
        raise InputError("structure and guard graph have different sizes")
    if not is_guarded(a, g):
        raise InputError("structure is not guarded by the guard graph")
    qd = quantifier_depth(phi)
    if qd > cfg.max_quantifier_depth:
        raise ResourceCap(f"quantifier depth {qd} exceeds the cap of {cfg.max_quantifier_depth}")
    fresh = FreshNames(set(a.language.relations) | set(a.language.functions))
    simple = to_simple(eliminate_forall(phi), a, g, fresh=fresh, counters=counters)
    f, s, guard = simple.formula, simple.structure, simple.guard
    traces: list[RoundTrace] = []
    while True:
        xi = innermost_exists(f)
        if xi is None:
            break
        rnd = _Round(xi, s, guard, fresh, cfg, counters)
        w_tuples, trace = rnd.run()
        traces.append(trace)
        counters.add("qelim_rounds", 1)
        arity = len(rnd.free)
        s = s.expand(relations={rnd.rel_name: (arity, w_tuples)})
        if arity >= 2:
            extra = {
                (min(u, v), max(u, v))
                for t in w_tuples
                for u, v in itertools.combinations(t, 2)
                if u != v and not guard.has_edge(u, v)
            }
            if extra:
                guard = Graph.from_edges(s.n, list(guard.edges()) + sorted(extra))
        f = replace_subformula(f, xi, Rel(rnd.rel_name, tuple(Var(x) for x in rnd.free)))
    value = eval_oracle(s, f, {})
    return ReduceResult(value, traces, f)
