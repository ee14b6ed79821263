"""Templates: rooted forests with a placement of terms, and the formulas testing embeddability.

A template is kept in canonical form: vertices are numbered in pre-order of
the sorted recursive encoding ``(labels, children)``, so two templates are
isomorphic exactly when they are equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from ..errors import ResourceCap
from ..logic.structure import Structure
from ..logic.syntax import App, Eq, Formula, Not, Term, Var, conj, iterate, subterms
from ..treedepth import RootedForest

Encoding = tuple  # (sorted label strings, sorted child encodings)


def term_key(t: Term) -> str:
    return str(t)


@dataclass(frozen=True)
class Template:
    """Canonical X-template: ``parent[i] == i`` for roots, ``placement`` maps terms to vertices."""

    parent: tuple[int, ...]
    placement: tuple[tuple[Term, int], ...]
    encoding: Encoding

    @cached_property
    def alpha(self) -> dict[Term, int]:
        return dict(self.placement)

    @property
    def terms(self) -> list[Term]:
        return [t for t, _ in self.placement]

    @property
    def size(self) -> int:
        return len(self.parent)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        dep = [0] * len(self.parent)
        for v in range(len(self.parent)):  # parents precede children in pre-order
            p = self.parent[v]
            dep[v] = 1 if p == v else dep[p] + 1
        return tuple(dep)

    @cached_property
    def max_depth(self) -> int:
        return max(self.depth, default=0)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p != v:
                ch[p].append(v)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.parent) if p == v)

    def q(self, v: int, k: int = 1) -> int:
        """The template-parent function iterated ``k`` times (roots are fixed points)."""
        for _ in range(k):
            v = self.parent[v]
        return v

    def root_of(self, v: int) -> int:
        while self.parent[v] != v:
            v = self.parent[v]
        return v

    def is_ancestor(self, a: int, v: int) -> bool:
        """Reflexive."""
        da = self.depth[a]
        if da > self.depth[v]:
            return False
        return self.q(v, self.depth[v] - da) == a

    def related(self, a: int, b: int) -> bool:
        return self.is_ancestor(a, b) or self.is_ancestor(b, a)

    def subtree(self, v: int) -> list[int]:
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return out

    def lca_depth(self, a: int, b: int) -> int:
        """Depth of the lowest common ancestor, 0 for different trees."""
        da, db = self.depth[a], self.depth[b]
        if da > db:
            a = self.q(a, da - db)
        elif db > da:
            b = self.q(b, db - da)
        while a != b:
            if self.parent[a] == a:
                return 0
            a, b = self.parent[a], self.parent[b]
        return self.depth[a]

    def restrict(self, terms: Iterable[Term]) -> Template:
        """Minimal subforest containing the images of ``terms`` (with their roots)."""
        terms = list(terms)
        nodes: dict[int, set[Term]] = {}
        for t in terms:
            v = self.alpha[t]
            nodes.setdefault(v, set()).add(t)
            while self.parent[v] != v:
                v = self.parent[v]
                nodes.setdefault(v, set())
        return _from_labelled(nodes, lambda v: self.parent[v])

    def __str__(self) -> str:
        return _format_encoding(self.encoding)


def _format_encoding(enc: Encoding) -> str:
    parts = []
    for labels, kids in enc:
        inner = "{" + ",".join(labels) + "}"
        if kids:
            inner += "(" + _format_encoding(kids) + ")"
        parts.append(inner)
    return " ".join(parts)


def _from_labelled(nodes: Mapping[int, set[Term]], parent_of) -> Template:
    """Canonical template of an ancestor-closed labelled vertex set."""
    kids: dict[int, list[int]] = {v: [] for v in nodes}
    roots = []
    for v in nodes:
        p = parent_of(v)
        if p == v:
            roots.append(v)
        else:
            kids[p].append(v)
    terms_by_str: dict[str, Term] = {}
    for ts in nodes.values():
        for t in ts:
            terms_by_str[term_key(t)] = t
    memo: dict[int, tuple] = {}

    def enc(v: int) -> tuple:
        e = memo.get(v)
        if e is None:
            e = (tuple(sorted(term_key(t) for t in nodes[v])), tuple(sorted(enc(c) for c in kids[v])))
            memo[v] = e
        return e

    forest_enc = tuple(sorted(enc(r) for r in roots))
    return template_from_encoding(forest_enc, terms_by_str)


def template_from_encoding(enc: Encoding, terms: Mapping[str, Term]) -> Template:
    parent: list[int] = []
    placement: list[tuple[Term, int]] = []

    def build(node: tuple, par: int | None) -> None:
        v = len(parent)
        parent.append(v if par is None else par)
        labels, kids = node
        for s in labels:
            placement.append((terms[s], v))
        for c in kids:
            build(c, v)

    for root in enc:
        build(root, None)
    placement.sort(key=lambda tv: term_key(tv[0]))
    return Template(tuple(parent), tuple(placement), enc)


# ---------------------------------------------------------------------------
# templates of concrete tuples


def term_value(s: Structure, t: Term, values: Mapping[str, int]) -> int:
    fns = []
    while isinstance(t, App):
        fns.append(t.fn)
        t = t.arg
    v = values[t.name]
    for fn in reversed(fns):
        v = s.functions[fn][v]
    return v


def canonical_template(
    terms: Iterable[Term], forest: RootedForest, s: Structure, values: Mapping[str, int]
) -> Template:
    """The smallest subforest of ``forest`` containing every term value and the roots above them."""
    nodes: dict[int, set[Term]] = {}
    parent = forest.parent
    for t in terms:
        v = term_value(s, t, values)
        if v not in forest.members:
            raise ValueError(f"value {v} of term {t} is not a forest vertex")
        if v in nodes:
            nodes[v].add(t)
            continue
        nodes[v] = {t}
        while parent[v] != v:
            v = parent[v]
            if v in nodes:
                break
            nodes[v] = set()
    return _from_labelled(nodes, lambda v: parent[v])


def all_subterms(terms: Iterable[Term]) -> list[Term]:
    out: dict[str, Term] = {}
    for t in terms:
        for u in subterms(t):
            out[term_key(u)] = u
    return [out[k] for k in sorted(out)]


# ---------------------------------------------------------------------------
# exhaustive enumeration


def enumerate_templates(terms: Sequence[Term], d: int, *, cap: int = 100_000) -> list[Template]:
    """All pairwise non-isomorphic X-templates of depth at most ``d``."""
    by_str = {term_key(t): t for t in terms}
    labels = frozenset(by_str)
    count = [0]
    tree_memo: dict[tuple, list[tuple]] = {}
    forest_memo: dict[tuple, list[tuple]] = {}

    def trees(ls: frozenset[str], budget: int) -> list[tuple]:
        key = (ls, budget)
        if key in tree_memo:
            return tree_memo[key]
        out = []
        items = sorted(ls)
        for r in range(len(items) + 1):
            for own in itertools.combinations(items, r):
                rest = ls - set(own)
                if not rest:
                    if own:
                        out.append((own, ()))
                elif budget > 1:
                    for f in forests(rest, budget - 1):
                        out.append((own, f))
                        count[0] += 1
                        if count[0] > cap:
                            raise ResourceCap(f"more than {cap} templates")
        tree_memo[key] = out
        return out

    def forests(ls: frozenset[str], budget: int) -> list[tuple]:
        key = (ls, budget)
        if key in forest_memo:
            return forest_memo[key]
        out = []
        if not ls:
            out.append(())
        else:
            first = min(ls)
            rest = sorted(ls - {first})
            # the block containing the smallest label, then the remaining forest
            for r in range(len(rest) + 1):
                for others in itertools.combinations(rest, r):
                    block = frozenset((first,) + others)
                    for t in trees(block, budget):
                        for f in forests(ls - block, budget):
                            out.append(tuple(sorted((t,) + f)))
                            count[0] += 1
                            if count[0] > cap:
                                raise ResourceCap(f"more than {cap} templates")
        forest_memo[key] = out
        return out

    if d < 1:
        return [template_from_encoding((), by_str)] if not terms else []
    encs = sorted(set(forests(labels, d)))
    return [template_from_encoding(e, by_str) for e in encs]


# ---------------------------------------------------------------------------
# admissibility formulas


def _p(p: str, k: int, t: Term) -> Term:
    return iterate(p, k, t)


def build_xi(t: Template, p: str, *, compact: bool = True, d: int | None = None) -> Formula:
    """Quantifier-free formula true exactly for value tuples admitting an admissible embedding.

    The full form compares ``p^k(t)`` with ``p^k'(t')`` for all term pairs and all
    ``0 <= k, k' <= d+1`` (``d`` defaults to the template depth).  The compact
    form fixes every term's depth and, for each pair, the depth of their lowest
    common ancestor; both define the same relation when ``p`` is the forest
    parent function.
    """
    terms = t.terms
    alpha = t.alpha
    lits: list[Formula] = []
    if not compact:
        d = t.max_depth if d is None else d
        for i, a in enumerate(terms):
            for b in terms[i:]:
                for k in range(d + 2):
                    for k2 in range(d + 2):
                        if a == b and k2 <= k:
                            continue
                        same = t.q(alpha[a], k) == t.q(alpha[b], k2)
                        eq = Eq(_p(p, k, a), _p(p, k2, b))
                        lits.append(eq if same else Not(eq))
        return conj(*lits)
    dep = t.depth
    for a in terms:
        da = dep[alpha[a]]
        lits.append(Eq(_p(p, da - 1, a), _p(p, da, a)))
        if da >= 2:
            lits.append(Not(Eq(_p(p, da - 2, a), _p(p, da - 1, a))))
    for i, a in enumerate(terms):
        for b in terms[i + 1 :]:
            va, vb = alpha[a], alpha[b]
            da, db = dep[va], dep[vb]
            c = t.lca_depth(va, vb)
            if c == 0:
                lits.append(Not(Eq(_p(p, da - 1, a), _p(p, db - 1, b))))
                continue
            lits.append(Eq(_p(p, da - c, a), _p(p, db - c, b)))
            if da > c and db > c:
                lits.append(Not(Eq(_p(p, da - c - 1, a), _p(p, db - c - 1, b))))
    return conj(*lits)


def embedding_exists(
    t: Template, forest: RootedForest, s: Structure, values: Mapping[str, int]
) -> bool:
    """Brute-force search for an admissible embedding (test oracle)."""
    fixed: dict[int, int] = {}
    for term, v in t.alpha.items():
        val = term_value(s, term, values)
        if fixed.setdefault(v, val) != val:
            return False
    order = list(range(t.size))
    members = sorted(forest.members)

    def ok_partial(nu: dict[int, int]) -> bool:
        imgs = list(nu.values())
        return len(set(imgs)) == len(imgs)

    def extend(i: int, nu: dict[int, int]) -> bool:
        if i == len(order):
            image = set(nu.values())
            # isomorphism onto the induced subforest, roots to roots
            for v, w in nu.items():
                p = t.parent[v]
                if p == v:
                    if not forest.is_root(w):
                        return False
                elif forest.parent[w] != nu[p]:
                    return False
            inv = {w: v for v, w in nu.items()}
            for w in image:
                pw = forest.parent[w]
                if pw != w and pw in image and t.parent[inv[w]] != inv[pw]:
                    return False
            return True
        v = order[i]
        cands = [fixed[v]] if v in fixed else members
        for w in cands:
            nu[v] = w
            if ok_partial(nu) and extend(i + 1, nu):
                return True
            del nu[v]
        return False

    return extend(0, {})
