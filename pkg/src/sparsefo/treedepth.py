"""Low tree-depth colorings and depth-certifying rooted forests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .augment import AugmentationChain, _augment_sets
from .counters import NULL_COUNTERS, Counters
from .errors import InputError, ResourceCap, VerificationError
from .graph import Coloring, DiGraph, Graph, degeneracy_order, greedy_color, orient_by_order


class ForestDepthError(VerificationError):
    """A DFS forest exceeded the depth bound implied by a low tree-depth coloring."""


@dataclass(frozen=True, eq=False)
class RootedForest:
    """Parent-array forest over global vertex ids.

    ``parent[v] == v`` for roots, ``-1`` for vertices outside ``members``.
    Roots have depth 1; non-members have depth 0.
    """

    parent: tuple[int, ...]
    depth: tuple[int, ...]
    members: frozenset[int]

    @classmethod
    def from_parents(cls, parent: Sequence[int]) -> RootedForest:
        """Build from a parent array (``-1`` = absent); depths are computed and cycles rejected."""
        n = len(parent)
        depth = [0] * n
        for v in range(n):
            if parent[v] < 0 or depth[v]:
                continue
            path = []
            u = v
            while not depth[u]:
                path.append(u)
                if len(path) > n:
                    raise InputError("parent links contain a cycle")
                p = parent[u]
                if p < 0:
                    raise InputError(f"vertex {u} has an absent parent")
                if p == u:
                    break
                u = p
            base = depth[u] if depth[u] else 0
            for w in reversed(path):
                base += 1
                depth[w] = base
        members = frozenset(v for v in range(n) if parent[v] >= 0)
        return cls(tuple(parent), tuple(depth), members)

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def max_depth(self) -> int:
        return max(self.depth, default=0)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in range(self.n)]
        for v in sorted(self.members):
            p = self.parent[v]
            if p != v:
                ch[p].append(v)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(v for v in sorted(self.members) if self.parent[v] == v)

    def is_root(self, v: int) -> bool:
        return self.parent[v] == v

    def parent_fn(self, v: int) -> int:
        """The F-parent function: parent, roots and non-members map to themselves."""
        p = self.parent[v]
        return v if p < 0 else p

    def ancestor_at_depth(self, v: int, dep: int) -> int:
        while self.depth[v] > dep:
            v = self.parent[v]
        return v

    def path_to_root(self, v: int) -> list[int]:
        """Vertices from ``v`` up to its root, inclusive."""
        out = [v]
        while self.parent[v] != v:
            v = self.parent[v]
            out.append(v)
        return out

    def is_ancestor(self, a: int, v: int) -> bool:
        """Reflexive ancestor test."""
        if self.depth[a] > self.depth[v] or a not in self.members or v not in self.members:
            return False
        return self.ancestor_at_depth(v, self.depth[a]) == a

    def related(self, u: int, v: int) -> bool:
        return self.is_ancestor(u, v) or self.is_ancestor(v, u)

    def closure_contains(self, g: Graph) -> bool:
        """Every edge of ``g`` between members joins an ancestor-descendant pair."""
        return all(self.related(u, v) for u, v in g.edges() if u in self.members and v in self.members)

    def closure_edges(self) -> set[tuple[int, int]]:
        out = set()
        for v in self.members:
            u = v
            while self.parent[u] != u:
                u = self.parent[u]
                out.add((min(u, v), max(u, v)))
        return out


@dataclass(frozen=True)
class LowTDColoring:
    """Coloring of an augmentation together with the chain that produced it.

    ``k_target`` is the classic round count ``3(d+1)^2``; ``rounds`` is the
    number of rounds actually computed (smaller when the adaptive mode certified
    an earlier round).  ``certified`` means every union of ``s <= d`` classes was
    checked to have tree-depth at most ``s``.
    """

    chain: AugmentationChain
    coloring: Coloring
    order: int
    k_target: int
    rounds: int
    certified: bool
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def K(self) -> int:
        return self.coloring.K


def rounds_for_order(d: int) -> int:
    """The round count ``3(d+1)^2`` that guarantees a low tree-depth coloring of order ``d``."""
    return 3 * (d + 1) ** 2


# ---------------------------------------------------------------------------
# forests


def dfs_forest(g: Graph, members: Iterable[int] | None = None) -> RootedForest:
    """Iterative DFS forest of ``g[members]``; root = smallest vertex, children ascending."""
    n = g.n
    inside = [True] * n if members is None else [False] * n
    if members is not None:
        for v in members:
            inside[v] = True
    parent = [-1] * n
    depth = [0] * n
    adj = g.adjacency
    for root in range(n):
        if not inside[root] or parent[root] >= 0:
            continue
        parent[root] = root
        depth[root] = 1
        stack = [(root, 0)]
        while stack:
            v, i = stack[-1]
            nb = adj[v]
            while i < len(nb) and (not inside[nb[i]] or parent[nb[i]] >= 0):
                i += 1
            if i == len(nb):
                stack.pop()
                continue
            stack[-1] = (v, i + 1)
            u = nb[i]
            parent[u] = v
            depth[u] = depth[v] + 1
            stack.append((u, 0))
    mem = frozenset(range(n)) if members is None else frozenset(v for v in range(n) if inside[v])
    return RootedForest(tuple(parent), tuple(depth), mem)


def depth_certifying_forest(
    g: Graph, members: Iterable[int] | None = None, s: int | None = None
) -> RootedForest:
    """DFS forest of the induced subgraph ``g[members]`` with its depth bound checked.

    A DFS forest has no cross edges, so its closure contains the induced
    subgraph.  If ``s`` is given (the number of color classes), a depth above
    ``2^s - 1`` proves the classes do not have tree-depth ``<= s`` and raises
    ``ForestDepthError``.
    """
    f = dfs_forest(g, members)
    if s is not None and f.max_depth > 2 ** s - 1:
        raise ForestDepthError(
            f"DFS forest depth {f.max_depth} exceeds 2^{s}-1 = {2 ** s - 1}; "
            "the coloring is not a low tree-depth coloring of this order"
        )
    return f


def class_members(coloring: Coloring, classes: Iterable[int]) -> list[int]:
    cs = set(classes)
    return [v for v, c in enumerate(coloring.colors) if c in cs]


# ---------------------------------------------------------------------------
# exact tree-depth


def exact_treedepth(h: Graph) -> int:
    """Exact tree-depth by memoised vertex-removal recursion over vertex subsets (n <= 20)."""
    if h.n > 20:
        raise InputError(f"exact_treedepth accepts at most 20 vertices, got {h.n}")
    nbmask = [0] * h.n
    for v in range(h.n):
        for u in h.adjacency[v]:
            nbmask[v] |= 1 << u
    memo: dict[int, int] = {}

    def components(mask: int) -> list[int]:
        comps = []
        while mask:
            low = mask & -mask
            comp = low
            frontier = low
            while frontier:
                b = frontier & -frontier
                frontier ^= b
                v = b.bit_length() - 1
                new = nbmask[v] & mask & ~comp
                comp |= new
                frontier |= new
            comps.append(comp)
            mask &= ~comp
        return comps

    def td_connected(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        size = bin(mask).count("1")
        if size <= 1:
            memo[mask] = size
            return size
        best = size
        m = mask
        while m:
            b = m & -m
            m ^= b
            rest = mask ^ b
            worst = 0
            for comp in components(rest):
                worst = max(worst, td_connected(comp))
                if worst + 1 >= best:
                    break
            best = min(best, worst + 1)
            if best <= 2:
                break
        memo[mask] = best
        return best

    full = (1 << h.n) - 1
    return max((td_connected(c) for c in components(full)), default=0)


class _TDSearch:
    """Bounded exact test ``td <= s`` for components of an induced subgraph."""

    def __init__(self, adj: Sequence[Sequence[int]], budget: int) -> None:
        self.adj = adj
        self.budget = budget
        self.memo: dict[tuple[frozenset[int], int], bool] = {}

    def _components(self, vs: frozenset[int]) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for s in sorted(vs):
            if s in seen:
                continue
            comp = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for u in self.adj[v]:
                    if u in vs and u not in comp:
                        comp.add(u)
                        stack.append(u)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def forest_ok(self, vs: frozenset[int], s: int) -> bool:
        return all(self.connected_ok(c, s) for c in self._components(vs))

    def connected_ok(self, comp: frozenset[int], s: int) -> bool:
        size = len(comp)
        if size <= 1:
            return s >= size
        if s <= 1:
            return False
        if size <= s:
            return True
        key = (comp, s)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.budget -= size
        if self.budget < 0:
            raise ResourceCap("tree-depth certification budget exhausted")
        degs = {v: sum(1 for u in self.adj[v] if u in comp) for v in comp}
        m = sum(degs.values()) // 2
        if s == 2:
            ok = m == size - 1 and max(degs.values()) == size - 1
        elif _longest_dfs_path(self.adj, comp) > 2 ** s - 1:
            ok = False
        else:
            ok = False
            for v in sorted(comp, key=lambda x: (-degs[x], x)):
                if self.forest_ok(comp - {v}, s - 1):
                    ok = True
                    break
        self.memo[key] = ok
        return ok


def _longest_dfs_path(adj: Sequence[Sequence[int]], comp: frozenset[int]) -> int:
    """Depth of a DFS tree of ``comp``; a path with that many vertices exists."""
    root = min(comp)
    depth = {root: 1}
    stack = [(root, iter(adj[root]))]
    best = 1
    while stack:
        v, it = stack[-1]
        for u in it:
            if u in comp and u not in depth:
                depth[u] = depth[v] + 1
                best = max(best, depth[u])
                stack.append((u, iter(adj[u])))
                break
        else:
            stack.pop()
    return best


def certify_low_treedepth(
    g: Graph, coloring: Coloring, d: int, *, budget: int = 2_000_000, palette: int | None = None
) -> bool:
    """Check that every union of ``s <= d`` classes induces tree-depth ``<= s``.

    Returns False when a union fails or the search budget runs out (so a
    ``True`` answer is always a proof).
    """
    if not coloring.is_proper(g):
        return False
    K = coloring.K
    classes = coloring.classes()
    search = _TDSearch(g.adjacency, budget)
    try:
        for s in range(2, min(d, K) + 1):
            for X in itertools.combinations(range(1, K + 1), s):
                vs = frozenset(v for c in X for v in classes[c])
                if not search.forest_ok(vs, s):
                    return False
    except ResourceCap:
        return False
    return True


def low_treedepth_coloring(
    g: Graph,
    d: int,
    *,
    rounds: int | None = None,
    adaptive: bool = True,
    counters: Counters = NULL_COUNTERS,
    edge_budget: int | None = None,
    certify_budget: int = 2_000_000,
) -> LowTDColoring:
    """Greedy coloring of an augmentation of ``g`` that is a low tree-depth coloring of order ``d``.

    ``rounds`` defaults to ``3(d+1)^2``.  In adaptive mode the colorings of
    ``G_0, G_1, ...`` are certified one after another and the first certified
    round is returned; if no earlier round certifies, the coloring of round
    ``rounds`` is returned (certified or not, as recorded).  With
    ``adaptive=False`` all rounds are computed.
    """
    if d < 1:
        raise InputError("order d must be at least 1")
    k_target = rounds_for_order(d)
    limit = k_target if rounds is None else rounds
    d0 = orient_by_order(g, degeneracy_order(g))
    digraphs: list[DiGraph] = [d0]
    out: Sequence = d0.out
    inn: Sequence = d0.inn
    saturated_at = None
    gr = g
    stats: dict = {"tried": []}
    r = 0
    while True:
        certified = False
        if adaptive or r == limit:
            coloring = greedy_color(gr, degeneracy_order(gr))
            counters.add("coloring_work", gr.n + gr.num_edges)
            certified = certify_low_treedepth(g, coloring, d, budget=certify_budget)
            stats["tried"].append((r, coloring.K, certified))
            if certified and adaptive:
                break
            if r == limit:
                break
        if saturated_at is not None:
            digraphs.append(digraphs[-1])
            r += 1
            continue
        new_out, new_in, st = _augment_sets(out, inn, counters)
        r += 1
        if st["transitive"] + st["fraternal"] == 0:
            saturated_at = r - 1
            digraphs.append(digraphs[-1])
            continue
        if edge_budget is not None:
            m = sum(len(new_out[v] | new_in[v]) for v in range(g.n)) // 2
            if m > edge_budget:
                raise ResourceCap(f"augmentation round {r} has {m} edges, over the budget of {edge_budget}")
        out, inn = new_out, new_in
        dg = DiGraph._from_sets(new_out, new_in)
        digraphs.append(dg)
        gr = dg.underlying()
    chain = AugmentationChain(g, tuple(digraphs), gr, r, saturated_at)
    return LowTDColoring(chain, coloring, d, k_target, r, certified, stats)


def verify_low_treedepth(ltd: LowTDColoring, g: Graph, *, exact_limit: int = 20) -> list[str]:
    """Problems found when re-checking a coloring against its invariants (empty = valid).

    For every ``s <= order`` and every union of ``s`` classes the DFS forest
    must certify the union (closure containment, depth ``<= 2^s - 1``), and on
    unions with at most ``exact_limit`` vertices the exact tree-depth must be
    ``<= s``.
    """
    problems = []
    c = ltd.coloring
    if not c.is_proper(ltd.chain.augmented):
        problems.append("coloring is not proper on the augmented graph")
    for s in range(1, ltd.order + 1):
        for X in itertools.combinations(range(1, c.K + 1), s):
            members = class_members(c, X)
            try:
                f = depth_certifying_forest(g, members, s)
            except ForestDepthError as exc:
                problems.append(f"classes {X}: {exc}")
                continue
            sub, _ = g.induced(members)
            if not f.closure_contains(g):
                problems.append(f"classes {X}: closure misses an edge")
            if len(members) <= exact_limit and exact_treedepth(sub) > s:
                problems.append(f"classes {X}: tree-depth exceeds {s}")
    return problems
