"""Undirected and directed graphs, degeneracy orderings and tuple association.

Vertices are the integers ``0..n-1``.  Graphs are immutable once built; all
constructions are deterministic, with ties broken by vertex index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

from .errors import GuardednessError, InputError

if TYPE_CHECKING:  # pragma: no cover
    from .logic.structure import Structure


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with sorted adjacency tuples."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        """Build a graph; duplicate and reversed pairs collapse, loops are rejected."""
        if n < 0:
            raise InputError("vertex count must be non-negative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            if u == v:
                raise InputError(f"loop at vertex {u} is not allowed")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def from_adjacency_sets(cls, adj: Sequence[Iterable[int]]) -> Graph:
        """Trusted constructor from symmetric, loop-free neighbour sets."""
        return cls(len(adj), tuple(tuple(sorted(s)) for s in adj))

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as pairs ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, nb in enumerate(self.adjacency):
            for v in nb:
                if v > u:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def density(self) -> float:
        """|E|/|V|, the r=0 density proxy (0 for the empty graph)."""
        return self.num_edges / self.n if self.n else 0.0

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = sorted(set(vertices))
        ns = self.neighbor_sets
        return all(vs[j] in ns[vs[i]] for i in range(len(vs)) for j in range(i + 1, len(vs)))

    def induced(self, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph on ``vertices``; returns it with the local->global map."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        adj = [tuple(index[u] for u in self.adjacency[v] if u in index) for v in keep]
        return Graph(len(keep), tuple(adj)), keep

    def union(self, extra_edges: Iterable[tuple[int, int]]) -> Graph:
        adj = [set(a) for a in self.adjacency]
        changed = False
        for u, v in extra_edges:
            if u != v and v not in adj[u]:
                adj[u].add(v)
                adj[v].add(u)
                changed = True
        return Graph.from_adjacency_sets(adj) if changed else self

    def is_subgraph_of(self, other: Graph) -> bool:
        if self.n != other.n:
            return False
        ns = other.neighbor_sets
        return all(set(a) <= ns[v] for v, a in enumerate(self.adjacency))

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest vertex."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self.adjacency[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


@dataclass(frozen=True, eq=False)
class DiGraph:
    """Loop-free digraph; opposite edges u->v and v->u may coexist."""

    n: int
    out: tuple[frozenset[int], ...]
    inn: tuple[frozenset[int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> DiGraph:
        out: list[set[int]] = [set() for _ in range(n)]
        inn: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"arc ({u}, {v}) outside vertex range")
            if u == v:
                raise InputError(f"loop at vertex {u} is not allowed")
            out[u].add(v)
            inn[v].add(u)
        return cls._from_sets(out, inn)

    @classmethod
    def _from_sets(cls, out: Sequence[set[int]], inn: Sequence[set[int]]) -> DiGraph:
        return cls(len(out), tuple(frozenset(s) for s in out), tuple(frozenset(s) for s in inn))

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in sorted(self.out[u]):
                yield (u, v)

    @cached_property
    def num_arcs(self) -> int:
        return sum(len(s) for s in self.out)

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.out[u]

    def adjacent(self, u: int, v: int) -> bool:
        return v in self.out[u] or u in self.out[v]

    def max_in_degree(self) -> int:
        return max((len(s) for s in self.inn), default=0)

    def underlying(self) -> Graph:
        return Graph.from_adjacency_sets([self.out[v] | self.inn[v] for v in range(self.n)])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiGraph) and self.n == other.n and self.out == other.out

    def __hash__(self) -> int:
        return hash((self.n, self.out))

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, arcs={self.num_arcs})"


@dataclass(frozen=True)
class DegeneracyOrder:
    """A vertex ordering whose maximum back-degree is ``degeneracy``."""

    order: tuple[int, ...]
    degeneracy: int

    @cached_property
    def position(self) -> tuple[int, ...]:
        pos = [0] * len(self.order)
        for i, v in enumerate(self.order):
            pos[v] = i
        return tuple(pos)

    def back_degrees(self, g: Graph) -> list[int]:
        pos = self.position
        return [sum(1 for u in g.adjacency[v] if pos[u] < pos[v]) for v in range(g.n)]


@dataclass(frozen=True)
class Coloring:
    """Proper vertex coloring with colors ``1..K``."""

    colors: tuple[int, ...]
    K: int

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {c: [] for c in range(1, self.K + 1)}
        for v, c in enumerate(self.colors):
            out[c].append(v)
        return out

    def is_proper(self, g: Graph) -> bool:
        return all(self.colors[u] != self.colors[v] for u, v in g.edges())


def _smallest_last(n: int, nbrs: Sequence[Iterable[int]]) -> tuple[list[int], int]:
    """Smallest-last order (bucket queue) over arbitrary neighbour iterables.

    Repeatedly removes the smallest-index vertex of minimum remaining degree;
    the returned order is the reverse removal order, so every vertex has at
    most ``degeneracy`` neighbours before it.
    """
    deg = [0] * n
    for v in range(n):
        deg[v] = len(nbrs[v]) if hasattr(nbrs[v], "__len__") else sum(1 for _ in nbrs[v])
    maxdeg = max(deg, default=0)
    # Each bucket is a min-heap by index so the tie-break is deterministic.
    import heapq

    buckets: list[list[int]] = [[] for _ in range(maxdeg + 1)]
    for v in range(n):
        buckets[deg[v]].append(v)
    for b in buckets:
        heapq.heapify(b)
    removed = [False] * n
    removal: list[int] = []
    degeneracy = 0
    cur = 0
    for _ in range(n):
        cur = max(cur - 1, 0)
        while True:
            while cur <= maxdeg and not buckets[cur]:
                cur += 1
            v = heapq.heappop(buckets[cur])
            if not removed[v] and deg[v] == cur:
                break
        removed[v] = True
        removal.append(v)
        degeneracy = max(degeneracy, cur)
        for u in nbrs[v]:
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(buckets[deg[u]], u)
    removal.reverse()
    return removal, degeneracy


def degeneracy_order(g: Graph) -> DegeneracyOrder:
    """Smallest-last degeneracy ordering of ``g`` (ties broken by vertex index)."""
    order, d = _smallest_last(g.n, g.adjacency)
    return DegeneracyOrder(tuple(order), d)


def orient_by_order(g: Graph, order: DegeneracyOrder) -> DiGraph:
    """Direct every edge from its earlier to its later endpoint."""
    pos = order.position
    out: list[set[int]] = [set() for _ in range(g.n)]
    inn: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges():
        if pos[u] > pos[v]:
            u, v = v, u
        out[u].add(v)
        inn[v].add(u)
    return DiGraph._from_sets(out, inn)


def greedy_color(g: Graph, order: DegeneracyOrder) -> Coloring:
    """Color vertices in ``order`` with the smallest color unused by earlier neighbours."""
    colors = [0] * g.n
    K = 0
    for v in order.order:
        used = {colors[u] for u in g.adjacency[v]}
        c = 1
        while c in used:
            c += 1
        colors[v] = c
        K = max(K, c)
    return Coloring(tuple(colors), K)


@dataclass
class TupleIndex:
    """Relation tuples associated with their latest element in degeneracy order.

    A membership query inspects only the association list of the tuple's
    latest element, whose length is bounded in terms of the degeneracy and
    the arities.
    """

    order: DegeneracyOrder
    association: dict[int, list[tuple[str, tuple[int, ...]]]] = field(default_factory=dict)

    def _anchor(self, tup: tuple[int, ...]) -> int | None:
        if not tup:
            return None
        pos = self.order.position
        return max(tup, key=lambda v: pos[v])

    def add(self, rel: str, tup: tuple[int, ...]) -> None:
        a = self._anchor(tup)
        lst = self.association.setdefault(-1 if a is None else a, [])
        if (rel, tup) not in lst:
            lst.append((rel, tup))

    def contains(self, rel: str, tup: Sequence[int]) -> bool:
        tup = tuple(tup)
        if any(not (0 <= v < len(self.order.order)) for v in tup):
            return False
        a = self._anchor(tup)
        return (rel, tup) in self.association.get(-1 if a is None else a, ())

    def max_load(self) -> int:
        return max((len(v) for v in self.association.values()), default=0)


def build_tuple_index(order: DegeneracyOrder, s: Structure, guard: Graph) -> TupleIndex:
    """Associate every tuple of ``s`` with its latest element under ``order``.

    Raises ``GuardednessError`` if some tuple's elements do not form a clique
    of ``guard``.
    """
    idx = TupleIndex(order)
    for rel in sorted(s.relations):
        for tup in sorted(s.relations[rel]):
            if not guard.is_clique(tup):
                raise GuardednessError(f"tuple {rel}{tup} is not a clique of the guard graph")
            idx.add(rel, tup)
    return idx


# ---------------------------------------------------------------------------
# text format

def parse_graph(text: str) -> Graph:
    """Parse the ``graph <n>`` / ``u v`` line format (``#`` starts a comment line)."""
    n: int | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "graph":
                raise InputError(f"line {lineno}: expected 'graph <n>' header")
            n = _parse_int(parts[1], lineno)
            continue
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected 'u v'")
        edges.append((_parse_int(parts[0], lineno), _parse_int(parts[1], lineno)))
    if n is None:
        raise InputError("missing 'graph <n>' header")
    try:
        return Graph.from_edges(n, edges)
    except InputError as exc:
        raise InputError(f"invalid graph: {exc}") from None


def format_graph(g: Graph) -> str:
    lines = [f"graph {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def format_digraph(d: DiGraph) -> str:
    lines = [f"digraph {d.n}"]
    lines.extend(f"{u} {v}" for u, v in d.arcs())
    return "\n".join(lines) + "\n"


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"line {lineno}: '{tok}' is not an integer") from None


def grid_graph(rows: int, cols: int | None = None) -> Graph:
    """The ``rows x cols`` grid; vertex ``r*cols + c``."""
    cols = rows if cols is None else cols
    adj: list[list[int]] = [[] for _ in range(rows * cols)]
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                adj[v].append(v + 1)
                adj[v + 1].append(v)
            if r + 1 < rows:
                adj[v].append(v + cols)
                adj[v + cols].append(v)
    return Graph.from_adjacency_sets(adj)
