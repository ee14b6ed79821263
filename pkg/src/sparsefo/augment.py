"""Transitive-fraternal augmentations and k-th augmentations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .counters import NULL_COUNTERS, Counters
from .errors import ResourceCap
from .graph import DiGraph, Graph, _smallest_last, degeneracy_order, orient_by_order


@dataclass(frozen=True)
class AugmentationChain:
    """``D_0..D_k`` with ``D_0`` orienting ``base`` and ``augmented`` = underlying graph of ``D_k``.

    ``saturated_at`` records the first round after which no rule fired
    (later digraphs are then the same object); ``None`` if every round changed
    something.
    """

    base: Graph
    digraphs: tuple[DiGraph, ...]
    augmented: Graph
    k: int
    saturated_at: int | None = None
    round_stats: tuple[dict, ...] = field(default=(), compare=False)

    def graph_at(self, i: int) -> Graph:
        """Underlying graph ``G_i`` of ``D_i``."""
        if i == self.k:
            return self.augmented
        return self.digraphs[i].underlying()


def _augment_sets(
    out: Sequence[set[int]] | Sequence[frozenset[int]],
    inn: Sequence[set[int]] | Sequence[frozenset[int]],
    counters: Counters = NULL_COUNTERS,
) -> tuple[list[set[int]], list[set[int]], dict]:
    """One augmentation round on adjacency sets; returns new sets and statistics."""
    n = len(out)
    new_out = [set(s) for s in out]
    new_in = [set(s) for s in inn]
    transitive = 0
    work = 0
    # transitivity: x -> z -> y with no x -> y in the input
    for z in range(n):
        oz = out[z]
        if not oz:
            continue
        for x in inn[z]:
            work += len(oz)
            add = set(oz - out[x])
            add.discard(x)
            if add:
                fresh = add - new_out[x]
                if fresh:
                    new_out[x] |= fresh
                    transitive += len(fresh)
                    for y in fresh:
                        new_in[y].add(x)
    # fraternality: x -> z <- y with x, y non-adjacent in the input
    frat: list[set[int]] = [set() for _ in range(n)]
    for z in range(n):
        iz = inn[z]
        if len(iz) < 2:
            continue
        for x in iz:
            work += len(iz)
            cand = set(iz - out[x] - inn[x])
            cand.discard(x)
            for y in cand:
                if y > x and y not in new_out[x] and x not in new_out[y]:
                    frat[x].add(y)
                    frat[y].add(x)
    fraternal = sum(len(s) for s in frat) // 2
    frat_in = 0
    if fraternal:
        order, _ = _smallest_last(n, frat)
        pos = [0] * n
        for i, v in enumerate(order):
            pos[v] = i
        fin = [0] * n
        for x in range(n):
            for y in frat[x]:
                if pos[x] < pos[y]:
                    new_out[x].add(y)
                    new_in[y].add(x)
                    fin[y] += 1
        frat_in = max(fin)
    counters.add("augment_work", work + n)
    stats = {"transitive": transitive, "fraternal": fraternal, "fraternal_max_in": frat_in}
    return new_out, new_in, stats


def oriented_augment(d: DiGraph, counters: Counters = NULL_COUNTERS) -> DiGraph:
    """One oriented augmentation of ``d``.

    Transitive arcs are added for every ``x->z->y`` with no arc ``x->y``.
    For every fraternal pair (common out-neighbour, non-adjacent, and not
    already joined by a transitive arc of this round) exactly one arc is
    added, oriented along a smallest-last order of the fraternal-pair graph.
    """
    out, inn, _ = _augment_sets(d.out, d.inn, counters)
    return DiGraph._from_sets(out, inn)


def kth_augmentation(
    g: Graph,
    k: int,
    *,
    edge_budget: int | None = None,
    counters: Counters = NULL_COUNTERS,
    extra_arcs: Sequence[tuple[int, int]] = (),
) -> AugmentationChain:
    """Compute ``D_0..D_k`` starting from the degeneracy orientation of ``g``.

    ``extra_arcs`` are added to ``D_0`` (used for function edges when
    simplifying terms).  Once a round adds nothing, the remaining digraphs are
    identical and are not recomputed.  ``edge_budget`` bounds the number of
    undirected edges of any ``G_i``; exceeding it raises ``ResourceCap``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    d0 = orient_by_order(g, degeneracy_order(g))
    if extra_arcs:
        out = [set(s) for s in d0.out]
        inn = [set(s) for s in d0.inn]
        for u, v in extra_arcs:
            if u != v:
                out[u].add(v)
                inn[v].add(u)
        d0 = DiGraph._from_sets(out, inn)
    digraphs = [d0]
    stats: list[dict] = []
    out_sets: Sequence = d0.out
    in_sets: Sequence = d0.inn
    saturated_at = None
    for r in range(1, k + 1):
        if saturated_at is not None:
            digraphs.append(digraphs[-1])
            continue
        new_out, new_in, st = _augment_sets(out_sets, in_sets, counters)
        added = st["transitive"] + 2 * st["fraternal"]
        stats.append(st)
        if not added:
            saturated_at = r - 1
            digraphs.append(digraphs[-1])
            continue
        if edge_budget is not None:
            undirected = sum(len(new_out[v] | new_in[v]) for v in range(g.n)) // 2
            st["edges"] = undirected
            if undirected > edge_budget:
                raise ResourceCap(
                    f"augmentation round {r} has {undirected} edges, over the budget of {edge_budget}"
                )
        out_sets, in_sets = new_out, new_in
        digraphs.append(DiGraph._from_sets(new_out, new_in))
    augmented = digraphs[-1].underlying()
    return AugmentationChain(g, tuple(digraphs), augmented, k, saturated_at, tuple(stats))


def augmentation_densities(
    g: Graph, k: int, *, edge_budget: int | None = None
) -> tuple[list[float], bool]:
    """Densities ``|E(G_i)|/n`` for ``i = 0..k``, stopping early on a budget overrun.

    Returns the list and whether all ``k`` rounds completed.  Since the edge
    sets are nested, the last density is a lower bound for ``|E(G_k)|/n``.
    """
    d0 = orient_by_order(g, degeneracy_order(g))
    out: Sequence = d0.out
    inn: Sequence = d0.inn
    n = g.n
    dens = [g.density()]
    for _ in range(k):
        new_out, new_in, st = _augment_sets(out, inn)
        m = sum(len(new_out[v] | new_in[v]) for v in range(n)) // 2
        dens.append(m / n if n else 0.0)
        if st["transitive"] + st["fraternal"] == 0:
            dens.extend([dens[-1]] * (k + 1 - len(dens)))
            return dens, True
        out, inn = new_out, new_in
        if edge_budget is not None and m > edge_budget:
            return dens, False
    return dens, True
