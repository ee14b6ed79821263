"""Bipartite matching by augmenting paths, for assigning structure parts to distinct children."""

from __future__ import annotations

import itertools
from typing import Hashable, Sequence


def max_matching(adj: Sequence[Sequence[Hashable]]) -> dict[int, Hashable]:
    """Maximum matching of left vertices ``0..len(adj)-1`` (Kuhn's algorithm).

    ``adj[i]`` lists the right vertices joined to ``i``; the result maps each
    matched left vertex to its partner.  Deterministic: neighbours are tried in
    the given order.
    """
    owner: dict[Hashable, int] = {}

    def augment(i: int, seen: set) -> bool:
        for w in adj[i]:
            if w in seen:
                continue
            seen.add(w)
            if w not in owner or augment(owner[w], seen):
                owner[w] = i
                return True
        return False

    for i in range(len(adj)):
        augment(i, set())
    return {i: w for w, i in owner.items()}


def perfect_matching(adj: Sequence[Sequence[Hashable]]) -> list[Hashable] | None:
    """Partner of every left vertex, or ``None`` if some left vertex stays unmatched."""
    m = max_matching(adj)
    if len(m) < len(adj):
        return None
    return [m[i] for i in range(len(adj))]


def assignment_bruteforce(adj: Sequence[Sequence[Hashable]]) -> bool:
    """Exhaustive check for an injective choice ``i -> adj[i]`` (test oracle)."""
    for choice in itertools.product(*adj):
        if len(set(choice)) == len(choice):
            return True
    return len(adj) == 0
