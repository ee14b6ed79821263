"""Sigma_1 queries over a structure guarded by a sparse graph.

The guard's vertices are colored by a low tree-depth coloring of order ``d0``.
For every set ``X`` of ``d0`` colors the substructure induced by the vertices
colored in ``X`` is guarded by the closure of a DFS forest ``F_X`` and indexed by
a :class:`ForestIndex`.  A Sigma_1 sentence with at most ``d0`` variables holds
iff it holds in one of these substructures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from ..counters import NULL_COUNTERS, Counters
from ..errors import GuardednessError, InputError, VerificationError
from ..graph import Graph
from ..logic.semantics import eval_oracle
from ..logic.structure import Structure
from ..logic.syntax import Formula, is_sigma1_sentence, sigma1_parts
from ..treedepth import LowTDColoring, dfs_forest, low_treedepth_coloring
from .forest_index import ForestIndex, ListCache
from .small import TypeTable, sigma1_models


@dataclass
class QueryResult:
    sat: bool
    witness: dict[str, int] | None = None
    subset: tuple[int, ...] | None = None
    models: int = 0

    def format(self, variables: Sequence[str] | None = None) -> str:
        if not self.sat:
            return "UNSAT"
        if not self.witness:
            return "SAT"
        names = variables or sorted(self.witness)
        return "SAT " + ",".join(f"{x}={self.witness[x]}" for x in names if x in self.witness)


class ModelCache:
    """The satisfying small structures of a sentence, memoised per sentence and nullary flags."""

    def __init__(self, table: TypeTable) -> None:
        self.table = table
        self._cache: dict[tuple, list] = {}

    def models(self, phi: Formula, nullary: frozenset[str]) -> tuple[list[str], list]:
        variables, matrix = sigma1_parts(phi)
        relevant = frozenset(n for n in nullary if n in self.table.nullary)
        key = (phi, relevant)
        hit = self._cache.get(key)
        if hit is None:
            hit = sigma1_models(self.table, variables, matrix, relevant)
            self._cache[key] = hit
        # ids of keys interned after the cache entry was made
        if any(tid is None for tid, _, _ in hit):
            hit = [(self.table.lookup(k) if tid is None else tid, k, a) for tid, k, a in hit]
            self._cache[key] = hit
        return variables, hit


def _check_query(phi: Formula, d0: int, table: TypeTable) -> None:
    if not is_sigma1_sentence(phi):
        raise InputError("query must be a Sigma_1 sentence (E x1. ... E xk. quantifier-free)")
    variables, matrix = sigma1_parts(phi)
    if len(set(variables)) > d0:
        raise InputError(f"query has {len(set(variables))} variables, more than d0={d0}")
    from ..logic.syntax import relations_used

    for name, a in relations_used(matrix).items():
        if table.language.relations.get(name) != a:
            raise InputError(f"unknown relation {name}/{a}")


class BEIndex:
    """Forest indexes for every ``d0``-subset of the palette, with updates routed by color."""

    def __init__(
        self,
        guard: Graph,
        structure: Structure,
        d0: int,
        *,
        ltd: LowTDColoring | None = None,
        palette: int | None = None,
        counters: Counters = NULL_COUNTERS,
    ) -> None:
        if structure.n != guard.n:
            raise InputError("structure and guard graph have different sizes")
        if structure.language.functions:
            raise InputError("the Sigma_1 index supports function-free languages only")
        self.guard = guard
        self.structure = structure.copy()
        self.d0 = d0
        self.counters = counters
        for rel, ts in self.structure.relations.items():
            for t in ts:
                if not guard.is_clique(t):
                    raise GuardednessError(f"tuple {rel}{t} is not a clique of the guard graph")
        self.ltd = ltd or low_treedepth_coloring(guard, d0, counters=counters)
        colors = self.ltd.coloring.colors
        self.colors = colors
        self.K = max(self.ltd.K, d0, palette or 0)
        self.subsets: list[tuple[int, ...]] = list(itertools.combinations(range(1, self.K + 1), d0))
        self.cache = ListCache(TypeTable(structure.language, d0))
        self.forests: list[ForestIndex] = []
        before = counters.snapshot()
        for X in self.subsets:
            xs = set(X)
            members = [v for v in range(guard.n) if colors[v] in xs]
            forest = dfs_forest(guard, members)
            counters.add("build_forest_work", len(members) + 1)
            self.forests.append(
                ForestIndex(forest, self.structure, d0, cache=self.cache, counters=counters)
            )
        spent = counters.diff(before)
        counters.add("be_build_work", spent.get("build_work", 0) + spent.get("build_forest_work", 0))
        self.where: dict[int, set[int]] = {}
        for i, fi in enumerate(self.forests):
            for t in fi.global_types():
                self.where.setdefault(t, set()).add(i)

    @property
    def max_forest_depth(self) -> int:
        return max((fi.forest.max_depth for fi in self.forests), default=0)

    def subsets_containing(self, cols: set[int]) -> list[int]:
        return [i for i, X in enumerate(self.subsets) if cols <= set(X)]

    def _update(self, rel: str, tup: tuple[int, ...], add: bool) -> bool:
        s = self.structure
        arity = s.language.relations.get(rel)
        if arity is None:
            raise InputError(f"unknown relation {rel!r}")
        if len(tup) != arity:
            raise InputError(f"relation {rel} has arity {arity}")
        if any(not (0 <= v < s.n) for v in tup):
            raise InputError(f"tuple {rel}{tup} outside the universe")
        if add and not self.guard.is_clique(tup):
            raise GuardednessError(f"tuple {rel}{tup} is not a clique of the guard graph")
        present = tup in s.relations[rel]
        if add == present:
            if not add:
                raise InputError(f"tuple {rel}{tup} is not present")
            return False
        if add:
            s.add_tuple(rel, tup)
        else:
            s.remove_tuple(rel, tup)
        cols = {self.colors[v] for v in tup}
        touched = self.subsets_containing(cols) if tup else range(len(self.forests))
        self.counters.add("update_forests", len(touched))
        for i in touched:
            fi = self.forests[i]
            old = fi.global_types()
            if add:
                fi.insert_tuple(rel, tup)
            else:
                fi.remove_tuple(rel, tup)
            new = fi.global_types()
            if old is not new:
                for t in old - new:
                    bucket = self.where[t]
                    bucket.discard(i)
                    if not bucket:
                        del self.where[t]
                for t in new - old:
                    self.where.setdefault(t, set()).add(i)
        return True

    def insert_tuple(self, rel: str, tup: Sequence[int]) -> bool:
        return self._update(rel, tuple(tup), True)

    def remove_tuple(self, rel: str, tup: Sequence[int]) -> bool:
        return self._update(rel, tuple(tup), False)

    def query(self, phi: Formula) -> QueryResult:
        return query_sigma1(self, phi)


def build_be_index(
    g: Graph,
    s: Structure,
    d0: int,
    *,
    ltd: LowTDColoring | None = None,
    palette: int | None = None,
    counters: Counters = NULL_COUNTERS,
) -> BEIndex:
    """Build the index; ``palette`` pads the color count (the coloring's own ``K`` is the default)."""
    return BEIndex(g, s, d0, ltd=ltd, palette=palette, counters=counters)


def _nullary_flags(idx) -> frozenset[str]:
    if isinstance(idx, BEIndex):
        return frozenset(r for r in idx.cache.table.nullary if idx.structure.relations[r])
    return frozenset(idx.nullary)


def query_sigma1(idx: ForestIndex | BEIndex, phi: Formula, structure: Structure | None = None) -> QueryResult:
    """Decide a Sigma_1 sentence with at most ``d0`` variables by global-list lookups.

    For a :class:`ForestIndex` pass the indexed ``structure`` to enable the
    witness check; a :class:`BEIndex` keeps its own copy.  A returned witness is
    always re-checked by direct evaluation of the matrix.
    """
    table = idx.cache.table
    _check_query(phi, idx.d0, table)
    counters = idx.counters
    s = idx.structure if isinstance(idx, BEIndex) else structure
    if idx.cache.models is None:
        idx.cache.models = ModelCache(table)
    variables, models = idx.cache.models.models(phi, _nullary_flags(idx))
    counters.add("query_models", len(models))
    if not variables:
        _, matrix = sigma1_parts(phi)
        sat = _eval_nullary(matrix, _nullary_flags(idx))
        counters.add("query_work", 1)
        return QueryResult(sat, {} if sat else None)
    counters.add("query_work", len(models))
    for tid, key, assignment in models:
        if tid is None:
            continue
        if isinstance(idx, BEIndex):
            holders = idx.where.get(tid)
            if not holders:
                continue
            i = min(holders)
            elems = idx.forests[i].decode(tid)
            subset = idx.subsets[i]
        else:
            if tid not in idx.global_types():
                continue
            elems = idx.decode(tid)
            subset = None
        witness = {x: elems[assignment[j]] for j, x in enumerate(variables)}
        if s is not None:
            _, matrix = sigma1_parts(phi)
            if not eval_oracle(s, matrix, witness):
                raise VerificationError(f"decoded witness {witness} does not satisfy the matrix")
        return QueryResult(True, witness, subset, len(models))
    return QueryResult(False, None, None, len(models))


def _eval_nullary(matrix: Formula, flags: frozenset[str]) -> bool:
    from ..logic.structure import Language
    from ..logic.syntax import relations_used

    names = relations_used(matrix)
    s = Structure(0, Language(names))
    for r in flags:
        if r in names:
            s.add_tuple(r, ())
    return eval_oracle(s, matrix, {})
