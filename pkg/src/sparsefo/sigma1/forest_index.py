"""Per-forest Sigma_1 index with constant-time tuple updates.

Every forest vertex ``v`` at depth ``d`` keeps

* ``list1``: tuples lying on the root path of ``v`` with ``v`` as deepest element;
* ``list2``: the d-labelled hollow structures with at most ``d0`` elements
  realised by induced substructures on ``P(v) | T<v>`` (stored as an interned
  set of type ids);
* ``list3``: for each type occurring in a child's ``list2``, the children that
  realise it.

A virtual root at depth 0 has the tree roots as children; its ``list2`` is the
global list of all small induced substructures.  ``list2`` of a vertex depends
only on its depth, its ``list1`` pattern (tuples written as depth tuples) and the
multiset of its children's ``list2`` sets with multiplicities capped at ``d0``,
so results are memoised on that signature.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from ..counters import NULL_COUNTERS, Counters
from ..errors import GuardednessError, InputError, VerificationError
from ..logic.structure import Structure
from ..treedepth import RootedForest
from .matching import perfect_matching
from .small import Key, TypeTable

VROOT = -1

Recipe = tuple  # (labels, include v, part type ids, canonical -> combined positions)


class ListCache:
    """Type table, interned ``list2`` sets and memoised list computations.

    Shared between all forest indexes over the same language and ``d0``.
    """

    def __init__(self, table: TypeTable) -> None:
        self.table = table
        self._set_ids: dict[frozenset[int], int] = {}
        self.sets: list[frozenset[int]] = []
        self.memo: dict[tuple, tuple[int, dict[int, Recipe]]] = {}
        self.models = None  # satisfying-structure cache, created by the first query
        self.empty_set = self.intern_set(frozenset())

    def intern_set(self, types: frozenset[int]) -> int:
        sid = self._set_ids.get(types)
        if sid is None:
            sid = len(self.sets)
            self._set_ids[types] = sid
            self.sets.append(types)
        return sid

    def compute(
        self, depth: int, pattern: frozenset, classes: tuple[tuple[int, int], ...], counters: Counters
    ) -> tuple[int, dict[int, Recipe]]:
        sig = (depth, pattern, classes)
        hit = self.memo.get(sig)
        if hit is None:
            hit = self._compute(depth, pattern, classes, counters)
            self.memo[sig] = hit
        return hit

    def _compute(
        self, d: int, pattern: frozenset, classes: tuple[tuple[int, int], ...], counters: Counters
    ) -> tuple[int, dict[int, Recipe]]:
        table = self.table
        d0 = table.d0
        class_sets = [self.sets[sid] for sid, _ in classes]
        by_dom: dict[tuple[int, ...], list[int]] = defaultdict(list)
        for t in sorted(set().union(*class_sets)) if class_sets else ():
            if table.unlabelled(t) >= 1:
                by_dom[table.labels(t)].append(t)
        feasible_cache: dict[tuple[int, ...], bool] = {}

        def feasible(ms: tuple[int, ...]) -> bool:
            hit = feasible_cache.get(ms)
            if hit is None:
                right = [
                    (j, c) for j, (_, cnt) in enumerate(classes) for c in range(cnt)
                ]
                adj = [[r for r in right if t in class_sets[r[0]]] for t in ms]
                hit = perfect_matching(adj) is not None
                feasible_cache[ms] = hit
            return hit

        def multisets(cands: list[int], budget: int, start: int, ms: tuple[int, ...]) -> Iterator:
            yield ms
            for i in range(start, len(cands)):
                t = cands[i]
                u = table.unlabelled(t)
                if u <= budget:
                    nxt = ms + (t,)
                    if feasible(nxt):
                        yield from multisets(cands, budget - u, i, nxt)

        recipes: dict[int, Recipe] = {}
        combos = 0
        incs = (0, 1) if d >= 1 else (0,)
        for size in range(0, min(d0, max(d - 1, 0)) + 1):
            for lam in itertools.combinations(range(1, d), size):
                lam_pos = {x: i for i, x in enumerate(lam)}
                for inc in incs:
                    if size + inc > d0:
                        continue
                    dom = lam + (d,) if inc else lam
                    budget = d0 - size - inc
                    base: list[tuple[int, tuple[int, ...]]] = []
                    if inc:
                        lam_pos[d] = size
                        for ri, deps in pattern:
                            if all(x in lam_pos for x in deps):
                                base.append((ri, tuple(lam_pos[x] for x in deps)))
                        del lam_pos[d]
                    cands = [t for t in by_dom.get(dom, ()) if table.unlabelled(t) <= budget]
                    nl = len(dom)
                    for ms in multisets(cands, budget, 0, ()):
                        combos += 1
                        tuples = list(base)
                        nxt = size + inc
                        for t in ms:
                            u = table.unlabelled(t)
                            shift = nxt - nl
                            for ri, pos in table.tuples(t):
                                tuples.append((ri, tuple(p if p < nl else p + shift for p in pos)))
                            nxt += u
                        tid, perm = table.canon(lam, nxt - size, frozenset(tuples))
                        if tid not in recipes:
                            recipes[tid] = (lam, inc, ms, perm)
        counters.add("build_combos", combos)
        return self.intern_set(frozenset(recipes)), recipes


@dataclass
class IndexSnapshot:
    """Canonical-key view of every list, comparable across independently built indexes."""

    list1: dict[int, frozenset]
    list2: dict[int, frozenset[Key]]
    list3: dict[int, dict[Key, frozenset[int]]]
    global_list: frozenset[Key]
    nullary: frozenset[str]


class ForestIndex:
    """Sigma_1 index of a structure guarded by the closure of a rooted forest."""

    def __init__(
        self,
        forest: RootedForest,
        structure: Structure,
        d0: int,
        *,
        cache: ListCache | None = None,
        counters: Counters = NULL_COUNTERS,
    ) -> None:
        if structure.n != forest.n:
            raise InputError("structure and forest have different vertex counts")
        self.forest = forest
        self.d0 = d0
        self.cache = cache or ListCache(TypeTable(structure.language, d0))
        self.table = self.cache.table
        if self.table.d0 != d0:
            raise InputError("cache built for a different d0")
        self.counters = counters
        self.fault_skip_list3 = False
        depth = forest.depth
        self.depth = depth
        self.members = forest.members
        self.children: dict[int, tuple[int, ...]] = {VROOT: forest.roots}
        ch = forest.children
        for v in forest.members:
            if ch[v]:
                self.children[v] = ch[v]
        self.list1: dict[int, dict[int, set[tuple[int, ...]]]] = {}
        self.pattern: dict[int, frozenset] = {}
        self.list2: dict[int, int] = {}
        self.sig: dict[int, tuple] = {}
        self.list3: dict[int, dict[int, dict[int, None]]] = {}
        self.classes: dict[int, Counter[int]] = {}
        self.nullary: set[str] = set()
        self._build(structure)

    # -- construction -----------------------------------------------------------

    def _place(self, rel: str, tup: tuple[int, ...], check: bool) -> int | None:
        """Deepest element of ``tup`` after checking it lies on one root path."""
        depth = self.depth
        w = max(tup, key=lambda x: (depth[x], x))
        if check:
            f = self.forest
            for x in tup:
                if x not in self.members:
                    raise GuardednessError(f"tuple {rel}{tup} has element {x} outside the forest")
                if f.ancestor_at_depth(w, depth[x]) != x:
                    raise GuardednessError(
                        f"tuple {rel}{tup} is not on a root path of the forest"
                    )
        return w

    def _build(self, s: Structure) -> None:
        counters = self.counters
        before = counters.snapshot()
        members = self.members
        for rel in self.table.rel_names:
            ri = self.table.rel_index[rel]
            for tup in s.relations.get(rel, ()):
                if not all(x in members for x in tup):
                    continue
                w = self._place(rel, tup, True)
                self.list1.setdefault(w, {}).setdefault(ri, set()).add(tup)
                counters.add("build_tuples")
        for rel in self.table.nullary:
            if s.relations.get(rel):
                self.nullary.add(rel)
        for w in self.list1:
            self.pattern[w] = self._pattern_of(w)
        order = sorted(members, key=lambda v: -self.depth[v])
        for v in order:
            self._gather(v)
            self._recompute(v)
            counters.add("build_vertices")
        self._gather(VROOT)
        self._recompute(VROOT)
        spent = counters.diff(before)
        counters.add(
            "build_work",
            sum(spent.get(k, 0) for k in ("build_vertices", "build_children", "build_tuples", "build_combos")),
        )

    def _gather(self, v: int) -> None:
        kids = self.children.get(v, ())
        if not kids:
            return
        l3: dict[int, dict[int, None]] = {}
        cls: Counter[int] = Counter()
        sets = self.cache.sets
        for c in kids:
            sid = self.list2[c]
            cls[sid] += 1
            for t in sets[sid]:
                l3.setdefault(t, {})[c] = None
        self.list3[v] = l3
        self.classes[v] = cls
        self.counters.add("build_children", len(kids))

    def _pattern_of(self, v: int) -> frozenset:
        depth = self.depth
        l1 = self.list1.get(v)
        if not l1:
            return frozenset()
        return frozenset(
            (ri, tuple(depth[x] for x in tup)) for ri, ts in l1.items() for tup in ts
        )

    def _recompute(self, v: int) -> None:
        d0 = self.d0
        cls = self.classes.get(v)
        classes = tuple(sorted((sid, min(c, d0)) for sid, c in cls.items() if c)) if cls else ()
        d = 0 if v == VROOT else self.depth[v]
        sig = (d, self.pattern.get(v, frozenset()), classes)
        sid, _ = self.cache.compute(d, sig[1], classes, self.counters)
        self.sig[v] = sig
        self.list2[v] = sid

    # -- updates --------------------------------------------------------------------

    def _update(self, rel: str, tup: tuple[int, ...], add: bool) -> None:
        arity = self.table.language.relations.get(rel)
        if arity is None:
            raise InputError(f"unknown relation {rel!r}")
        if len(tup) != arity:
            raise InputError(f"relation {rel} has arity {arity}")
        if arity == 0:
            if add:
                self.nullary.add(rel)
            else:
                if rel not in self.nullary:
                    raise InputError(f"nullary relation {rel} is already false")
                self.nullary.discard(rel)
            return
        ri = self.table.rel_index[rel]
        w = self._place(rel, tup, True)
        bucket = self.list1.setdefault(w, {}).setdefault(ri, set())
        if add:
            if tup in bucket:
                return
            bucket.add(tup)
        else:
            if tup not in bucket:
                raise InputError(f"tuple {rel}{tup} is not present")
            bucket.discard(tup)
        self.pattern[w] = self._pattern_of(w)
        path = self.forest.path_to_root(w) + [VROOT]
        sets = self.cache.sets
        prev = None
        old_sid = new_sid = None
        for u in path:
            if prev is not None and old_sid != new_sid:
                cls = self.classes[u]
                cls[old_sid] -= 1
                if not cls[old_sid]:
                    del cls[old_sid]
                cls[new_sid] += 1
                if not self.fault_skip_list3:
                    l3 = self.list3[u]
                    for t in sets[old_sid]:
                        entry = l3[t]
                        del entry[prev]
                        if not entry:
                            del l3[t]
                    for t in sets[new_sid]:
                        l3.setdefault(t, {})[prev] = None
            old_sid = self.list2[u]
            self._recompute(u)
            new_sid = self.list2[u]
            prev = u
        self.counters.add("update_touched", len(path) - 1)
        self.counters.add("update_recomputed", len(path))

    def insert_tuple(self, rel: str, tup: Sequence[int]) -> None:
        """Add ``tup`` to ``rel``; only the lists on its deepest element's root path change."""
        self._update(rel, tuple(tup), True)

    def remove_tuple(self, rel: str, tup: Sequence[int]) -> None:
        self._update(rel, tuple(tup), False)

    # -- queries -------------------------------------------------------------------

    def global_types(self) -> frozenset[int]:
        return self.cache.sets[self.list2[VROOT]]

    def list2_types(self, v: int) -> frozenset[int]:
        return self.cache.sets[self.list2[v]]

    def decode(self, tid: int, v: int = VROOT, labels: dict[int, int] | None = None) -> list[int]:
        """Concrete elements, in canonical position order, realising type ``tid`` at ``v``."""
        labels = labels or {}
        _, recipes = self.cache.memo[self.sig[v]]
        if tid not in recipes:
            raise VerificationError(f"type {tid} is not in list2 of vertex {v}")
        lam, inc, parts, perm = recipes[tid]
        self.counters.add("witness_decode")
        combined = [labels[x] for x in lam]
        if inc:
            combined.append(v)
        if parts:
            d = 0 if v == VROOT else self.depth[v]
            m = len(parts)
            l3 = self.list3.get(v, {})
            sets = self.cache.sets
            pool: list[int] = []
            for t in parts:
                for c in itertools.islice(l3.get(t, {}), m):
                    if c not in pool:
                        pool.append(c)
            adj = [[c for c in pool if t in sets[self.list2[c]]] for t in parts]
            chosen = perfect_matching(adj)
            if chosen is None:
                raise VerificationError(f"cannot assign distinct children at vertex {v}")
            sub_labels = {x: labels[x] for x in lam}
            if inc:
                sub_labels[d] = v
            for t, c in zip(parts, chosen):
                elems = self.decode(t, c, sub_labels)
                combined.extend(elems[len(self.table.labels(t)):])
        return [combined[p] for p in perm]

    def snapshot(self) -> IndexSnapshot:
        keys = self.table.keys
        sets = self.cache.sets
        l1 = {
            v: frozenset((self.table.rel_names[ri], t) for ri, ts in d.items() for t in ts)
            for v, d in self.list1.items()
        }
        l1 = {v: s for v, s in l1.items() if s}
        l2 = {v: frozenset(keys[t] for t in sets[sid]) for v, sid in self.list2.items() if v != VROOT}
        l3 = {
            v: {keys[t]: frozenset(cs) for t, cs in d.items() if cs}
            for v, d in self.list3.items()
        }
        l3 = {v: d for v, d in l3.items() if d}
        glob = frozenset(keys[t] for t in sets[self.list2[VROOT]])
        return IndexSnapshot(l1, l2, l3, glob, frozenset(self.nullary))


def build_forest_index(
    forest: RootedForest,
    structure: Structure,
    d0: int,
    *,
    cache: ListCache | None = None,
    counters: Counters = NULL_COUNTERS,
) -> ForestIndex:
    """Index ``structure`` restricted to the forest's members.

    Tuples with an element outside the members are ignored; a tuple inside
    the members that is not on a single root path raises ``GuardednessError``.
    """
    return ForestIndex(forest, structure, d0, cache=cache, counters=counters)


# ---------------------------------------------------------------------------
# reference lists straight from the definitions (test oracle, exponential)


def reference_snapshot(forest: RootedForest, s: Structure, d0: int) -> tuple[dict, frozenset]:
    """``list2`` per member and the global list, computed by enumerating vertex subsets."""
    from .small import canonicalize

    table = TypeTable(s.language, d0)
    members = sorted(forest.members)
    mset = set(members)
    rels = [
        (ri, [t for t in s.relations[r] if all(x in mset for x in t)])
        for ri, r in enumerate(table.rel_names)
    ]
    depth = forest.depth

    def key_of(vs: Iterable[int], labelled_below: int) -> Key:
        vs = list(vs)
        lab = sorted((depth[x], x) for x in vs if depth[x] < labelled_below)
        rest = sorted(x for x in vs if depth[x] >= labelled_below)
        pos = {x: i for i, (_, x) in enumerate(lab)}
        for x in rest:
            pos[x] = len(pos)
        vset = set(vs)
        ts = [
            (ri, tuple(pos[x] for x in t))
            for ri, tl in rels
            for t in tl
            if all(x in vset for x in t)
        ]
        key, _ = canonicalize(tuple(dd for dd, _ in lab), len(rest), ts)
        return key

    subtree: dict[int, list[int]] = {v: [] for v in members}
    for v in members:
        for a in forest.path_to_root(v):
            subtree[a].append(v)
    list2 = {}
    for v in members:
        pool = sorted(set(forest.path_to_root(v)) | set(subtree[v]))
        keys = set()
        for size in range(0, d0 + 1):
            for vs in itertools.combinations(pool, size):
                keys.add(key_of(vs, depth[v]))
        list2[v] = frozenset(keys)
    glob = set()
    for size in range(0, d0 + 1):
        for vs in itertools.combinations(members, size):
            glob.add(key_of(vs, 0))
    return list2, frozenset(glob)
