"""Small labelled structures, canonical keys and the satisfying set of a Sigma_1 matrix.

A *raw* small structure is ``(labels, u, tuples)``: positions ``0..len(labels)-1``
carry the labels in ascending order, positions after that are the ``u``
unlabelled elements, and ``tuples`` is a set of ``(relation index, positions)``.
Its canonical key minimises the sorted tuple list over all orderings of the
unlabelled positions; labelled positions are never permuted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..errors import InputError
from ..logic.structure import Language, Structure
from ..logic.syntax import And, Bot, Eq, Formula, Not, Or, Rel, Top, Var

Key = tuple  # (labels, u, sorted tuples)
RawTuples = Iterable[tuple[int, tuple[int, ...]]]


def hollow(labels: Sequence[int], tuples: RawTuples) -> frozenset:
    """Drop tuples all of whose positions are labelled."""
    nl = len(labels)
    return frozenset(t for t in tuples if any(p >= nl for p in t[1]))


def canonicalize(labels: tuple[int, ...], u: int, tuples: RawTuples) -> tuple[Key, tuple[int, ...]]:
    """Canonical key of the *trunk* and the map canonical position -> input position."""
    nl = len(labels)
    ts = hollow(labels, tuples)
    if u <= 1:
        return (labels, u, tuple(sorted(ts))), tuple(range(nl + u))
    best = None
    best_perm: tuple[int, ...] = ()
    unl = range(nl, nl + u)
    for perm in itertools.permutations(unl):
        # perm[i] = input position placed at canonical position nl + i
        inv = list(range(nl + u))
        for i, p in enumerate(perm):
            inv[p] = nl + i
        cand = tuple(sorted((r, tuple(inv[p] for p in pos)) for r, pos in ts))
        if best is None or cand < best:
            best = cand
            best_perm = perm
    return (labels, u, best), tuple(range(nl)) + best_perm


class TypeTable:
    """Interns canonical keys of small structures over a fixed function-free language.

    Nullary relations are excluded from small structures; callers track them
    as global flags.
    """

    def __init__(self, language: Language, d0: int) -> None:
        if language.functions:
            raise InputError("the Sigma_1 index supports function-free languages only")
        if d0 < 1:
            raise InputError("d0 must be at least 1")
        self.language = language
        self.d0 = d0
        self.rel_names: tuple[str, ...] = tuple(
            sorted(r for r, a in language.relations.items() if a > 0)
        )
        self.rel_index = {r: i for i, r in enumerate(self.rel_names)}
        self.arity = tuple(language.relations[r] for r in self.rel_names)
        self.nullary: tuple[str, ...] = tuple(
            sorted(r for r, a in language.relations.items() if a == 0)
        )
        self._ids: dict[Key, int] = {}
        self.keys: list[Key] = []
        self._canon_cache: dict[tuple, tuple[int, tuple[int, ...]]] = {}

    def __len__(self) -> int:
        return len(self.keys)

    def intern(self, key: Key) -> int:
        tid = self._ids.get(key)
        if tid is None:
            tid = len(self.keys)
            self._ids[key] = tid
            self.keys.append(key)
        return tid

    def lookup(self, key: Key) -> int | None:
        return self._ids.get(key)

    def canon(self, labels: tuple[int, ...], u: int, tuples: frozenset) -> tuple[int, tuple[int, ...]]:
        """Type id and canonical->input position map of a raw structure (memoised)."""
        raw = (labels, u, tuples)
        hit = self._canon_cache.get(raw)
        if hit is None:
            key, perm = canonicalize(labels, u, tuples)
            hit = (self.intern(key), perm)
            self._canon_cache[raw] = hit
        return hit

    def labels(self, tid: int) -> tuple[int, ...]:
        return self.keys[tid][0]

    def unlabelled(self, tid: int) -> int:
        return self.keys[tid][1]

    def tuples(self, tid: int) -> tuple:
        return self.keys[tid][2]

    def describe(self, tid: int) -> str:
        labels, u, ts = self.keys[tid]
        parts = [f"{self.rel_names[r]}{pos}" for r, pos in ts]
        return f"labels={list(labels)} u={u} {{{', '.join(parts)}}}"


# ---------------------------------------------------------------------------
# the public labelled-structure type


@dataclass(frozen=True)
class KLabelledStructure:
    """A small structure ``core`` with an injective labelling ``sigma`` of depths ``1..k-1``."""

    core: Structure
    sigma: Mapping[int, int] = field(default_factory=dict)
    k: int = 1

    def __post_init__(self) -> None:
        if self.core.language.functions:
            raise InputError("labelled structures are function-free")
        if len(set(self.sigma.values())) != len(self.sigma):
            raise InputError("labelling is not injective")
        for i, v in self.sigma.items():
            if not (1 <= i <= self.k - 1):
                raise InputError(f"label {i} outside 1..{self.k - 1}")
            if not (0 <= v < self.core.n):
                raise InputError(f"label {i} points outside the structure")

    def raw(self, rel_names: Sequence[str] | None = None) -> tuple[tuple[int, ...], int, frozenset]:
        names = rel_names or sorted(r for r, a in self.core.language.relations.items() if a > 0)
        labels = tuple(sorted(self.sigma))
        labelled = [self.sigma[i] for i in labels]
        rest = [v for v in range(self.core.n) if v not in set(labelled)]
        pos = {v: i for i, v in enumerate(labelled + rest)}
        tuples = frozenset(
            (ri, tuple(pos[v] for v in t))
            for ri, r in enumerate(names)
            for t in self.core.relations.get(r, ())
        )
        return labels, len(rest), tuples

    def trunk(self) -> KLabelledStructure:
        labelled = set(self.sigma.values())
        s = self.core.copy()
        for r, ts in s.relations.items():
            s.relations[r] = {t for t in ts if not all(v in labelled for v in t)}
        return KLabelledStructure(s, dict(self.sigma), self.k)

    def is_hollow(self) -> bool:
        return self.trunk().core == self.core


def canonical_key(ks: KLabelledStructure, d0: int | None = None) -> bytes:
    """Byte key equal for two labelled structures iff their trunks are k-isomorphic."""
    if d0 is not None and ks.core.n > d0:
        raise InputError(f"structure has {ks.core.n} elements, more than d0={d0}")
    names = sorted(r for r, a in ks.core.language.relations.items() if a > 0)
    labels, u, tuples = ks.raw(names)
    key, _ = canonicalize(labels, u, tuples)
    return repr((ks.k, tuple(names), key)).encode()


# ---------------------------------------------------------------------------
# enumeration of unlabelled small structures and Sigma_1 models


_CLASS_CACHE: dict[tuple, list[tuple[Key, frozenset]]] = {}


def structure_classes(arities: Sequence[int], m: int) -> list[tuple[Key, frozenset]]:
    """All ``m``-element structures (relations with the given arities) up to isomorphism."""
    ck = (tuple(arities), m)
    hit = _CLASS_CACHE.get(ck)
    if hit is not None:
        return hit
    slots = [
        (ri, pos) for ri, a in enumerate(arities) for pos in itertools.product(range(m), repeat=a)
    ]
    if len(slots) > 24:
        raise InputError(
            f"too many possible tuples ({len(slots)}) to enumerate {m}-element structures"
        )
    seen: dict[Key, frozenset] = {}
    for mask in range(1 << len(slots)):
        ts = frozenset(slots[i] for i in range(len(slots)) if mask >> i & 1)
        key, _ = canonicalize((), m, ts)
        if key not in seen:
            seen[key] = frozenset(key[2])
    out = sorted(seen.items())
    _CLASS_CACHE[ck] = out
    return out


def _compile_matrix(f: Formula, slot: Mapping[str, int], rel_index: Mapping[str, int]):
    """Predicate ``(tuples, nullary, env) -> bool`` for a function-free quantifier-free formula."""
    if isinstance(f, Top):
        return lambda ts, nl, e: True
    if isinstance(f, Bot):
        return lambda ts, nl, e: False
    if isinstance(f, Rel):
        if not f.args:
            name = f.name
            return lambda ts, nl, e: name in nl
        ri = rel_index[f.name]
        idx = tuple(slot[a.name] for a in f.args)
        return lambda ts, nl, e: (ri, tuple(e[i] for i in idx)) in ts
    if isinstance(f, Eq):
        i, j = slot[f.left.name], slot[f.right.name]
        return lambda ts, nl, e: e[i] == e[j]
    if isinstance(f, Not):
        g = _compile_matrix(f.sub, slot, rel_index)
        return lambda ts, nl, e: not g(ts, nl, e)
    if isinstance(f, And):
        gs = [_compile_matrix(h, slot, rel_index) for h in f.subs]
        return lambda ts, nl, e: all(g(ts, nl, e) for g in gs)
    if isinstance(f, Or):
        gs = [_compile_matrix(h, slot, rel_index) for h in f.subs]
        return lambda ts, nl, e: any(g(ts, nl, e) for g in gs)
    raise InputError("the matrix of a Sigma_1 sentence must be quantifier-free")


def check_function_free(f: Formula) -> None:
    from ..logic.syntax import terms_of

    for t in terms_of(f):
        if not isinstance(t, Var):
            raise InputError("function symbols are not allowed in Sigma_1 index queries")


def sigma1_models(
    table: TypeTable,
    variables: Sequence[str],
    matrix: Formula,
    nullary_true: frozenset[str] = frozenset(),
) -> list[tuple[int | None, Key, tuple[int, ...]]]:
    """The set S_0: structures with ``1..q`` elements admitting a surjective satisfying assignment.

    Returns ``(type id or None, key, assignment)`` where ``assignment[i]`` is
    the position of ``variables[i]``.  Type id is ``None`` when the key has
    never been interned (so no index can contain it).
    """
    check_function_free(matrix)
    slot: dict[str, int] = {}
    for v in variables:
        slot[v] = len(slot)  # repeated names: the innermost binding wins
    order = [slot[v] for v in variables]
    for name in matrix.free_vars:
        if name not in slot:
            raise InputError(f"unbound variable {name}")
    pred = _compile_matrix(matrix, slot, table.rel_index)
    width = len(slot)
    out = []
    for m in range(1, width + 1):
        assigns = [
            a for a in itertools.product(range(m), repeat=width) if len(set(a)) == m
        ]
        if not assigns:
            continue
        for key, ts in structure_classes(table.arity, m):
            for a in assigns:
                if pred(ts, nullary_true, a):
                    out.append((table.lookup(key), key, tuple(a[i] for i in order)))
                    break
    return out
