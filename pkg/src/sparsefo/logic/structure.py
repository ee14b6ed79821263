"""Relational structures with unary functions, their text format and Gaifman graphs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..errors import InputError
from ..graph import Graph
from .syntax import RESERVED

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Language:
    """Relation symbols with arities and unary function symbols."""

    relations: Mapping[str, int] = field(default_factory=dict)
    functions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", dict(self.relations))
        object.__setattr__(self, "functions", tuple(self.functions))
        if len(set(self.functions)) != len(self.functions):
            raise InputError("duplicate function symbol")
        clash = set(self.relations) & set(self.functions)
        if clash:
            raise InputError(f"symbol used as relation and function: {sorted(clash)[0]}")
        for name in (*self.relations, *self.functions):
            if not _NAME.match(name) or name in RESERVED:
                raise InputError(f"invalid symbol name {name!r} (E, A, T and F are reserved)")
        for name, a in self.relations.items():
            if a < 0:
                raise InputError(f"negative arity for {name}")

    def extend(
        self, relations: Mapping[str, int] | None = None, functions: Iterable[str] = ()
    ) -> Language:
        rels = dict(self.relations)
        for name, a in (relations or {}).items():
            if rels.get(name, a) != a:
                raise InputError(f"relation {name} redeclared with arity {a}")
            rels[name] = a
        funs = list(self.functions)
        for f in functions:
            if f not in funs:
                funs.append(f)
        return Language(rels, tuple(funs))

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.relations.items())), self.functions))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Language)
            and dict(self.relations) == dict(other.relations)
            and set(self.functions) == set(other.functions)
        )


class Structure:
    """A finite structure on elements ``0..n-1``.

    Relations are sets of tuples; functions are total lists.  Mutation goes
    through :meth:`add_tuple` / :meth:`remove_tuple` / :meth:`set_function`.
    """

    __slots__ = ("n", "language", "relations", "functions")

    def __init__(
        self,
        n: int,
        language: Language,
        relations: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
        functions: Mapping[str, Iterable[int]] | None = None,
    ) -> None:
        if n < 0:
            raise InputError("universe size must be non-negative")
        self.n = n
        self.language = language
        self.relations: dict[str, set[tuple[int, ...]]] = {r: set() for r in language.relations}
        self.functions: dict[str, list[int]] = {f: list(range(n)) for f in language.functions}
        for name, tuples in (relations or {}).items():
            for t in tuples:
                self.add_tuple(name, tuple(t))
        for name, values in (functions or {}).items():
            vals = list(values)
            if len(vals) != n:
                raise InputError(f"function {name} must have {n} values")
            for v, w in enumerate(vals):
                self.set_function(name, v, w)

    # -- mutation ---------------------------------------------------------

    def _check_tuple(self, name: str, t: tuple[int, ...]) -> None:
        arity = self.language.relations.get(name)
        if arity is None:
            raise InputError(f"unknown relation {name!r}")
        if len(t) != arity:
            raise InputError(f"relation {name} has arity {arity}, got tuple of length {len(t)}")
        for v in t:
            if not (0 <= v < self.n):
                raise InputError(f"element {v} outside universe of size {self.n}")

    def add_tuple(self, name: str, t: tuple[int, ...]) -> bool:
        """Add ``t`` to ``name``; returns whether it was new."""
        t = tuple(t)
        self._check_tuple(name, t)
        rel = self.relations[name]
        if t in rel:
            return False
        rel.add(t)
        return True

    def remove_tuple(self, name: str, t: tuple[int, ...]) -> bool:
        t = tuple(t)
        self._check_tuple(name, t)
        rel = self.relations[name]
        if t not in rel:
            return False
        rel.remove(t)
        return True

    def set_function(self, name: str, v: int, w: int) -> None:
        if name not in self.functions:
            raise InputError(f"unknown function {name!r}")
        if not (0 <= v < self.n and 0 <= w < self.n):
            raise InputError(f"function pair {v} {w} outside universe of size {self.n}")
        self.functions[name][v] = w

    # -- queries ------------------------------------------------------------

    def holds(self, name: str, t: tuple[int, ...]) -> bool:
        return tuple(t) in self.relations[name]

    def apply(self, name: str, v: int) -> int:
        return self.functions[name][v]

    @property
    def size(self) -> int:
        """|A| = |V(A)| + sum of relation sizes + (#functions) * |V(A)|."""
        return self.n + sum(len(r) for r in self.relations.values()) + len(self.functions) * self.n

    def copy(self) -> Structure:
        s = Structure.__new__(Structure)
        s.n = self.n
        s.language = self.language
        s.relations = {r: set(ts) for r, ts in self.relations.items()}
        s.functions = {f: list(vs) for f, vs in self.functions.items()}
        return s

    def expand(
        self,
        relations: Mapping[str, tuple[int, Iterable[tuple[int, ...]]]] | None = None,
        functions: Mapping[str, Iterable[int]] | None = None,
    ) -> Structure:
        """A copy with new symbols: ``relations`` maps name -> (arity, tuples)."""
        lang = self.language.extend(
            {name: a for name, (a, _) in (relations or {}).items()}, (functions or {}).keys()
        )
        s = self.copy()
        s.language = lang
        for name, (a, tuples) in (relations or {}).items():
            s.relations[name] = set()
            for t in tuples:
                s.add_tuple(name, tuple(t))
        for name, values in (functions or {}).items():
            vals = list(values)
            if len(vals) != self.n:
                raise InputError(f"function {name} must have {self.n} values")
            s.functions[name] = vals
        return s

    def reduct(self, language: Language) -> Structure:
        """Forget every symbol not in ``language``."""
        s = Structure.__new__(Structure)
        s.n = self.n
        s.language = language
        s.relations = {r: set(self.relations[r]) for r in language.relations}
        s.functions = {f: list(self.functions[f]) for f in language.functions}
        return s

    def induced(self, vertices: Iterable[int]) -> tuple[Structure, list[int]]:
        """Substructure on ``vertices`` (relabelled in ascending order).

        Functions leaving the vertex set are redirected to the identity, so the
        result is a total structure.  Returns the structure and the list of
        original element names.
        """
        keep = sorted(set(vertices))
        idx = {v: i for i, v in enumerate(keep)}
        s = Structure.__new__(Structure)
        s.n = len(keep)
        s.language = self.language
        s.relations = {
            r: {tuple(idx[v] for v in t) for t in ts if all(v in idx for v in t)}
            for r, ts in self.relations.items()
        }
        s.functions = {}
        for f, vals in self.functions.items():
            s.functions[f] = [idx.get(vals[v], i) for i, v in enumerate(keep)]
        return s, keep

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Structure)
            and self.n == other.n
            and self.language == other.language
            and self.relations == other.relations
            and self.functions == other.functions
        )

    def __repr__(self) -> str:
        rels = ", ".join(f"{r}:{len(ts)}" for r, ts in sorted(self.relations.items()))
        return f"Structure(n={self.n}, {rels}, functions={list(self.functions)})"


# ---------------------------------------------------------------------------


def gaifman_graph(s: Structure) -> Graph:
    """Join distinct elements co-occurring in a tuple or linked by a function."""
    edges: set[tuple[int, int]] = set()
    for ts in s.relations.values():
        for t in ts:
            elems = sorted(set(t))
            for i, a in enumerate(elems):
                for b in elems[i + 1 :]:
                    edges.add((a, b))
    for vals in s.functions.values():
        for v, w in enumerate(vals):
            if v != w:
                edges.add((min(v, w), max(v, w)))
    return Graph.from_edges(s.n, edges)


def is_guarded(s: Structure, g: Graph) -> bool:
    """Whether the Gaifman graph of ``s`` is a subgraph of ``g``."""
    if s.n != g.n:
        raise InputError(f"structure has {s.n} elements but guard graph has {g.n} vertices")
    for ts in s.relations.values():
        for t in ts:
            for i, a in enumerate(t):
                for b in t[i + 1 :]:
                    if a != b and not g.has_edge(a, b):
                        return False
    for vals in s.functions.values():
        for v, w in enumerate(vals):
            if v != w and not g.has_edge(v, w):
                return False
    return True


# ---------------------------------------------------------------------------
# text format


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"line {lineno}: expected an integer, found {tok!r}") from None


def parse_structure(text: str) -> Structure:
    """Parse ``universe n`` / ``rel Name/arity`` / ``fun name`` blocks."""
    n: int | None = None
    rel_order: list[tuple[str, int]] = []
    fun_order: list[str] = []
    tuples: dict[str, list[tuple[int, ...]]] = {}
    pairs: dict[str, list[tuple[int, int]]] = {}
    current: tuple[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "universe":
            if n is not None or len(parts) != 2:
                raise InputError(f"line {lineno}: malformed or repeated universe line")
            n = _int(parts[1], lineno)
            if n < 0:
                raise InputError(f"line {lineno}: negative universe size")
            current = None
        elif head == "rel":
            if len(parts) != 2 or "/" not in parts[1]:
                raise InputError(f"line {lineno}: expected 'rel Name/arity'")
            name, _, a = parts[1].partition("/")
            if not name or name in tuples or name in pairs:
                raise InputError(f"line {lineno}: bad or duplicate symbol {name!r}")
            rel_order.append((name, _int(a, lineno)))
            tuples[name] = []
            current = ("rel", name)
        elif head == "fun":
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected 'fun name'")
            name = parts[1]
            if name in tuples or name in pairs:
                raise InputError(f"line {lineno}: duplicate symbol {name!r}")
            fun_order.append(name)
            pairs[name] = []
            current = ("fun", name)
        else:
            if current is None:
                raise InputError(f"line {lineno}: data outside a rel/fun block")
            vals = () if parts == ["-"] else tuple(_int(p, lineno) for p in parts)
            kind, name = current
            if kind == "rel":
                tuples[name].append(vals)
            else:
                if len(vals) != 2:
                    raise InputError(f"line {lineno}: function lines are 'v w' pairs")
                pairs[name].append((vals[0], vals[1]))
    if n is None:
        raise InputError("missing 'universe <n>' line")
    lang = Language(dict(rel_order), tuple(fun_order))
    s = Structure(n, lang)
    for name, a in rel_order:
        for t in tuples[name]:
            try:
                s.add_tuple(name, t)
            except InputError as e:
                raise InputError(f"relation {name}/{a}: {e}") from None
    for name in fun_order:
        for v, w in pairs[name]:
            s.set_function(name, v, w)
    return s


def format_structure(s: Structure) -> str:
    """Canonical text form; nullary relations that hold are written as a ``-`` line."""
    out = [f"universe {s.n}"]
    for name in sorted(s.language.relations):
        a = s.language.relations[name]
        out.append(f"rel {name}/{a}")
        for t in sorted(s.relations[name]):
            out.append(" ".join(map(str, t)) if t else "-")
    for name in sorted(s.language.functions):
        out.append(f"fun {name}")
        for v, w in enumerate(s.functions[name]):
            if v != w:
                out.append(f"{v} {w}")
    return "\n".join(out) + "\n"
