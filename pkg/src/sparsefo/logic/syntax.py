"""Terms, formulas, a parser and a printer for first-order logic with unary functions.

Grammar (precedence ``!`` > ``&`` > ``|``; quantifier scope extends maximally
to the right)::

    formula  := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := '!' unary | ('E' | 'A') VAR '.' formula | primary
    primary  := '(' formula ')' | 'T' | 'F' | REL '(' terms? ')' | REL
              | term ('=' | '!=') term
    term     := VAR | FUN '(' term ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

from ..errors import FormulaSyntaxError, InputError

RESERVED = frozenset({"E", "A", "T", "F"})


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    """A unary function applied to a term."""

    fn: str
    arg: "Term"

    def __str__(self) -> str:
        return f"{self.fn}({self.arg})"


Term = Var | App


def term_var(t: Term) -> Var:
    """The unique variable of a term."""
    while isinstance(t, App):
        t = t.arg
    return t


def term_depth(t: Term) -> int:
    """Number of function applications in ``t``."""
    k = 0
    while isinstance(t, App):
        k += 1
        t = t.arg
    return k


def term_functions(t: Term) -> tuple[str, ...]:
    """Function symbols from outermost to innermost."""
    out = []
    while isinstance(t, App):
        out.append(t.fn)
        t = t.arg
    return tuple(out)


def is_simple_term(t: Term) -> bool:
    return isinstance(t, Var) or isinstance(t.arg, Var)


def iterate(fn: str, k: int, t: Term) -> Term:
    """``fn`` applied ``k`` times to ``t``."""
    for _ in range(k):
        t = App(fn, t)
    return t


def subterms(t: Term) -> Iterator[Term]:
    while True:
        yield t
        if isinstance(t, Var):
            return
        t = t.arg


def substitute_term(t: Term, var: str, repl: Term) -> Term:
    if isinstance(t, Var):
        return repl if t.name == var else t
    return App(t.fn, substitute_term(t.arg, var, repl))


# ---------------------------------------------------------------------------
# formulas


class Formula:
    """Base class; concrete nodes are frozen dataclasses below."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_formula(self)

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return neg(self)

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return _free_vars(self)

    @cached_property
    def size(self) -> int:
        """|phi|: number of nodes of the syntax tree (terms count as one node)."""
        return sum(1 for _ in walk(self))


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Rel(Formula):
    """Relation atom ``name(args)``; ``args`` may be empty for nullary relations."""

    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    subs: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    subs: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Top()
FALSE = Bot()


def conj(*fs: Formula) -> Formula:
    """Conjunction with unit/zero simplification and flattening."""
    out: list[Formula] = []
    for f in fs:
        if isinstance(f, Top):
            continue
        if isinstance(f, Bot):
            return FALSE
        if isinstance(f, And):
            out.extend(f.subs)
        else:
            out.append(f)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*fs: Formula) -> Formula:
    """Disjunction with unit/zero simplification and flattening."""
    out: list[Formula] = []
    for f in fs:
        if isinstance(f, Bot):
            continue
        if isinstance(f, Top):
            return TRUE
        if isinstance(f, Or):
            out.extend(f.subs)
        else:
            out.append(f)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bot):
        return TRUE
    if isinstance(f, Not):
        return f.sub
    return Not(f)


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal of formula nodes."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.sub)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.subs))
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)


def atom_terms(f: Formula) -> tuple[Term, ...]:
    if isinstance(f, Rel):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    return ()


def terms_of(f: Formula) -> set[Term]:
    """All terms occurring in ``f`` (including subterms of nested applications)."""
    out: set[Term] = set()
    for g in walk(f):
        for t in atom_terms(g):
            out.update(subterms(t))
    return out


def top_terms_of(f: Formula) -> set[Term]:
    """Terms occurring as arguments of atoms (not their proper subterms)."""
    out: set[Term] = set()
    for g in walk(f):
        out.update(atom_terms(g))
    return out


def _free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Rel, Eq)):
        return frozenset(term_var(t).name for t in atom_terms(f))
    if isinstance(f, Not):
        return f.sub.free_vars
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for g in f.subs:
            out |= g.free_vars
        return frozenset(out)
    if isinstance(f, (Exists, Forall)):
        return f.body.free_vars - {f.var}
    return frozenset()


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in walk(f))


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_depth(f.body)
    if isinstance(f, Not):
        return quantifier_depth(f.sub)
    if isinstance(f, (And, Or)):
        return max((quantifier_depth(g) for g in f.subs), default=0)
    return 0


def map_terms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` with every atom argument replaced by ``fn(term)``."""
    if isinstance(f, Rel):
        return Rel(f.name, tuple(fn(t) for t in f.args))
    if isinstance(f, Eq):
        return Eq(fn(f.left), fn(f.right))
    if isinstance(f, Not):
        return Not(map_terms(f.sub, fn))
    if isinstance(f, And):
        return And(tuple(map_terms(g, fn) for g in f.subs))
    if isinstance(f, Or):
        return Or(tuple(map_terms(g, fn) for g in f.subs))
    if isinstance(f, Exists):
        return Exists(f.var, map_terms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_terms(f.body, fn))
    return f


def substitute(f: Formula, var: str, repl: Term) -> Formula:
    """Replace free occurrences of ``var`` by ``repl`` (``repl`` must not be captured)."""
    if isinstance(f, (Exists, Forall)):
        if f.var == var:
            return f
        if f.var == term_var(repl).name:
            raise ValueError(f"substitution would capture variable {f.var}")
        return type(f)(f.var, substitute(f.body, var, repl))
    if isinstance(f, Not):
        return Not(substitute(f.sub, var, repl))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(g, var, repl) for g in f.subs))
    if isinstance(f, (Rel, Eq)):
        return map_terms(f, lambda t: substitute_term(t, var, repl))
    return f


def relations_used(f: Formula) -> dict[str, int]:
    return {g.name: len(g.args) for g in walk(f) if isinstance(g, Rel)}


def functions_used(f: Formula) -> set[str]:
    out: set[str] = set()
    for t in terms_of(f):
        if isinstance(t, App):
            out.add(t.fn)
    return out


def is_sigma1_sentence(f: Formula) -> bool:
    """``E x1. ... E xk. matrix`` with a quantifier-free matrix and no free variables."""
    g = f
    while isinstance(g, Exists):
        g = g.body
    return is_quantifier_free(g) and not f.free_vars


def sigma1_parts(f: Formula) -> tuple[list[str], Formula]:
    """Quantified variables (outermost first) and matrix of a Sigma_1 sentence."""
    vars_: list[str] = []
    g = f
    while isinstance(g, Exists):
        vars_.append(g.var)
        g = g.body
    return vars_, g


# ---------------------------------------------------------------------------
# printing


def format_term(t: Term) -> str:
    return str(t)


def _open_right(f: Formula) -> bool:
    while isinstance(f, Not):
        f = f.sub
    return isinstance(f, (Exists, Forall))


def format_formula(f: Formula) -> str:
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(map(str, f.args))})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        if isinstance(f.sub, Eq):
            return f"{f.sub.left} != {f.sub.right}"
        if isinstance(f.sub, (And, Or)):
            return f"!({format_formula(f.sub)})"
        return f"!{format_formula(f.sub)}"
    if isinstance(f, And):
        return " & ".join(_operand(g, And) for g in f.subs)
    if isinstance(f, Or):
        return " | ".join(_operand(g, Or) for g in f.subs)
    if isinstance(f, Exists):
        return f"E {f.var}. {format_formula(f.body)}"
    if isinstance(f, Forall):
        return f"A {f.var}. {format_formula(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _operand(g: Formula, parent: type) -> str:
    s = format_formula(g)
    if isinstance(g, (And, Or)) or _open_right(g):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(!=)|([!&|().,=])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        tok = m.group(1) or m.group(2) or m.group(3)
        toks.append((tok, m.start(m.lastindex)))
        pos = m.end()
    toks.append(("<end>", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, language: "LanguageLike | None") -> None:
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.lang = language

    def peek(self, k: int = 0) -> str:
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok!r}", self.pos(), self.text)
        self.i += 1
        return tok

    def error(self, msg: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(msg, self.pos(), self.text)

    def ident(self) -> str:
        tok = self.peek()
        if not _is_ident(tok) or tok in RESERVED:
            raise self.error(f"expected an identifier, found {tok!r}")
        self.i += 1
        return tok

    def formula(self) -> Formula:
        subs = [self.conj()]
        while self.peek() == "|":
            self.take()
            subs.append(self.conj())
        return subs[0] if len(subs) == 1 else Or(tuple(subs))

    def conj(self) -> Formula:
        subs = [self.unary()]
        while self.peek() == "&":
            self.take()
            subs.append(self.unary())
        return subs[0] if len(subs) == 1 else And(tuple(subs))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("E", "A") and _is_ident(self.peek(1)) and self.peek(2) == ".":
            self.take()
            var = self.ident()
            self.take(".")
            body = self.formula()
            return Exists(var, body) if tok == "E" else Forall(var, body)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "T":
            self.take()
            return TRUE
        if tok == "F":
            self.take()
            return FALSE
        if not _is_ident(tok) or tok in RESERVED:
            raise self.error(f"unexpected token {tok!r}")
        start = self.pos()
        # relation atom, or a term that starts an (in)equality
        if self.peek(1) == "(":
            save = self.i
            name = self.ident()
            self.take("(")
            if self.peek() == ")":
                self.take()
                return self._rel(name, (), start)
            args = [self.term()]
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
            if self.peek() in ("=", "!=") and len(args) == 1:
                self.i = save
                return self._equality()
            return self._rel(name, tuple(args), start)
        if self.peek(1) in ("=", "!="):
            return self._equality()
        name = self.ident()
        return self._rel(name, (), start)

    def _equality(self) -> Formula:
        left = self.term()
        op = self.take()
        if op not in ("=", "!="):
            raise self.error("expected '=' or '!='")
        right = self.term()
        eq = Eq(left, right)
        return eq if op == "=" else Not(eq)

    def term(self) -> Term:
        start = self.pos()
        name = self.ident()
        if self.peek() == "(":
            self.take()
            arg = self.term()
            if self.peek() == ",":
                raise self.error(f"function {name} takes exactly one argument")
            self.take(")")
            if self.lang is not None and name not in self.lang.functions:
                raise FormulaSyntaxError(f"unknown function symbol {name!r}", start, self.text)
            return App(name, arg)
        return Var(name)

    def _rel(self, name: str, args: tuple[Term, ...], start: int) -> Formula:
        if self.lang is not None:
            arity = self.lang.relations.get(name)
            if arity is None:
                raise FormulaSyntaxError(f"unknown relation symbol {name!r}", start, self.text)
            if arity != len(args):
                raise FormulaSyntaxError(
                    f"relation {name} has arity {arity} but is applied to {len(args)} arguments",
                    start,
                    self.text,
                )
        return Rel(name, args)


class LanguageLike:
    relations: Mapping[str, int]
    functions: frozenset[str] | tuple[str, ...]


def _is_ident(tok: str) -> bool:
    return bool(tok) and (tok[0].isalpha() or tok[0] == "_")


def parse_formula(text: str, language: LanguageLike | None = None) -> Formula:
    """Parse ``text``; with a ``language``, unknown symbols and arity mismatches are errors.

    Without a language, a symbol used with two different arities is an error.
    """
    p = _Parser(text, language)
    f = p.formula()
    if p.peek() != "<end>":
        raise p.error(f"unexpected trailing token {p.peek()!r}")
    if language is None:
        seen: dict[str, int] = {}
        funs = functions_used(f)
        for g in walk(f):
            if isinstance(g, Rel):
                if seen.setdefault(g.name, len(g.args)) != len(g.args):
                    raise InputError(f"relation {g.name} used with different arities")
                if g.name in funs:
                    raise InputError(f"symbol {g.name} used both as relation and function")
    return f
