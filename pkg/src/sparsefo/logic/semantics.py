"""Reference semantics: brute-force evaluation and a compiled evaluator."""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from ..errors import InputError
from .structure import Structure
from .syntax import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
)


def eval_term(s: Structure, t: Term, env: Mapping[str, int]) -> int:
    fns: list[str] = []
    while isinstance(t, App):
        fns.append(t.fn)
        t = t.arg
    try:
        v = env[t.name]
    except KeyError:
        raise InputError(f"unbound variable {t.name}") from None
    for fn in reversed(fns):
        v = s.functions[fn][v]
    return v


def eval_oracle(s: Structure, phi: Formula, bindings: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth by exhaustive quantifier expansion.

    Over the empty universe ``E`` is false and ``A`` is true.
    """
    env = dict(bindings or {})
    missing = phi.free_vars - env.keys()
    if missing:
        raise InputError(f"unbound free variable {sorted(missing)[0]}")
    return _eval(s, phi, env)


def _eval(s: Structure, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Rel):
        return tuple(eval_term(s, t, env) for t in f.args) in s.relations[f.name]
    if isinstance(f, Eq):
        return eval_term(s, f.left, env) == eval_term(s, f.right, env)
    if isinstance(f, Not):
        return not _eval(s, f.sub, env)
    if isinstance(f, And):
        return all(_eval(s, g, env) for g in f.subs)
    if isinstance(f, Or):
        return any(_eval(s, g, env) for g in f.subs)
    if isinstance(f, (Exists, Forall)):
        old = env.get(f.var)
        want = isinstance(f, Exists)
        result = not want
        for v in range(s.n):
            env[f.var] = v
            if _eval(s, f.body, env) == want:
                result = want
                break
        if old is None:
            env.pop(f.var, None)
        else:
            env[f.var] = old
        return result
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# compiled evaluation (same semantics, used on hot paths)


def _compile_term(s: Structure, t: Term, slot: Mapping[str, int]) -> Callable[[list[int]], int]:
    fns: list[list[int]] = []
    while isinstance(t, App):
        fns.append(s.functions[t.fn])
        t = t.arg
    i = slot[t.name]
    fns.reverse()
    if not fns:
        return lambda e: e[i]
    if len(fns) == 1:
        f0 = fns[0]
        return lambda e: f0[e[i]]

    def run(e: list[int]) -> int:
        v = e[i]
        for f in fns:
            v = f[v]
        return v

    return run


def compile_formula(
    s: Structure, f: Formula, free: Sequence[str]
) -> Callable[[Sequence[int]], bool]:
    """Compile ``f`` against ``s`` into a predicate over values of ``free``.

    Symbol interpretations are captured at compile time, so later mutation of
    ``s`` is not seen.
    """
    missing = f.free_vars - set(free)
    if missing:
        raise InputError(f"unbound free variable {sorted(missing)[0]}")
    slots: dict[str, int] = {}
    for v in free:
        slots.setdefault(v, len(slots))
    width = [len(slots)]
    fn = _compile(s, f, slots, width)
    nfree = len(free)
    order = [slots[v] for v in free]

    def run(values: Sequence[int]) -> bool:
        if len(values) != nfree:
            raise InputError("wrong number of values")
        env = [0] * width[0]
        for i, v in zip(order, values):
            env[i] = v
        return fn(env)

    return run


def _compile(s: Structure, f: Formula, slots: dict[str, int], width: list[int]):
    if isinstance(f, Top):
        return lambda e: True
    if isinstance(f, Bot):
        return lambda e: False
    if isinstance(f, Rel):
        rel = s.relations[f.name]
        ts = [_compile_term(s, t, slots) for t in f.args]
        if len(ts) == 0:
            val = () in rel
            return lambda e: val
        if len(ts) == 1:
            t0 = ts[0]
            return lambda e: (t0(e),) in rel
        if len(ts) == 2:
            t0, t1 = ts
            return lambda e: (t0(e), t1(e)) in rel
        return lambda e: tuple(t(e) for t in ts) in rel
    if isinstance(f, Eq):
        a = _compile_term(s, f.left, slots)
        b = _compile_term(s, f.right, slots)
        return lambda e: a(e) == b(e)
    if isinstance(f, Not):
        g = _compile(s, f.sub, slots, width)
        return lambda e: not g(e)
    if isinstance(f, And):
        gs = [_compile(s, h, slots, width) for h in f.subs]
        return lambda e: all(g(e) for g in gs)
    if isinstance(f, Or):
        gs = [_compile(s, h, slots, width) for h in f.subs]
        return lambda e: any(g(e) for g in gs)
    if isinstance(f, (Exists, Forall)):
        inner = dict(slots)
        inner[f.var] = width[0]
        width[0] += 1
        i = inner[f.var]
        body = _compile(s, f.body, inner, width)
        n = s.n
        if isinstance(f, Exists):

            def ex(e: list[int]) -> bool:
                for v in range(n):
                    e[i] = v
                    if body(e):
                        return True
                return False

            return ex

        def fa(e: list[int]) -> bool:
            for v in range(n):
                e[i] = v
                if not body(e):
                    return False
            return True

        return fa
    raise TypeError(f"not a formula: {f!r}")
