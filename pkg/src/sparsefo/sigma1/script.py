"""Update/query scripts: ``add <Rel> v1 .. vt``, ``del <Rel> v1 .. vt`` and ``ask <formula>`` lines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from ..errors import InputError
from ..logic.syntax import Formula, parse_formula, sigma1_parts
from .be_index import BEIndex


@dataclass(frozen=True)
class ScriptOp:
    kind: str  # "add", "del" or "ask"
    relation: str = ""
    tuple: tuple[int, ...] = ()
    formula: Formula | None = None
    text: str = ""


def parse_script(lines: Iterable[str], language=None) -> list[ScriptOp]:
    ops = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "ask":
            try:
                phi = parse_formula(rest, language)
            except InputError as exc:
                raise InputError(f"line {lineno}: {exc}") from None
            ops.append(ScriptOp("ask", formula=phi, text=line))
        elif word in ("add", "del"):
            parts = rest.split()
            if not parts:
                raise InputError(f"line {lineno}: missing relation name")
            try:
                tup = tuple(int(x) for x in parts[1:])
            except ValueError:
                raise InputError(f"line {lineno}: tuple elements must be integers") from None
            ops.append(ScriptOp(word, parts[0], tup, text=line))
        else:
            raise InputError(f"line {lineno}: unknown command {word!r} (add, del, ask)")
    return ops


def run_script(idx: BEIndex, ops: Iterable[ScriptOp]) -> Iterator[tuple[ScriptOp, str | None]]:
    """Apply the operations in order; yields each op with its answer line (``None`` for updates)."""
    for op in ops:
        if op.kind == "add":
            idx.insert_tuple(op.relation, op.tuple)
            yield op, None
        elif op.kind == "del":
            idx.remove_tuple(op.relation, op.tuple)
            yield op, None
        else:
            res = idx.query(op.formula)
            variables, _ = sigma1_parts(op.formula)
            yield op, res.format(variables)
