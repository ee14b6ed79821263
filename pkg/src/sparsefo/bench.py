"""Work-unit counters of the Sigma_1 index on grid guards of growing size."""

from __future__ import annotations

from .config import RunConfig
from .counters import Counters
from .graph import Graph, grid_graph
from .logic.structure import Language, Structure
from .sigma1.be_index import build_be_index
from .sigma1.script import parse_script, run_script

BENCH_LANG = Language({"Edge": 2, "P": 1})

DEFAULT_SCRIPT = [
    "del Edge 0 1",
    "add Edge 0 1",
    "add P 1",
    "ask E x. E y. Edge(x, y) & P(x) & !P(y)",
    "del P 1",
    "ask E x. E y. Edge(x, y) & Edge(y, x)",
]

UPDATE_COUNTERS = ("update_touched", "update_recomputed", "update_forests")


def grid_structure(g: Graph, cols: int) -> Structure:
    """Deterministic structure on a grid: ``P`` on every third vertex, ``Edge`` on even horizontal edges."""
    s = Structure(g.n, BENCH_LANG)
    for v in range(g.n):
        if v % 3 == 0:
            s.add_tuple("P", (v,))
    for u, v in g.edges():
        if v == u + 1 and u % 2 == 0 and u // cols == v // cols:
            s.add_tuple("Edge", (u, v))
    return s


def run_bench(cfg: RunConfig) -> str:
    """Counter report with one ``name value`` line per counter, per grid size and script step."""
    lines = []
    script = DEFAULT_SCRIPT if cfg.script is None else cfg.script
    ops = parse_script(script, BENCH_LANG)
    for side in cfg.grid_sides:
        g = grid_graph(side)
        s = grid_structure(g, side)
        tag = f"n{g.n}"
        c = Counters()
        idx = build_be_index(g, s, cfg.bench_d0, palette=cfg.bench_palette, counters=c)
        build = c["be_build_work"]
        lines.append(f"{tag}.colors {idx.K}")
        lines.append(f"{tag}.build_work {build}")
        lines.append(f"{tag}.build_per_n {build / g.n:.4f}")
        for i, op in enumerate(ops, 1):
            before = c.snapshot()
            for _ in run_script(idx, [op]):
                pass
            spent = c.diff(before)
            if op.kind == "ask":
                lines.append(f"{tag}.op{i}.query_work {spent.get('query_work', 0)}")
            else:
                for name in UPDATE_COUNTERS:
                    lines.append(f"{tag}.op{i}.{name} {spent.get(name, 0)}")
    return "\n".join(lines) + "\n"
