"""Command-line front end: ``sparsefo <command> ...``.

Exit codes: 0 success, 1 verification mismatch, 2 input error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .augment import kth_augmentation
from .bench import run_bench
from .config import RunConfig
from .counters import NULL_COUNTERS, Counters
from .errors import InputError, SparseFOError
from .graph import format_digraph, format_graph, parse_graph
from .logic.semantics import eval_oracle
from .logic.structure import gaifman_graph, parse_structure
from .logic.syntax import parse_formula
from .qelim.reduce import ReduceConfig, reduce_sentence
from .selftest import SUITES, run_selftest
from .sigma1.be_index import build_be_index
from .sigma1.script import parse_script, run_script
from .treedepth import depth_certifying_forest, low_treedepth_coloring


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_augment(args, counters: Counters) -> int:
    g = parse_graph(_read(args.graph))
    chain = kth_augmentation(g, args.k, edge_budget=args.edge_budget, counters=counters)
    _emit(format_graph(chain.augmented), args.out)
    if args.chain:
        os.makedirs(args.chain, exist_ok=True)
        for i, d in enumerate(chain.digraphs):
            _emit(format_digraph(d), os.path.join(args.chain, f"D{i}.txt"))
    if not args.quiet:
        sys.stderr.write(
            f"augmented {g.num_edges} -> {chain.augmented.num_edges} edges in {args.k} rounds\n"
        )
    return 0


def cmd_color(args, counters: Counters) -> int:
    g = parse_graph(_read(args.graph))
    ltd = low_treedepth_coloring(g, args.d, rounds=args.rounds, adaptive=not args.literal, counters=counters)
    text = "".join(f"{v} {c}\n" for v, c in enumerate(ltd.coloring.colors))
    _emit(text, args.out)
    if not args.quiet:
        sys.stderr.write(
            f"{ltd.K} colors after {ltd.rounds} rounds (certified={ltd.certified})\n"
        )
    return 0


def cmd_forest(args, counters: Counters) -> int:
    g = parse_graph(_read(args.graph))
    classes = _int_list(args.classes)
    if not classes or len(classes) > args.d:
        raise InputError(f"give between 1 and d={args.d} color classes")
    ltd = low_treedepth_coloring(g, args.d, counters=counters)
    wanted = set(classes)
    members = [v for v, c in enumerate(ltd.coloring.colors) if c in wanted]
    f = depth_certifying_forest(g, members, len(classes))
    text = "".join(f"{v} {f.parent[v]} {f.depth[v]}\n" for v in sorted(f.members))
    _emit(text, args.out)
    return 0


def cmd_check(args, counters: Counters) -> int:
    s = parse_structure(_read(args.structure))
    phi = parse_formula(args.formula, s.language)
    if args.engine == "oracle":
        value = eval_oracle(s, phi)
        trace = None
    else:
        g = parse_graph(_read(args.guard)) if args.guard else gaifman_graph(s)
        cfg = ReduceConfig(max_quantifier_depth=args.max_depth, verify=args.verify)
        res = reduce_sentence(phi, s, g, config=cfg, counters=counters)
        value = res.value
        trace = res.trace()
    if args.trace and trace is not None:
        _emit(trace, args.trace)
    sys.stdout.write("true\n" if value else "false\n")
    return 0


def cmd_index(args, counters: Counters) -> int:
    g = parse_graph(_read(args.guard))
    s = parse_structure(_read(args.structure))
    ops = parse_script(_read(args.script).splitlines(), s.language)
    idx = build_be_index(g, s, args.d0, counters=counters)
    out = sys.stdout
    if args.out:
        try:
            out = open(args.out, "w", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    try:
        # answers are written as they are produced, so a failing line keeps earlier output
        for _, answer in run_script(idx, ops):
            if answer is not None:
                out.write(answer + "\n")
                out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_selftest(args, counters: Counters) -> int:
    cfg = RunConfig(seed=args.seed, trials=args.trials, fault=args.inject_fault, quiet=args.quiet)
    suites = args.suites.split(",") if args.suites else None
    for name in suites or ():
        if name not in SUITES:
            raise InputError(f"unknown suite {name!r} (known: {', '.join(SUITES)})")
    ok, report = run_selftest(cfg, suites)
    if args.quiet:
        report = report.splitlines()[-1] + "\n"
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_bench(args, counters: Counters) -> int:
    script = None
    if args.script:
        script = _read(args.script).splitlines()
    cfg = RunConfig(
        seed=args.seed,
        grid_sides=tuple(_int_list(args.sides)),
        bench_d0=args.d0,
        bench_palette=args.palette,
        script=script,
    )
    _emit(run_bench(cfg), args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="seed of the random generator")
    common.add_argument("--counters", action="store_true", help="print work counters to stderr")
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    p = argparse.ArgumentParser(prog="sparsefo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("augment", parents=[common], help="k-th augmentation of a graph")
    a.add_argument("--graph", required=True)
    a.add_argument("-k", type=int, required=True)
    a.add_argument("--out")
    a.add_argument("--chain", help="directory receiving D0.txt .. Dk.txt")
    a.add_argument("--edge-budget", type=int)
    a.set_defaults(func=cmd_augment)

    c = sub.add_parser("color", parents=[common], help="low tree-depth coloring")
    c.add_argument("--graph", required=True)
    c.add_argument("-d", type=int, required=True)
    c.add_argument("--out")
    c.add_argument("--rounds", type=int, help="augmentation rounds (default 3(d+1)^2)")
    c.add_argument("--literal", action="store_true", help="always run every round")
    c.set_defaults(func=cmd_color)

    f = sub.add_parser("forest", parents=[common], help="depth-certifying forest of color classes")
    f.add_argument("--graph", required=True)
    f.add_argument("-d", type=int, required=True)
    f.add_argument("--classes", required=True, help="comma-separated color classes")
    f.add_argument("--out")
    f.set_defaults(func=cmd_forest)

    k = sub.add_parser("check", parents=[common], help="decide a first-order sentence")
    k.add_argument("--structure", required=True)
    k.add_argument("--guard")
    k.add_argument("--formula", required=True)
    k.add_argument("--engine", choices=("qelim", "oracle"), default="qelim")
    k.add_argument("--max-depth", type=int, default=6, help="cap on the quantifier depth")
    k.add_argument("--trace", help="file receiving the elimination trace")
    k.add_argument("--verify", action="store_true", help="check every elimination against direct evaluation")
    k.set_defaults(func=cmd_check)

    i = sub.add_parser("index", parents=[common], help="dynamic Sigma_1 index over an update script")
    i.add_argument("--guard", required=True)
    i.add_argument("--structure", required=True)
    i.add_argument("--d0", type=int, required=True)
    i.add_argument("--script", required=True)
    i.add_argument("--out")
    i.set_defaults(func=cmd_index)

    t = sub.add_parser("selftest", parents=[common], help="randomized oracle-differential suites")
    t.add_argument("--trials", type=int, default=20)
    t.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    t.add_argument("--inject-fault", choices=("skip-list3",))
    t.add_argument("--out")
    t.set_defaults(func=cmd_selftest)

    b = sub.add_parser("bench", parents=[common], help="work counters on grid guards")
    b.add_argument("--sides", default="10,32,100", help="grid side lengths")
    b.add_argument("--d0", type=int, default=2)
    b.add_argument("--palette", type=int, default=8)
    b.add_argument("--script")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    counters = Counters() if args.counters else NULL_COUNTERS
    try:
        code = args.func(args, counters)
    except SparseFOError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except RecursionError:
        sys.stderr.write("error: input too deeply nested\n")
        return 3
    if args.counters:
        sys.stderr.write(counters.report())
    return code


if __name__ == "__main__":
    sys.exit(main())
