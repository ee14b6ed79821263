"""Randomized differential suites against brute-force oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .augment import kth_augmentation
from .config import RunConfig
from .errors import ResourceCap, VerificationError
from .generators import (
    random_degenerate_graph,
    random_forest,
    random_forest_structure,
    random_guarded_structure,
    random_sentence,
    random_sigma1,
    random_structure,
)
from .graph import degeneracy_order
from .logic.semantics import eval_oracle
from .logic.structure import Language, format_structure, parse_structure
from .logic.syntax import format_formula, parse_formula
from .qelim.reduce import ReduceConfig, reduce_sentence
from .sigma1.be_index import build_be_index, query_sigma1
from .sigma1.forest_index import build_forest_index
from .treedepth import low_treedepth_coloring, verify_low_treedepth

SIGMA_LANG = Language({"Edge": 2, "P": 1})


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    capped: int = 0
    counterexample: str | None = None

    def format(self) -> str:
        line = f"{self.name} trials={self.trials} failures={self.failures}"
        if self.capped:
            line += f" capped={self.capped}"
        if self.counterexample:
            line += f"\n  counterexample: {self.counterexample}"
        return line


class _Suite:
    def __init__(self, name: str, trials: int) -> None:
        self.result = SuiteResult(name, 0, 0)
        self.trials = trials

    def fail(self, msg: str) -> None:
        self.result.failures += 1
        if self.result.counterexample is None:
            self.result.counterexample = msg


def suite_augment(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    """Transitive and fraternal pairs of each round are adjacent after the next round."""
    s = _Suite("augment", cfg.trials)
    for _ in range(s.trials):
        s.result.trials += 1
        n = rng.randint(1, 25)
        g = random_degenerate_graph(rng, n, 3)
        chain = kth_augmentation(g, 2)
        deg = degeneracy_order(g).degeneracy
        if chain.digraphs[0].max_in_degree() > deg:
            s.fail(f"n={n}: D_0 in-degree exceeds the degeneracy {deg}")
            continue
        for i in range(chain.k):
            d, nxt = chain.digraphs[i], chain.digraphs[i + 1]
            bad = None
            for z in range(n):
                for x in d.inn[z]:
                    for y in d.out[z]:
                        if x != y and not nxt.adjacent(x, y):
                            bad = f"transitive pair {x}->{z}->{y}"
                    for y in d.inn[z]:
                        if x != y and not nxt.adjacent(x, y):
                            bad = f"fraternal pair {x}->{z}<-{y}"
            if bad:
                s.fail(f"n={n} round {i}: {bad} not joined")
                break
    return s.result


def suite_lowtd(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    s = _Suite("lowtd", cfg.trials)
    for _ in range(s.trials):
        s.result.trials += 1
        n = rng.randint(1, 14)
        d = rng.randint(1, 2)
        g = random_degenerate_graph(rng, n, 3)
        ltd = low_treedepth_coloring(g, d)
        problems = verify_low_treedepth(ltd, g)
        if problems:
            s.fail(f"n={n} d={d} edges={list(g.edges())}: {problems[0]}")
    return s.result


def suite_roundtrip(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    s = _Suite("roundtrip", cfg.trials)
    lang = Language({"R": 2, "P": 1, "Tri": 3, "Q": 0}, ("f", "g"))
    for _ in range(s.trials):
        s.result.trials += 1
        phi = random_sentence(rng, rng.randint(0, 3), lang.relations, lang.functions)
        text = format_formula(phi)
        back = parse_formula(text, lang)
        if back != phi or format_formula(back) != text:
            s.fail(f"formula {text!r} reparsed as {format_formula(back)!r}")
        st = random_structure(rng, rng.randint(0, 8), lang)
        out = format_structure(st)
        if parse_structure(out) != st:
            s.fail(f"structure text {out!r} did not round-trip")
    return s.result


def suite_sigma1(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    s = _Suite("sigma1", cfg.trials)
    for _ in range(s.trials):
        s.result.trials += 1
        n = rng.randint(1, 30)
        g = random_degenerate_graph(rng, n, 3)
        st = random_guarded_structure(rng, g, SIGMA_LANG)
        idx = build_be_index(g, st, 3)
        phi = random_sigma1(rng, rng.randint(1, 3), SIGMA_LANG.relations)
        res = query_sigma1(idx, phi)
        want = eval_oracle(st, phi)
        if res.sat != want:
            s.fail(f"n={n} edges={list(g.edges())} query {format_formula(phi)}: index={res.sat} oracle={want}")
    return s.result


def suite_dynamic(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    """Incremental forest-index updates against from-scratch rebuilds."""
    s = _Suite("dynamic", cfg.trials)
    for _ in range(s.trials):
        s.result.trials += 1
        n = rng.randint(2, 14)
        d0 = rng.randint(1, 3)
        forest = random_forest(rng, n, 4)
        st = random_forest_structure(rng, forest, SIGMA_LANG)
        idx = build_forest_index(forest, st, d0)
        idx.fault_skip_list3 = cfg.fault == "skip-list3"
        for op in range(25):
            v = rng.randrange(n)
            a = rng.choice(forest.path_to_root(v))
            rel, tup = ("P", (v,)) if rng.random() < 0.4 else ("Edge", (v, a) if rng.random() < 0.5 else (a, v))
            if tup in st.relations[rel]:
                st.remove_tuple(rel, tup)
                idx.remove_tuple(rel, tup)
                what = f"del {rel} {tup}"
            else:
                st.add_tuple(rel, tup)
                idx.insert_tuple(rel, tup)
                what = f"add {rel} {tup}"
            fresh = build_forest_index(forest, st, d0, cache=idx.cache)
            if fresh.snapshot() != idx.snapshot():
                s.fail(f"parents={list(forest.parent)} d0={d0}: lists differ from a rebuild after op {op} ({what})")
                break
            phi = random_sigma1(rng, rng.randint(1, d0), SIGMA_LANG.relations, 2)
            if query_sigma1(idx, phi, st).sat != eval_oracle(st, phi):
                s.fail(f"parents={list(forest.parent)} query {format_formula(phi)} disagrees after op {op}")
                break
    return s.result


def suite_qelim(rng: random.Random, cfg: RunConfig) -> SuiteResult:
    s = _Suite("qelim", cfg.trials)
    rc = ReduceConfig(
        max_quantifier_depth=cfg.max_quantifier_depth, max_templates=cfg.max_templates, verify=True
    )
    for i in range(s.trials):
        s.result.trials += 1
        n = rng.randint(1, 12)
        g = random_degenerate_graph(rng, n, 2)
        funcs = ("f",) if rng.random() < 0.5 else ()
        lang = Language({"R": 2, "S": 2, "P": 1}, funcs)
        st = random_guarded_structure(rng, g, lang)
        phi = random_sentence(rng, 1 + i % 2, lang.relations, funcs)
        try:
            got = reduce_sentence(phi, st, g, config=rc).value
        except ResourceCap:
            s.result.capped += 1
            continue
        except VerificationError as exc:
            s.fail(f"n={n} {format_formula(phi)}: {exc}")
            continue
        want = eval_oracle(st, phi)
        if got != want:
            s.fail(f"n={n} {format_formula(phi)}: engine={got} oracle={want}")
    return s.result


SUITES: dict[str, Callable[[random.Random, RunConfig], SuiteResult]] = {
    "augment": suite_augment,
    "lowtd": suite_lowtd,
    "roundtrip": suite_roundtrip,
    "sigma1": suite_sigma1,
    "dynamic": suite_dynamic,
    "qelim": suite_qelim,
}


def run_selftest(cfg: RunConfig, suites: list[str] | None = None) -> tuple[bool, str]:
    """Run the suites with one seeded generator each; returns (all passed, report text)."""
    names = suites or list(SUITES)
    lines = [f"selftest seed={cfg.seed} trials={cfg.trials}" + (f" fault={cfg.fault}" if cfg.fault else "")]
    ok = True
    for name in names:
        rng = random.Random(f"{cfg.seed}/{name}")
        res = SUITES[name](rng, cfg)
        ok = ok and res.failures == 0
        lines.append(res.format())
    lines.append("result " + ("PASS" if ok else "FAIL"))
    return ok, "\n".join(lines) + "\n"
