from __future__ import annotations

import pytest

from sparsefo.cli import main
from sparsefo.graph import format_graph, grid_graph, parse_graph

GRAPH = "graph 5\n0 1\n1 2\n2 3\n3 4\n0 2\n"
STRUCTURE = """universe 5
rel Edge/2
0 1
1 2
rel P/1
2
"""


@pytest.fixture
def files(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text(GRAPH)
    s = tmp_path / "s.txt"
    s.write_text(STRUCTURE)
    return tmp_path, str(g), str(s)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_augment_writes_graph_and_chain(files, capsys):
    tmp, g, _ = files
    code, out, err = run(capsys, "augment", "--graph", g, "-k", "2", "--chain", str(tmp / "chain"))
    assert code == 0
    aug = parse_graph(out)
    assert parse_graph(GRAPH).is_subgraph_of(aug)
    assert sorted(p.name for p in (tmp / "chain").iterdir()) == ["D0.txt", "D1.txt", "D2.txt"]
    assert (tmp / "chain" / "D0.txt").read_text().startswith("digraph 5\n")
    assert "edges in 2 rounds" in err


def test_augment_budget_overrun_is_a_resource_cap(tmp_path, capsys):
    g = tmp_path / "grid.txt"
    g.write_text(format_graph(grid_graph(8)))
    code, _, err = run(capsys, "augment", "--graph", str(g), "-k", "8", "--edge-budget", "100")
    assert code == 3 and "budget" in err


def test_color_and_forest(files, capsys):
    _, g, _ = files
    code, out, err = run(capsys, "color", "--graph", g, "-d", "2", "--counters")
    assert code == 0
    colors = [int(line.split()[1]) for line in out.splitlines()]
    assert len(colors) == 5 and "certified=True" in err and "coloring_work" in err
    code, out, _ = run(capsys, "forest", "--graph", g, "-d", "2", "--classes", "1,2")
    assert code == 0
    rows = [tuple(map(int, line.split())) for line in out.splitlines()]
    assert all(depth >= 1 for _, _, depth in rows)
    code, _, err = run(capsys, "forest", "--graph", g, "-d", "1", "--classes", "1,2")
    assert code == 2 and "error:" in err


@pytest.mark.parametrize("engine", ["qelim", "oracle"])
@pytest.mark.parametrize(
    "formula, want", [("E x. E y. Edge(x, y) & P(y)", "true"), ("A x. P(x)", "false")]
)
def test_check_engines_agree(files, capsys, engine, formula, want):
    _, g, s = files
    code, out, _ = run(capsys, "check", "--structure", s, "--guard", g, "--formula", formula, "--engine", engine)
    assert code == 0 and out == want + "\n"


def test_check_trace_verify_and_gaifman_default(files, capsys):
    tmp, _, s = files
    trace = tmp / "trace.txt"
    code, out, _ = run(
        capsys, "check", "--structure", s, "--formula", "A x. E y. Edge(x, y) | !Edge(y, x)",
        "--trace", str(trace), "--verify",
    )
    assert code == 0 and out == "true\n"
    text = trace.read_text()
    assert "round subformula:" in text and "verified=True" in text and text.endswith("value: True\n")


@pytest.mark.parametrize(
    "argv, code",
    [
        (["check", "--structure", "missing.txt", "--formula", "T"], 2),
        (["check", "--structure", "{s}", "--formula", "E x. Nope(x)"], 2),
        (["check", "--structure", "{s}", "--formula", "P(x)"], 2),
        (["check", "--structure", "{s}", "--formula", "E x. E y. Edge(x, y)", "--max-depth", "1"], 3),
        (["color", "--graph", "{s}", "-d", "1"], 2),
        (["selftest", "--suites", "nope"], 2),
    ],
)
def test_exit_codes(files, capsys, argv, code):
    _, _, s = files
    argv = [a.replace("{s}", s) for a in argv]
    got, _, err = run(capsys, *argv)
    assert got == code and err.startswith("error:")


def test_index_streams_answers_before_a_bad_line(files, capsys):
    tmp, g, s = files
    script = tmp / "ops.txt"
    script.write_text("add P 1\nask E x. E y. Edge(x, y) & P(y)\ndel P 1\ndel P 2\nask E x. P(x)\nask E x. A y. P(y)\n")
    code, out, err = run(capsys, "index", "--guard", g, "--structure", s, "--d0", "2", "--script", str(script))
    first, second = out.splitlines()
    assert first in ("SAT x=0,y=1", "SAT x=1,y=2") and second == "UNSAT"
    assert code == 2 and "Sigma_1" in err


def test_index_rejects_unguarded_insertions(files, capsys):
    tmp, g, s = files
    script = tmp / "ops.txt"
    script.write_text("add Edge 0 4\n")
    code, _, err = run(capsys, "index", "--guard", g, "--structure", s, "--d0", "2", "--script", str(script))
    assert code == 2 and "clique" in err


def test_selftest_passes_and_detects_an_injected_fault(tmp_path, capsys):
    code, out, _ = run(capsys, "selftest", "--trials", "3", "--suites", "roundtrip,sigma1", "--quiet")
    assert code == 0 and out == "result PASS\n"
    report = tmp_path / "report.txt"
    code, _, _ = run(
        capsys, "selftest", "--trials", "20", "--suites", "dynamic", "--inject-fault", "skip-list3",
        "--out", str(report),
    )
    assert code == 1
    text = report.read_text()
    assert "counterexample:" in text and text.endswith("result FAIL\n")


def test_bench_with_an_empty_script(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, out, _ = run(capsys, "bench", "--sides", "3,4", "--script", str(empty))
    assert code == 0
    names = [line.split()[0] for line in out.splitlines()]
    assert names == ["n9.colors", "n9.build_work", "n9.build_per_n", "n16.colors", "n16.build_work", "n16.build_per_n"]
