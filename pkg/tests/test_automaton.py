from __future__ import annotations

import random

from rmas.automaton import agent_automaton, build_edges, export_dot
from rmas.corpus import load_fixture
from rmas.lang import ast
from rmas.lang.parser import parse_model

# (source, label, target) triples obtained by applying the five
# translation rules by hand to the case-study processes
CLIENT_EDGES = [
    ("s0", "sReserve", "s1"),
    ("s0", "rReserve", "s1"),
    ("s1", "sRequest", "s2"),
    ("s2", "rConnect", "s3"),
    ("s3", "sRelease", "s4"),
    ("s4", "sBuy", "s5"),
    ("s5", "sSolve", "s0"),
    ("s5", "Client_cmd8", "s0"),
    ("s1", "rRelease", "s0"),
]
MANAGER_EDGES = [
    ("s0", "rRequest", "s1"),
    ("s1", "sForward", "s2"),
    ("s2", "rConnect", "s0"),
    ("s2", "rFull", "s3"),
    ("s3", "sRequest", "s2"),
]
MACHINE_EDGES = [
    ("s0", "rForward", "s1"),
    ("s1", "sConnect", "s0"),
    ("s1", "sFull", "s0"),
    ("s1", "rConnect", "s0"),
    ("s1", "rFull", "s0"),
    ("s0", "rBuy", "s0"),
]


def _corpus_autos():
    model = parse_model(load_fixture("resource-allocation").model_text)
    return {a.name: agent_automaton(a.name, a.process) for a in model.agents}


def _cmd(label: str) -> ast.Command:
    return ast.Command(label, "recv", ast.TRUE_E, ast.ConstE(ast.STAR), None, (), ())


class TestBuildAutomaton:
    def test_single_command_single_edge(self):
        edges = build_edges(ast.Cmd(_cmd("c1")), "s0", "sF")
        assert [(e.source, e.command.label, e.target) for e in edges] == [
            ("s0", "c1", "sF")]

    def test_client_shape(self):
        auto = _corpus_autos()["Client"]
        assert len(auto.states) == 6
        assert [(e.source, e.command.label, e.target) for e in auto.edges] == CLIENT_EDGES

    def test_manager_shape(self):
        auto = _corpus_autos()["Manager"]
        assert len(auto.states) == 4
        assert [(e.source, e.command.label, e.target) for e in auto.edges] == MANAGER_EDGES

    def test_machine_shape(self):
        auto = _corpus_autos()["Machine"]
        assert len(auto.states) == 2
        assert [(e.source, e.command.label, e.target) for e in auto.edges] == MACHINE_EDGES

    def test_determinism(self):
        first = _corpus_autos()
        second = _corpus_autos()
        for name in first:
            assert first[name].states == second[name].states
            assert [(e.source, e.command.label, e.target) for e in first[name].edges] \
                == [(e.source, e.command.label, e.target) for e in second[name].edges]

    def test_rep_with_continuation_reports_info(self):
        auto = _corpus_autos()["Manager"]
        assert any("rep" in info for info in auto.infos)

    def test_edge_count_equals_command_leaves_random(self):
        rng = random.Random(42)

        def random_process(depth=0):
            if depth > 4 or rng.random() < 0.35:
                return ast.Cmd(_cmd(f"c{rng.randrange(10**6)}"))
            kind = rng.choice(["seq", "choice", "rep"])
            if kind == "seq":
                return ast.Seq(random_process(depth + 1), random_process(depth + 1))
            if kind == "choice":
                return ast.Choice(random_process(depth + 1), random_process(depth + 1))
            return ast.Rep(random_process(depth + 1))

        for _ in range(100):
            p = random_process()
            auto = agent_automaton("T", p)
            assert len(auto.edges) == len(ast.command_leaves(p))


class TestDotExport:
    def test_single_edge(self):
        auto = agent_automaton("T", ast.Rep(ast.Cmd(_cmd("ping"))))
        dot = export_dot(auto)
        assert dot.startswith('digraph "T" {')
        assert dot.count("->") == 1

    def test_client_dot(self):
        auto = _corpus_autos()["Client"]
        dot = export_dot(auto)
        assert dot.count("->") == 9
        assert '"s0" [shape=doublecircle];' in dot
        for s in ("s1", "s2", "s3", "s4", "s5"):
            assert f'"{s}";' in dot

    def test_full_labels(self):
        auto = _corpus_autos()["Machine"]
        dot = export_dot(auto, labels_on=True)
        assert "MSG := connect" in dot

    def test_stable_across_runs(self):
        a = export_dot(_corpus_autos()["Client"])
        b = export_dot(_corpus_autos()["Client"])
        assert a == b
