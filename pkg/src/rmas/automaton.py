"""Structure automata: the finite control graph of a process.

Built by five rules: sequencing mints a fresh state and chains through
it; choice merges both branches onto the same endpoints; `rep P` and the
top-level `repeat:` loop the body back onto the entry state (discarding
the exit); a command contributes a single edge.  Fresh states are named
`s1, s2, ...` in pre-order traversal, so two runs over the same tree
produce identical automata.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .lang import ast
from .lang.pretty import command_text


@dataclass(frozen=True)
class Edge:
    source: str
    command: ast.Command
    target: str


@dataclass
class StructureAutomaton:
    agent: str
    states: list[str]             # s0 first, then minting order
    initial: str
    final: str
    edges: list[Edge]
    infos: list[str] = field(default_factory=list)

    def reachable(self) -> set[str]:
        adj: dict[str, list[str]] = {}
        for e in self.edges:
            adj.setdefault(e.source, []).append(e.target)
        seen = {self.initial}
        todo = [self.initial]
        while todo:
            for nxt in adj.get(todo.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen


class _Minter:
    def __init__(self) -> None:
        self.counter = 0
        self.states = ["s0"]

    def fresh(self) -> str:
        self.counter += 1
        name = f"s{self.counter}"
        self.states.append(name)
        return name


def build_edges(process: ast.Process, s_i: str, s_f: str,
                minter: _Minter | None = None,
                infos: list[str] | None = None) -> list[Edge]:
    """Translate a process into edges between the given endpoint states."""
    minter = minter or _Minter()
    if infos is None:
        infos = []

    def walk(p: ast.Process, si: str, sf: str) -> list[Edge]:
        if isinstance(p, ast.Cmd):
            return [Edge(si, p.command, sf)]
        if isinstance(p, ast.Seq):
            mid = minter.fresh()
            return walk(p.left, si, mid) + walk(p.right, mid, sf)
        if isinstance(p, ast.Choice):
            return walk(p.left, si, sf) + walk(p.right, si, sf)
        if isinstance(p, ast.Rep):
            if si != sf:
                infos.append(
                    f"rep at [{si} -> {sf}] loops at {si} and never reaches {sf}; "
                    f"code after it runs only via a sibling choice branch")
            return walk(p.body, si, si)
        raise TypeError(p)

    return walk(process, s_i, s_f)


def agent_automaton(agent_name: str, process: ast.Process) -> StructureAutomaton:
    """Automaton of a top-level `repeat:` process: entry and exit coincide."""
    minter = _Minter()
    infos: list[str] = []
    edges = build_edges(process, "s0", "s0", minter, infos)
    auto = StructureAutomaton(agent_name, minter.states, "s0", "s0", edges, infos)
    unreachable = [s for s in auto.states if s not in auto.reachable()]
    for s in unreachable:
        auto.infos.append(f"state {s} is unreachable from s0")
    return auto


def export_dot(auto: StructureAutomaton, labels_on: bool = False) -> str:
    def q(s: str) -> str:
        return '"' + s.replace('"', '\\"') + '"'

    lines = [f"digraph {q(auto.agent)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for s in auto.states:
        shape = ' [shape=doublecircle]' if s == auto.initial else ""
        lines.append(f"  {q(s)}{shape};")
    for e in auto.edges:
        label = command_text(e.command) if labels_on else (e.command.label or "")
        lines.append(f"  {q(e.source)} -> {q(e.target)} [label={q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def automaton_dict(auto: StructureAutomaton) -> dict:
    return {
        "agent": auto.agent,
        "states": list(auto.states),
        "initial": auto.initial,
        "final": auto.final,
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "label": e.command.label,
                "kind": e.command.kind,
                "text": command_text(e.command, with_label=False),
            }
            for e in auto.edges
        ],
        "infos": list(auto.infos),
    }


def export_json(auto: StructureAutomaton) -> str:
    return json.dumps(automaton_dict(auto), indent=2) + "\n"
