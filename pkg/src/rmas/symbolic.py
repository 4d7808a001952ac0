"""Compile typed agents into symbolic guarded-transition form.

Each automaton edge becomes one guarded transition whose predicate is
the command's characteristic predicate (pre, channel equation, message
equations, primed updates) conjoined with the control-state move and a
frame condition holding untouched locals still.  Send predicates stay
attached to their own command; the agent-level aggregate send guard is
produced only for dumps and the SMV backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .automaton import StructureAutomaton, agent_automaton
from .lang import ast
from .lang.ast import FALSE_E, TRUE_E, Type, Value
from .lang.pretty import expr_text
from .types import TypedAgent, TypedModel, Warning


@dataclass(frozen=True)
class CommandInfo:
    """classify(): command type, updated variables, send predicate."""

    type: str                 # "!" or "?"
    vars: frozenset[str]
    guard: ast.Expr           # send predicate, FALSE for receives


@dataclass(frozen=True)
class GuardedTransition:
    label: str
    source: str
    target: str
    pred: ast.Expr            # characteristic predicate incl. st move and frame
    kept: tuple[str, ...]
    command: ast.Command


@dataclass
class SymbolicAgent:
    name: str
    var_order: tuple[str, ...]            # declared locals then "st"
    var_types: dict[str, Type]
    domains: dict[str, list[Value]]
    theta: ast.Expr                       # agent init conjoined with st=s0
    relabel: dict[str, ast.Expr]
    receive_guard: ast.Expr
    send_guard: ast.Expr                  # aggregate disjunction of send predicates
    send_rel: list[GuardedTransition]
    recv_rel: list[GuardedTransition]
    automaton: StructureAutomaton

    def command(self, label: str) -> ast.Command | None:
        for t in self.send_rel + self.recv_rel:
            if t.label == label:
                return t.command
        return None


@dataclass
class CompiledInstance:
    index: int
    instance_id: str
    agent: SymbolicAgent
    theta: ast.Expr                       # agent theta plus instance restriction


@dataclass
class CompiledSystem:
    model: TypedModel
    agents: dict[str, SymbolicAgent]
    instances: list[CompiledInstance]
    warnings: list[Warning] = field(default_factory=list)

    def instance(self, instance_id: str) -> CompiledInstance:
        for inst in self.instances:
            if inst.instance_id == instance_id:
                return inst
        raise KeyError(instance_id)


def classify(cmd: ast.Command) -> CommandInfo:
    if cmd.kind == "send":
        return CommandInfo("!", frozenset(n for n, _ in cmd.updates), cmd.send_pred)
    return CommandInfo("?", frozenset(n for n, _ in cmd.updates), FALSE_E)


def pred_of(cmd: ast.Command, data_vars: tuple[str, ...]) -> ast.Expr:
    """Characteristic predicate of a command, excluding the send predicate.

    Sends pin every message field: assigned data variables equal their
    right-hand side, unassigned ones equal undef.
    """
    parts: list[ast.Expr] = [cmd.pre,
                             ast.Binary("==", ast.ChanMeta(), cmd.channel)]
    if cmd.kind == "send":
        assigned = dict(cmd.data_assign)
        for d in data_vars:
            rhs = assigned.get(d, ast.ConstE(ast.UNDEF))
            parts.append(ast.Binary("==", ast.DataVar(d), rhs))
    for name, rhs in cmd.updates:
        parts.append(ast.Binary("==", ast.Primed(name), rhs))
    return ast.conj(parts)


def keep_pred(names: tuple[str, ...]) -> ast.Expr:
    """Frame condition: each named variable keeps its value."""
    return ast.conj([ast.Binary("==", ast.Primed(n), ast.LocalVar(n))
                     for n in names])


def compile_agent(agent: TypedAgent, model: TypedModel,
                  automaton: StructureAutomaton | None = None) -> SymbolicAgent:
    auto = automaton or agent_automaton(agent.name, agent.process)
    data_names = tuple(model.data_vars)
    local_names = tuple(v.name for v in agent.locals)

    send_rel: list[GuardedTransition] = []
    recv_rel: list[GuardedTransition] = []
    for edge in auto.edges:
        cmd = edge.command
        info = classify(cmd)
        kept = tuple(n for n in local_names if n not in info.vars)
        pred = ast.conj([
            pred_of(cmd, data_names),
            ast.Binary("==", ast.LocalVar("st"), ast.ConstE(ast.statev(edge.source))),
            ast.Binary("==", ast.Primed("st"), ast.ConstE(ast.statev(edge.target))),
            keep_pred(kept),
        ])
        gt = GuardedTransition(cmd.label, edge.source, edge.target, pred, kept, cmd)
        (send_rel if info.type == "!" else recv_rel).append(gt)

    send_guard = ast.disj([t.command.send_pred for t in send_rel])
    theta = ast.conj([agent.init,
                      ast.Binary("==", ast.LocalVar("st"),
                                 ast.ConstE(ast.statev(auto.initial)))])

    var_order = local_names + ("st",)
    var_types = dict(agent.var_types)
    var_types["st"] = Type("enum", enum_name=f"{agent.name}.st")
    domains = {v.name: model.domain(v.type) for v in agent.locals}
    domains["st"] = [ast.statev(s) for s in auto.states]
    return SymbolicAgent(agent.name, var_order, var_types, domains, theta,
                         dict(agent.relabel), agent.receive_guard, send_guard,
                         send_rel, recv_rel, auto)


def compile_system(model: TypedModel) -> CompiledSystem:
    agents = {name: compile_agent(a, model) for name, a in model.agents.items()}
    instances = []
    for idx, inst in enumerate(model.instances):
        agent = agents[inst.type_name]
        theta = ast.conj([agent.theta, inst.extra_init])
        instances.append(CompiledInstance(idx, inst.instance_id, agent, theta))
    return CompiledSystem(model, agents, instances, list(model.warnings))


def dump_agent(agent: SymbolicAgent) -> str:
    """Structured one-disjunct-per-line dump for golden tests."""
    lines = [f"agent {agent.name}"]
    lines.append("  V = " + ", ".join(agent.var_order))
    lines.append(f"  theta = {expr_text(agent.theta)}")
    for cv, e in agent.relabel.items():
        lines.append(f"  relabel {cv} <- {expr_text(e)}")
    lines.append(f"  g^r = {expr_text(agent.receive_guard)}")
    lines.append(f"  g^s = {expr_text(agent.send_guard)}")
    lines.append("  T^s:")
    for t in agent.send_rel:
        lines.append(f"    {t.label} ({t.source} -> {t.target}): {expr_text(t.pred)}")
    lines.append("  T^r:")
    for t in agent.recv_rel:
        lines.append(f"    {t.label} ({t.source} -> {t.target}): {expr_text(t.pred)}")
    return "\n".join(lines) + "\n"
