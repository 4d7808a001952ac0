"""SMV text export of the composed system.

One flat module: every instance variable renamed `<instance>_<var>`
(the human-facing `-` spelling is not a legal SMV identifier), the
message channel and data variables as state variables constrained by
TRANS, send labels as DEFINEs over current and next variables, receive
labels as latched booleans, and the transition relation totalised so
deadlock states become stuttering sinks with the message variables
pinned to their idle values.
"""
from __future__ import annotations

import os
import re
import subprocess
import tempfile

from .errors import UnsupportedDomain
from .eval import substitute_common
from .lang import ast
from .lang.ast import EMPTY, STAR, UNDEF, Type, Value
from .symbolic import CompiledInstance, CompiledSystem, GuardedTransition

ENV_CHECKER = "RMAS_SMV_BIN"

_BOOL_DATA = {True: "btrue", False: "bfalse"}


class _Renderer:
    def __init__(self, system: CompiledSystem):
        self.system = system
        self.model = system.model

    def chan_domain(self) -> list[str]:
        return ["star", "empty"] + list(self.model.channels) + ["undef"]

    def enum_domain(self, name: str) -> list[str]:
        return list(self.model.enums[name]) + ["undef"]

    def type_domain(self, t: Type, with_undef: bool) -> str:
        if t.kind == "bool":
            if with_undef:
                return "{bfalse, btrue, undef}"
            return "boolean"
        if t.kind == "int":
            if t.lo is None or t.hi is None:
                raise UnsupportedDomain("unbounded int cannot be exported")
            values = [str(n) for n in range(t.lo, t.hi + 1)]
            if with_undef:
                values.append("undef")
            return "{" + ", ".join(values) + "}"
        if t.kind == "enum":
            return "{" + ", ".join(self.enum_domain(t.enum_name)) + "}"
        if t.kind == "chan":
            return "{" + ", ".join(self.chan_domain()) + "}"
        raise UnsupportedDomain(f"cannot export domain {t}")

    def value(self, v: Value, bool_as_data: bool = False) -> str:
        if v.kind == "bool":
            if bool_as_data:
                return _BOOL_DATA[bool(v.data)]
            return "TRUE" if v.data else "FALSE"
        if v.kind == "int":
            return str(v.data)
        if v.kind == "enum":
            return v.data[1]
        if v.kind in ("chan", "state"):
            return str(v.data)
        return "undef"

    def _is_bool_data(self, e: ast.Expr) -> bool:
        return (isinstance(e, ast.DataVar)
                and self.model.data_vars[e.name].kind == "bool")

    def expr(self, e: ast.Expr, inst: str) -> str:
        """Render over instance-prefixed variables; `inst` scopes locals."""
        if isinstance(e, ast.ConstE):
            return self.value(e.value)
        if isinstance(e, ast.LocalVar):
            return f"{inst}_{e.name}"
        if isinstance(e, ast.InstVar):  # explicitly qualified (substituted relabels)
            return f"{e.instance}_{e.name}"
        if isinstance(e, ast.Primed):
            return f"next({inst}_{e.name})"
        if isinstance(e, ast.DataVar):
            if self._is_bool_data(e):
                return f"{e.name} = btrue"
            return e.name
        if isinstance(e, ast.ChanMeta):
            return "ch"
        if isinstance(e, ast.Clamp):
            # saturation bounds collapse at export: min/max nesting
            sub = self.expr(e.sub, inst)
            return f"max({e.lo}, min({e.hi}, {sub}))"
        if isinstance(e, ast.Unary):
            if e.op == "!":
                return f"!{self._atom(e.sub, inst)}"
            return f"-{self._atom(e.sub, inst)}"
        if isinstance(e, ast.Binary):
            op = {"&&": "&", "||": "|", "->": "->", "==": "=", "!=": "!=",
                  "<": "<", "<=": "<=", ">": ">", ">=": ">=",
                  "+": "+", "-": "-"}[e.op]
            if e.op in ("==", "!="):
                left, right = e.left, e.right
                if self._is_bool_data(left) or self._is_bool_data(right):
                    return self._bool_data_eq(left, right, e.op, inst)
            return f"({self.expr(e.left, inst)} {op} {self.expr(e.right, inst)})"
        raise UnsupportedDomain(f"cannot render {type(e).__name__}")

    def _bool_data_eq(self, left: ast.Expr, right: ast.Expr, op: str,
                      inst: str) -> str:
        def side(e: ast.Expr) -> str:
            if isinstance(e, ast.ConstE) and e.value.kind == "bool":
                return self.value(e.value, bool_as_data=True)
            if self._is_bool_data(e):
                return e.name
            return self.expr(e, inst)
        eq = "=" if op == "==" else "!="
        return f"({side(left)} {eq} {side(right)})"

    def _atom(self, e: ast.Expr, inst: str) -> str:
        text = self.expr(e, inst)
        return text if text.startswith("(") or " " not in text else f"({text})"


def _edge_predicate(r: _Renderer, inst: CompiledInstance,
                    t: GuardedTransition, require_channel: bool) -> str:
    parts = [r.expr(t.pred, inst.instance_id)]
    if require_channel:
        parts.append("(ch != empty)")
    return " & ".join(parts)


def export_smv(system: CompiledSystem,
               properties: list[ast.LtlProperty] | None = None) -> str:
    r = _Renderer(system)
    model = system.model
    lines: list[str] = ["MODULE main", "", "VAR"]

    lines.append("  ch : {" + ", ".join(r.chan_domain()) + "};")
    for name, t in model.data_vars.items():
        lines.append(f"  {name} : {r.type_domain(t, with_undef=True)};")
    for inst in system.instances:
        agent = inst.agent
        for var in agent.var_order:
            if var == "st":
                states = ", ".join(agent.automaton.states)
                lines.append(f"  {inst.instance_id}_st : {{{states}}};")
            else:
                lines.append(f"  {inst.instance_id}_{var} : "
                             f"{r.type_domain(agent.var_types[var], False)};")
    for inst in system.instances:
        for t in inst.agent.recv_rel:
            lines.append(f"  {inst.instance_id}_{t.label} : boolean;")

    lines.append("")
    lines.append("DEFINE")
    for inst in system.instances:
        for t in inst.agent.send_rel:
            pred = _edge_predicate(r, inst, t, require_channel=True)
            lines.append(f"  {inst.instance_id}_{t.label} := {pred};")

    disjuncts = []
    for k, sender in enumerate(system.instances):
        for t in sender.agent.send_rel:
            disjuncts.append(_send_disjunct(r, system, k, t))
    rho = ("\n      | ".join(disjuncts)) if disjuncts else "FALSE"
    lines.append(f"  rho :=\n        {rho};")

    lines.append("")
    lines.append("INIT")
    init_parts = [f"({r.expr(inst.theta, inst.instance_id)})"
                  for inst in system.instances]
    for inst in system.instances:
        for t in inst.agent.recv_rel:
            init_parts.append(f"!{inst.instance_id}_{t.label}")
    lines.append("  " + "\n  & ".join(init_parts))

    lines.append("")
    lines.append("TRANS")
    keep_all = " & ".join(
        f"next({inst.instance_id}_{var}) = {inst.instance_id}_{var}"
        for inst in system.instances for var in inst.agent.var_order)
    # a stuttering step carries no message: ch and the data variables are
    # pinned to their idle values so every label predicate is false
    idle_msg = " & ".join(["ch = empty"]
                          + [f"{d} = undef" for d in model.data_vars])
    stutter = f"(!rho & {keep_all} & {idle_msg})"
    trans_parts = [f"  (rho | {stutter})"]
    for inst in system.instances:
        for t in inst.agent.recv_rel:
            pred = _edge_predicate(r, inst, t, require_channel=True)
            trans_parts.append(
                f"  (next({inst.instance_id}_{t.label}) <-> ({pred}))")
    lines.append("\n  & ".join(trans_parts))

    if properties:
        from .ltl import resolve_formula
        lines.append("")
        for prop in properties:
            lines.append(f"-- property {prop.name}"
                         + (f" (expect {prop.expect})" if prop.expect else ""))
            resolved = resolve_formula(prop.formula, system)
            lines.append(f"LTLSPEC {render_property(system, resolved)}")

    return "\n".join(lines) + "\n"


def _send_disjunct(r: _Renderer, system: CompiledSystem, k: int,
                   t: GuardedTransition) -> str:
    sender = system.instances[k]
    parts = [f"({_edge_predicate(r, sender, t, require_channel=True)})"]
    for j, receiver in enumerate(system.instances):
        if j == k:
            continue
        rid = receiver.instance_id
        guard = f"(ch = star | ({r.expr(receiver.agent.receive_guard, rid)}))"
        recv_any = " | ".join(
            f"({r.expr(rt.pred, rid)})" for rt in receiver.agent.recv_rel
        ) or "FALSE"
        # the sender predicate translated to the receiver's locals; the
        # receiver side is explicitly qualified so both vocabularies can
        # coexist in one expression
        relabel_q = {cv: _qualify(rhs, rid)
                     for cv, rhs in receiver.agent.relabel.items()}
        pi = substitute_common(t.command.send_pred, relabel_q)
        pi_text = r.expr(pi, sender.instance_id)
        idle = " & ".join(
            f"next({rid}_{v}) = {rid}_{v}" for v in receiver.agent.var_order)
        branch = (f"(({guard} & ({recv_any}) & ({pi_text}))"
                  f" | (!{guard} & {idle})"
                  f" | (ch = star & !({pi_text}) & {idle}))")
        parts.append(branch)
    return "(" + "\n         & ".join(parts) + ")"


def _qualify(e: ast.Expr, instance: str) -> ast.Expr:
    """Rewrite local-variable references into instance-qualified ones."""
    if isinstance(e, ast.LocalVar):
        return ast.InstVar(instance, e.name)
    if isinstance(e, ast.Unary):
        return ast.Unary(e.op, _qualify(e.sub, instance))
    if isinstance(e, ast.Binary):
        return ast.Binary(e.op, _qualify(e.left, instance),
                          _qualify(e.right, instance))
    if isinstance(e, ast.Clamp):
        return ast.Clamp(_qualify(e.sub, instance), e.lo, e.hi)
    return e


def render_property(system: CompiledSystem, formula: ast.Expr) -> str:
    r = _Renderer(system)

    def walk(e: ast.Expr) -> str:
        if isinstance(e, ast.ConstE):
            return r.value(e.value)
        if isinstance(e, ast.LabelAtom):
            return f"{e.instance}_{e.label}"
        if isinstance(e, ast.InstVar):
            return f"{e.instance}_{e.name}"
        if isinstance(e, ast.Unary):
            return f"!({walk(e.sub)})"
        if isinstance(e, ast.Temporal):
            return f"{e.op} ({walk(e.sub)})"
        if isinstance(e, ast.TemporalBin):
            return f"(({walk(e.left)}) {e.op} ({walk(e.right)}))"
        if isinstance(e, ast.Binary):
            op = {"&&": "&", "||": "|", "->": "->", "==": "=", "!=": "!=",
                  "<": "<", "<=": "<=", ">": ">", ">=": ">="}[e.op]
            return f"(({walk(e.left)}) {op} ({walk(e.right)}))"
        raise UnsupportedDomain(f"cannot render {type(e).__name__} in LTLSPEC")

    return walk(formula)


# ---------------------------------------------------------------- external run

_VERDICT_RE = re.compile(r"-- specification .* is (true|false)")


def external_verdicts(smv_text: str, binary: str | None = None,
                      timeout: float = 120.0) -> list[bool] | None:
    """Run an external SMV checker; verdict booleans in LTLSPEC order.
    Returns None when no binary is configured."""
    binary = binary or os.environ.get(ENV_CHECKER)
    if not binary:
        return None
    with tempfile.NamedTemporaryFile("w", suffix=".smv", delete=False) as fh:
        fh.write(smv_text)
        path = fh.name
    try:
        proc = subprocess.run([binary, path], capture_output=True, text=True,
                              timeout=timeout)
        out = []
        for line in proc.stdout.splitlines():
            m = _VERDICT_RE.match(line.strip())
            if m:
                out.append(m.group(1) == "true")
        return out
    finally:
        os.unlink(path)
