"""Pretty-printer; output reparses to a structurally identical AST."""
from __future__ import annotations

from . import ast

# operator precedence; higher binds tighter
_PREC = {"->": 1, "||": 2, "&&": 3,
         "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5}
_UNARY_PREC = 6


def expr_text(e: ast.Expr, min_prec: int = 0) -> str:
    if isinstance(e, ast.ConstE):
        return ast.value_text(e.value)
    if isinstance(e, (ast.Name, ast.LocalVar, ast.DataVar, ast.CommonVar)):
        return e.name
    if isinstance(e, ast.ChanMeta):
        return "ch"
    if isinstance(e, ast.Primed):
        return f"{e.name}'"
    if isinstance(e, ast.InstVar):
        return f"{e.instance}-{e.name}"
    if isinstance(e, ast.NextInstVar):
        return f"next({e.instance}-{e.name})"
    if isinstance(e, ast.LabelAtom):
        return f"{e.instance}-{e.label}"
    if isinstance(e, ast.Clamp):
        return expr_text(e.sub, min_prec)
    if isinstance(e, ast.Unary):
        text = f"{e.op}{expr_text(e.sub, _UNARY_PREC)}"
        return f"({text})" if min_prec > _UNARY_PREC else text
    if isinstance(e, ast.Temporal):
        return f"{e.op} {expr_text(e.sub, _UNARY_PREC)}"
    if isinstance(e, ast.TemporalBin):
        text = f"{expr_text(e.left, _UNARY_PREC)} U {expr_text(e.right, _UNARY_PREC)}"
        return f"({text})" if min_prec > 0 else text
    if isinstance(e, ast.Binary):
        prec = _PREC[e.op]
        if e.op == "->":  # right-associative
            text = f"{expr_text(e.left, prec + 1)} -> {expr_text(e.right, prec)}"
        elif prec == 4:   # comparisons are non-associative
            text = f"{expr_text(e.left, prec + 1)} {e.op} {expr_text(e.right, prec + 1)}"
        else:             # left-associative
            text = f"{expr_text(e.left, prec)} {e.op} {expr_text(e.right, prec + 1)}"
        return f"({text})" if prec < min_prec else text
    raise TypeError(e)


def _chan_text(e: ast.Expr) -> str:
    if isinstance(e, ast.ConstE) and e.value == ast.STAR:
        return "*"
    if isinstance(e, (ast.Name, ast.LocalVar)):
        return e.name
    return f"({expr_text(e)})"


def _assigns(pairs: tuple[tuple[str, ast.Expr], ...]) -> str:
    return ", ".join(f"{n} := {expr_text(e)}" for n, e in pairs)


def _contains_gt(e: ast.Expr) -> bool:
    if isinstance(e, ast.Binary):
        return e.op == ">" or _contains_gt(e.left) or _contains_gt(e.right)
    if isinstance(e, ast.Unary):
        return _contains_gt(e.sub)
    if isinstance(e, ast.Clamp):
        return _contains_gt(e.sub)
    return False


def command_text(cmd: ast.Command, with_label: bool = True) -> str:
    head = f"{cmd.label}: " if (with_label and cmd.label) else ""
    pre = expr_text(cmd.pre)
    if _contains_gt(cmd.pre):
        # a bare `>` would close the guard early when reparsed
        pre = f"({pre})"
    if cmd.kind == "send":
        return (f"{head}<{pre}> {_chan_text(cmd.channel)} ! "
                f"({expr_text(cmd.send_pred)}) ({_assigns(cmd.data_assign)}) "
                f"[{_assigns(cmd.updates)}]")
    return f"{head}<{pre}> {_chan_text(cmd.channel)} ? [{_assigns(cmd.updates)}]"


def process_text(p: ast.Process, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(p, ast.Cmd):
        return pad + command_text(p.command)
    if isinstance(p, ast.Seq):
        left = p.left
        ltext = process_text(left, indent)
        if isinstance(left, (ast.Seq, ast.Choice)):
            ltext = pad + "(\n" + process_text(left, indent + 1) + "\n" + pad + ")"
        rtext = process_text(p.right, indent)
        if isinstance(p.right, ast.Choice):
            rtext = pad + "(\n" + process_text(p.right, indent + 1) + "\n" + pad + ")"
        return f"{ltext};\n{rtext}"
    if isinstance(p, ast.Choice):
        ltext = process_text(p.left, indent)
        if isinstance(p.left, ast.Choice):
            ltext = pad + "(\n" + process_text(p.left, indent + 1) + "\n" + pad + ")"
        return f"{ltext}\n{pad}+\n{process_text(p.right, indent)}"
    if isinstance(p, ast.Rep):
        if isinstance(p.body, ast.Cmd):
            return pad + "rep " + command_text(p.body.command)
        if isinstance(p.body, ast.Rep):
            return pad + "rep " + process_text(p.body, 0).lstrip()
        return pad + "rep (\n" + process_text(p.body, indent + 1) + "\n" + pad + ")"
    raise TypeError(p)


def _var_decls(decls: tuple[ast.VarDecl, ...]) -> str:
    return ", ".join(f"{d.name}: {d.type}" for d in decls)


def agent_text(agent: ast.AgentDef) -> str:
    lines = [f"agent {agent.name}"]
    lines.append(f"  local: {_var_decls(agent.locals)}")
    lines.append(f"  init: {expr_text(agent.init)}")
    if agent.relabel:
        lines.append("  relabel:")
        for cv, e in agent.relabel:
            lines.append(f"    {cv} <- {expr_text(e)}")
    lines.append(f"  receive-guard: {expr_text(agent.receive_guard)}")
    lines.append("  repeat: (")
    lines.append(process_text(agent.process, 2))
    lines.append("  )")
    return "\n".join(lines)


def model_text(model: ast.SystemModel) -> str:
    lines = ["enums:"]
    for e in model.enums:
        lines.append(f"  {e.name} {{ {', '.join(e.constants)} }}")
    lines.append(f"channels: {', '.join(model.channels)}")
    lines.append(f"message-structure: {_var_decls(model.data_vars)}")
    lines.append(f"communication-variables: {_var_decls(model.common_vars)}")
    lines.append("")
    for a in model.agents:
        lines.append(agent_text(a))
        lines.append("")
    parts = [f"{i.type_name}({i.instance_id}, {expr_text(i.extra_init)})"
             for i in model.instances]
    lines.append("system = " + "\n      || ".join(parts))
    return "\n".join(lines) + "\n"


def property_text(p: ast.LtlProperty) -> str:
    suffix = f" expect {p.expect}" if p.expect else ""
    return f"{p.name} : {expr_text(p.formula)} ;{suffix}"
