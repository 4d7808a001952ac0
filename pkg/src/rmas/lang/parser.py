"""Recursive-descent parser for model files, property files and constraints.

Grammar summary (binding tightest first):

    expr:      !  >  comparisons  >  + -  >  &&  >  ||  >  ->
               comparisons are non-associative so ``<Phi>`` command
               guards can close with a bare ``>``
    process:   ``;`` binds tighter than ``+``; both right-associative
    property:  ! X F G  >  U  >  &  >  |  >  ->      (also && and ||)

Every command is labeled on the way out: unlabeled commands receive
``<AgentName>_cmd<k>`` with ``k`` the command's 1-based source position
among the agent's commands.
"""
from __future__ import annotations

from ..errors import (
    DuplicateInstanceId,
    ModelSyntaxError,
    Pos,
    UnknownAgentType,
)
from . import ast
from .tokens import Token, tokenize

_MAX_DEPTH = 100  # ~8 interpreter frames per level; trip before RecursionError

_CMP_OPS = {"EQ": "==", "NE": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}

_SECTION_KINDS = ("enums", "channels", "message-structure", "communication-variables",
                  "agent", "system")


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.depth = 0

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, kind: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == kind

    def at_word(self, word: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "IDENT" and t.text == word

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            raise ModelSyntaxError("unexpected end of input", self.last_pos())
        self.i += 1
        return t

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t is None or t.kind != kind:
            got = t.text if t else "end of input"
            raise ModelSyntaxError(
                f"unexpected {got!r}", t.pos if t else self.last_pos(),
                expected=(what or kind,))
        return self.next()

    def last_pos(self) -> Pos:
        if self.tokens:
            return self.tokens[min(self.i, len(self.tokens) - 1)].pos
        return Pos(1, 1)

    def enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ModelSyntaxError("nesting too deep", self.last_pos())

    def leave(self) -> None:
        self.depth -= 1


# ---------------------------------------------------------------- expressions

def _parse_primary(c: _Cursor) -> ast.Expr:
    t = c.peek()
    if t is None:
        raise ModelSyntaxError("unexpected end of input", c.last_pos(), expected=("expression",))
    if t.kind == "TRUE":
        c.next()
        return ast.ConstE(ast.TRUE, t.pos)
    if t.kind == "FALSE":
        c.next()
        return ast.ConstE(ast.FALSE, t.pos)
    if t.kind == "INT":
        c.next()
        return ast.ConstE(ast.intv(int(t.text)), t.pos)
    if t.kind == "STAR":
        c.next()
        return ast.ConstE(ast.STAR, t.pos)
    if t.kind == "IDENT":
        c.next()
        return ast.Name(t.text, t.pos)
    if t.kind == "LPAREN":
        c.next()
        c.enter()
        e = parse_expr(c)
        c.leave()
        c.expect("RPAREN", ")")
        return e
    raise ModelSyntaxError(f"unexpected {t.text!r}", t.pos, expected=("expression",))


def _parse_unary(c: _Cursor) -> ast.Expr:
    t = c.peek()
    if t is not None and t.kind in ("BANG", "MINUS"):
        c.next()
        c.enter()
        sub = _parse_unary(c)
        c.leave()
        return ast.Unary("!" if t.kind == "BANG" else "-", sub, t.pos)
    return _parse_primary(c)


def _parse_additive(c: _Cursor) -> ast.Expr:
    e = _parse_unary(c)
    while True:
        t = c.peek()
        if t is not None and t.kind in ("PLUS", "MINUS"):
            c.next()
            e = ast.Binary(t.text, e, _parse_unary(c), t.pos)
        else:
            return e


def _parse_comparison(c: _Cursor, allow_gt: bool) -> ast.Expr:
    # non-associative: at most one comparison operator.  Inside a command
    # guard a top-level `>` closes the guard, so GT is only an operator
    # when parenthesized there.
    e = _parse_additive(c)
    t = c.peek()
    if t is not None and t.kind in _CMP_OPS and (allow_gt or t.kind != "GT"):
        c.next()
        return ast.Binary(_CMP_OPS[t.kind], e, _parse_additive(c), t.pos)
    return e


def _parse_and(c: _Cursor, allow_gt: bool) -> ast.Expr:
    e = _parse_comparison(c, allow_gt)
    while c.at("ANDAND"):
        t = c.next()
        e = ast.Binary("&&", e, _parse_comparison(c, allow_gt), t.pos)
    return e


def _parse_or(c: _Cursor, allow_gt: bool) -> ast.Expr:
    e = _parse_and(c, allow_gt)
    while c.at("OROR"):
        t = c.next()
        e = ast.Binary("||", e, _parse_and(c, allow_gt), t.pos)
    return e


def parse_expr(c: _Cursor, allow_gt: bool = True) -> ast.Expr:
    e = _parse_or(c, allow_gt)
    if c.at("IMPLIES"):
        t = c.next()
        c.enter()
        rhs = parse_expr(c, allow_gt)  # right-associative
        c.leave()
        return ast.Binary("->", e, rhs, t.pos)
    return e


def parse_expression(text: str) -> ast.Expr:
    """Parse a standalone expression (handy for tests and fixtures)."""
    c = _Cursor(tokenize(text))
    e = parse_expr(c)
    t = c.peek()
    if t is not None:
        raise ModelSyntaxError(f"trailing input {t.text!r}", t.pos)
    return e


# ---------------------------------------------------------------- processes

def _parse_command(c: _Cursor) -> ast.Command:
    label = None
    t = c.peek()
    pos = t.pos if t else c.last_pos()
    nxt = c.peek(1)
    if t is not None and t.kind == "IDENT" and nxt is not None and nxt.kind == "COLON":
        label = t.text
        c.next()
        c.next()
    c.expect("LT", "<")
    pre = parse_expr(c, allow_gt=False)
    c.expect("GT", ">")
    channel = _parse_primary(c)
    if c.accept("BANG"):
        c.expect("LPAREN", "(")
        send_pred = parse_expr(c)
        c.expect("RPAREN", ")")
        c.expect("LPAREN", "(")
        data_assign = _parse_assign_list(c, "RPAREN")
        c.expect("RPAREN", ")")
        c.expect("LBRACK", "[")
        updates = _parse_assign_list(c, "RBRACK")
        c.expect("RBRACK", "]")
        return ast.Command(label, "send", pre, channel, send_pred,
                           tuple(data_assign), tuple(updates), pos)
    if c.accept("QUEST"):
        c.expect("LBRACK", "[")
        updates = _parse_assign_list(c, "RBRACK")
        c.expect("RBRACK", "]")
        return ast.Command(label, "recv", pre, channel, None, (), tuple(updates), pos)
    bad = c.peek()
    raise ModelSyntaxError(
        f"unexpected {bad.text!r}" if bad else "unexpected end of input",
        bad.pos if bad else c.last_pos(), expected=("!", "?"))


def _parse_assign_list(c: _Cursor, closer: str) -> list[tuple[str, ast.Expr]]:
    assigns: list[tuple[str, ast.Expr]] = []
    if c.at(closer):
        return assigns
    while True:
        name = c.expect("IDENT", "variable name")
        c.expect("ASSIGN", ":=")
        assigns.append((name.text, parse_expr(c)))
        if not c.accept("COMMA"):
            return assigns


def _parse_process_atom(c: _Cursor) -> ast.Process:
    if c.at("rep"):
        c.next()
        c.enter()
        body = _parse_process_atom(c)
        c.leave()
        return ast.Rep(body)
    if c.at("LPAREN"):
        c.next()
        c.enter()
        p = parse_process(c)
        c.leave()
        c.expect("RPAREN", ")")
        return p
    return ast.Cmd(_parse_command(c))


def _parse_process_seq(c: _Cursor) -> ast.Process:
    left = _parse_process_atom(c)
    if c.accept("SEMI"):
        c.enter()
        right = _parse_process_seq(c)  # right-associative
        c.leave()
        return ast.Seq(left, right)
    return left


def parse_process(c: _Cursor) -> ast.Process:
    left = _parse_process_seq(c)
    if c.accept("PLUS"):
        c.enter()
        right = parse_process(c)  # right-associative
        c.leave()
        return ast.Choice(left, right)
    return left


# ---------------------------------------------------------------- declarations

def _parse_type(c: _Cursor) -> ast.Type:
    t = c.expect("IDENT", "type")
    if t.text == "bool":
        return ast.BOOL
    if t.text == "channel":
        return ast.CHAN
    if t.text == "int":
        c.expect("LBRACK", "[")
        lo = _parse_signed_int(c)
        c.expect("DOTDOT", "..")
        hi = _parse_signed_int(c)
        c.expect("RBRACK", "]")
        if lo > hi:
            raise ModelSyntaxError(f"empty int range [{lo}..{hi}]", t.pos)
        return ast.Type("int", lo=lo, hi=hi)
    return ast.Type("enum", enum_name=t.text)


def _parse_signed_int(c: _Cursor) -> int:
    neg = c.accept("MINUS") is not None
    t = c.expect("INT", "integer")
    return -int(t.text) if neg else int(t.text)


def _parse_var_decls(c: _Cursor) -> list[ast.VarDecl]:
    """Comma-separated `name: type` list, ending before the next section."""
    decls: list[ast.VarDecl] = []
    while c.at("IDENT") and c.peek(1) is not None and c.peek(1).kind == "COLON":
        name = c.next()
        c.next()
        decls.append(ast.VarDecl(name.text, _parse_type(c), name.pos))
        c.accept("COMMA")
    return decls


def _parse_agent(c: _Cursor) -> ast.AgentDef:
    kw = c.expect("agent")
    name = c.expect("IDENT", "agent name")
    c.expect("local")
    c.expect("COLON", ":")
    locals_ = _parse_var_decls(c)
    c.expect("init")
    c.expect("COLON", ":")
    init = parse_expr(c)
    relabel: list[tuple[str, ast.Expr]] = []
    if c.accept("relabel"):
        c.expect("COLON", ":")
        while c.at("IDENT") and c.peek(1) is not None and c.peek(1).kind == "MAPSTO":
            cv = c.next()
            c.next()
            relabel.append((cv.text, parse_expr(c)))
            c.accept("COMMA")
    c.expect("receive-guard")
    c.expect("COLON", ":")
    guard = parse_expr(c)
    c.expect("repeat")
    c.expect("COLON", ":")
    process = parse_process(c)
    return ast.AgentDef(name.text, tuple(locals_), init, tuple(relabel),
                        guard, process, kw.pos)


def _label_commands(agent: ast.AgentDef) -> ast.AgentDef:
    """Assign synthetic labels and reject duplicates within the agent."""
    counter = 0

    def walk(p: ast.Process) -> ast.Process:
        nonlocal counter
        if isinstance(p, ast.Cmd):
            counter += 1
            cmd = p.command
            if cmd.label is None:
                cmd = ast.Command(f"{agent.name}_cmd{counter}", cmd.kind, cmd.pre,
                                  cmd.channel, cmd.send_pred, cmd.data_assign,
                                  cmd.updates, cmd.pos)
            return ast.Cmd(cmd)
        if isinstance(p, ast.Seq):
            return ast.Seq(walk(p.left), walk(p.right))
        if isinstance(p, ast.Choice):
            return ast.Choice(walk(p.left), walk(p.right))
        if isinstance(p, ast.Rep):
            return ast.Rep(walk(p.body))
        raise TypeError(p)

    process = walk(agent.process)
    seen: set[str] = set()
    for cmd in ast.command_leaves(process):
        if cmd.label in seen:
            raise ModelSyntaxError(
                f"duplicate command label {cmd.label!r} in agent {agent.name}", cmd.pos)
        seen.add(cmd.label)
    return ast.AgentDef(agent.name, agent.locals, agent.init, agent.relabel,
                        agent.receive_guard, process, agent.pos)


def parse_model(source: str) -> ast.SystemModel:
    c = _Cursor(tokenize(source))

    c.expect("enums")
    c.expect("COLON", ":")
    enums: list[ast.EnumDecl] = []
    while c.at("IDENT"):
        name = c.next()
        c.expect("LBRACE", "{")
        consts: list[str] = []
        if not c.at("RBRACE"):
            while True:
                consts.append(c.expect("IDENT", "enum constant").text)
                if not c.accept("COMMA"):
                    break
        c.expect("RBRACE", "}")
        enums.append(ast.EnumDecl(name.text, tuple(consts), name.pos))

    c.expect("channels")
    c.expect("COLON", ":")
    channels: list[str] = []
    while c.at("IDENT") and not (c.peek(1) is not None and c.peek(1).kind == "COLON"):
        channels.append(c.next().text)
        c.accept("COMMA")

    c.expect("message-structure")
    c.expect("COLON", ":")
    data_vars = _parse_var_decls(c)

    c.expect("communication-variables")
    c.expect("COLON", ":")
    common_vars = _parse_var_decls(c)

    agents: list[ast.AgentDef] = []
    while c.at("agent"):
        agents.append(_label_commands(_parse_agent(c)))

    c.expect("system")
    c.expect("EQUALS", "=")
    instances: list[ast.Instance] = []
    while True:
        tname = c.expect("IDENT", "agent type")
        c.expect("LPAREN", "(")
        iid = c.expect("IDENT", "instance id")
        c.expect("COMMA", ",")
        extra = parse_expr(c)
        c.expect("RPAREN", ")")
        instances.append(ast.Instance(tname.text, iid.text, extra, tname.pos))
        if not c.accept("OROR"):
            break
    t = c.peek()
    if t is not None:
        raise ModelSyntaxError(f"trailing input {t.text!r}", t.pos)

    model = ast.SystemModel(tuple(enums), tuple(channels), tuple(data_vars),
                            tuple(common_vars), tuple(agents), tuple(instances))
    _check_model_names(model)
    return model


def _check_model_names(model: ast.SystemModel) -> None:
    agent_names = {a.name for a in model.agents}
    seen_ids: set[str] = set()
    for inst in model.instances:
        if inst.type_name not in agent_names:
            raise UnknownAgentType(f"unknown agent type {inst.type_name!r}", inst.pos)
        if inst.instance_id in seen_ids:
            raise DuplicateInstanceId(f"duplicate instance id {inst.instance_id!r}", inst.pos)
        seen_ids.add(inst.instance_id)
    declared = (
        [(e.name, e.pos) for e in model.enums]
        + [(k, e.pos) for e in model.enums for k in e.constants]
        + [(ch, None) for ch in model.channels]
        + [(v.name, v.pos) for v in model.data_vars]
        + [(v.name, v.pos) for v in model.common_vars]
        + [(a.name, a.pos) for a in model.agents]
        + [(v.name, v.pos) for a in model.agents for v in a.locals]
        + [(i.instance_id, i.pos) for i in model.instances]
    )
    for name, pos in declared:
        if name in ast.RESERVED_NAMES:
            raise ModelSyntaxError(f"{name!r} is reserved and cannot be declared", pos)


# ---------------------------------------------------------------- properties

def _parse_qualified(c: _Cursor) -> tuple[str, str, Pos]:
    inst = c.expect("IDENT", "instance id")
    c.expect("MINUS", "-")
    name = c.expect("IDENT", "label or variable")
    return inst.text, name.text, inst.pos


def _parse_atom_operand(c: _Cursor, allow_next: bool) -> ast.Expr:
    t = c.peek()
    if t is None:
        raise ModelSyntaxError("unexpected end of input", c.last_pos(), expected=("atom",))
    if allow_next and t.kind == "next":
        c.next()
        c.expect("LPAREN", "(")
        inst, name, pos = _parse_qualified(c)
        c.expect("RPAREN", ")")
        return ast.NextInstVar(inst, name, pos)
    if t.kind == "TRUE":
        c.next()
        return ast.ConstE(ast.TRUE, t.pos)
    if t.kind == "FALSE":
        c.next()
        return ast.ConstE(ast.FALSE, t.pos)
    if t.kind == "INT":
        c.next()
        return ast.ConstE(ast.intv(int(t.text)), t.pos)
    if t.kind == "MINUS":
        c.next()
        n = c.expect("INT", "integer")
        return ast.ConstE(ast.intv(-int(n.text)), t.pos)
    if t.kind == "STAR":
        c.next()
        return ast.ConstE(ast.STAR, t.pos)
    if t.kind == "IDENT":
        nxt = c.peek(1)
        if nxt is not None and nxt.kind == "MINUS":
            after = c.peek(2)
            if after is not None and after.kind == "IDENT":
                inst, name, pos = _parse_qualified(c)
                return ast.InstVar(inst, name, pos)
        c.next()
        return ast.Name(t.text, t.pos)
    raise ModelSyntaxError(f"unexpected {t.text!r}", t.pos, expected=("atom",))


def _parse_prop_atom(c: _Cursor, allow_next: bool) -> ast.Expr:
    """Atom: qualified name, `next(...)`, or `operand CMP operand`."""
    left = _parse_atom_operand(c, allow_next)
    t = c.peek()
    if t is not None and t.kind in _CMP_OPS:
        c.next()
        right = _parse_atom_operand(c, allow_next)
        return ast.Binary(_CMP_OPS[t.kind], left, right, t.pos)
    return left


def _parse_prop_unary(c: _Cursor, temporal: bool, allow_next: bool) -> ast.Expr:
    t = c.peek()
    if t is not None and t.kind == "BANG":
        c.next()
        c.enter()
        sub = _parse_prop_unary(c, temporal, allow_next)
        c.leave()
        return ast.Unary("!", sub, t.pos)
    if temporal and t is not None and t.kind == "IDENT" and t.text in ("X", "F", "G"):
        nxt = c.peek(1)
        # `G (...)` is an operator; a bare trailing `G` would be an atom
        if nxt is not None and nxt.kind in ("LPAREN", "BANG", "IDENT", "TRUE", "FALSE", "INT") \
                and not (nxt.kind == "MINUS"):
            c.next()
            c.enter()
            sub = _parse_prop_unary(c, temporal, allow_next)
            c.leave()
            return ast.Temporal(t.text, sub, t.pos)
    if t is not None and t.kind == "LPAREN":
        c.next()
        c.enter()
        f = _parse_prop_formula(c, temporal, allow_next)
        c.leave()
        c.expect("RPAREN", ")")
        return f
    return _parse_prop_atom(c, allow_next)


def _parse_prop_until(c: _Cursor, temporal: bool, allow_next: bool) -> ast.Expr:
    left = _parse_prop_unary(c, temporal, allow_next)
    if temporal and c.at_word("U"):
        t = c.next()
        c.enter()
        right = _parse_prop_until(c, temporal, allow_next)  # right-associative
        c.leave()
        return ast.TemporalBin("U", left, right, t.pos)
    return left


def _parse_prop_and(c: _Cursor, temporal: bool, allow_next: bool) -> ast.Expr:
    e = _parse_prop_until(c, temporal, allow_next)
    while c.at("AMP") or c.at("ANDAND"):
        t = c.next()
        e = ast.Binary("&&", e, _parse_prop_until(c, temporal, allow_next), t.pos)
    return e


def _parse_prop_or(c: _Cursor, temporal: bool, allow_next: bool) -> ast.Expr:
    e = _parse_prop_and(c, temporal, allow_next)
    while c.at("PIPE") or c.at("OROR"):
        t = c.next()
        e = ast.Binary("||", e, _parse_prop_and(c, temporal, allow_next), t.pos)
    return e


def _parse_prop_formula(c: _Cursor, temporal: bool, allow_next: bool) -> ast.Expr:
    e = _parse_prop_or(c, temporal, allow_next)
    if c.at("IMPLIES"):
        t = c.next()
        c.enter()
        rhs = _parse_prop_formula(c, temporal, allow_next)
        c.leave()
        return ast.Binary("->", e, rhs, t.pos)
    return e


def parse_property(text: str) -> ast.Expr:
    """Parse a single LTL formula (atoms unresolved)."""
    c = _Cursor(tokenize(text))
    f = _parse_prop_formula(c, temporal=True, allow_next=False)
    t = c.peek()
    if t is not None:
        raise ModelSyntaxError(f"trailing input {t.text!r}", t.pos)
    return f


def parse_constraint(text: str) -> ast.Expr:
    """Parse a simulator constraint: boolean, label atoms, `next(...)`."""
    c = _Cursor(tokenize(text))
    f = _parse_prop_formula(c, temporal=False, allow_next=True)
    t = c.peek()
    if t is not None:
        raise ModelSyntaxError(f"trailing input {t.text!r}", t.pos)
    return f


def parse_property_file(text: str) -> list[ast.LtlProperty]:
    """`name : formula ;` entries with optional `expect holds|fails`."""
    c = _Cursor(tokenize(text))
    props: list[ast.LtlProperty] = []
    while c.peek() is not None:
        name = c.expect("IDENT", "property name")
        c.expect("COLON", ":")
        formula = _parse_prop_formula(c, temporal=True, allow_next=False)
        c.expect("SEMI", ";")
        expect = None
        if c.accept("expect"):
            word = c.expect("IDENT", "holds|fails")
            if word.text not in ("holds", "fails"):
                raise ModelSyntaxError(
                    f"expected 'holds' or 'fails', got {word.text!r}", word.pos)
            expect = word.text
        props.append(ast.LtlProperty(name.text, formula, expect))
    return props
