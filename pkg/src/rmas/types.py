"""Name resolution and type checking.

Produces a `TypedModel`: all `Name` nodes rewritten to typed references,
assignment right-hand sides wrapped in `Clamp` for bounded ints, relabel
maps completed (missing common variables default to `undef` with a
warning), and every finite domain tabulated for enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Pos, TypeMismatch, UnknownVariable, UpdateToUndeclaredVar
from .lang import ast
from .lang.ast import BOOL, CHAN, EMPTY, STAR, UNDEF, Type, Value


@dataclass(frozen=True)
class Warning:
    code: str       # "missing-relabel", "not-input-enabled", ...
    message: str
    agent: str | None = None
    severity: str = "warning"  # or "info"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code}: {self.message}"


@dataclass
class TypedAgent:
    name: str
    locals: tuple[ast.VarDecl, ...]
    var_types: dict[str, Type]
    init: ast.Expr
    relabel: dict[str, ast.Expr]            # covers every common variable
    receive_guard: ast.Expr
    process: ast.Process
    commands: list[ast.Command]             # leaves in source order


@dataclass
class TypedModel:
    enums: dict[str, tuple[str, ...]]
    channels: tuple[str, ...]
    data_vars: dict[str, Type]              # declaration order
    common_vars: dict[str, Type]
    agents: dict[str, TypedAgent]
    instances: tuple[ast.Instance, ...]     # extra_init resolved
    constants: dict[str, Value]
    warnings: list[Warning] = field(default_factory=list)

    def domain(self, t: Type) -> list[Value]:
        if t.kind == "bool":
            return [ast.FALSE, ast.TRUE]
        if t.kind == "int":
            return [ast.intv(n) for n in range(t.lo, t.hi + 1)]
        if t.kind == "enum":
            return [ast.enumv(t.enum_name, k) for k in self.enums[t.enum_name]] + [UNDEF]
        if t.kind == "chan":
            return [STAR, EMPTY] + [ast.chanv(c) for c in self.channels]
        raise ValueError(t.kind)

    def data_domain(self, name: str) -> list[Value]:
        dom = self.domain(self.data_vars[name])
        return dom if UNDEF in dom else dom + [UNDEF]

    def message_channels(self) -> list[Value]:
        return [STAR] + [ast.chanv(c) for c in self.channels]


_UNDEF_T = Type("undef")


def _value_type(v: Value) -> Type:
    if v.kind == "bool":
        return BOOL
    if v.kind == "int":
        return Type("int", lo=v.data, hi=v.data)
    if v.kind == "enum":
        return Type("enum", enum_name=v.data[0])
    if v.kind == "chan":
        return CHAN
    return _UNDEF_T


def _compatible_eq(a: Type, b: Type) -> bool:
    if a.kind == "undef" or b.kind == "undef":
        return True
    if a.kind != b.kind:
        return False
    if a.kind == "enum":
        return a.enum_name == b.enum_name
    return True


class _Resolver:
    """Per-context resolution; `scope` flags pick which namespaces apply."""

    def __init__(self, model: ast.SystemModel, constants: dict[str, Value],
                 enums: dict[str, tuple[str, ...]]):
        self.model = model
        self.constants = constants
        self.enums = enums

    def resolve(self, e: ast.Expr, var_types: dict[str, Type], *,
                data: dict[str, Type] | None = None,
                common: dict[str, Type] | None = None,
                allow_ch: bool = False) -> tuple[ast.Expr, Type]:
        if isinstance(e, ast.ConstE):
            return e, _value_type(e.value)
        if isinstance(e, ast.Name):
            if e.name == "ch":
                if not allow_ch:
                    raise UnknownVariable("'ch' is not available here", e.pos)
                return ast.ChanMeta(e.pos), CHAN
            if e.name in var_types:
                return ast.LocalVar(e.name, e.pos), var_types[e.name]
            if data is not None and e.name in data:
                return ast.DataVar(e.name, e.pos), data[e.name]
            if common is not None and e.name in common:
                return ast.CommonVar(e.name, e.pos), common[e.name]
            v = self.constants.get(e.name)
            if v is not None:
                return ast.ConstE(v, e.pos), _value_type(v)
            raise UnknownVariable(f"unknown name {e.name!r}", e.pos)
        if isinstance(e, ast.Unary):
            sub, t = self.resolve(e.sub, var_types, data=data, common=common,
                                  allow_ch=allow_ch)
            if e.op == "!" and t.kind != "bool":
                raise TypeMismatch(f"'!' needs bool, got {t}", e.pos)
            if e.op == "-" and t.kind != "int":
                raise TypeMismatch(f"unary '-' needs int, got {t}", e.pos)
            return ast.Unary(e.op, sub, e.pos), (BOOL if e.op == "!" else Type("int"))
        if isinstance(e, ast.Binary):
            left, lt = self.resolve(e.left, var_types, data=data, common=common,
                                    allow_ch=allow_ch)
            right, rt = self.resolve(e.right, var_types, data=data, common=common,
                                     allow_ch=allow_ch)
            out = ast.Binary(e.op, left, right, e.pos)
            if e.op in ("==", "!="):
                if not _compatible_eq(lt, rt):
                    raise TypeMismatch(f"cannot compare {lt} with {rt}", e.pos)
                return out, BOOL
            if e.op in ("<", "<=", ">", ">="):
                for t in (lt, rt):
                    if t.kind not in ("int", "undef"):
                        raise TypeMismatch(f"ordered comparison needs int, got {t}", e.pos)
                return out, BOOL
            if e.op in ("&&", "||", "->"):
                for t in (lt, rt):
                    if t.kind != "bool":
                        raise TypeMismatch(f"'{e.op}' needs bool, got {t}", e.pos)
                return out, BOOL
            if e.op in ("+", "-"):
                for t in (lt, rt):
                    if t.kind != "int":
                        raise TypeMismatch(f"'{e.op}' needs int, got {t}", e.pos)
                return out, Type("int")
            raise TypeMismatch(f"unknown operator {e.op!r}", e.pos)
        raise TypeMismatch(f"unexpected expression {type(e).__name__}", None)

    def resolve_bool(self, e: ast.Expr, var_types: dict[str, Type], **kw) -> ast.Expr:
        out, t = self.resolve(e, var_types, **kw)
        if t.kind != "bool":
            raise TypeMismatch(f"expected bool expression, got {t}",
                               getattr(e, "pos", None))
        return out


def _clamped(rhs: ast.Expr, target: Type, rhs_type: Type, pos: Pos | None,
             what: str) -> ast.Expr:
    """Type-match an assignment and saturate bounded-int targets."""
    if target.kind == "int":
        if rhs_type.kind not in ("int", "undef"):
            raise TypeMismatch(f"{what}: cannot assign {rhs_type} to {target}", pos)
        return ast.Clamp(rhs, target.lo, target.hi)
    if not _compatible_eq(target, rhs_type):
        raise TypeMismatch(f"{what}: cannot assign {rhs_type} to {target}", pos)
    return rhs


def typecheck(model: ast.SystemModel) -> TypedModel:
    enums: dict[str, tuple[str, ...]] = {}
    constants: dict[str, Value] = {
        "star": STAR, "empty": EMPTY, "undef": UNDEF,
    }
    taken: dict[str, str] = {"star": "reserved", "empty": "reserved", "undef": "reserved"}

    def claim(name: str, what: str, pos: Pos | None = None) -> None:
        if name in taken:
            raise TypeMismatch(f"{what} {name!r} collides with {taken[name]}", pos)
        taken[name] = what

    for e in model.enums:
        claim(e.name, "enum", e.pos)
        if e.name in enums:
            raise TypeMismatch(f"duplicate enum {e.name!r}", e.pos)
        enums[e.name] = e.constants
        for k in e.constants:
            claim(k, f"enum constant of {e.name}", e.pos)
            constants[k] = ast.enumv(e.name, k)
    for ch in model.channels:
        claim(ch, "channel")
        constants[ch] = ast.chanv(ch)

    data_vars: dict[str, Type] = {}
    for d in model.data_vars:
        claim(d.name, "data variable", d.pos)
        _check_type_exists(d.type, enums, d.pos)
        data_vars[d.name] = d.type
    common_vars: dict[str, Type] = {}
    for cvd in model.common_vars:
        claim(cvd.name, "common variable", cvd.pos)
        _check_type_exists(cvd.type, enums, cvd.pos)
        common_vars[cvd.name] = cvd.type

    r = _Resolver(model, constants, enums)
    warnings: list[Warning] = []
    agents: dict[str, TypedAgent] = {}
    for a in model.agents:
        claim(a.name, "agent type", a.pos)
        agents[a.name] = _check_agent(a, r, data_vars, common_vars, warnings)

    for inst in model.instances:
        claim(inst.instance_id, "instance id", inst.pos)

    instances = []
    for inst in model.instances:
        agent = agents[inst.type_name]
        extra = r.resolve_bool(inst.extra_init, agent.var_types)
        instances.append(ast.Instance(inst.type_name, inst.instance_id, extra, inst.pos))

    return TypedModel(enums, model.channels, data_vars, common_vars, agents,
                      tuple(instances), constants, warnings)


def _check_type_exists(t: Type, enums: dict[str, tuple[str, ...]], pos: Pos | None) -> None:
    if t.kind == "enum" and t.enum_name not in enums:
        raise TypeMismatch(f"unknown type {t.enum_name!r}", pos)


def _check_agent(a: ast.AgentDef, r: _Resolver, data_vars: dict[str, Type],
                 common_vars: dict[str, Type], warnings: list[Warning]) -> TypedAgent:
    var_types: dict[str, Type] = {}
    for v in a.locals:
        if v.name in var_types:
            raise TypeMismatch(f"duplicate local {v.name!r} in {a.name}", v.pos)
        if v.name in data_vars or v.name in common_vars or v.name in r.constants:
            raise TypeMismatch(
                f"local {v.name!r} in {a.name} shadows a declared name", v.pos)
        _check_type_exists(v.type, r.enums, v.pos)
        var_types[v.name] = v.type

    init = r.resolve_bool(a.init, var_types)
    guard = r.resolve_bool(a.receive_guard, var_types, allow_ch=True)

    relabel: dict[str, ast.Expr] = {}
    for cv, rhs_raw in a.relabel:
        if cv not in common_vars:
            raise UnknownVariable(f"relabel target {cv!r} is not a common variable",
                                  a.pos)
        if cv in relabel:
            raise TypeMismatch(f"duplicate relabel for {cv!r} in {a.name}", a.pos)
        rhs, rt = r.resolve(rhs_raw, var_types)
        if not _compatible_eq(common_vars[cv], rt):
            raise TypeMismatch(
                f"relabel {cv} <- : expected {common_vars[cv]}, got {rt}", a.pos)
        relabel[cv] = rhs
    for cv in common_vars:
        if cv not in relabel:
            warnings.append(Warning(
                "missing-relabel",
                f"agent {a.name} does not relabel common variable {cv!r}; "
                f"defaulting to undef", agent=a.name))
            relabel[cv] = ast.ConstE(UNDEF)
    # keep declaration order
    relabel = {cv: relabel[cv] for cv in common_vars}

    process = _check_process(a, r, var_types, data_vars, common_vars)
    return TypedAgent(a.name, a.locals, var_types, init, relabel, guard,
                      process, ast.command_leaves(process))


def _check_process(a: ast.AgentDef, r: _Resolver, var_types: dict[str, Type],
                   data_vars: dict[str, Type], common_vars: dict[str, Type]) -> ast.Process:
    def walk(p: ast.Process) -> ast.Process:
        if isinstance(p, ast.Cmd):
            return ast.Cmd(check_command(p.command))
        if isinstance(p, ast.Seq):
            return ast.Seq(walk(p.left), walk(p.right))
        if isinstance(p, ast.Choice):
            return ast.Choice(walk(p.left), walk(p.right))
        if isinstance(p, ast.Rep):
            return ast.Rep(walk(p.body))
        raise TypeError(p)

    def check_command(cmd: ast.Command) -> ast.Command:
        chan, chan_t = r.resolve(cmd.channel, var_types)
        if chan_t.kind not in ("chan", "undef"):
            raise TypeMismatch(
                f"command {cmd.label}: channel expression has type {chan_t}", cmd.pos)
        if cmd.kind == "send":
            pre = r.resolve_bool(cmd.pre, var_types)
            send_pred = r.resolve_bool(cmd.send_pred, var_types, data=data_vars,
                                       common=common_vars, allow_ch=True)
            assigns = []
            for name, rhs_raw in cmd.data_assign:
                if name not in data_vars:
                    raise UpdateToUndeclaredVar(
                        f"command {cmd.label}: {name!r} is not a data variable", cmd.pos)
                rhs, rt = r.resolve(rhs_raw, var_types)
                assigns.append((name, _clamped(rhs, data_vars[name], rt, cmd.pos,
                                               f"message field {name}")))
            updates = _check_updates(cmd, r, var_types, data=None)
            return ast.Command(cmd.label, "send", pre, chan, send_pred,
                               tuple(assigns), updates, cmd.pos)
        pre = r.resolve_bool(cmd.pre, var_types, data=data_vars)
        updates = _check_updates(cmd, r, var_types, data=data_vars)
        return ast.Command(cmd.label, "recv", pre, chan, None, (), updates, cmd.pos)

    def _check_updates(cmd: ast.Command, r: _Resolver, var_types: dict[str, Type],
                       data: dict[str, Type] | None) -> tuple[tuple[str, ast.Expr], ...]:
        seen = set()
        out = []
        for name, rhs_raw in cmd.updates:
            if name not in var_types:
                raise UpdateToUndeclaredVar(
                    f"command {cmd.label}: update target {name!r} is not a local variable",
                    cmd.pos)
            if name in seen:
                raise TypeMismatch(
                    f"command {cmd.label}: duplicate update of {name!r}", cmd.pos)
            seen.add(name)
            rhs, rt = r.resolve(rhs_raw, var_types, data=data)
            out.append((name, _clamped(rhs, var_types[name], rt, cmd.pos,
                                       f"update of {name}")))
        return tuple(out)

    return walk(a.process)
