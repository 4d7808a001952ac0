"""AST and value model for the surface language.

Source positions ride along on nodes but are excluded from equality so
that structural comparison (round-trip tests, oracle checks) ignores
layout.  Name resolution rewrites `Name` nodes into the typed reference
nodes below; freshly parsed trees contain only `Name`, `ConstE`,
`Unary`, `Binary` and the temporal/process shells.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import Pos

RESERVED_CONSTANTS = ("star", "empty", "undef")
RESERVED_NAMES = RESERVED_CONSTANTS + ("ch", "st", "TRUE", "FALSE")


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class Value:
    """Runtime value: kind in {'bool','int','enum','chan','state','undef'}."""

    kind: str
    data: object = None

    def __repr__(self) -> str:
        return f"Value({self.kind},{self.data!r})"


TRUE = Value("bool", True)
FALSE = Value("bool", False)
UNDEF = Value("undef")
STAR = Value("chan", "star")
EMPTY = Value("chan", "empty")


def boolv(b: bool) -> Value:
    return TRUE if b else FALSE


def intv(n: int) -> Value:
    return Value("int", n)


def enumv(enum_name: str, const: str) -> Value:
    return Value("enum", (enum_name, const))


def chanv(name: str) -> Value:
    return Value("chan", name)


def statev(name: str) -> Value:
    return Value("state", name)


def value_text(v: Value) -> str:
    if v.kind == "bool":
        return "TRUE" if v.data else "FALSE"
    if v.kind == "int":
        return str(v.data)
    if v.kind == "enum":
        return v.data[1]
    if v.kind in ("chan", "state"):
        return str(v.data)
    return "undef"


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Type:
    """kind in {'bool','int','enum','chan'}; ints carry [lo, hi]."""

    kind: str
    enum_name: str | None = None
    lo: int | None = None
    hi: int | None = None

    def __str__(self) -> str:
        if self.kind == "int":
            return f"int[{self.lo}..{self.hi}]"
        if self.kind == "enum":
            return self.enum_name or "enum"
        return {"bool": "bool", "chan": "channel"}[self.kind]


BOOL = Type("bool")
CHAN = Type("chan")


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Name(Expr):
    """Unresolved identifier straight from the parser."""

    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ConstE(Expr):
    value: Value
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class LocalVar(Expr):
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class DataVar(Expr):
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CommonVar(Expr):
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ChanMeta(Expr):
    """The channel meta-variable `ch` (receive guards, send predicates)."""

    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Primed(Expr):
    """Next-state copy v' of a local; appears only in built predicates."""

    name: str


@dataclass(frozen=True)
class InstVar(Expr):
    """`instance-var` atom in properties and constraints."""

    instance: str
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class NextInstVar(Expr):
    """`next(instance-var)` term in simulator constraints."""

    instance: str
    name: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class LabelAtom(Expr):
    """`instance-label` command atom; fire_kind in {'send','recv'}."""

    instance: str
    label: str
    fire_kind: str = field(default="send", compare=True)
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "!" or "-"
    sub: Expr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # && || -> == != < <= > >= + -
    left: Expr
    right: Expr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Clamp(Expr):
    """Saturate an int expression into [lo, hi]; inserted by the typechecker
    on assignment right-hand sides so stored values never leave bounds."""

    sub: Expr
    lo: int
    hi: int


TRUE_E = ConstE(TRUE)
FALSE_E = ConstE(FALSE)


def conj(parts: list[Expr]) -> Expr:
    """Conjunction that drops TRUE units; empty conjunction is TRUE."""
    parts = [p for p in parts if p != TRUE_E]
    if not parts:
        return TRUE_E
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&&", out, p)
    return out


def disj(parts: list[Expr]) -> Expr:
    """Disjunction; empty disjunction is FALSE."""
    if not parts:
        return FALSE_E
    out = parts[0]
    for p in parts[1:]:
        out = Binary("||", out, p)
    return out


# ---------------------------------------------------------------- LTL

@dataclass(frozen=True)
class Temporal(Expr):
    op: str  # X F G
    sub: Expr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TemporalBin(Expr):
    op: str  # U, and R internally after negation-normal form
    left: Expr
    right: Expr
    pos: Pos | None = field(default=None, compare=False)


# ---------------------------------------------------------------- processes

@dataclass(frozen=True)
class Command:
    label: str | None          # filled with a synthetic label when absent
    kind: str                  # "send" | "recv"
    pre: Expr
    channel: Expr
    send_pred: Expr | None     # send only
    data_assign: tuple[tuple[str, Expr], ...]  # send only, source order
    updates: tuple[tuple[str, Expr], ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Process:
    pass


@dataclass(frozen=True)
class Cmd(Process):
    command: Command


@dataclass(frozen=True)
class Seq(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Choice(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Rep(Process):
    body: Process


def command_leaves(p: Process) -> list[Command]:
    if isinstance(p, Cmd):
        return [p.command]
    if isinstance(p, (Seq, Choice)):
        return command_leaves(p.left) + command_leaves(p.right)
    if isinstance(p, Rep):
        return command_leaves(p.body)
    raise TypeError(p)


# ---------------------------------------------------------------- declarations

@dataclass(frozen=True)
class VarDecl:
    name: str
    type: Type
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EnumDecl:
    name: str
    constants: tuple[str, ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AgentDef:
    name: str
    locals: tuple[VarDecl, ...]
    init: Expr
    relabel: tuple[tuple[str, Expr], ...]
    receive_guard: Expr
    process: Process
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Instance:
    type_name: str
    instance_id: str
    extra_init: Expr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SystemModel:
    enums: tuple[EnumDecl, ...]
    channels: tuple[str, ...]
    data_vars: tuple[VarDecl, ...]
    common_vars: tuple[VarDecl, ...]
    agents: tuple[AgentDef, ...]
    instances: tuple[Instance, ...]

    def agent(self, name: str) -> AgentDef:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)


@dataclass(frozen=True)
class LtlProperty:
    name: str
    formula: Expr
    expect: str | None = None  # "holds" | "fails" | None
