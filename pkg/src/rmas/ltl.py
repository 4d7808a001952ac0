"""LTL formulas over command labels and instance-state atoms.

Provides name resolution against a compiled system, negation normal
form (with the release dual), and a direct evaluator of formulas on
lasso words, used as the semantic oracle for the automaton translation.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import TypeMismatch, UnknownLabel, UnknownVariable
from .lang import ast
from .symbolic import CompiledSystem

Atom = ast.Expr  # LabelAtom, bare boolean InstVar, or a comparison


# ---------------------------------------------------------------- resolution

def resolve_formula(formula: ast.Expr, system: CompiledSystem,
                    allow_next: bool = False) -> ast.Expr:
    """Resolve instance-qualified names to label atoms and typed variable
    references; type-check comparison atoms."""

    def agent_of(instance: str, pos) -> object:
        try:
            return system.instance(instance).agent
        except KeyError:
            raise UnknownVariable(f"unknown instance {instance!r}", pos) from None

    def resolve_operand(e: ast.Expr) -> tuple[ast.Expr, ast.Type]:
        if isinstance(e, ast.ConstE):
            return e, _value_type(e.value)
        if isinstance(e, ast.Name):
            v = system.model.constants.get(e.name)
            if v is None:
                raise UnknownVariable(
                    f"unknown constant {e.name!r}; state atoms must be "
                    f"instance-qualified", e.pos)
            return ast.ConstE(v, e.pos), _value_type(v)
        if isinstance(e, ast.InstVar):
            agent = agent_of(e.instance, e.pos)
            t = agent.var_types.get(e.name)
            if t is None:
                raise UnknownVariable(
                    f"instance {e.instance!r} ({agent.name}) has no variable "
                    f"{e.name!r}", e.pos)
            return e, t
        if isinstance(e, ast.NextInstVar):
            if not allow_next:
                raise UnknownVariable("next(...) is only available in simulator "
                                      "constraints", e.pos)
            agent = agent_of(e.instance, e.pos)
            t = agent.var_types.get(e.name)
            if t is None:
                raise UnknownVariable(
                    f"instance {e.instance!r} ({agent.name}) has no variable "
                    f"{e.name!r}", e.pos)
            return e, t
        raise UnknownVariable(f"cannot use {type(e).__name__} in a property atom",
                              getattr(e, "pos", None))

    def walk(e: ast.Expr) -> ast.Expr:
        if isinstance(e, ast.ConstE):
            return e
        if isinstance(e, (ast.InstVar, ast.NextInstVar)):
            # bare qualified name: command label, else boolean variable
            agent = agent_of(e.instance, e.pos)
            cmd = agent.command(e.name)
            if cmd is not None:
                if isinstance(e, ast.NextInstVar):
                    raise UnknownVariable(
                        f"next() wraps variables, not command labels "
                        f"({e.instance}-{e.name})", e.pos)
                kind = "send" if cmd.kind == "send" else "recv"
                return ast.LabelAtom(e.instance, e.name, kind, e.pos)
            t = agent.var_types.get(e.name)
            if t is None:
                raise UnknownLabel(
                    f"{e.instance}-{e.name}: no such command label or variable "
                    f"in agent {agent.name}", e.pos)
            if t.kind != "bool":
                raise TypeMismatch(
                    f"{e.instance}-{e.name} has type {t}; only boolean "
                    f"variables stand alone as atoms", e.pos)
            return e
        if isinstance(e, ast.Unary):
            return ast.Unary(e.op, walk(e.sub), e.pos)
        if isinstance(e, ast.Temporal):
            return ast.Temporal(e.op, walk(e.sub), e.pos)
        if isinstance(e, ast.TemporalBin):
            return ast.TemporalBin(e.op, walk(e.left), walk(e.right), e.pos)
        if isinstance(e, ast.Binary):
            if e.op in ("&&", "||", "->"):
                return ast.Binary(e.op, walk(e.left), walk(e.right), e.pos)
            left, lt = resolve_operand(e.left)
            right, rt = resolve_operand(e.right)
            if e.op in ("<", "<=", ">", ">="):
                for t in (lt, rt):
                    if t.kind not in ("int", "undef"):
                        raise TypeMismatch(
                            f"ordered comparison needs int, got {t}", e.pos)
            elif not _eq_compatible(lt, rt):
                raise TypeMismatch(f"cannot compare {lt} with {rt}", e.pos)
            return ast.Binary(e.op, left, right, e.pos)
        if isinstance(e, ast.Name):
            raise UnknownVariable(
                f"{e.name!r} is not a formula; atoms are instance-qualified",
                e.pos)
        raise UnknownVariable(f"unexpected node {type(e).__name__}",
                              getattr(e, "pos", None))

    return walk(formula)


def _value_type(v: ast.Value) -> ast.Type:
    if v.kind == "bool":
        return ast.BOOL
    if v.kind == "int":
        return ast.Type("int", lo=v.data, hi=v.data)
    if v.kind == "enum":
        return ast.Type("enum", enum_name=v.data[0])
    if v.kind == "chan":
        return ast.CHAN
    return ast.Type("undef")


def _eq_compatible(a: ast.Type, b: ast.Type) -> bool:
    if a.kind == "undef" or b.kind == "undef":
        return True
    if a.kind != b.kind:
        return False
    if a.kind == "enum":
        return a.enum_name == b.enum_name
    return True


# ---------------------------------------------------------------- structure

_CMP = ("==", "!=", "<", "<=", ">", ">=")


def is_atom(e: ast.Expr) -> bool:
    if isinstance(e, (ast.LabelAtom, ast.InstVar, ast.NextInstVar)):
        return True
    return isinstance(e, ast.Binary) and e.op in _CMP


def atoms_of(formula: ast.Expr) -> list[Atom]:
    """Atoms in first-occurrence order."""
    out: list[Atom] = []

    def walk(e: ast.Expr) -> None:
        if is_atom(e):
            if e not in out:
                out.append(e)
            return
        if isinstance(e, ast.ConstE):
            return
        if isinstance(e, ast.Unary):
            walk(e.sub)
        elif isinstance(e, ast.Temporal):
            walk(e.sub)
        elif isinstance(e, (ast.TemporalBin, ast.Binary)):
            walk(e.left)
            walk(e.right)
        else:
            raise TypeError(e)

    walk(formula)
    return out


def negated(formula: ast.Expr) -> ast.Expr:
    return ast.Unary("!", formula)


def to_nnf(e: ast.Expr, neg: bool = False) -> ast.Expr:
    """Negation normal form over literals, &&, ||, X, U and R.

    F and G are unfolded into U/R with constant left operands.
    """
    if isinstance(e, ast.ConstE):
        return ast.ConstE(ast.boolv(not e.value.data)) if neg else e
    if is_atom(e):
        return ast.Unary("!", e) if neg else e
    if isinstance(e, ast.Unary) and e.op == "!":
        return to_nnf(e.sub, not neg)
    if isinstance(e, ast.Binary):
        if e.op == "->":
            return to_nnf(ast.Binary("||", ast.Unary("!", e.left), e.right), neg)
        if e.op == "&&":
            op = "||" if neg else "&&"
            return ast.Binary(op, to_nnf(e.left, neg), to_nnf(e.right, neg))
        if e.op == "||":
            op = "&&" if neg else "||"
            return ast.Binary(op, to_nnf(e.left, neg), to_nnf(e.right, neg))
        raise TypeError(f"unexpected operator {e.op} in formula")
    if isinstance(e, ast.Temporal):
        if e.op == "X":
            return ast.Temporal("X", to_nnf(e.sub, neg))
        if e.op == "F":  # F f == TRUE U f ; !F f == FALSE R !f
            if neg:
                return ast.TemporalBin("R", ast.FALSE_E, to_nnf(e.sub, True))
            return ast.TemporalBin("U", ast.TRUE_E, to_nnf(e.sub, False))
        if e.op == "G":  # G f == FALSE R f ; !G f == TRUE U !f
            if neg:
                return ast.TemporalBin("U", ast.TRUE_E, to_nnf(e.sub, True))
            return ast.TemporalBin("R", ast.FALSE_E, to_nnf(e.sub, False))
        raise TypeError(e.op)
    if isinstance(e, ast.TemporalBin):
        if e.op == "U":
            op = "R" if neg else "U"
        elif e.op == "R":
            op = "U" if neg else "R"
        else:
            raise TypeError(e.op)
        return ast.TemporalBin(op, to_nnf(e.left, neg), to_nnf(e.right, neg))
    raise TypeError(e)


# ---------------------------------------------------------------- lasso semantics

def eval_lasso(formula: ast.Expr, prefix: list[frozenset], loop: list[frozenset]) -> bool:
    """Truth of a formula on the ultimately periodic word prefix·loop^ω.

    Subformula truth across all positions is computed as bitmasks with a
    fixpoint pass for the recursive operators; this follows the textbook
    semantics directly and is independent of the automaton translation.
    """
    assert loop, "a lasso needs a non-empty loop"
    word = list(prefix) + list(loop)
    n = len(word)
    loop_start = len(prefix)
    succ = [i + 1 for i in range(n)]
    succ[n - 1] = loop_start
    full = (1 << n) - 1

    def shift(mask: int) -> int:
        # result bit i = mask bit succ(i)
        out = 0
        for i in range(n):
            if mask & (1 << succ[i]):
                out |= 1 << i
        return out

    cache: dict[ast.Expr, int] = {}

    def truth(e: ast.Expr) -> int:
        got = cache.get(e)
        if got is not None:
            return got
        if isinstance(e, ast.ConstE):
            mask = full if e.value.data else 0
        elif is_atom(e):
            mask = 0
            for i, letter in enumerate(word):
                if e in letter:
                    mask |= 1 << i
        elif isinstance(e, ast.Unary) and e.op == "!":
            mask = full & ~truth(e.sub)
        elif isinstance(e, ast.Binary) and e.op == "&&":
            mask = truth(e.left) & truth(e.right)
        elif isinstance(e, ast.Binary) and e.op == "||":
            mask = truth(e.left) | truth(e.right)
        elif isinstance(e, ast.Binary) and e.op == "->":
            mask = (full & ~truth(e.left)) | truth(e.right)
        elif isinstance(e, ast.Temporal) and e.op == "X":
            mask = shift(truth(e.sub))
        elif isinstance(e, ast.Temporal) and e.op == "F":
            sub = truth(e.sub)
            mask = sub
            for _ in range(n):
                mask = sub | shift(mask)
        elif isinstance(e, ast.Temporal) and e.op == "G":
            sub = truth(e.sub)
            mask = sub
            for _ in range(n):
                mask = sub & shift(mask)
        elif isinstance(e, ast.TemporalBin) and e.op == "U":
            left, right = truth(e.left), truth(e.right)
            mask = right
            for _ in range(n):
                mask = right | (left & shift(mask))
        elif isinstance(e, ast.TemporalBin) and e.op == "R":
            left, right = truth(e.left), truth(e.right)
            mask = right
            for _ in range(n):
                mask = right & (left | shift(mask))
        else:
            raise TypeError(e)
        cache[e] = mask
        return mask

    return bool(truth(formula) & 1)
