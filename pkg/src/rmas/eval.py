"""Expression evaluation, substitution and partial evaluation.

Comparison semantics with the unset value: ``x == undef`` is true iff x
is undef; ordered comparisons involving undef are false.  Arithmetic is
exact here; saturation happens through `Clamp` nodes that the
typechecker wraps around assignment right-hand sides.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import UnboundSymbol
from .lang import ast
from .lang.ast import FALSE, TRUE, UNDEF, Value, boolv


@dataclass
class Env:
    """Variable bindings for one evaluation; absent bindings are errors."""

    locals: Mapping[str, Value] = field(default_factory=dict)
    primed: Mapping[str, Value] | None = None
    data: Mapping[str, Value] | None = None
    common: Mapping[str, Value] | None = None
    channel: Value | None = None


def apply_unary(op: str, v: Value) -> Value:
    if op == "!":
        return boolv(not v.data)
    if op == "-":
        return Value("int", -v.data)
    raise ValueError(op)


def apply_binary(op: str, a: Value, b: Value) -> Value:
    if op == "==":
        return boolv(a == b)
    if op == "!=":
        return boolv(a != b)
    if op in ("<", "<=", ">", ">="):
        if a.kind != "int" or b.kind != "int":
            return FALSE  # ordered comparison involving undef
        x, y = a.data, b.data
        return boolv(x < y if op == "<" else x <= y if op == "<="
                     else x > y if op == ">" else x >= y)
    if op == "&&":
        return boolv(bool(a.data) and bool(b.data))
    if op == "||":
        return boolv(bool(a.data) or bool(b.data))
    if op == "->":
        return boolv((not a.data) or bool(b.data))
    if op == "+":
        return Value("int", a.data + b.data)
    if op == "-":
        return Value("int", a.data - b.data)
    raise ValueError(op)


def evaluate(e: ast.Expr, env: Env) -> Value:
    if isinstance(e, ast.ConstE):
        return e.value
    if isinstance(e, ast.LocalVar):
        v = env.locals.get(e.name)
        if v is None:
            raise UnboundSymbol(f"unbound local {e.name!r}")
        return v
    if isinstance(e, ast.Primed):
        if env.primed is None or e.name not in env.primed:
            raise UnboundSymbol(f"unbound primed variable {e.name}'")
        return env.primed[e.name]
    if isinstance(e, ast.DataVar):
        if env.data is None or e.name not in env.data:
            raise UnboundSymbol(f"unbound data variable {e.name!r}")
        return env.data[e.name]
    if isinstance(e, ast.CommonVar):
        if env.common is None or e.name not in env.common:
            raise UnboundSymbol(f"unbound common variable {e.name!r}")
        return env.common[e.name]
    if isinstance(e, ast.ChanMeta):
        if env.channel is None:
            raise UnboundSymbol("unbound channel meta-variable 'ch'")
        return env.channel
    if isinstance(e, ast.Unary):
        return apply_unary(e.op, evaluate(e.sub, env))
    if isinstance(e, ast.Binary):
        # short-circuit the boolean connectives
        if e.op == "&&":
            left = evaluate(e.left, env)
            return evaluate(e.right, env) if left.data else FALSE
        if e.op == "||":
            left = evaluate(e.left, env)
            return TRUE if left.data else evaluate(e.right, env)
        if e.op == "->":
            left = evaluate(e.left, env)
            return evaluate(e.right, env) if left.data else TRUE
        return apply_binary(e.op, evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, ast.Clamp):
        v = evaluate(e.sub, env)
        if v.kind != "int":
            return v
        return Value("int", min(max(v.data, e.lo), e.hi))
    if isinstance(e, ast.Name):
        raise UnboundSymbol(f"unresolved name {e.name!r}")
    raise UnboundSymbol(f"cannot evaluate {type(e).__name__} here")


def truthy(e: ast.Expr, env: Env) -> bool:
    return bool(evaluate(e, env).data)


def substitute_common(pred: ast.Expr, relabel: Mapping[str, ast.Expr]) -> ast.Expr:
    """Replace each common-variable occurrence by the receiver's relabel
    expression; the result references receiver locals only."""
    if isinstance(pred, ast.CommonVar):
        return relabel[pred.name]
    if isinstance(pred, ast.Unary):
        return ast.Unary(pred.op, substitute_common(pred.sub, relabel))
    if isinstance(pred, ast.Binary):
        return ast.Binary(pred.op, substitute_common(pred.left, relabel),
                          substitute_common(pred.right, relabel))
    if isinstance(pred, ast.Clamp):
        return ast.Clamp(substitute_common(pred.sub, relabel), pred.lo, pred.hi)
    return pred


def partial_eval(e: ast.Expr, env: Env) -> ast.Expr:
    """Fold everything the env binds; leave the rest symbolic.  Used to
    reduce a send predicate to its residual over common variables."""
    if isinstance(e, ast.ConstE):
        return e
    if isinstance(e, ast.LocalVar):
        v = env.locals.get(e.name)
        return ast.ConstE(v) if v is not None else e
    if isinstance(e, ast.DataVar):
        if env.data is not None and e.name in env.data:
            return ast.ConstE(env.data[e.name])
        return e
    if isinstance(e, ast.CommonVar):
        if env.common is not None and e.name in env.common:
            return ast.ConstE(env.common[e.name])
        return e
    if isinstance(e, ast.ChanMeta):
        return ast.ConstE(env.channel) if env.channel is not None else e
    if isinstance(e, ast.Unary):
        sub = partial_eval(e.sub, env)
        if isinstance(sub, ast.ConstE):
            return ast.ConstE(apply_unary(e.op, sub.value))
        return ast.Unary(e.op, sub)
    if isinstance(e, ast.Binary):
        left = partial_eval(e.left, env)
        right = partial_eval(e.right, env)
        if isinstance(left, ast.ConstE) and isinstance(right, ast.ConstE):
            return ast.ConstE(apply_binary(e.op, left.value, right.value))
        # boolean units
        if e.op == "&&":
            if left == ast.TRUE_E:
                return right
            if right == ast.TRUE_E:
                return left
            if ast.FALSE_E in (left, right):
                return ast.FALSE_E
        elif e.op == "||":
            if left == ast.FALSE_E:
                return right
            if right == ast.FALSE_E:
                return left
            if ast.TRUE_E in (left, right):
                return ast.TRUE_E
        return ast.Binary(e.op, left, right)
    if isinstance(e, ast.Clamp):
        sub = partial_eval(e.sub, env)
        if isinstance(sub, ast.ConstE) and sub.value.kind == "int":
            return ast.ConstE(Value("int", min(max(sub.value.data, e.lo), e.hi)))
        return ast.Clamp(sub, e.lo, e.hi)
    return e
