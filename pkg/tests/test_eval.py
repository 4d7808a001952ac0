from __future__ import annotations

import itertools
import random

import pytest

from rmas.errors import UnboundSymbol
from rmas.eval import Env, evaluate, partial_eval, substitute_common, truthy
from rmas.lang import ast
from rmas.lang.ast import EMPTY, FALSE, TRUE, UNDEF, boolv, chanv, enumv, intv


def bexpr(op, left, right):
    return ast.Binary(op, left, right)


class TestEvaluate:
    def test_channel_equation(self):
        env = Env(locals={"cLink": chanv("c")})
        e = bexpr("==", ast.LocalVar("cLink"), ast.ConstE(chanv("c")))
        assert evaluate(e, env) == TRUE

    def test_negated_flag(self):
        env = Env(locals={"asgn": FALSE})
        assert evaluate(ast.Unary("!", ast.LocalVar("asgn")), env) == TRUE

    def test_message_field(self):
        env = Env(locals={}, data={"MSG": enumv("Msg", "reserve")})
        e = bexpr("==", ast.DataVar("MSG"), ast.ConstE(enumv("Msg", "reserve")))
        assert evaluate(e, env) == TRUE

    def test_undef_equality(self):
        env = Env(locals={"x": UNDEF, "y": intv(3)})
        undef = ast.ConstE(UNDEF)
        assert evaluate(bexpr("==", ast.LocalVar("x"), undef), env) == TRUE
        assert evaluate(bexpr("==", ast.LocalVar("y"), undef), env) == FALSE
        assert evaluate(bexpr("!=", ast.LocalVar("y"), undef), env) == TRUE

    def test_ordered_comparison_with_undef_is_false(self):
        env = Env(locals={"x": UNDEF})
        for op in ("<", "<=", ">", ">="):
            assert evaluate(bexpr(op, ast.LocalVar("x"), ast.ConstE(intv(1))), env) == FALSE

    def test_unbound_symbol_is_hard_error(self):
        with pytest.raises(UnboundSymbol):
            evaluate(ast.LocalVar("nope"), Env(locals={}))
        with pytest.raises(UnboundSymbol):
            evaluate(ast.DataVar("MSG"), Env(locals={}))

    def test_deterministic(self):
        env = Env(locals={"n": intv(2)})
        e = bexpr("+", ast.LocalVar("n"), ast.ConstE(intv(5)))
        assert evaluate(e, env) == evaluate(e, env) == intv(7)

    def test_clamp_saturates(self):
        env = Env(locals={"n": intv(5)})
        e = ast.Clamp(bexpr("+", ast.LocalVar("n"), ast.ConstE(intv(3))), 0, 5)
        assert evaluate(e, env) == intv(5)
        e = ast.Clamp(bexpr("-", ast.LocalVar("n"), ast.ConstE(intv(9))), 0, 5)
        assert evaluate(e, env) == intv(0)

    def test_clamp_random_never_leaves_bounds(self):
        rng = random.Random(7)
        for _ in range(200):
            lo = rng.randrange(-5, 3)
            hi = lo + rng.randrange(0, 6)
            n = rng.randrange(-20, 20)
            e = ast.Clamp(ast.ConstE(intv(n)), lo, hi)
            out = evaluate(e, Env())
            assert lo <= out.data <= hi


class TestSubstituteCommon:
    def test_role_substitution(self):
        pred = bexpr("==", ast.CommonVar("cv"), ast.ConstE(enumv("Role", "client")))
        out = substitute_common(pred, {"cv": ast.LocalVar("role")})
        assert out == bexpr("==", ast.LocalVar("role"),
                            ast.ConstE(enumv("Role", "client")))

    def test_no_occurrences(self):
        assert substitute_common(ast.TRUE_E, {"cv": ast.LocalVar("role")}) == ast.TRUE_E

    def test_default_undef_relabel_excludes(self):
        pred = bexpr("==", ast.CommonVar("cv"), ast.ConstE(enumv("Role", "mgr")))
        out = substitute_common(pred, {"cv": ast.ConstE(UNDEF)})
        assert evaluate(out, Env()) == FALSE


def _random_pred(rng, depth=0):
    """Boolean expression over locals a (bool), n (int 0..2) and common
    variables cv1 (bool), cv2 (int 0..2)."""
    leaves = [
        lambda: bexpr("==", ast.CommonVar("cv2"), ast.ConstE(intv(rng.randrange(3)))),
        lambda: ast.CommonVar("cv1"),
        lambda: bexpr("==", ast.LocalVar("n"), ast.ConstE(intv(rng.randrange(3)))),
        lambda: ast.LocalVar("a"),
        lambda: bexpr("<", ast.CommonVar("cv2"), ast.LocalVar("n")),
    ]
    if depth > 2 or rng.random() < 0.4:
        return rng.choice(leaves)()
    op = rng.choice(["&&", "||", "->", "!"])
    if op == "!":
        return ast.Unary("!", _random_pred(rng, depth + 1))
    return bexpr(op, _random_pred(rng, depth + 1), _random_pred(rng, depth + 1))


def test_substitution_lemma_randomized():
    """eval(subst(p, f), s) == eval(p, s + cv bound to eval(f(cv), s))."""
    rng = random.Random(20240812)
    relabel = {
        "cv1": ast.Unary("!", ast.LocalVar("a")),
        "cv2": ast.LocalVar("n"),
    }
    for _ in range(300):
        pred = _random_pred(rng)
        for a, n in itertools.product([FALSE, TRUE], [intv(i) for i in range(3)]):
            env = Env(locals={"a": a, "n": n})
            direct = evaluate(substitute_common(pred, relabel), env)
            cvs = {cv: evaluate(e, env) for cv, e in relabel.items()}
            indirect = evaluate(pred, Env(locals=env.locals, common=cvs))
            assert direct == indirect


class TestPartialEval:
    def test_residual_over_common_vars(self):
        # predicate mixing sender locals, data and common variables
        pred = bexpr("&&",
                     bexpr("==", ast.CommonVar("cv"), ast.LocalVar("role")),
                     bexpr("==", ast.DataVar("MSG"), ast.ConstE(enumv("Msg", "hi"))))
        env = Env(locals={"role": enumv("Role", "client")},
                  data={"MSG": enumv("Msg", "hi")}, channel=EMPTY)
        residual = partial_eval(pred, env)
        assert residual == bexpr("==", ast.CommonVar("cv"),
                                 ast.ConstE(enumv("Role", "client")))

    def test_constant_folding(self):
        e = bexpr("||", ast.ConstE(FALSE),
                  bexpr("==", ast.ConstE(intv(2)), ast.ConstE(intv(2))))
        assert partial_eval(e, Env()) == ast.TRUE_E

    def test_agreement_with_full_eval(self):
        rng = random.Random(99)
        for _ in range(200):
            pred = _random_pred(rng)
            env = Env(locals={"a": boolv(rng.random() < 0.5),
                              "n": intv(rng.randrange(3))},
                      common={"cv1": boolv(rng.random() < 0.5),
                              "cv2": intv(rng.randrange(3))})
            folded = partial_eval(pred, env)
            assert isinstance(folded, ast.ConstE)
            assert folded.value == evaluate(pred, env)
