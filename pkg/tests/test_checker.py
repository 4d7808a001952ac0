from __future__ import annotations

import pytest

import rmas
from rmas.checker import (
    AugmentedState,
    atoms_at,
    bounded_check,
    model_check,
    validate_lasso,
)
from rmas.corpus import load_fixture
from rmas.errors import StateSpaceBudgetExceeded, UnknownLabel, UnknownVariable
from rmas.lang import ast
from rmas.lang.parser import parse_property, parse_property_file
from rmas.ltl import atoms_of, resolve_formula
from rmas.semantics import Engine


@pytest.fixture(scope="module")
def corpus():
    system = rmas.load_system(load_fixture("resource-allocation").model_text)
    return system, Engine(system)


class TestAtomsAt:
    def test_send_fires_now_receive_latches_next(self, corpus):
        system, engine = corpus
        formula = resolve_formula(
            parse_property("G (manager-sForward -> X machine1-rForward)"), system)
        atoms = tuple(atoms_of(formula))
        send_atom = next(a for a in atoms if a.fire_kind == "send")
        recv_atom = next(a for a in atoms if a.fire_kind == "recv")

        state = engine.initial_states()[0]
        aug = AugmentedState(state, frozenset())
        # drive: reserve, request, then the forward itself
        for _ in range(2):
            step = engine.enabled_transitions(aug.base)[0]
            aug = AugmentedState(step.successor, step.fired_recvs)
        forward = engine.enabled_transitions(aug.base)[0]
        assert forward.label == "sForward"
        now = atoms_at(engine, aug, forward, atoms)
        assert send_atom in now and recv_atom not in now
        after = AugmentedState(forward.successor, forward.fired_recvs)
        nxt_step = (engine.enabled_transitions(after.base) or [None])[0]
        nxt = atoms_at(engine, after, nxt_step, atoms)
        assert recv_atom in nxt and send_atom not in nxt

    def test_initial_position_has_no_latched_receives(self, corpus):
        system, engine = corpus
        formula = resolve_formula(parse_property("G (client1-rReserve -> TRUE)"),
                                  system)
        atoms = tuple(atoms_of(formula))
        aug = AugmentedState(engine.initial_states()[0], frozenset())
        step = engine.enabled_transitions(aug.base)[0]
        assert atoms_at(engine, aug, step, atoms) == frozenset()

    def test_stutter_position_is_label_free(self, deadlock_system):
        engine = Engine(deadlock_system)
        formula = resolve_formula(
            parse_property("G (t1-sTalk | l1-rTalk | t1-x)"), deadlock_system)
        atoms = tuple(atoms_of(formula))
        aug = AugmentedState(engine.initial_states()[0], frozenset())
        valuation = atoms_at(engine, aug, None, atoms)
        assert all(not isinstance(a, ast.LabelAtom) for a in valuation)
        # the state atom t1-x is still evaluated on the base state
        assert any(isinstance(a, ast.InstVar) for a in valuation)


class TestResolution:
    def test_unknown_label(self, corpus):
        system, _ = corpus
        with pytest.raises(UnknownLabel):
            resolve_formula(parse_property("F client1-sNope"), system)

    def test_unknown_instance(self, corpus):
        system, _ = corpus
        with pytest.raises(UnknownVariable):
            resolve_formula(parse_property("F ghost-sReserve"), system)

    def test_label_kinds(self, corpus):
        system, _ = corpus
        f = resolve_formula(parse_property("client1-sReserve & client1-rReserve"),
                            system)
        assert f.left.fire_kind == "send"
        assert f.right.fire_kind == "recv"


class TestModelCheck:
    def test_paper_stated_verdicts(self, corpus):
        system, engine = corpus
        v3 = model_check(system, parse_property(
            "G (manager-sForward -> X machine3-rForward)"), engine=engine)
        assert v3.status == "fails" and v3.lasso is not None
        v6 = model_check(system, parse_property(
            "G ((!machine1-asgn & machine1-rForward) -> machine1-sConnect)"),
            engine=engine)
        assert v6.status == "fails" and v6.lasso is not None

    def test_trivial_holds(self, corpus):
        system, engine = corpus
        assert model_check(system, parse_property("G TRUE"),
                           engine=engine).status == "holds"

    def test_fails_lassos_replay(self, corpus):
        system, engine = corpus
        props = parse_property_file(load_fixture("resource-allocation").properties_text)
        for prop in props:
            verdict = model_check(system, prop.formula, engine=engine)
            expected = {"holds": "holds", "fails": "fails"}[prop.expect]
            assert verdict.status == expected, prop.name
            if verdict.lasso is not None:
                validate_lasso(engine, verdict.formula, verdict.lasso)

    def test_budget_exceeded(self, corpus):
        system, engine = corpus
        with pytest.raises(StateSpaceBudgetExceeded):
            model_check(system, parse_property("G (client1-sReserve -> F TRUE)"),
                        budget=5, engine=engine)


class TestStutterCompletion:
    def test_deadlock_satisfies_state_tautology(self, deadlock_system):
        v = model_check(deadlock_system, parse_property("G (t1-x == t1-x)"))
        assert v.status == "holds"

    def test_deadlock_falsifies_eventual_label(self, deadlock_system):
        v = model_check(deadlock_system, parse_property("F t1-sTalk"))
        assert v.status == "fails"
        assert v.lasso is not None
        # the whole counterexample is the initial state stuttering
        assert all(p.step is None for p in v.lasso.loop)
        validate_lasso(Engine(deadlock_system), v.formula, v.lasso)

    def test_state_atoms_survive_the_deadlock(self, deadlock_system):
        # the talker keeps wanting to talk; the flag stays up forever
        v = model_check(deadlock_system, parse_property("G t1-x"))
        assert v.status == "holds"


class TestBoundedCheck:
    def test_bounded_finds_short_counterexample(self, corpus):
        system, engine = corpus
        v = bounded_check(system, parse_property(
            "G (manager-sForward -> X machine3-rForward)"), 30, engine=engine)
        assert v.status == "fails"
        assert len(v.lasso.prefix) + len(v.lasso.loop) <= 30

    def test_bounded_agrees_with_full_on_corpus(self, corpus):
        system, engine = corpus
        props = parse_property_file(load_fixture("resource-allocation").properties_text)
        for prop in props:
            full = model_check(system, prop.formula, engine=engine)
            bounded = bounded_check(system, prop.formula, 50, engine=engine)
            if bounded.status == "fails":
                assert full.status == "fails", prop.name
            if full.status == "fails":
                assert bounded.status == "fails", prop.name

    def test_f_false_fails_once_a_lasso_is_reachable(self, corpus):
        # every run refutes F FALSE; the bound just needs to close one
        # lasso (shortest: drive to the deadlock, then stutter)
        system, engine = corpus
        for k in (10, 30):
            v = bounded_check(system, parse_property("F FALSE"), k, engine=engine)
            assert v.status == "fails"
        v = bounded_check(system, parse_property("F FALSE"), 2, engine=engine)
        assert v.status == "inconclusive"

    def test_g_true_is_inconclusive_at_bound(self, corpus):
        system, engine = corpus
        v = bounded_check(system, parse_property("G TRUE"), 5, engine=engine)
        assert v.status == "inconclusive"


class TestDeterminism:
    def test_identical_lasso_across_runs(self, corpus):
        system, _ = corpus
        text = "G ((!machine1-asgn & machine1-rForward) -> machine1-sConnect)"
        v1 = model_check(system, parse_property(text))
        v2 = model_check(system, parse_property(text))
        key1 = [(p.step.key() if p.step else None) for p in v1.lasso.positions()]
        key2 = [(p.step.key() if p.step else None) for p in v2.lasso.positions()]
        assert key1 == key2
