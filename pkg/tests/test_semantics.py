from __future__ import annotations

import random

import pytest

import rmas
from rmas.errors import EmptyInitialSet, OracleTooLarge
from rmas.lang import ast
from rmas.semantics import (
    IDLE_BROADCAST_EXCLUDED,
    IDLE_NOT_CONNECTED,
    RECEIVED,
    Engine,
    transition_set,
)

TINY = """
enums:
  Msg { hi }
channels: a
message-structure: MSG: Msg
communication-variables: ready: bool

agent A
  local: x: int[1..3]
  init: x == 1 || x == 2
  relabel:
    ready <- TRUE
  receive-guard: ch == star
  repeat: ( go: <TRUE> * ! (TRUE) (MSG := hi) [] )
system = A(a1, TRUE)
"""


def outcomes_of(t):
    return {iid: (o.kind, o.edge_label) for iid, o in t.outcomes}


class TestInitialStates:
    def test_corpus_unique_initial(self, corpus_engine):
        states = corpus_engine.initial_states()
        assert len(states) == 1

    def test_client_initial_values(self, corpus_engine):
        state = corpus_engine.initial_states()[0]
        vals = {v: corpus_engine.value_of(state, "client1", v)
                for v in ("cLink", "mLink", "tLink", "role", "st")}
        assert vals == {
            "cLink": ast.chanv("c"),
            "mLink": ast.EMPTY,
            "tLink": ast.chanv("t"),
            "role": ast.enumv("Role", "client"),
            "st": ast.statev("s0"),
        }

    def test_disjunctive_init_enumerates(self):
        eng = Engine(rmas.load_system(TINY))
        states = eng.initial_states()
        assert len(states) == 2

    def test_unsatisfiable_init(self):
        eng = Engine(rmas.load_system(TINY.replace("x == 1 || x == 2", "x == 1 && x == 2")))
        with pytest.raises(EmptyInitialSet):
            eng.initial_states()


class TestEnabledTransitions:
    def test_initial_reserve_broadcasts(self, corpus_engine):
        state = corpus_engine.initial_states()[0]
        ts = corpus_engine.enabled_transitions(state)
        assert [(t.sender_id, t.label) for t in ts] == [
            ("client1", "sReserve"), ("client2", "sReserve"), ("client3", "sReserve")]
        t = ts[0]
        assert outcomes_of(t) == {
            "client2": (RECEIVED, "rReserve"),
            "client3": (RECEIVED, "rReserve"),
            "manager": (IDLE_BROADCAST_EXCLUDED, None),
            "machine1": (IDLE_BROADCAST_EXCLUDED, None),
            "machine2": (IDLE_BROADCAST_EXCLUDED, None),
            "machine3": (IDLE_BROADCAST_EXCLUDED, None),
        }
        assert corpus_engine.value_of(t.successor, "client2", "cLink") == ast.EMPTY
        assert corpus_engine.value_of(t.successor, "client3", "cLink") == ast.EMPTY
        assert corpus_engine.value_of(t.successor, "client1", "st") == ast.statev("s1")

    def test_request_multicast_after_reserve(self, corpus_engine):
        state = corpus_engine.initial_states()[0]
        reserve = corpus_engine.enabled_transitions(state)[0]
        ts = corpus_engine.enabled_transitions(reserve.successor)
        assert [(t.sender_id, t.label) for t in ts] == [("client1", "sRequest")]
        assert outcomes_of(ts[0]) == {
            "client2": (IDLE_NOT_CONNECTED, None),
            "client3": (IDLE_NOT_CONNECTED, None),
            "manager": (RECEIVED, "rRequest"),
            "machine1": (IDLE_NOT_CONNECTED, None),
            "machine2": (IDLE_NOT_CONNECTED, None),
            "machine3": (IDLE_NOT_CONNECTED, None),
        }
        assert ts[0].message.channel == ast.chanv("c")

    def _machine_state(self, corpus_engine, machine2_assigned: bool):
        """Hand-built configuration: both group-1 machines processing a
        forwarded request, machine1 already assigned."""
        eng = corpus_engine
        state = list(eng.initial_states()[0])
        insts = {inst.instance_id: inst.index for inst in eng.instances}

        def set_vals(iid, **vals):
            idx = insts[iid]
            agent = eng.instances[idx].agent
            local = list(state[idx])
            for name, value in vals.items():
                local[agent.var_order.index(name)] = value
            state[idx] = tuple(local)

        set_vals("machine1", cLink=ast.chanv("c"), asgn=ast.TRUE, st=ast.statev("s1"))
        set_vals("machine2", cLink=ast.chanv("c"),
                 asgn=ast.boolv(machine2_assigned), st=ast.statev("s1"))
        set_vals("manager", st=ast.statev("s2"))
        # park the clients where they cannot interfere
        set_vals("client1", cLink=ast.EMPTY, st=ast.statev("s1"))
        set_vals("client2", cLink=ast.EMPTY, st=ast.statev("s1"))
        set_vals("client3", cLink=ast.EMPTY, st=ast.statev("s1"))
        return tuple(state)

    def test_full_blocked_while_peer_unassigned(self, corpus_engine):
        state = self._machine_state(corpus_engine, machine2_assigned=False)
        ts = corpus_engine.enabled_transitions(state)
        assert not any(t.label == "sFull" for t in ts)
        # the unassigned peer, by contrast, can still offer a connection
        assert any(t.sender_id == "machine2" and t.label == "sConnect" for t in ts)

    def test_full_goes_through_when_group_assigned(self, corpus_engine):
        state = self._machine_state(corpus_engine, machine2_assigned=True)
        ts = corpus_engine.enabled_transitions(state)
        fulls = [t for t in ts if t.label == "sFull"]
        assert fulls
        t = fulls[0]
        assert outcomes_of(t)["manager"] == (RECEIVED, "rFull")
        assert outcomes_of(t)[
            "machine2" if t.sender_id == "machine1" else "machine1"
        ] == (RECEIVED, "rFull")

    def test_deadlock_multicast_has_no_steps(self, deadlock_system):
        eng = Engine(deadlock_system)
        state = eng.initial_states()[0]
        assert eng.enabled_transitions(state) == []

    def test_broadcast_fires_with_all_receivers_idle(self, exclude_system):
        eng = Engine(exclude_system)
        state = eng.initial_states()[0]
        ts = eng.enabled_transitions(state)
        assert len(ts) == 1
        assert all(o.kind == IDLE_BROADCAST_EXCLUDED
                   for _, o in ts[0].outcomes)

    def test_empty_channel_send_disabled(self):
        eng = Engine(rmas.load_system(TINY.replace(
            "go: <TRUE> * ! (TRUE) (MSG := hi) []",
            "go: <TRUE> empty ! (TRUE) (MSG := hi) []")))
        assert eng.enabled_transitions(eng.initial_states()[0]) == []

    def test_deterministic_order(self, ping_system):
        a, b = Engine(ping_system), Engine(ping_system)
        sa, sb = a.initial_states()[0], b.initial_states()[0]
        ta = [t.key() for t in a.enabled_transitions(sa)]
        tb = [t.key() for t in b.enabled_transitions(sb)]
        assert ta == tb


class TestInvariants:
    def _random_walk_states(self, system, steps, seed):
        eng = Engine(system)
        rng = random.Random(seed)
        state = eng.initial_states()[0]
        seen = [state]
        for _ in range(steps):
            ts = eng.enabled_transitions(state)
            if not ts:
                break
            state = rng.choice(ts).successor
            seen.append(state)
        return eng, seen

    def test_frame_property(self, ping_system):
        eng, states = self._random_walk_states(ping_system, 60, 1)
        for state in states:
            for t in eng.enabled_transitions(state):
                idx = {inst.instance_id: inst.index for inst in eng.instances}
                for iid, outcome in t.outcomes:
                    if outcome.kind != RECEIVED:
                        assert t.successor[idx[iid]] == state[idx[iid]]

    def test_multicast_atomicity(self, ping_system):
        eng, states = self._random_walk_states(ping_system, 60, 2)
        for state in states:
            for t in eng.enabled_transitions(state):
                if t.message.channel == ast.STAR:
                    continue
                for iid, outcome in t.outcomes:
                    inst = eng.system.instance(iid)
                    if eng.connected(inst.index, state[inst.index], t.message.channel):
                        assert outcome.kind == RECEIVED

    def test_fired_labels(self, corpus_engine):
        state = corpus_engine.initial_states()[0]
        t = corpus_engine.enabled_transitions(state)[0]
        assert t.fired_sends == frozenset({("client1", "sReserve")})
        assert t.fired_recvs == frozenset({("client2", "rReserve"),
                                           ("client3", "rReserve")})


class TestOracle:
    @pytest.mark.parametrize("fixture", ["ping", "deadlock-multicast",
                                         "broadcast-exclude"])
    def test_oracle_equivalence_on_walks(self, fixture, request):
        system = rmas.load_system(
            __import__("rmas.corpus", fromlist=["load_fixture"])
            .load_fixture(fixture).model_text)
        eng = Engine(system)
        rng = random.Random(hash(fixture) & 0xFFFF)
        state = eng.initial_states()[0]
        compared = 0
        for _ in range(40):
            fast = eng.enabled_transitions(state)
            slow = eng.oracle(state)
            assert transition_set(fast) == transition_set(slow)
            compared += 1
            if not fast:
                state = eng.initial_states()[0]
                continue
            state = rng.choice(fast).successor
        assert compared == 40

    def test_oracle_rejects_large_systems(self, corpus_engine):
        with pytest.raises(OracleTooLarge):
            corpus_engine.oracle(corpus_engine.initial_states()[0])


class TestLint:
    def test_corpus_exactly_two_warnings(self, corpus_engine):
        report = corpus_engine.lint()
        codes = sorted((w.code, w.agent) for w in report.warnings)
        assert codes == [("missing-relabel", "Machine"),
                         ("not-input-enabled", "Client")]

    def test_input_enabled_toy_is_clean(self, exclude_system):
        report = Engine(exclude_system).lint()
        assert report.warnings == []

    def test_manager_rep_info_is_not_a_warning(self, corpus_engine):
        report = corpus_engine.lint()
        assert any("rep" in i.message for i in report.infos)
