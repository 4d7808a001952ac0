from __future__ import annotations

import random

import pytest

from rmas.corpus import fixture_names, load_fixture
from rmas.errors import (
    DuplicateInstanceId,
    IllegalCharacter,
    ModelSyntaxError,
    RmasError,
    UnknownAgentType,
)
from rmas.lang import ast
from rmas.lang.parser import (
    parse_constraint,
    parse_model,
    parse_property,
    parse_property_file,
)
from rmas.lang.pretty import model_text

MINI_HEADER = """
enums:
  Msg { ping }
channels: a
message-structure: MSG: Msg
communication-variables: ready: bool
"""


def mini_model(process: str, extra_agents: str = "",
               system: str = "system = A(a1, TRUE)") -> str:
    return f"""{MINI_HEADER}
agent A
  local: x: bool
  init: !x
  relabel:
    ready <- TRUE
  receive-guard: ch == star
  repeat: {process}
{extra_agents}
{system}
"""


class TestParseModel:
    def test_corpus_shape(self):
        model = parse_model(load_fixture("resource-allocation").model_text)
        assert len(model.agents) == 3
        assert len(model.instances) == 7
        assert [i.instance_id for i in model.instances] == [
            "client1", "client2", "client3", "manager",
            "machine1", "machine2", "machine3"]

    def test_unknown_agent_type(self):
        text = MINI_HEADER + "\nsystem = A(a1, TRUE)"
        with pytest.raises(UnknownAgentType):
            parse_model(text)

    def test_duplicate_instance_id(self):
        text = mini_model("( go: <TRUE> * ! (TRUE) (MSG := ping) [] )",
                          system="system = A(a1, TRUE) || A(a1, TRUE)")
        with pytest.raises(DuplicateInstanceId):
            parse_model(text)

    def test_extra_init_is_an_expression(self):
        model = parse_model(load_fixture("resource-allocation").model_text)
        machine1 = model.instances[4]
        assert machine1.instance_id == "machine1"
        e = machine1.extra_init
        assert isinstance(e, ast.Binary) and e.op == "&&"

    def test_seq_binds_tighter_than_choice(self):
        m = parse_model(mini_model(
            "( a1l: <TRUE> * ! (TRUE) (MSG := ping) [] ;"
            "  a2l: <TRUE> * ! (TRUE) (MSG := ping) [] "
            "  + a3l: <TRUE> * ! (TRUE) (MSG := ping) [] )"))
        p = m.agents[0].process
        assert isinstance(p, ast.Choice)
        assert isinstance(p.left, ast.Seq)

    def test_seq_and_choice_right_associative(self):
        cmd = "<TRUE> * ! (TRUE) (MSG := ping) []"
        m = parse_model(mini_model(f"( l1: {cmd} ; l2: {cmd} ; l3: {cmd} )"))
        p = m.agents[0].process
        assert isinstance(p, ast.Seq) and isinstance(p.right, ast.Seq)
        assert isinstance(p.left, ast.Cmd)
        m = parse_model(mini_model(f"( l1: {cmd} + l2: {cmd} + l3: {cmd} )"))
        p = m.agents[0].process
        assert isinstance(p, ast.Choice) and isinstance(p.right, ast.Choice)

    def test_every_command_labeled(self):
        m = parse_model(load_fixture("resource-allocation").model_text)
        for agent in m.agents:
            for cmd in ast.command_leaves(agent.process):
                assert cmd.label
        client = m.agent("Client")
        labels = [c.label for c in ast.command_leaves(client.process)]
        # the one unlabeled receive is the 8th command in source order
        assert "Client_cmd8" in labels

    def test_send_xor_receive_shape(self):
        m = parse_model(load_fixture("resource-allocation").model_text)
        for agent in m.agents:
            for cmd in ast.command_leaves(agent.process):
                if cmd.kind == "send":
                    assert cmd.send_pred is not None
                else:
                    assert cmd.send_pred is None and cmd.data_assign == ()

    def test_reserved_names_rejected(self):
        bad = mini_model("( go: <TRUE> * ! (TRUE) (MSG := ping) [] )").replace(
            "x: bool", "undef: bool")
        with pytest.raises(ModelSyntaxError):
            parse_model(bad)

    def test_guard_with_parenthesized_gt(self):
        m = parse_model(
            MINI_HEADER.replace("ready: bool", "ready: bool") + """
agent A
  local: n: int[0..30]
  init: n == 0
  relabel:
    ready <- (n > 20)
  receive-guard: ch == star
  repeat: ( go: <(n > 2) && TRUE> * ! (TRUE) (MSG := ping) [n := n + 1] )
system = A(a1, TRUE)
""")
        cmd = ast.command_leaves(m.agents[0].process)[0]
        assert isinstance(cmd.pre, ast.Binary)


class TestRoundTrip:
    @pytest.mark.parametrize("name", fixture_names())
    def test_fixture_round_trip(self, name):
        model = parse_model(load_fixture(name).model_text)
        printed = model_text(model)
        again = parse_model(printed)
        assert again == model


class TestTotality:
    def test_random_bytes_never_crash(self):
        rng = random.Random(20240811)
        alphabet = "abc(){}[]<>!?*+;:=&|#->. \n123_"
        for _ in range(400):
            text = "".join(rng.choice(alphabet)
                           for _ in range(rng.randrange(0, 60)))
            try:
                parse_model(text)
            except RmasError as err:
                assert isinstance(err, (ModelSyntaxError, IllegalCharacter,
                                        UnknownAgentType, DuplicateInstanceId))
                assert err.pos is not None

    def test_deep_nesting_reports_error(self):
        text = mini_model("( go: <" + "(" * 500 + "TRUE" + ")" * 500 +
                          "> * ! (TRUE) (MSG := ping) [] )")
        with pytest.raises(ModelSyntaxError):
            parse_model(text)


class TestParseProperty:
    def test_synchronisation_property(self):
        f = parse_property("G (manager-sForward -> X machine1-rForward)")
        assert isinstance(f, ast.Temporal) and f.op == "G"
        body = f.sub
        assert isinstance(body, ast.Binary) and body.op == "->"
        assert body.left == ast.InstVar("manager", "sForward")
        assert isinstance(body.right, ast.Temporal) and body.right.op == "X"
        assert body.right.sub == ast.InstVar("machine1", "rForward")

    def test_constant_true(self):
        assert parse_property("TRUE") == ast.ConstE(ast.TRUE)

    def test_eventually_variable_atom(self):
        f = parse_property("F (client1-mLink != empty)")
        assert isinstance(f, ast.Temporal) and f.op == "F"
        cmp = f.sub
        assert isinstance(cmp, ast.Binary) and cmp.op == "!="
        assert cmp.left == ast.InstVar("client1", "mLink")

    def test_until_right_associative(self):
        f = parse_property("a-x U b-y U c-z")
        assert isinstance(f, ast.TemporalBin) and f.op == "U"
        assert isinstance(f.right, ast.TemporalBin)

    def test_single_char_connectives(self):
        f = parse_property("a-x & b-y | !c-z")
        assert isinstance(f, ast.Binary) and f.op == "||"

    def test_property_file_with_expectations(self):
        props = parse_property_file("""
# two properties
one : G (a-x -> F b-y) ; expect fails
two : TRUE ;
""")
        assert [p.name for p in props] == ["one", "two"]
        assert props[0].expect == "fails"
        assert props[1].expect is None

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ModelSyntaxError):
            parse_property("G (a-x) extra")


class TestParseConstraint:
    def test_next_term(self):
        c = parse_constraint("next(client1-cLink) == c")
        assert isinstance(c, ast.Binary) and c.op == "=="
        assert c.left == ast.NextInstVar("client1", "cLink")

    def test_label_and_state_mix(self):
        c = parse_constraint("client1-sReserve && next(client2-cLink) == empty")
        assert isinstance(c, ast.Binary) and c.op == "&&"

    def test_temporal_operators_rejected(self):
        with pytest.raises(ModelSyntaxError):
            parse_constraint("G (client1-cLink == c)")
