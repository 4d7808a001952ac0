"""Joint-transition semantics of a compiled system.

One step is a single sender firing a send edge plus, for every other
instance, exactly one of: a receive edge (connected and admitted by the
sender predicate), idling because it is not connected, or idling because
a broadcast's sender predicate rules it out.  On a named (multicast)
channel every connected instance must take a receive edge or the send is
blocked; on the broadcast channel instances excluded by the sender
predicate idle, but a connected, admitted instance with no enabled
receive edge still blocks the send (input-enabledness is linted, not
assumed).

`Engine.oracle` re-derives the same step set by brute force: it
enumerates candidate messages and per-instance successor valuations and
filters them through the compiled transition predicates evaluated as
formulas, providing an independent check of the operational path.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import EmptyInitialSet, OracleTooLarge
from .eval import Env, evaluate, partial_eval, substitute_common, truthy
from .lang import ast
from .lang.ast import EMPTY, STAR, Value
from .lang.pretty import expr_text
from .symbolic import CompiledInstance, CompiledSystem, GuardedTransition
from .types import Warning

# per-instance valuations in the agent's variable order; a system state
# is one tuple per instance
LocalState = tuple[Value, ...]
SystemState = tuple[LocalState, ...]

RECEIVED = "received"
IDLE_NOT_CONNECTED = "idle-not-connected"
IDLE_BROADCAST_EXCLUDED = "idle-broadcast-excluded"


@dataclass(frozen=True)
class Message:
    channel: Value
    data: tuple[tuple[str, Value], ...]       # declaration order, total
    sender: str
    send_pred: ast.Expr                       # residual over common variables


@dataclass(frozen=True)
class ReceiverOutcome:
    kind: str                                 # RECEIVED / IDLE_*
    edge_label: str | None = None


@dataclass(frozen=True)
class JointTransition:
    sender_index: int
    sender_id: str
    label: str
    source_state: str
    target_state: str
    message: Message
    outcomes: tuple[tuple[str, ReceiverOutcome], ...]  # (instance id, outcome), j != k
    successor: SystemState
    fired_sends: frozenset[tuple[str, str]]            # {(instance, label)}
    fired_recvs: frozenset[tuple[str, str]]

    def key(self) -> tuple:
        return (self.sender_id, self.label, self.message.channel,
                self.message.data, self.outcomes, self.successor)

    def describe(self) -> str:
        data = ", ".join(f"{n}={ast.value_text(v)}" for n, v in self.message.data)
        return (f"{self.sender_id}.{self.label} on "
                f"{ast.value_text(self.message.channel)} ({data})")


@dataclass(frozen=True)
class _SendOption:
    edge: GuardedTransition
    channel: Value
    data: tuple[tuple[str, Value], ...]
    residual_pred: ast.Expr
    next_local: LocalState


@dataclass
class LintReport:
    warnings: list[Warning] = field(default_factory=list)
    infos: list[Warning] = field(default_factory=list)

    def codes(self) -> list[str]:
        return [w.code for w in self.warnings]


class Engine:
    """Execution engine with per-local-state memoisation."""

    def __init__(self, system: CompiledSystem):
        self.system = system
        self.instances = system.instances
        self._send_cache: dict[tuple[int, LocalState], list[_SendOption]] = {}
        self._recv_cache: dict[tuple, list[tuple[GuardedTransition, LocalState]]] = {}
        self._conn_cache: dict[tuple[int, LocalState, Value], bool] = {}
        self._cv_cache: dict[tuple[int, LocalState], dict[str, Value]] = {}
        self._var_index: list[dict[str, int]] = [
            {name: i for i, name in enumerate(inst.agent.var_order)}
            for inst in self.instances
        ]

    # ------------------------------------------------------------ helpers

    def locals_of(self, index: int, local: LocalState) -> dict[str, Value]:
        return dict(zip(self.instances[index].agent.var_order, local))

    def value_of(self, state: SystemState, instance_id: str, var: str) -> Value:
        inst = self.system.instance(instance_id)
        return state[inst.index][self._var_index[inst.index][var]]

    def _apply_updates(self, index: int, local: LocalState,
                       updates: tuple[tuple[str, ast.Expr], ...],
                       env: Env, target_state: str) -> LocalState:
        # all right-hand sides read the pre-state
        new = list(local)
        vi = self._var_index[index]
        for name, rhs in updates:
            new[vi[name]] = evaluate(rhs, env)
        new[vi["st"]] = ast.statev(target_state)
        return tuple(new)

    # ------------------------------------------------------------ initial states

    def initial_states(self) -> list[SystemState]:
        per_instance: list[list[LocalState]] = []
        for inst in self.instances:
            agent = inst.agent
            domains = [agent.domains[v] for v in agent.var_order]
            matches = []
            for combo in itertools.product(*domains):
                env = Env(locals=dict(zip(agent.var_order, combo)))
                if truthy(inst.theta, env):
                    matches.append(combo)
            if not matches:
                raise EmptyInitialSet(
                    f"instance {inst.instance_id}: initial condition unsatisfiable")
            per_instance.append(matches)
        return [tuple(combo) for combo in itertools.product(*per_instance)]

    # ------------------------------------------------------------ per-instance views

    def send_options(self, index: int, local: LocalState) -> list[_SendOption]:
        key = (index, local)
        cached = self._send_cache.get(key)
        if cached is not None:
            return cached
        inst = self.instances[index]
        env = Env(locals=self.locals_of(index, local))
        st = local[self._var_index[index]["st"]]
        options: list[_SendOption] = []
        for edge in inst.agent.send_rel:
            if st.data != edge.source:
                continue
            if not truthy(edge.command.pre, env):
                continue
            ch = evaluate(edge.command.channel, env)
            if ch == EMPTY:
                continue  # a send towards the disconnected link yields no message
            assigned = dict(edge.command.data_assign)
            data = tuple(
                (d, evaluate(assigned[d], env) if d in assigned else ast.UNDEF)
                for d in self.system.model.data_vars)
            residual = partial_eval(
                edge.command.send_pred,
                Env(locals=env.locals, data=dict(data), channel=ch))
            nxt = self._apply_updates(index, local, edge.command.updates, env,
                                      edge.target)
            options.append(_SendOption(edge, ch, data, residual, nxt))
        self._send_cache[key] = options
        return options

    def connected(self, index: int, local: LocalState, ch: Value) -> bool:
        if ch == STAR:
            return True  # every agent listens on the broadcast channel
        key = (index, local, ch)
        cached = self._conn_cache.get(key)
        if cached is None:
            env = Env(locals=self.locals_of(index, local), channel=ch)
            cached = truthy(self.instances[index].agent.receive_guard, env)
            self._conn_cache[key] = cached
        return cached

    def common_view(self, index: int, local: LocalState) -> dict[str, Value]:
        key = (index, local)
        cached = self._cv_cache.get(key)
        if cached is None:
            env = Env(locals=self.locals_of(index, local))
            cached = {cv: evaluate(e, env)
                      for cv, e in self.instances[index].agent.relabel.items()}
            self._cv_cache[key] = cached
        return cached

    def admitted(self, option: _SendOption, index: int, local: LocalState) -> bool:
        """Does this receiver's common-variable view satisfy the residual
        sender predicate?"""
        residual = option.residual_pred
        if residual == ast.TRUE_E:
            return True
        if residual == ast.FALSE_E:
            return False
        return truthy(residual, Env(common=self.common_view(index, local)))

    def recv_options(self, index: int, local: LocalState, ch: Value,
                     data: tuple[tuple[str, Value], ...]
                     ) -> list[tuple[GuardedTransition, LocalState]]:
        key = (index, local, ch, data)
        cached = self._recv_cache.get(key)
        if cached is not None:
            return cached
        inst = self.instances[index]
        env = Env(locals=self.locals_of(index, local), data=dict(data))
        st = local[self._var_index[index]["st"]]
        options = []
        for edge in inst.agent.recv_rel:
            if st.data != edge.source:
                continue
            if evaluate(edge.command.channel, env) != ch:
                continue
            if not truthy(edge.command.pre, env):
                continue
            nxt = self._apply_updates(index, local, edge.command.updates, env,
                                      edge.target)
            options.append((edge, nxt))
        self._recv_cache[key] = options
        return options

    # ------------------------------------------------------------ joint steps

    def enabled_transitions(self, state: SystemState) -> list[JointTransition]:
        out: list[JointTransition] = []
        for k, sender in enumerate(self.instances):
            for option in self.send_options(k, state[k]):
                out.extend(self._joint_for_option(state, k, option))
        return out

    def _joint_for_option(self, state: SystemState, k: int,
                          option: _SendOption) -> list[JointTransition]:
        is_broadcast = option.channel == STAR
        fixed: list[tuple[int, ReceiverOutcome]] = []
        participants: list[tuple[int, list[tuple[GuardedTransition, LocalState]]]] = []
        for j in range(len(self.instances)):
            if j == k:
                continue
            if not self.connected(j, state[j], option.channel):
                fixed.append((j, ReceiverOutcome(IDLE_NOT_CONNECTED)))
                continue
            if not self.admitted(option, j, state[j]):
                if is_broadcast:
                    fixed.append((j, ReceiverOutcome(IDLE_BROADCAST_EXCLUDED)))
                    continue
                return []  # a connected multicast peer refuses: blocked
            choices = self.recv_options(j, state[j], option.channel, option.data)
            if not choices:
                return []  # admitted but unable to receive: blocked (even on star)
            participants.append((j, choices))

        sender = self.instances[k]
        message = Message(option.channel, option.data, sender.instance_id,
                          option.residual_pred)
        results = []
        for combo in itertools.product(*(choices for _, choices in participants)):
            successor = list(state)
            successor[k] = option.next_local
            outcomes: dict[int, ReceiverOutcome] = dict(fixed)
            recvs = []
            for (j, _), (edge, nxt) in zip(participants, combo):
                successor[j] = nxt
                outcomes[j] = ReceiverOutcome(RECEIVED, edge.label)
                recvs.append((self.instances[j].instance_id, edge.label))
            ordered = tuple(
                (self.instances[j].instance_id, outcomes[j])
                for j in sorted(outcomes))
            results.append(JointTransition(
                k, sender.instance_id, option.edge.label,
                option.edge.source, option.edge.target, message, ordered,
                tuple(successor),
                frozenset({(sender.instance_id, option.edge.label)}),
                frozenset(recvs)))
        return results

    # ------------------------------------------------------------ oracle

    def oracle(self, state: SystemState, max_agents: int = 3,
               max_domain: int = 6) -> list[JointTransition]:
        """Re-derive the step set by evaluating the compiled transition
        predicates over exhaustively enumerated messages and successors."""
        if len(self.instances) > max_agents:
            raise OracleTooLarge(f"{len(self.instances)} instances (max {max_agents})")
        for inst in self.instances:
            for var, dom in inst.agent.domains.items():
                if len(dom) > max_domain:
                    raise OracleTooLarge(
                        f"{inst.instance_id}.{var}: domain of {len(dom)} values")
        data_domains = [
            [(d, v) for v in self.system.model.data_domain(d)]
            for d in self.system.model.data_vars]
        for dom in data_domains:
            if len(dom) > max_domain + 1:  # +1 for the implicit undef
                raise OracleTooLarge(f"data domain of {len(dom)} values")
        channels = self.system.model.message_channels()
        if len(channels) > max_domain:
            raise OracleTooLarge(f"{len(channels)} channels")

        out: list[JointTransition] = []
        for k, sender in enumerate(self.instances):
            sender_locals = self.locals_of(k, state[k])
            for edge in sender.agent.send_rel:
                for ch in channels:
                    for data in itertools.product(*data_domains):
                        out.extend(self._oracle_case(state, k, edge, ch, data,
                                                     sender_locals))
        return out

    def _oracle_case(self, state: SystemState, k: int, edge: GuardedTransition,
                     ch: Value, data: tuple[tuple[str, Value], ...],
                     sender_locals: dict[str, Value]) -> list[JointTransition]:
        sender = self.instances[k]
        data_map = dict(data)
        sender_nexts = [
            cand for cand in self._all_valuations(k)
            if truthy(edge.pred, Env(locals=sender_locals,
                                     primed=self.locals_of(k, cand),
                                     data=data_map, channel=ch))
        ]
        if not sender_nexts:
            return []

        per_receiver: list[list[tuple[int, ReceiverOutcome, LocalState]]] = []
        for j in range(len(self.instances)):
            if j == k:
                continue
            j_locals = self.locals_of(j, state[j])
            cv = {name: evaluate(e, Env(locals=j_locals))
                  for name, e in self.instances[j].agent.relabel.items()}
            pi_ok = truthy(edge.command.send_pred,
                           Env(locals=sender_locals, data=data_map, channel=ch,
                               common=cv))
            conn = ch == STAR or truthy(
                self.instances[j].agent.receive_guard,
                Env(locals=j_locals, channel=ch))
            options: list[tuple[int, ReceiverOutcome, LocalState]] = []
            for cand in self._all_valuations(j):
                cand_locals = self.locals_of(j, cand)
                if conn and pi_ok:
                    for redge in self.instances[j].agent.recv_rel:
                        if truthy(redge.pred, Env(locals=j_locals,
                                                  primed=cand_locals,
                                                  data=data_map, channel=ch)):
                            options.append(
                                (j, ReceiverOutcome(RECEIVED, redge.label), cand))
                if not conn and cand == state[j]:
                    options.append((j, ReceiverOutcome(IDLE_NOT_CONNECTED), cand))
                if ch == STAR and not pi_ok and cand == state[j]:
                    options.append(
                        (j, ReceiverOutcome(IDLE_BROADCAST_EXCLUDED), cand))
            if not options:
                return []
            per_receiver.append(options)

        results = []
        residual = partial_eval(edge.command.send_pred,
                                Env(locals=sender_locals, data=data_map, channel=ch))
        message = Message(ch, data, sender.instance_id, residual)
        for sender_next in sender_nexts:
            for combo in itertools.product(*per_receiver):
                successor = list(state)
                successor[k] = sender_next
                outcomes = {}
                recvs = []
                for j, outcome, cand in combo:
                    successor[j] = cand
                    outcomes[j] = outcome
                    if outcome.kind == RECEIVED:
                        recvs.append(
                            (self.instances[j].instance_id, outcome.edge_label))
                ordered = tuple(
                    (self.instances[j].instance_id, outcomes[j])
                    for j in sorted(outcomes))
                results.append(JointTransition(
                    k, sender.instance_id, edge.label, edge.source, edge.target,
                    message, ordered, tuple(successor),
                    frozenset({(sender.instance_id, edge.label)}),
                    frozenset(recvs)))
        return results

    def _all_valuations(self, index: int) -> list[LocalState]:
        agent = self.instances[index].agent
        return list(itertools.product(*(agent.domains[v] for v in agent.var_order)))

    # ------------------------------------------------------------ lint

    def lint(self) -> LintReport:
        report = LintReport()
        report.warnings.extend(w for w in self.system.warnings
                               if w.severity == "warning")
        for agent in self.system.agents.values():
            for info in agent.automaton.infos:
                report.infos.append(Warning("automaton", f"{agent.name}: {info}",
                                            agent=agent.name, severity="info"))
            for gt in agent.send_rel:
                folded = partial_eval(gt.command.channel,
                                      Env(locals=self._constant_locals(agent.name)))
                if folded == ast.ConstE(EMPTY):
                    report.infos.append(Warning(
                        "empty-channel-send",
                        f"{agent.name}.{gt.label}: channel is the disconnected "
                        f"link; the send can never fire", agent=agent.name,
                        severity="info"))
        self._lint_input_enabledness(report)
        return report

    def _constant_locals(self, agent_name: str) -> dict[str, Value]:
        """Locals pinned by a top-level init equation and never updated."""
        agent = self.system.agents[agent_name]
        updated: set[str] = set()
        for gt in agent.send_rel + agent.recv_rel:
            updated.update(n for n, _ in gt.command.updates)
        pinned: dict[str, Value] = {}

        def collect(e: ast.Expr) -> None:
            if isinstance(e, ast.Binary) and e.op == "&&":
                collect(e.left)
                collect(e.right)
            elif isinstance(e, ast.Binary) and e.op == "==":
                if isinstance(e.left, ast.LocalVar) and isinstance(e.right, ast.ConstE):
                    pinned[e.left.name] = e.right.value
                elif isinstance(e.right, ast.LocalVar) and isinstance(e.left, ast.ConstE):
                    pinned[e.right.name] = e.left.value
            elif isinstance(e, ast.Unary) and e.op == "!" and isinstance(e.sub, ast.LocalVar):
                pinned[e.sub.name] = ast.FALSE
            elif isinstance(e, ast.LocalVar):
                pinned[e.name] = ast.TRUE

        collect(agent.theta)
        return {n: v for n, v in pinned.items() if n not in updated}

    def _lint_input_enabledness(self, report: LintReport) -> None:
        """Flag agents that sit in the audience of some broadcast but have a
        control state with no receive edge able to take that message."""
        counts: dict[str, int] = {}
        for inst in self.instances:
            counts[inst.agent.name] = counts.get(inst.agent.name, 0) + 1

        gaps: dict[str, list[str]] = {}
        for sender_name, sender in self.system.agents.items():
            s_consts = self._constant_locals(sender_name)
            for gt in sender.send_rel:
                chan = partial_eval(gt.command.channel, Env(locals=s_consts))
                if chan != ast.ConstE(STAR):
                    continue
                assigned = dict(gt.command.data_assign)
                data_known: dict[str, Value] = {}
                for d in self.system.model.data_vars:
                    if d not in assigned:
                        data_known[d] = ast.UNDEF
                    else:
                        folded = partial_eval(assigned[d], Env(locals=s_consts))
                        if isinstance(folded, ast.ConstE):
                            data_known[d] = folded.value
                residual = partial_eval(
                    gt.command.send_pred,
                    Env(locals=s_consts, data=data_known, channel=STAR))
                for recv_name, receiver in self.system.agents.items():
                    others = counts.get(recv_name, 0) - (1 if recv_name == sender_name else 0)
                    if others < 1:
                        continue
                    r_consts = self._constant_locals(recv_name)
                    admitted = partial_eval(
                        substitute_common(residual, receiver.relabel),
                        Env(locals=r_consts))
                    if isinstance(admitted, ast.ConstE) and not admitted.value.data:
                        continue  # never in this broadcast's audience
                    for q in receiver.automaton.states:
                        if q not in receiver.automaton.reachable():
                            continue
                        if not self._maybe_receivable(receiver, q, r_consts, data_known):
                            gaps.setdefault(recv_name, []).append(
                                f"{q} cannot take {sender_name}.{gt.label}")
        for name, details in gaps.items():
            report.warnings.append(Warning(
                "not-input-enabled",
                f"agent {name} is not broadcast input-enabled: "
                + "; ".join(sorted(set(details))), agent=name))

    def _maybe_receivable(self, receiver, q: str, consts: dict[str, Value],
                          data_known: dict[str, Value]) -> bool:
        for gt in receiver.recv_rel:
            if gt.source != q:
                continue
            chan = partial_eval(gt.command.channel, Env(locals=consts))
            if isinstance(chan, ast.ConstE) and chan.value != STAR:
                continue
            pre = partial_eval(gt.command.pre, Env(locals=consts, data=data_known))
            if pre == ast.FALSE_E:
                continue
            return True
        return False


def transition_set(transitions: list[JointTransition]) -> set[tuple]:
    return {t.key() for t in transitions}


def describe_message(m: Message) -> str:
    data = ", ".join(f"{n}={ast.value_text(v)}" for n, v in m.data)
    return (f"ch={ast.value_text(m.channel)} data[{data}] from {m.sender} "
            f"admitting {expr_text(m.send_pred)}")
