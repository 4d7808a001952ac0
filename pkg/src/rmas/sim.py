"""Interactive simulation sessions: random or constraint-guided stepping.

Constraints see the same label timing as the checker: a send atom refers
to the candidate step being filtered, a receive atom to the labels
latched by the previous step, `next(...)` terms to the candidate
successor, and bare variable atoms to the current state.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .checker import AugmentedState
from .errors import InfeasibleConstraint, RmasError
from .eval import apply_binary, apply_unary
from .lang import ast
from .lang.parser import parse_constraint
from .lang.pretty import expr_text
from .ltl import resolve_formula
from .semantics import Engine, JointTransition
from .symbolic import CompiledSystem

TRACE_FORMAT_VERSION = 1


@dataclass
class TraceStep:
    choice_index: int | None            # index into the enabled list; None = stutter
    step: JointTransition | None


@dataclass
class Session:
    session_id: str
    system: CompiledSystem
    engine: Engine
    seed: int
    rng: random.Random
    aug: AugmentedState
    trace: list[TraceStep] = field(default_factory=list)

    @property
    def deadlocked(self) -> bool:
        return not self.engine.enabled_transitions(self.aug.base)


def new_session(system: CompiledSystem, seed: int, session_id: str = "s1",
                engine: Engine | None = None) -> Session:
    engine = engine or Engine(system)
    rng = random.Random(seed)
    initials = engine.initial_states()
    state = initials[0] if len(initials) == 1 else rng.choice(initials)
    return Session(session_id, system, engine, seed, rng,
                   AugmentedState(state, frozenset()))


def _constraint_holds(session: Session, constraint: ast.Expr,
                      step: JointTransition) -> bool:
    eng = session.engine
    aug = session.aug

    def value(e: ast.Expr) -> ast.Value:
        if isinstance(e, ast.ConstE):
            return e.value
        if isinstance(e, ast.InstVar):
            return eng.value_of(aug.base, e.instance, e.name)
        if isinstance(e, ast.NextInstVar):
            return eng.value_of(step.successor, e.instance, e.name)
        if isinstance(e, ast.LabelAtom):
            key = (e.instance, e.label)
            if e.fire_kind == "send":
                return ast.boolv(key in step.fired_sends)
            return ast.boolv(key in aug.last_fired)
        if isinstance(e, ast.Unary):
            return apply_unary(e.op, value(e.sub))
        if isinstance(e, ast.Binary):
            return apply_binary(e.op, value(e.left), value(e.right))
        raise RmasError(f"cannot evaluate {type(e).__name__} in a constraint")

    return bool(value(constraint).data)


@dataclass
class StepResult:
    stutter: bool
    step: JointTransition | None
    deadlock: bool


def step_random(session: Session) -> StepResult:
    enabled = session.engine.enabled_transitions(session.aug.base)
    if not enabled:
        session.trace.append(TraceStep(None, None))
        session.aug = AugmentedState(session.aug.base, frozenset())
        return StepResult(stutter=True, step=None, deadlock=True)
    index = session.rng.randrange(len(enabled))
    step = enabled[index]
    session.trace.append(TraceStep(index, step))
    session.aug = AugmentedState(step.successor, step.fired_recvs)
    return StepResult(stutter=False, step=step, deadlock=False)


def step_constrained(session: Session, constraint_text: str) -> StepResult:
    constraint = resolve_formula(parse_constraint(constraint_text),
                                 session.system, allow_next=True)
    enabled = session.engine.enabled_transitions(session.aug.base)
    for index, step in enumerate(enabled):
        if _constraint_holds(session, constraint, step):
            session.trace.append(TraceStep(index, step))
            session.aug = AugmentedState(step.successor, step.fired_recvs)
            return StepResult(stutter=False, step=step, deadlock=False)
    near = [step.describe() for step in enabled]
    raise InfeasibleConstraint(
        f"no enabled transition satisfies {constraint_text!r}"
        + (" (deadlock)" if not enabled else ""), near_misses=near)


def inspect(session: Session) -> dict:
    eng = session.engine
    enabled = eng.enabled_transitions(session.aug.base)
    state = {
        inst.instance_id: {
            f"{inst.instance_id}-{var}": ast.value_text(
                eng.value_of(session.aug.base, inst.instance_id, var))
            for var in inst.agent.var_order
        }
        for inst in eng.instances
    }
    return {
        "state": state,
        "enabled": [_step_summary(t) for t in enabled],
        "deadlock": not enabled,
        "latched_receives": sorted(f"{i}-{l}" for i, l in session.aug.last_fired),
        "trace_length": len(session.trace),
        "seed": session.seed,
    }


def _step_summary(t: JointTransition) -> dict:
    return {
        "sender": t.sender_id,
        "label": t.label,
        "channel": ast.value_text(t.message.channel),
        "data": {n: ast.value_text(v) for n, v in t.message.data},
        "admits": expr_text(t.message.send_pred),
        "receivers": {i: {"kind": o.kind, "label": o.edge_label}
                      for i, o in t.outcomes},
    }


# ---------------------------------------------------------------- traces

def export_trace(session: Session) -> dict:
    steps = []
    for ts in session.trace:
        if ts.step is None:
            steps.append({"kind": "stutter"})
        else:
            steps.append({
                "kind": "transition",
                "choice": ts.choice_index,
                "sender": ts.step.sender_id,
                "label": ts.step.label,
                "channel": ast.value_text(ts.step.message.channel),
            })
    return {"version": TRACE_FORMAT_VERSION, "seed": session.seed, "steps": steps}


def replay_trace(system: CompiledSystem, trace: dict,
                 engine: Engine | None = None) -> Session:
    """Rebuild a session from an exported trace, validating each step."""
    if trace.get("version") != TRACE_FORMAT_VERSION:
        raise RmasError(f"unsupported trace version {trace.get('version')!r}")
    session = new_session(system, int(trace.get("seed", 0)), engine=engine)
    for i, rec in enumerate(trace["steps"]):
        if rec["kind"] == "stutter":
            if session.engine.enabled_transitions(session.aug.base):
                raise RmasError(f"trace step {i}: stutter recorded at a live state")
            session.trace.append(TraceStep(None, None))
            session.aug = AugmentedState(session.aug.base, frozenset())
            continue
        enabled = session.engine.enabled_transitions(session.aug.base)
        idx = rec["choice"]
        if idx is None or idx >= len(enabled):
            raise RmasError(f"trace step {i}: choice {idx} out of range")
        step = enabled[idx]
        if (step.sender_id, step.label) != (rec["sender"], rec["label"]):
            raise RmasError(
                f"trace step {i}: recorded {rec['sender']}.{rec['label']} but "
                f"choice {idx} is {step.sender_id}.{step.label}")
        session.trace.append(TraceStep(idx, step))
        session.aug = AugmentedState(step.successor, step.fired_recvs)
    return session


def trace_to_json(trace: dict) -> str:
    return json.dumps(trace, indent=2) + "\n"
