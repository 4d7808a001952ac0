"""Wire protocol: newline-delimited JSON request/response messages.

The same handler backs the stdin/stdout REPL (`simulate`), a TCP socket,
and the HTTP service, so every client sees identical semantics.

Requests: {"cmd": "hello" | "load" | "new" | "step" | "inspect" |
"automata" | "check" | "trace-export", ...}.  Responses carry
{"status": "ok"|"error", "session": id?, ...payload}.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import rmas

from .automaton import automaton_dict
from .checker import bounded_check, lasso_dict, model_check
from .errors import RmasError
from .lang.parser import parse_property
from .semantics import Engine
from .sim import (
    Session,
    export_trace,
    inspect,
    new_session,
    step_constrained,
    step_random,
)
from .symbolic import CompiledSystem

PROTOCOL_VERSION = 1


@dataclass
class ProtocolState:
    system: CompiledSystem | None = None
    engine: Engine | None = None
    model_text: str | None = None
    sessions: dict[str, Session] = field(default_factory=dict)
    counter: int = 0

    def load(self, model_text: str) -> None:
        self.system = rmas.load_system(model_text)
        self.engine = Engine(self.system)
        self.model_text = model_text
        self.sessions = {}

    def require_system(self) -> CompiledSystem:
        if self.system is None:
            raise RmasError("no model loaded; send a 'load' request first")
        return self.system

    def require_session(self, req: dict) -> Session:
        sid = req.get("session")
        session = self.sessions.get(sid)
        if session is None:
            raise RmasError(f"unknown session {sid!r}")
        return session


def handle_request(state: ProtocolState, req: dict) -> dict:
    try:
        cmd = req.get("cmd")
        handler = _HANDLERS.get(cmd)
        if handler is None:
            return _error(f"unknown command {cmd!r}",
                          code="unknown-command")
        return handler(state, req)
    except RmasError as err:
        out = _error(err.message, code=err.code)
        if err.pos is not None:
            out["error"]["line"] = err.pos.line
            out["error"]["column"] = err.pos.col
        extra = getattr(err, "near_misses", None)
        if extra:
            out["error"]["near_misses"] = extra
        return out


def _error(message: str, code: str = "error") -> dict:
    return {"status": "error", "error": {"code": code, "message": message}}


def _hello(state: ProtocolState, req: dict) -> dict:
    return {"status": "ok", "service": "rmas", "protocol": PROTOCOL_VERSION,
            "version": rmas.__version__}


def _load(state: ProtocolState, req: dict) -> dict:
    state.load(req.get("model", ""))
    lint = state.engine.lint()
    return {
        "status": "ok",
        "agents": {name: {"states": len(a.automaton.states),
                          "edges": len(a.automaton.edges)}
                   for name, a in state.system.agents.items()},
        "instances": [inst.instance_id for inst in state.system.instances],
        "instance_types": {inst.instance_id: inst.agent.name
                           for inst in state.system.instances},
        "warnings": [{"code": w.code, "message": w.message, "agent": w.agent}
                     for w in lint.warnings],
        "infos": [{"code": w.code, "message": w.message} for w in lint.infos],
    }


def _new(state: ProtocolState, req: dict) -> dict:
    system = state.require_system()
    seed = int(req.get("seed", 0))
    state.counter += 1
    sid = f"s{state.counter}"
    state.sessions[sid] = new_session(system, seed, sid, engine=state.engine)
    return {"status": "ok", "session": sid,
            "inspect": inspect(state.sessions[sid])}


def _step(state: ProtocolState, req: dict) -> dict:
    session = state.require_session(req)
    mode = req.get("mode", "random")
    if mode == "random":
        result = step_random(session)
    elif mode == "constrained":
        result = step_constrained(session, req.get("constraint", "TRUE"))
    else:
        return _error(f"unknown step mode {mode!r}", code="bad-request")
    out = {"status": "ok", "session": session.session_id,
           "stutter": result.stutter, "deadlock": result.deadlock,
           "inspect": inspect(session)}
    if result.step is not None:
        out["fired"] = {
            "sender": result.step.sender_id,
            "label": result.step.label,
            "channel": result.step.describe(),
            "received": sorted(f"{i}-{l}" for i, l in result.step.fired_recvs),
        }
    return out


def _inspect(state: ProtocolState, req: dict) -> dict:
    session = state.require_session(req)
    return {"status": "ok", "session": session.session_id,
            "inspect": inspect(session)}


def _automata(state: ProtocolState, req: dict) -> dict:
    system = state.require_system()
    return {"status": "ok",
            "automata": [automaton_dict(a.automaton)
                         for a in system.agents.values()]}


def _check(state: ProtocolState, req: dict) -> dict:
    system = state.require_system()
    formula = parse_property(req.get("formula", "TRUE"))
    bound = req.get("bound")
    started = time.monotonic()
    if bound is not None:
        verdict = bounded_check(system, formula, int(bound), engine=state.engine)
    else:
        budget = int(req.get("budget", 5_000_000))
        verdict = model_check(system, formula, budget=budget, engine=state.engine)
    out = {"status": "ok", "verdict": verdict.status,
           "visited": verdict.visited,
           "seconds": round(time.monotonic() - started, 3)}
    if verdict.lasso is not None:
        out["lasso"] = lasso_dict(state.engine, verdict.lasso)
    return out


def _trace_export(state: ProtocolState, req: dict) -> dict:
    session = state.require_session(req)
    return {"status": "ok", "session": session.session_id,
            "trace": export_trace(session)}


_HANDLERS = {
    "hello": _hello,
    "load": _load,
    "new": _new,
    "step": _step,
    "inspect": _inspect,
    "automata": _automata,
    "check": _check,
    "trace-export": _trace_export,
}


def handle_line(state: ProtocolState, line: str) -> str:
    """One newline-delimited protocol exchange."""
    line = line.strip()
    if not line:
        return ""
    try:
        req = json.loads(line)
    except json.JSONDecodeError as err:
        return json.dumps(_error(f"bad JSON: {err}", code="bad-json"))
    if not isinstance(req, dict):
        return json.dumps(_error("request must be a JSON object",
                                 code="bad-json"))
    return json.dumps(handle_request(state, req))


def repl(stdin, stdout, state: ProtocolState | None = None) -> None:
    """Serve the protocol over text streams until EOF."""
    state = state or ProtocolState()
    for line in stdin:
        response = handle_line(state, line)
        if response:
            stdout.write(response + "\n")
            stdout.flush()
