"""LTL model checking over the joint-transition graph.

Positions pair a system state with the receive labels latched from the
incoming step: a send-label atom is true where the outgoing step fires
that send, a receive-label atom is true one position later, and state
atoms read the current valuation.  Deadlock states are completed with a
stuttering self-loop whose positions carry no label atoms.  The product
with the Büchi automaton of the negated formula is searched by nested
depth-first search; a counterexample is returned as a replayable lasso.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .buchi import BuchiAutomaton, ltl_to_buchi
from .errors import StateSpaceBudgetExceeded
from .eval import apply_binary, apply_unary
from .lang import ast
from .lang.pretty import expr_text
from .ltl import atoms_of, negated, resolve_formula
from .semantics import Engine, JointTransition, SystemState
from .symbolic import CompiledSystem

FiredSet = frozenset  # of (instance id, label) pairs


@dataclass(frozen=True)
class AugmentedState:
    base: SystemState
    last_fired: FiredSet


@dataclass
class LassoStep:
    state: SystemState
    last_fired: FiredSet
    step: JointTransition | None      # None is a stutter step


@dataclass
class Lasso:
    prefix: list[LassoStep]
    loop: list[LassoStep]

    def positions(self) -> list[LassoStep]:
        return self.prefix + self.loop


@dataclass
class Verdict:
    status: str                        # "holds" | "fails" | "inconclusive"
    formula: ast.Expr
    lasso: Lasso | None = None
    visited: int = 0
    seconds: float = 0.0

    @property
    def holds(self) -> bool:
        return self.status == "holds"


class _AtomTable:
    """Evaluates the formula's atoms at a (position, outgoing step) pair."""

    def __init__(self, engine: Engine, atoms: tuple[ast.Expr, ...]):
        self.engine = engine
        self.atoms = atoms
        self.state_atoms = [a for a in atoms
                            if not isinstance(a, ast.LabelAtom)]
        self.label_atoms = [a for a in atoms if isinstance(a, ast.LabelAtom)]
        self._state_cache: dict[SystemState, frozenset] = {}

    def _eval_state_expr(self, e: ast.Expr, state: SystemState) -> ast.Value:
        if isinstance(e, ast.ConstE):
            return e.value
        if isinstance(e, ast.InstVar):
            return self.engine.value_of(state, e.instance, e.name)
        if isinstance(e, ast.Unary):
            return apply_unary(e.op, self._eval_state_expr(e.sub, state))
        if isinstance(e, ast.Binary):
            return apply_binary(e.op, self._eval_state_expr(e.left, state),
                                self._eval_state_expr(e.right, state))
        raise TypeError(e)

    def state_part(self, state: SystemState) -> frozenset:
        got = self._state_cache.get(state)
        if got is None:
            got = frozenset(a for a in self.state_atoms
                            if self._eval_state_expr(a, state).data)
            self._state_cache[state] = got
        return got

    def valuation(self, aug: AugmentedState,
                  step: JointTransition | None) -> frozenset:
        true_atoms = set(self.state_part(aug.base))
        for a in self.label_atoms:
            key = (a.instance, a.label)
            if a.fire_kind == "send":
                if step is not None and key in step.fired_sends:
                    true_atoms.add(a)
            elif key in aug.last_fired:
                true_atoms.add(a)
        return frozenset(true_atoms)


def atoms_at(engine: Engine, aug: AugmentedState, step: JointTransition | None,
             atoms: tuple[ast.Expr, ...]) -> frozenset:
    """True atoms at a position given its outgoing step (None = stutter)."""
    return _AtomTable(engine, atoms).valuation(aug, step)


class _Product:
    """Product of the augmented-state graph with a Büchi automaton,
    explored lazily with interned position ids."""

    def __init__(self, engine: Engine, buchi: BuchiAutomaton):
        self.engine = engine
        self.buchi = buchi
        self.table = _AtomTable(engine, buchi.atoms)
        self._aug_ids: dict[AugmentedState, int] = {}
        self._augs: list[AugmentedState] = []
        # per aug id: list of (step or None, valuation, successor aug id)
        self._moves: list[list[tuple[JointTransition | None, frozenset, int]]] = []

    def aug_id(self, aug: AugmentedState) -> int:
        got = self._aug_ids.get(aug)
        if got is None:
            got = len(self._augs)
            self._aug_ids[aug] = got
            self._augs.append(aug)
            self._moves.append(None)  # type: ignore[arg-type]
        return got

    def aug(self, aid: int) -> AugmentedState:
        return self._augs[aid]

    def moves(self, aid: int):
        cached = self._moves[aid]
        if cached is None:
            aug = self._augs[aid]
            steps = self.engine.enabled_transitions(aug.base)
            cached = []
            if steps:
                for step in steps:
                    nxt = AugmentedState(step.successor, step.fired_recvs)
                    cached.append((step, self.table.valuation(aug, step),
                                   self.aug_id(nxt)))
            else:
                nxt = AugmentedState(aug.base, frozenset())
                cached.append((None, self.table.valuation(aug, None),
                               self.aug_id(nxt)))
            self._moves[aid] = cached
        return cached

    def successors(self, node: tuple[int, int]):
        """Yield (step, child) in deterministic order."""
        aid, q = node
        buchi = self.buchi
        for step, valuation, nid in self.moves(aid):
            if buchi.guard_holds(q, valuation):
                for r in buchi.succs[q]:
                    yield step, (nid, r)

    def initial_nodes(self) -> list[tuple[int, int]]:
        nodes = []
        for state in self.engine.initial_states():
            aid = self.aug_id(AugmentedState(state, frozenset()))
            for q in sorted(self.buchi.initial):
                nodes.append((aid, q))
        return nodes


@dataclass
class _Frame:
    node: tuple[int, int]
    entered_via: JointTransition | None
    children: list
    index: int = 0


def model_check(system: CompiledSystem, formula: ast.Expr,
                budget: int = 5_000_000, engine: Engine | None = None) -> Verdict:
    """Full check: Holds, or Fails with a replayable lasso."""
    started = time.monotonic()
    engine = engine or Engine(system)
    resolved = resolve_formula(formula, system)
    buchi = ltl_to_buchi(negated(resolved), tuple(atoms_of(resolved)))
    product = _Product(engine, buchi)

    cyan: set[tuple[int, int]] = set()
    blue: set[tuple[int, int]] = set()
    discovered = 0

    for root in product.initial_nodes():
        if root in blue:
            continue
        stack = [_Frame(root, None, list(product.successors(root)))]
        cyan.add(root)
        discovered += 1
        while stack:
            frame = stack[-1]
            if frame.index < len(frame.children):
                step, child = frame.children[frame.index]
                frame.index += 1
                if child not in blue and child not in cyan:
                    discovered += 1
                    if discovered > budget:
                        raise StateSpaceBudgetExceeded(budget, discovered)
                    cyan.add(child)
                    stack.append(_Frame(child, step,
                                        list(product.successors(child))))
                continue
            # post-order: seed a red search from accepting nodes
            node = frame.node
            if node[1] in buchi.accepting:
                red_path = _red_search(product, node, cyan)
                if red_path is not None:
                    lasso = _build_lasso(product, stack, red_path)
                    verdict = Verdict("fails", resolved, lasso, discovered,
                                      time.monotonic() - started)
                    validate_lasso(engine, resolved, lasso)
                    return verdict
            stack.pop()
            cyan.discard(node)
            blue.add(node)
    return Verdict("holds", resolved, None, discovered,
                   time.monotonic() - started)


def _red_search(product: _Product, seed: tuple[int, int],
                cyan: set) -> list[tuple[JointTransition | None, tuple[int, int]]] | None:
    """DFS from an accepting seed for any node on the blue stack; returns
    the step path seed -> ... -> target."""
    visited: set[tuple[int, int]] = set()
    frames = [_Frame(seed, None, list(product.successors(seed)))]
    while frames:
        frame = frames[-1]
        if frame.index >= len(frame.children):
            frames.pop()
            continue
        step, child = frame.children[frame.index]
        frame.index += 1
        if child in cyan:
            path = [(f.entered_via, f.node) for f in frames[1:]]
            path.append((step, child))
            return path
        if child not in visited:
            visited.add(child)
            frames.append(_Frame(child, step, list(product.successors(child))))
    return None


def _build_lasso(product: _Product, blue_stack: list[_Frame],
                 red_path: list) -> Lasso:
    seed = blue_stack[-1].node
    target = red_path[-1][1]
    target_index = next(i for i, f in enumerate(blue_stack) if f.node == target)

    def mk(node: tuple[int, int], step) -> LassoStep:
        aug = product.aug(node[0])
        return LassoStep(aug.base, aug.last_fired, step)

    prefix: list[LassoStep] = []
    for i in range(target_index):
        prefix.append(mk(blue_stack[i].node, blue_stack[i + 1].entered_via))
    loop: list[LassoStep] = []
    for i in range(target_index, len(blue_stack) - 1):
        loop.append(mk(blue_stack[i].node, blue_stack[i + 1].entered_via))
    # red path: seed -> ... -> target
    current = seed
    for step, child in red_path:
        loop.append(mk(current, step))
        current = child
    return Lasso(prefix, loop)


def bounded_check(system: CompiledSystem, formula: ast.Expr, k: int,
                  engine: Engine | None = None) -> Verdict:
    """Search only lassos with |prefix| + |loop| <= k.  A Fails verdict is
    definitive; exhausting the bound is inconclusive."""
    started = time.monotonic()
    engine = engine or Engine(system)
    resolved = resolve_formula(formula, system)
    buchi = ltl_to_buchi(negated(resolved), tuple(atoms_of(resolved)))
    product = _Product(engine, buchi)

    best_depth: dict[tuple[int, int], int] = {}
    visited = 0

    for root in product.initial_nodes():
        stack = [_Frame(root, None, list(product.successors(root)))]
        on_path = {root: 0}
        while stack:
            frame = stack[-1]
            depth = len(stack)
            if frame.index >= len(frame.children) or depth > k:
                stack.pop()
                del on_path[frame.node]
                continue
            step, child = frame.children[frame.index]
            frame.index += 1
            if child in on_path:
                loop_start = on_path[child]
                loop_frames = stack[loop_start:]
                if any(f.node[1] in buchi.accepting for f in loop_frames):
                    prefix = [
                        LassoStep(product.aug(f.node[0]).base,
                                  product.aug(f.node[0]).last_fired,
                                  stack[i + 1].entered_via)
                        for i, f in enumerate(stack[:loop_start])
                    ]
                    loop = []
                    for i in range(loop_start, len(stack)):
                        via = stack[i + 1].entered_via if i + 1 < len(stack) else step
                        aug = product.aug(stack[i].node[0])
                        loop.append(LassoStep(aug.base, aug.last_fired, via))
                    lasso = Lasso(prefix, loop)
                    verdict = Verdict("fails", resolved, lasso, visited,
                                      time.monotonic() - started)
                    validate_lasso(engine, resolved, lasso)
                    return verdict
                continue
            if depth + 1 > k:
                continue
            seen_at = best_depth.get(child)
            if seen_at is not None and seen_at <= depth + 1:
                continue
            best_depth[child] = depth + 1
            visited += 1
            on_path[child] = len(stack)
            stack.append(_Frame(child, step, list(product.successors(child))))
    return Verdict("inconclusive", resolved, None, visited,
                   time.monotonic() - started)


# ---------------------------------------------------------------- replay

def validate_lasso(engine: Engine, formula: ast.Expr, lasso: Lasso) -> None:
    """Replay a counterexample end to end: every step must be enabled and
    reproduce the recorded successor, the loop must close, and the trace
    word must be accepted by the automaton of the negated formula."""
    positions = lasso.positions()
    assert positions and lasso.loop, "lasso must have a non-empty loop"
    for i, pos in enumerate(positions):
        following = positions[i + 1] if i + 1 < len(positions) else lasso.loop[0]
        if pos.step is None:
            assert engine.enabled_transitions(pos.state) == [], \
                "stutter outside a deadlock state"
            assert following.state == pos.state
            assert following.last_fired == frozenset()
        else:
            enabled = {t.key(): t for t in engine.enabled_transitions(pos.state)}
            assert pos.step.key() in enabled, "recorded step is not enabled"
            assert pos.step.successor == following.state
            assert following.last_fired == pos.step.fired_recvs

    atoms = tuple(atoms_of(formula))
    buchi_neg = ltl_to_buchi(negated(formula), atoms)
    table = _AtomTable(engine, atoms)
    word = [table.valuation(AugmentedState(p.state, p.last_fired), p.step)
            for p in positions]
    from .buchi import accepts_lasso
    assert accepts_lasso(buchi_neg, word[:len(lasso.prefix)],
                         word[len(lasso.prefix):]), \
        "lasso word is not accepted by the negated formula's automaton"


# ---------------------------------------------------------------- rendering

def render_step(engine: Engine, step: JointTransition | None) -> str:
    if step is None:
        return "(stutter)"
    recv = ", ".join(f"{i}.{l}" for i, l in sorted(step.fired_recvs))
    return step.describe() + (f" -> {recv}" if recv else " -> no receivers")


def lasso_dict(engine: Engine, lasso: Lasso) -> dict:
    def step_dict(p: LassoStep) -> dict:
        out: dict = {
            "state": {
                inst.instance_id: {
                    var: ast.value_text(
                        engine.value_of(p.state, inst.instance_id, var))
                    for var in inst.agent.var_order
                }
                for inst in engine.instances
            },
            "latched_receives": sorted(f"{i}-{l}" for i, l in p.last_fired),
        }
        if p.step is None:
            out["step"] = {"stutter": True}
        else:
            out["step"] = {
                "sender": p.step.sender_id,
                "label": p.step.label,
                "channel": ast.value_text(p.step.message.channel),
                "data": {n: ast.value_text(v) for n, v in p.step.message.data},
                "receivers": {i: (o.kind, o.edge_label)
                              for i, o in p.step.outcomes},
            }
        return out

    return {"prefix": [step_dict(p) for p in lasso.prefix],
            "loop": [step_dict(p) for p in lasso.loop]}


def render_verdict(engine: Engine, verdict: Verdict) -> str:
    lines = [f"{verdict.status.upper()}  {expr_text(verdict.formula)}  "
             f"(visited {verdict.visited} product states, "
             f"{verdict.seconds:.2f}s)"]
    if verdict.lasso is not None:
        lines.append("counterexample:")
        for i, p in enumerate(verdict.lasso.prefix):
            lines.append(f"  {i:3d}  {render_step(engine, p.step)}")
        lines.append("  loop:")
        base = len(verdict.lasso.prefix)
        for i, p in enumerate(verdict.lasso.loop):
            lines.append(f"  {base + i:3d}  {render_step(engine, p.step)}")
    return "\n".join(lines)
