"""LTL to Büchi automaton via the classic on-the-fly tableau.

Nodes carry the literal set an accepted letter must satisfy; the
generalized acceptance condition (one set per until-subformula) is then
degeneralized with a counter.  Guards are conjunctions of positive and
negative literals over opaque atoms; contradictory guards are pruned
during expansion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .lang import ast
from .ltl import is_atom, to_nnf

Literal = tuple[ast.Expr, bool]


@dataclass
class BuchiAutomaton:
    n: int
    initial: frozenset[int]
    accepting: frozenset[int]
    guards: list[frozenset[Literal]]          # checked when a node consumes a letter
    succs: list[tuple[int, ...]]
    atoms: tuple[ast.Expr, ...]

    def edges(self) -> list[tuple[int, frozenset[Literal], int]]:
        """Edge view: the guard of an edge is the target's literal set."""
        return [(q, self.guards[r], r)
                for q in range(self.n) for r in self.succs[q]]

    def guard_holds(self, node: int, true_atoms: frozenset) -> bool:
        return all((atom in true_atoms) == positive
                   for atom, positive in self.guards[node])


@dataclass
class _Node:
    incoming: set[int]
    new: set
    old: set
    nxt: set
    id: int = -1


_INIT = -1  # pseudo-predecessor marking initial nodes


def _neg_literal(f: ast.Expr) -> ast.Expr:
    if isinstance(f, ast.Unary) and f.op == "!":
        return f.sub
    return ast.Unary("!", f)


def _is_literal(f: ast.Expr) -> bool:
    if isinstance(f, ast.ConstE):
        return True
    if is_atom(f):
        return True
    return isinstance(f, ast.Unary) and f.op == "!" and is_atom(f.sub)


def _expand(start: _Node) -> list[_Node]:
    nodes: list[_Node] = []
    work = [start]
    counter = itertools.count()
    while work:
        node = work.pop()
        if not node.new:
            twin = next((nd for nd in nodes
                         if nd.old == node.old and nd.nxt == node.nxt), None)
            if twin is not None:
                twin.incoming |= node.incoming
                continue
            node.id = next(counter)
            nodes.append(node)
            work.append(_Node(incoming={node.id}, new=set(node.nxt),
                              old=set(), nxt=set()))
            continue
        f = node.new.pop()
        if _is_literal(f):
            if f == ast.FALSE_E or (isinstance(f, ast.ConstE) and not f.value.data):
                continue  # contradiction: drop this branch
            if isinstance(f, ast.ConstE):
                node.old.add(f)
                work.append(node)
                continue
            if _neg_literal(f) in node.old:
                continue
            node.old.add(f)
            work.append(node)
            continue
        if isinstance(f, ast.Binary) and f.op == "&&":
            node.old.add(f)
            for sub in (f.left, f.right):
                if sub not in node.old:
                    node.new.add(sub)
            work.append(node)
            continue
        if isinstance(f, ast.Binary) and f.op == "||":
            left = _Node(set(node.incoming), set(node.new), set(node.old),
                         set(node.nxt))
            left.old.add(f)
            if f.left not in left.old:
                left.new.add(f.left)
            right = _Node(set(node.incoming), set(node.new), set(node.old),
                          set(node.nxt))
            right.old.add(f)
            if f.right not in right.old:
                right.new.add(f.right)
            work.extend((left, right))
            continue
        if isinstance(f, ast.Temporal) and f.op == "X":
            node.old.add(f)
            node.nxt.add(f.sub)
            work.append(node)
            continue
        if isinstance(f, ast.TemporalBin) and f.op == "U":
            # f U g  ==  g  or  (f and X(f U g))
            wait = _Node(set(node.incoming), set(node.new), set(node.old),
                         set(node.nxt))
            wait.old.add(f)
            if f.left not in wait.old:
                wait.new.add(f.left)
            wait.nxt.add(f)
            done = _Node(set(node.incoming), set(node.new), set(node.old),
                         set(node.nxt))
            done.old.add(f)
            if f.right not in done.old:
                done.new.add(f.right)
            work.extend((wait, done))
            continue
        if isinstance(f, ast.TemporalBin) and f.op == "R":
            # f R g  ==  (g and f)  or  (g and X(f R g))
            wait = _Node(set(node.incoming), set(node.new), set(node.old),
                         set(node.nxt))
            wait.old.add(f)
            if f.right not in wait.old:
                wait.new.add(f.right)
            wait.nxt.add(f)
            both = _Node(set(node.incoming), set(node.new), set(node.old),
                         set(node.nxt))
            both.old.add(f)
            for sub in (f.left, f.right):
                if sub not in both.old:
                    both.new.add(sub)
            work.extend((wait, both))
            continue
        raise TypeError(f"unexpected formula node {f!r}")
    return nodes


def ltl_to_buchi(formula: ast.Expr, atoms: tuple[ast.Expr, ...]) -> BuchiAutomaton:
    """Translate a (resolved) formula; `atoms` fixes the atom universe."""
    nnf = to_nnf(formula)
    nodes = _expand(_Node(incoming={_INIT}, new={nnf}, old=set(), nxt=set()))

    until_subs = sorted(
        {f for nd in nodes for f in nd.old
         if isinstance(f, ast.TemporalBin) and f.op == "U"},
        key=repr)
    acc_sets = [
        frozenset(nd.id for nd in nodes
                  if u not in nd.old or u.right in nd.old)
        for u in until_subs
    ]

    guards = []
    for nd in nodes:
        lits = set()
        for f in nd.old:
            if isinstance(f, ast.ConstE):
                continue
            if is_atom(f):
                lits.add((f, True))
            elif isinstance(f, ast.Unary) and f.op == "!" and is_atom(f.sub):
                lits.add((f.sub, False))
        guards.append(frozenset(lits))

    n = len(nodes)
    initial = frozenset(nd.id for nd in nodes if _INIT in nd.incoming)
    succs = [tuple(sorted(nd2.id for nd2 in nodes if nd.id in nd2.incoming))
             for nd in nodes]

    if not acc_sets:
        auto = BuchiAutomaton(n, initial, frozenset(range(n)), guards,
                              succs, atoms)
        return _prune(auto)

    # degeneralize: counter k waits for acceptance set k
    m = len(acc_sets)
    index: dict[tuple[int, int], int] = {}
    for q in range(n):
        for k in range(m):
            index[(q, k)] = q * m + k
    d_guards = [frozenset()] * (n * m)
    d_succs: list[tuple[int, ...]] = [()] * (n * m)
    for q in range(n):
        for k in range(m):
            nk = (k + 1) % m if q in acc_sets[k] else k
            d_guards[index[(q, k)]] = guards[q]
            d_succs[index[(q, k)]] = tuple(index[(r, nk)] for r in succs[q])
    d_initial = frozenset(index[(q, 0)] for q in initial)
    d_accepting = frozenset(index[(q, 0)] for q in acc_sets[0])
    auto = BuchiAutomaton(n * m, d_initial, d_accepting, d_guards, d_succs, atoms)
    return _prune(auto)


def _prune(auto: BuchiAutomaton) -> BuchiAutomaton:
    """Drop nodes unreachable from the initial set and renumber."""
    seen = set(auto.initial)
    todo = list(auto.initial)
    while todo:
        q = todo.pop()
        for r in auto.succs[q]:
            if r not in seen:
                seen.add(r)
                todo.append(r)
    order = sorted(seen)
    remap = {q: i for i, q in enumerate(order)}
    return BuchiAutomaton(
        len(order),
        frozenset(remap[q] for q in auto.initial),
        frozenset(remap[q] for q in auto.accepting if q in seen),
        [auto.guards[q] for q in order],
        [tuple(remap[r] for r in auto.succs[q] if r in seen) for q in order],
        auto.atoms)


def accepts_lasso(auto: BuchiAutomaton, prefix: list[frozenset],
                  loop: list[frozenset]) -> bool:
    """Does the automaton accept prefix·loop^ω?  Explicit product check."""
    word = list(prefix) + list(loop)
    n_pos = len(word)
    loop_start = len(prefix)

    def succ_pos(i: int) -> int:
        return i + 1 if i + 1 < n_pos else loop_start

    # forward reachability over (position, node)
    start = {(0, q) for q in auto.initial}
    seen = set(start)
    todo = list(start)
    adj: dict[tuple[int, int], list[tuple[int, int]]] = {}
    while todo:
        pos, q = todo.pop()
        if not auto.guard_holds(q, word[pos]):
            adj[(pos, q)] = []
            continue
        nexts = [(succ_pos(pos), r) for r in auto.succs[q]]
        adj[(pos, q)] = nexts
        for item in nexts:
            if item not in seen:
                seen.add(item)
                todo.append(item)

    # accepting lasso: a reachable accepting product node on a cycle
    for node in seen:
        pos, q = node
        if q not in auto.accepting or pos < loop_start:
            continue
        stack = list(adj.get(node, ()))
        visited = set()
        while stack:
            item = stack.pop()
            if item == node:
                return True
            if item in visited:
                continue
            visited.add(item)
            stack.extend(adj.get(item, ()))
    return False
