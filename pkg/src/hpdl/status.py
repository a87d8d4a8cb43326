"""Diamond-realizability and status propagation.

Realizability w.r.t. an anchor complex state ``u`` is computed as a least
fixpoint in synchronous rounds.  A pair first satisfied in round ``r`` is
justified only by pairs marked in rounds ``< r``, so following
justifications strictly decreases the round number and always ends at a
base case (tag ``a`` or ``e``).  The round number is the marking time used
by the model extractor.

Justification tags follow the conditions of the definition: ``a``, ``b``,
``c``, ``e``, ``f``, ``g``, ``h``, ``j``, ``k``, plus ``open`` for nodes that
are still unexpanded or incomplete.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .rules import BOX_TRANS, DIA, DIA_F, DIA_TEST, FORMING_STATE, REEXPAND, TRANS
from .syntax import (
    At, Atomic, AutDia, Bot, Dia, Edge, Nom, Not, Test, attach, body,
    negate_nnf, show, sort_key, subject,
)
from .tableau import UNSAT, Kind, Tableau, unsat_wrt

_STATIC = {"and", "or", "aut-box", "aut-dia", "box", "dia", "box-F", "dia-F",
           "box-test", "dia-test", BOX_TRANS}


def is_eventuality(item) -> bool:
    """``o:<A,q>phi`` or ``o:<w><A,q>phi`` with ``w`` atomic or a test."""
    if isinstance(item, Edge):
        return False
    f = body(item)
    if isinstance(f, AutDia):
        return True
    return isinstance(f, Dia) and isinstance(f.program, (Atomic, Test)) and isinstance(f.arg, AutDia)


@dataclass(frozen=True)
class Mark:
    tag: str
    next: Optional[Tuple[int, object]]
    round: int


@dataclass
class Realizability:
    anchor: int
    marks: Dict[Tuple[int, object], Mark] = field(default_factory=dict)
    pairs: List[Tuple[int, object]] = field(default_factory=list)
    nodes: List[int] = field(default_factory=list)

    def marked(self, v: int, xi) -> bool:
        return (v, xi) in self.marks

    def unmarked(self, v: int) -> List[object]:
        return [xi for w, xi in self.pairs if w == v and (w, xi) not in self.marks]

    def to_json(self) -> str:
        rows = []
        for v, xi in self.pairs:
            m = self.marks.get((v, xi))
            rows.append({
                "node": v, "item": show(xi),
                "tag": m.tag if m else None,
                "round": m.round if m else None,
                "next": [m.next[0], show(m.next[1])] if m and m.next else None,
            })
        return json.dumps({"anchor": self.anchor, "pairs": rows}, indent=2)


def compute_realizability(tab: Tableau, u: int) -> Realizability:
    """Least-fixpoint marking of eventualities at descendants of ``u``."""
    result = Realizability(u)
    nodes = tab.descendants(u)
    result.nodes = nodes
    live = {v for v in nodes if not tab[v].status.closed_for(u)}
    pairs = []
    for v in nodes:
        if v not in live:
            continue
        for xi in sorted(tab[v].full, key=sort_key):
            if is_eventuality(xi):
                pairs.append((v, xi))
    result.pairs = pairs
    marks = result.marks

    for v, xi in pairs:
        if tab[v].status.kind in (Kind.UNEXPANDED, Kind.INCOMPLETE):
            marks[(v, xi)] = Mark("open", None, 0)

    # Candidates depend only on the graph, so they are listed once.  A pair is
    # marked in round r by its first candidate whose target was marked before
    # round r; only dependents of the previous round's marks are re-examined.
    candidates = {}
    dependents: Dict[Tuple[int, object], List[Tuple[int, object]]] = {}
    frontier = []
    for pair in pairs:
        if pair in marks:
            continue
        cands = _candidates(tab, u, pair[0], pair[1], live)
        candidates[pair] = cands
        for tag, target, needs_mark in cands:
            if not needs_mark:
                frontier.append(pair)
                break
        for tag, target, needs_mark in cands:
            if needs_mark:
                dependents.setdefault(target, []).append(pair)
    frontier.extend(d for p, m in marks.items() for d in dependents.get(p, ()))

    rnd = 0
    while frontier:
        rnd += 1
        new = {}
        for pair in sorted(set(frontier), key=lambda p: (p[0], sort_key(p[1]))):
            if pair in marks:
                continue
            for tag, target, needs_mark in candidates[pair]:
                if not needs_mark or target in marks:
                    new[pair] = Mark(tag, target, rnd)
                    break
        marks.update(new)
        frontier = [d for p in new for d in dependents.get(p, ())]
    return result


def _candidates(tab: Tableau, u: int, v: int, xi, live) -> List[Tuple[str, Tuple[int, object], bool]]:
    """Ways ``xi`` may be justified at ``v``, in order of preference.

    Each entry is (tag, next pair, whether the next pair must be marked).
    """
    node = tab[v]
    full = node.full
    o, f = subject(xi), body(xi)
    exp = node.expansion
    out = []

    if isinstance(f, AutDia):
        aut, q = f.automaton, f.state
        # (a) accepting state and the target already holds here
        if q in aut.accepting:
            target = attach(o, f.arg)
            if target in full:
                out.append(("a", (v, target), False))
        # (e) discharged by the accepting branch of the diamond rule
        if exp is not None and exp.rule == DIA_F and exp.principal == xi:
            for br in exp.branches:
                if br.final and br.succ in live:
                    out.append(("e", (br.succ, br.item), False))
                    break
        # (b) one automaton step inside this node
        for sym, r in aut.delta(q):
            step = attach(o, Dia(sym, AutDia(aut, r, f.arg)))
            if step in full:
                out.append(("b", (v, step), True))
        # (f) through the branch of the diamond rule
        if exp is not None and exp.rule in (DIA, DIA_F) and exp.principal == xi:
            for br in exp.branches:
                if not br.final and br.item in tab[br.succ].label:
                    out.append(("f", (br.succ, br.item), True))
    else:
        inner = f.arg  # f is <w><A,q>phi
        if isinstance(f.program, Test):
            # (c) test satisfied inside this node
            cond, rest = attach(o, f.program.formula), attach(o, inner)
            if cond in full and rest in full:
                out.append(("c", (v, rest), True))
            # (g) through the unique successor of the test rule
            if exp is not None and exp.rule == DIA_TEST and exp.principal == xi:
                for br in exp.branches:
                    out.append(("g", (br.succ, rest), True))
        elif exp is not None and exp.rule == TRANS:
            # (j) along a transition labelled with xi
            for w, labels in tab.succ[v].items():
                if xi in labels and inner in tab[w].label:
                    out.append(("j", (w, inner), True))

    # (h) carried along unchanged to some successor
    if exp is not None and exp.principal != xi and (
        exp.rule in _STATIC or exp.rule in (REEXPAND, FORMING_STATE)
    ):
        for w in sorted(tab.succ[v]):
            out.append(("h", (w, xi), True))

    # (k) a nominal in a simple label hands the obligation to the anchor
    if not node.is_complex and o is None:
        for a in node.label_nominals:
            out.append(("k", (u, At(a, xi)), True))
    return out


# -- the status rule ---------------------------------------------------------


def has_clash(node) -> bool:
    for x in node.label:
        if isinstance(x, Edge):
            continue
        f = body(x)
        if isinstance(f, Bot):
            return True
        if isinstance(x, At) and isinstance(f, Not) and isinstance(f.arg, Nom) and f.arg.name == x.nominal:
            return True
    for x in node.full:
        if not isinstance(x, Edge) and negate_nnf(x) in node.full:
            return True
    return False


def clause_1a(tab: Tableau, v: int) -> bool:
    node = tab[v]
    if node.status.is_unsat:
        return False
    if has_clash(node) or (node.status.kind is Kind.UNSAT_WRT and v in node.status.wrt):
        tab.set_status(v, UNSAT)
        tab.log("rule", rule="unsat-1a", node=v)
        return True
    return False


def _merge(tab: Tableau, v: int, extra, clause: str) -> bool:
    node = tab[v]
    cur = node.status.wrt if node.status.kind is Kind.UNSAT_WRT else frozenset()
    if extra <= cur and node.status.kind is Kind.UNSAT_WRT:
        return False
    tab.set_status(v, unsat_wrt(cur | extra))
    tab.log("rule", rule=clause, node=v, wrt=sorted(extra))
    return True


def clause_2(tab: Tableau, v: int) -> bool:
    node = tab[v]
    k = node.status.kind
    if node.is_state or k in (Kind.UNEXPANDED, Kind.UNSAT, Kind.BLOCKED):
        return False
    if node.expansion is None:
        # blocked by the nominal rule, then given UnsatWrt: it never had successors
        return False
    succs = [tab[w].status for w in tab.succ[v]]
    if all(s.is_unsat for s in succs):
        tab.set_status(v, UNSAT)
        tab.log("rule", rule="unsat-2a", node=v)
        return True
    if all(s.kind in (Kind.UNSAT, Kind.UNSAT_WRT) for s in succs):
        sets = [s.wrt for s in succs if s.kind is Kind.UNSAT_WRT]
        common = frozenset.intersection(*sets)
        if common:
            return _merge(tab, v, common, "unsat-2b")
    return False


def clause_3(tab: Tableau, v: int) -> bool:
    node = tab[v]
    k = node.status.kind
    if not node.is_state or k in (Kind.UNEXPANDED, Kind.UNSAT, Kind.INCOMPLETE):
        return False
    changed = False
    for w in sorted(tab.succ[v]):
        s = tab[w].status
        if s.is_unsat:
            tab.set_status(v, UNSAT)
            tab.log("rule", rule="unsat-3a", node=v)
            return True
    for w in sorted(tab.succ[v]):
        s = tab[w].status
        if s.kind is Kind.UNSAT_WRT:
            changed |= _merge(tab, v, s.wrt, "unsat-3b")
    return changed


def propagate(tab: Tableau, seeds=None) -> bool:
    """Apply clauses 1a, 2 and 3 until nothing changes."""
    queue = deque(range(len(tab)) if seeds is None else sorted(set(seeds)))
    queued = set(queue)
    changed = False
    while queue:
        v = queue.popleft()
        queued.discard(v)
        hit = clause_1a(tab, v)
        hit = clause_2(tab, v) or hit
        hit = clause_3(tab, v) or hit
        if hit:
            changed = True
            # v may need another pass (e.g. UnsatWrt containing itself)
            for w in [v] + sorted(tab.pred[v]):
                if w not in queued:
                    queued.add(w)
                    queue.append(w)
    return changed


def anchors(tab: Tableau) -> List[int]:
    return [u for u in tab.complex_states()
            if tab[u].status.kind not in (Kind.UNSAT, Kind.INCOMPLETE)]


def apply_realizability(tab: Tableau) -> Tuple[bool, Dict[int, Realizability]]:
    """Clause 1b for every anchor; returns (changed, tables)."""
    changed = False
    tables = {}
    for u in anchors(tab):
        if tab[u].status.kind in (Kind.UNSAT, Kind.INCOMPLETE):
            continue
        table = compute_realizability(tab, u)
        tables[u] = table
        failing = {v for v, xi in table.pairs if (v, xi) not in table.marks}
        for v in sorted(failing):
            st = tab[v].status
            if st.is_unsat or st.closed_for(u):
                continue
            _merge(tab, v, frozenset((u,)), "unsat-1b")
            changed = True
    return changed, tables


def status_phase(tab: Tableau) -> bool:
    """Alternate clause 1b with clauses 1a/2/3 until a fixpoint."""
    changed_any = propagate(tab)
    while True:
        changed, _ = apply_realizability(tab)
        if not changed:
            break
        changed_any = True
        propagate(tab)
        if tab.root is not None and tab[tab.root].status.is_unsat:
            break
    return changed_any


def apply_unsat(tab: Tableau) -> set:
    """Run the status rule to a fixpoint; return ids whose status changed."""
    before = {n.id: n.status for n in tab.nodes}
    status_phase(tab)
    return {n.id for n in tab.nodes if n.status != before[n.id]}
