"""The decision loop, closure sets and run statistics."""

from __future__ import annotations

import heapq
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional

from . import rules as R
from .automata import compile_program
from .status import clause_1a, status_phase
from .syntax import (
    At, AutBox, AutDia, Box, Dia, Edge, Formula, apply_repl, negate_nnf,
    show, signature, size, sort_key, subformulas, to_nnf,
)
from .tableau import INCOMPLETE, Kind, Tableau


class ResourceLimitExceeded(RuntimeError):
    """The node budget ran out before the tableau was finished."""


# rank of the rule a fresh node will be expanded by
_RANK_REPL_NOM, _RANK_UNARY, _RANK_STATIC, _RANK_NOM, _RANK_FORM, _RANK_TRANS = range(6)


@dataclass
class RunStats:
    nodes: int = 0
    edges_created: int = 0
    edges_deleted: int = 0
    rules: Counter = field(default_factory=Counter)
    status_phases: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges_created": self.edges_created,
            "edges_deleted": self.edges_deleted,
            "rules": dict(sorted(self.rules.items())),
            "status_phases": self.status_phases,
            "wall_time": round(self.wall_time, 6),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class Decision:
    satisfiable: bool
    tableau: Tableau
    abox: frozenset
    stats: RunStats

    @property
    def verdict(self) -> str:
        return "SAT" if self.satisfiable else "UNSAT"


class _Engine:
    def __init__(self, abox: frozenset, seed: int, max_nodes: int, pruning: bool, trace=None):
        self.abox = abox
        self.tab = Tableau()
        self.rng = random.Random(seed) if seed else None
        self.max_nodes = max_nodes
        self.pruning = pruning
        self.trace = trace
        self.stats = RunStats()
        self.heap = []
        self.counter = 0
        self.deferred = []

    # -- scheduling ---------------------------------------------------------
    def rank(self, v: int) -> int:
        tab, node = self.tab, self.tab[v]
        if node.is_state:
            return _RANK_TRANS
        if R.repl_nom_choice(tab, v) is not None:
            return _RANK_REPL_NOM
        if not node.is_complex and node.label_nominals:
            return _RANK_NOM
        inst = R.static_instances(tab, v, check_blockers=False)
        if not inst:
            return _RANK_FORM
        return _RANK_UNARY if any(i.unary for i in inst) else _RANK_STATIC

    def push(self, v: int):
        tie = self.rng.random() if self.rng else 0.0
        self.counter += 1
        heapq.heappush(self.heap, (self.rank(v), tie, self.counter, v))

    def track(self, before: int):
        for w in range(before, len(self.tab)):
            self.push(w)
        if len(self.tab) > self.max_nodes:
            raise ResourceLimitExceeded(f"node budget of {self.max_nodes} exceeded")

    def note(self, rule: str, v: int, detail: str = ""):
        self.stats.rules[rule] += 1
        if self.trace is not None:
            self.trace(f"{rule} v{v}{(' ' + detail) if detail else ''}")

    def pick(self, instances):
        unary = [i for i in instances if i.unary]
        pool = unary or instances
        return self.rng.choice(pool) if self.rng else pool[0]

    # -- expansion -----------------------------------------------------------
    def expand(self, v: int):
        tab = self.tab
        node = tab[v]
        if node.status.kind is not Kind.UNEXPANDED:
            return
        if clause_1a(tab, v):
            self.note("unsat-1a", v)
            return
        before = len(tab)
        if node.is_state:
            created = R.apply_trans(tab, v)
            self.note(R.TRANS, v, f"-> {created}")
        elif R.repl_nom_choice(tab, v) is not None:
            item = R.repl_nom_choice(tab, v)
            w = R.apply_repl_nom(tab, v)
            self.note(R.REPL_NOM, v, f"{show(item)} -> v{w}")
        elif not node.is_complex and node.label_nominals:
            R.apply_nom(tab, v)
            self.note(R.NOM, v, str(tab[v].status))
        else:
            instances = R.static_instances(tab, v)
            if instances:
                inst = self.pick(instances)
                created = R.apply_static(tab, inst)
                self.note(inst.kind, v, f"{show(inst.principal)} -> {created}")
            else:
                w = R.apply_forming_state(tab, v)
                self.note(R.FORMING_STATE, v, f"-> v{w}")
        self.track(before)

    def reachable(self) -> set:
        return self.tab.reachable_avoiding(self.tab.root, lambda n: self.tab[n].status.is_unsat)

    def drain(self):
        reach, version = None, None
        while self.heap:
            *_, v = heapq.heappop(self.heap)
            if self.tab[v].status.kind is not Kind.UNEXPANDED:
                continue
            if self.pruning:
                if version != self.tab.version:
                    reach, version = self.reachable(), self.tab.version
                if v not in reach:
                    self.deferred.append(v)
                    continue
            self.expand(v)

    def structural(self) -> bool:
        """Re-fire the nominal rule and re-expansion; True if anything changed."""
        tab = self.tab
        changed = False
        for v in range(len(tab)):
            node = tab[v]
            if node.is_complex or not node.label_nominals or node.status.kind is Kind.UNEXPANDED:
                continue
            if R.nom_applicable(tab, v) and R.apply_nom(tab, v):
                self.note(R.NOM, v, str(tab[v].status))
                changed = True
        for w in range(len(tab)):
            if tab[w].status != INCOMPLETE:
                continue
            for v in tab.predecessors(w):
                before = len(tab)
                created = R.apply_reexpand(tab, v, w)
                self.note(R.REEXPAND, v, f"drop v{w} -> {created}")
                self.track(before)
                changed = True
        if self.pruning and self.deferred:
            reach = self.reachable()
            keep = []
            for v in self.deferred:
                if tab[v].status.kind is not Kind.UNEXPANDED:
                    continue
                if v in reach:
                    self.push(v)
                    changed = True
                else:
                    keep.append(v)
            self.deferred = keep
        return changed

    def run(self) -> Decision:
        start = time.perf_counter()
        tab = self.tab
        tab.new_succ(None, False, True, self.abox, frozenset(), None)
        self.track(0)
        while True:
            self.drain()
            if self.structural():
                continue
            self.stats.status_phases += 1
            changed = status_phase(tab)
            if tab[tab.root].status.is_unsat or not changed:
                break
        st = self.stats
        st.nodes = len(tab)
        st.edges_created, st.edges_deleted = tab.edges_created, tab.edges_deleted
        st.wall_time = time.perf_counter() - start
        return Decision(not tab[tab.root].status.is_unsat, tab, self.abox, st)


def decide(abox, seed: int = 0, max_nodes: int = 500_000, reachability_pruning: bool = False,
           trace=None) -> Decision:
    """Decide satisfiability of an ABox; the input is put into NNF first.

    ``seed`` permutes tie-breaking among equally ranked nodes and rule
    instances (0 keeps the canonical FIFO order).  ``trace`` receives one
    line per rule application.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be positive")
    items = to_nnf(abox)
    return _Engine(items, seed, max_nodes, reachability_pruning, trace).run()


# -- closure -----------------------------------------------------------------


@dataclass(frozen=True)
class Closure:
    bsf: FrozenSet[Formula]
    cls_z: frozenset
    nominals: FrozenSet[str]
    size: int

    def bound(self, c: int = 64) -> int:
        return c * self.size ** 4


def build_closure(abox) -> Closure:
    items = to_nnf(abox)
    sig = signature(items)
    bsf = set()
    for x in items:
        if not isinstance(x, Edge):
            bsf |= subformulas(x)
    bsf |= {negate_nnf(f) for f in bsf}
    cls = set(items) | bsf
    for f in bsf:
        if not isinstance(f, (Box, Dia)):
            continue
        aut = compile_program(f.program)
        outer, inner = (Box, AutBox) if isinstance(f, Box) else (Dia, AutDia)
        for q in aut.states:
            g = inner(aut, q, f.arg)
            cls.add(g)
            for sym in aut.alphabet:
                cls.add(outer(sym, g))
    bare = [f for f in cls if isinstance(f, Formula)]
    for a in sig.nominals:
        cls.update(At(a, f) for f in bare)
    return Closure(frozenset(bsf), frozenset(cls), frozenset(sig.nominals), size(items))


def validate_labels(tab: Tableau, abox, closure: Optional[Closure] = None) -> bool:
    """Every label member lies in the closure modulo the node's replacement."""
    return not label_violations(tab, abox, closure)


def label_violations(tab: Tableau, abox, closure: Optional[Closure] = None) -> list:
    closure = closure or build_closure(abox)
    images: Dict[tuple, frozenset] = {}

    def image(repl) -> frozenset:
        key = repl or ()
        if key not in images:
            m = dict(key)
            images[key] = frozenset(apply_repl(x, m) for x in closure.cls_z)
        return images[key]

    complex_repls = sorted({n.repl or () for n in tab.nodes if n.is_complex})
    bad = []
    for node in tab.nodes:
        items = node.label | node.rformulas
        if node.is_complex:
            allowed = image(node.repl)
            bad.extend((node.id, x) for x in sorted(items - allowed, key=sort_key))
        else:
            ok = any(items <= image(r) for r in complex_repls) or items <= image(())
            if not ok:
                union = frozenset().union(*(image(r) for r in complex_repls)) if complex_repls else image(())
                bad.extend((node.id, x) for x in sorted(items - union, key=sort_key))
                if not items - union:
                    bad.append((node.id, None))
    return bad
