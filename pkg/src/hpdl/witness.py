"""Model extraction from an open tableau.

Given a complex state ``u`` that is neither unsatisfiable nor incomplete, a
model graph is grown from the nominals fixed by ``Repl(u)``.  Every
``<s>chi`` in a vertex label is discharged by walking the tableau: for
eventualities along a traced realization, for other diamonds through the
transitional successor, each followed by a saturation path that ends in a
simple state (or back at ``u`` via a nominal).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from .kripke import KripkeModel, check_abox
from .status import Realizability, compute_realizability, is_eventuality
from .syntax import (
    And, At, Atomic, AutBox, AutDia, Bot, Box, Dia, Edge, Formula, Nom, Or,
    Prop, Test, body, negate_nnf, show, signature, sort_key, subject,
)
from .automata import compile_program
from .tableau import Kind, Tableau

Vertex = Union[str, int]  # a nominal name or a simple-state node id


class WitnessError(RuntimeError):
    """The open tableau did not yield a consistent model (an internal bug)."""


def pick_anchor(tab: Tableau) -> int:
    """Least complex state reachable from the root through non-Unsat nodes
    whose status is neither Unsat nor Incomplete."""
    if tab.root is None or tab[tab.root].status.is_unsat:
        raise WitnessError("the root is unsatisfiable; there is no model to extract")
    reach = tab.reachable_avoiding(tab.root, lambda n: tab[n].status.is_unsat)
    for v in sorted(reach):
        node = tab[v]
        if node.is_state and node.is_complex and node.status.kind not in (Kind.UNSAT, Kind.INCOMPLETE):
            return v
    raise WitnessError("no admissible complex state is reachable from the root")


def trace_realization(table: Realizability, v: int, xi) -> List[Tuple[int, object]]:
    """Follow justifications from ``(v, xi)`` down to a base case.

    The result ends with the pair that discharges the eventuality: ``(v_k,
    o:phi)`` for an in-node fulfilment or ``(w, o:phi)`` for the accepting
    branch successor.
    """
    seq = [(v, xi)]
    while True:
        mark = table.marks.get(seq[-1])
        if mark is None:
            raise WitnessError(f"{show(seq[-1][1])} is not realizable at v{seq[-1][0]}")
        if mark.tag == "open":
            raise WitnessError(f"v{seq[-1][0]} is still open; the tableau is unfinished")
        seq.append(mark.next)
        if mark.tag in ("a", "e"):
            return seq
        if table.marks[mark.next].round >= mark.round:
            raise WitnessError("justification rounds do not decrease")


def saturation_path(tab: Tableau, v: int, u: int) -> List[int]:
    """A chain of live non-states from ``v`` ending in a state (or in ``u``
    when the last non-state carries a nominal)."""
    live = lambda w: not tab[w].status.closed_for(u)
    if not live(v):
        raise WitnessError(f"v{v} is closed with respect to v{u}")
    path = [v]
    while True:
        cur = tab[path[-1]]
        if cur.is_state:
            return path
        if not cur.is_complex and cur.label_nominals:
            path.append(u)
            return path
        nxt = [w for w in sorted(tab.succ[cur.id]) if live(w)]
        if not nxt:
            raise WitnessError(f"v{cur.id} has no open successor with respect to v{u}")
        path.append(nxt[0])
        if len(path) > len(tab) + 1:
            raise WitnessError("saturation path does not terminate")


@dataclass
class ModelGraph:
    anchor: int
    repl: Dict[str, str]
    vertices: List[Vertex] = field(default_factory=list)
    labels: Dict[Vertex, Set[Formula]] = field(default_factory=dict)
    edges: Dict[Tuple[Vertex, Vertex], Set[str]] = field(default_factory=dict)
    realized: Set[Tuple[Vertex, Formula]] = field(default_factory=set)

    def add_vertex(self, x: Vertex, label) -> bool:
        if x in self.labels:
            before = len(self.labels[x])
            self.labels[x] |= set(label)
            return len(self.labels[x]) != before
        self.vertices.append(x)
        self.labels[x] = set(label)
        return True

    def add_edge(self, x: Vertex, y: Vertex, sigma: str):
        self.edges.setdefault((x, y), set()).add(sigma)

    def successors(self, x: Vertex, sigma: str):
        return [y for (s, y), progs in self.edges.items() if s == x and sigma in progs]

    def world_names(self) -> Dict[Vertex, str]:
        names, used = {}, set()
        for x in self.vertices:
            base = x if isinstance(x, str) else f"v{x}"
            name = base
            while name in used:
                name += "'"
            used.add(name)
            names[x] = name
        return names

    def to_model(self, abox=()) -> KripkeModel:
        names = self.world_names()
        sig = signature(frozenset(abox))
        worlds = [names[x] for x in self.vertices]
        props = {p: set() for p in sig.props}
        programs = {s: set() for s in sig.programs}
        for x in self.vertices:
            for f in self.labels[x]:
                if isinstance(f, Prop):
                    props.setdefault(f.name, set()).add(names[x])
        for (x, y), progs in self.edges.items():
            for s in progs:
                programs.setdefault(s, set()).add((names[x], names[y]))
        nominals = {}
        for a in sorted(set(self.repl) | set(sig.nominals)):
            target = self.repl.get(a)
            if target is not None and target in self.labels:
                nominals[a] = names[target]
            else:
                fresh = f"_{a}"
                while fresh in worlds:
                    fresh += "'"
                worlds.append(fresh)
                nominals[a] = fresh
        return KripkeModel.build(worlds, props, programs, nominals)

    def to_dot(self) -> str:
        names = self.world_names()
        lines = ["digraph model {", "  node [shape=box,fontname=\"monospace\"];"]
        for x in self.vertices:
            text = "\\l".join(show(f).replace('"', '\\"') for f in sorted(self.labels[x], key=sort_key))
            lines.append(f"  \"{names[x]}\" [label=\"{names[x]}\\l{text}\\l\"];")
        for (x, y), progs in sorted(self.edges.items(), key=lambda e: (str(e[0][0]), str(e[0][1]))):
            lines.append(f"  \"{names[x]}\" -> \"{names[y]}\" [label=\"{','.join(sorted(progs))}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _is_sigma_step(xi) -> bool:
    f = body(xi)
    return isinstance(f, Dia) and isinstance(f.program, Atomic) and isinstance(f.arg, AutDia)


class _Builder:
    def __init__(self, tab: Tableau, u: int):
        self.tab = tab
        self.u = u
        self.table = compute_realizability(tab, u)
        un = tab[u]
        repl = un.repl_map
        self.graph = ModelGraph(u, repl)
        self.queue = deque()

    def touch(self, x: Vertex, label):
        g = self.graph
        new = set(label) - g.labels.get(x, set())
        g.add_vertex(x, label)
        for f in sorted(new, key=sort_key):
            if isinstance(f, Dia) and isinstance(f.program, Atomic):
                self.queue.append((x, f))

    def init(self):
        tab, u, g = self.tab, self.u, self.graph
        un = tab[u]
        fixed = sorted(a for a, b in g.repl.items() if a == b)
        for a in fixed:
            g.add_vertex(a, ())
        for a in fixed:
            part = {x.formula for x in un.full if isinstance(x, At) and x.nominal == a}
            self.touch(a, part | {Nom(a)})
        for e in sorted((x for x in un.label if isinstance(x, Edge)), key=sort_key):
            for end in (e.source, e.target):
                if end not in g.labels:
                    raise WitnessError(f"edge {show(e)} mentions a replaced nominal")
            g.add_edge(e.source, e.target, e.program)

    def run(self) -> ModelGraph:
        self.init()
        while self.queue:
            x, phi = self.queue.popleft()
            if (x, phi) in self.graph.realized:
                continue
            self.realize(x, phi)
            self.graph.realized.add((x, phi))
        return self.graph

    def hop_source(self, nodes: List[int], upto: int) -> int:
        """Greatest index below ``upto`` whose node differs from the anchor."""
        for i in range(upto - 1, -1, -1):
            if nodes[i] != self.u:
                return i
        raise WitnessError("nominal hop without a preceding simple node")

    def realize(self, x: Vertex, phi: Dia):
        tab, u = self.tab, self.u
        src = u if isinstance(x, str) else x
        start = At(x, phi) if isinstance(x, str) else phi
        if is_eventuality(start):
            pairs = trace_realization(self.table, src, start)
        else:
            pairs = [(src, start), (self._trans_target(src, start, phi.arg), phi.arg)]
        nodes = [v for v, _ in pairs]
        items = [xi for _, xi in pairs]
        last = nodes[-1]
        if not tab[last].is_state:
            sat = saturation_path(tab, last, u)
            nodes += sat[1:]
            items += [None] * (len(sat) - 1)
        end = len(nodes) - 1
        picks = []
        for i in range(1, end):
            if tab[nodes[i]].is_state and items[i] is not None and _is_sigma_step(items[i]):
                if (nodes[i] == u) == (subject(items[i]) is not None):
                    picks.append(i)
        picks.append(end)

        prev, sigma = x, phi.program.name
        for j, i in enumerate(picks):
            v = nodes[i]
            if v != u:
                k = i - 1
                while k > 0 and nodes[k] == v:
                    k -= 1
                pre = tab[nodes[k]]
                if v not in self.graph.labels:
                    self.touch(v, pre.full)
                else:
                    self.touch(v, pre.rformulas)
                target = v
            else:
                if i == end:
                    hop = tab[nodes[self.hop_source(nodes, i)]]
                    a = hop.label_nominals[0] if hop.label_nominals else None
                else:
                    a = subject(items[i])
                    hop = tab[nodes[self.hop_source(nodes, i)]]
                if a is None or a not in self.graph.labels:
                    raise WitnessError(f"cannot hop to a nominal at step {i}")
                # the blocked node's reduced formulas must hold at the named world too
                self.touch(a, hop.full)
                target = a
            self.graph.add_edge(prev, target, sigma)
            if j + 1 < len(picks):
                nxt = items[i]
                sigma = body(nxt).program.name
            prev = target

    def _trans_target(self, src: int, elabel, chi) -> int:
        tab = self.tab
        for w in sorted(tab.succ[src]):
            if elabel in tab.succ[src][w] and chi in tab[w].label and not tab[w].status.closed_for(self.u):
                return w
        raise WitnessError(f"no open transitional successor of v{src} for {show(elabel)}")


def build_model_graph(tab: Tableau, u: Optional[int] = None) -> ModelGraph:
    if u is None:
        u = pick_anchor(tab)
    return _Builder(tab, u).run()


# -- Hintikka conditions -------------------------------------------------------


def _dia_run_exists(g: ModelGraph, x: Vertex, f: AutDia) -> bool:
    aut, psi = f.automaton, f.arg
    start = (x, f.state)
    seen = {start}
    queue = deque([start])
    while queue:
        y, q = queue.popleft()
        if q in aut.accepting and psi in g.labels[y]:
            return True
        for sym, r in aut.delta(q):
            nxt_f = AutDia(aut, r, psi)
            if isinstance(sym, Test):
                if sym.formula in g.labels[y] and nxt_f in g.labels[y]:
                    cand = [(y, r)]
                else:
                    cand = []
            else:
                cand = [(z, r) for z in g.successors(y, sym.name) if nxt_f in g.labels[z]]
            for c in cand:
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
    return False


def check_hintikka(g: ModelGraph) -> List[Tuple[int, Vertex, Formula]]:
    """Return violated (clause, vertex, formula) triples; empty means all 13 hold."""
    bad = []
    for x in g.vertices:
        lab = g.labels[x]
        if Bot() in lab:
            bad.append((1, x, Bot()))
        for f in sorted(lab, key=sort_key):
            if negate_nnf(f) in lab:
                bad.append((1, x, f))
            if isinstance(f, And):
                if not {f.left, f.right} <= lab:
                    bad.append((2, x, f))
            elif isinstance(f, Or):
                if f.left not in lab and f.right not in lab:
                    bad.append((3, x, f))
            elif isinstance(f, Nom):
                if g.repl.get(f.name, f.name) != x:
                    bad.append((4, x, f))
            elif isinstance(f, Box):
                p = f.program
                if isinstance(p, Atomic):
                    for y in g.successors(x, p.name):
                        if f.arg not in g.labels[y]:
                            bad.append((9, x, f))
                elif isinstance(p, Test):
                    if negate_nnf(p.formula) not in lab and f.arg not in lab:
                        bad.append((8, x, f))
                else:
                    aut = compile_program(p)
                    if not all(AutBox(aut, q, f.arg) in lab for q in aut.initial):
                        bad.append((5, x, f))
            elif isinstance(f, AutBox):
                aut, q = f.automaton, f.state
                if not all(Box(sym, AutBox(aut, r, f.arg)) in lab for sym, r in aut.delta(q)):
                    bad.append((6, x, f))
                if q in aut.accepting and f.arg not in lab:
                    bad.append((7, x, f))
            elif isinstance(f, Dia):
                p = f.program
                if isinstance(p, Atomic):
                    if not any(f.arg in g.labels[y] for y in g.successors(x, p.name)):
                        bad.append((12, x, f))
                elif isinstance(p, Test):
                    if not {p.formula, f.arg} <= lab:
                        bad.append((11, x, f))
                else:
                    aut = compile_program(p)
                    if not any(AutDia(aut, q, f.arg) in lab for q in aut.initial):
                        bad.append((10, x, f))
            elif isinstance(f, AutDia):
                if not _dia_run_exists(g, x, f):
                    bad.append((13, x, f))
    return bad


@dataclass
class Witness:
    anchor: int
    graph: ModelGraph
    model: KripkeModel


def extract_model(tab: Tableau, abox, u: Optional[int] = None, verify: bool = True) -> Witness:
    """Build the model graph and the corresponding Kripke model.

    With ``verify`` the Hintikka conditions and the input ABox are checked;
    any failure raises :class:`WitnessError` naming what broke.
    """
    graph = build_model_graph(tab, u)
    model = graph.to_model(abox)
    if verify:
        bad = check_hintikka(graph)
        if bad:
            clause, x, f = bad[0]
            raise WitnessError(f"model graph violates Hintikka clause {clause} at {x}: {show(f)}")
        ok, failing = check_abox(model, abox)
        if not ok:
            raise WitnessError("extracted model falsifies " + ", ".join(show(a) for a in failing))
    return Witness(graph.anchor, graph, model)
