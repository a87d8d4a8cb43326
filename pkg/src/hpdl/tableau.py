"""The and-or tableau graph with global caching.

Nodes are identified by creation-ordered integers.  Two nodes never share the
five-tuple (type, subtype, label, reduced set, nominal replacement); a
dictionary keyed on that tuple implements the cache.  Statuses are not part
of node identity, so a later connection may land on an incomplete or
unsatisfiable node.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from .syntax import At, Nom, show, signature, sort_key


class Kind(enum.Enum):
    UNEXPANDED = "Unexpanded"
    EXPANDED = "Expanded"
    INCOMPLETE = "Incomplete"
    BLOCKED = "Blocked"
    UNSAT = "Unsat"
    UNSAT_WRT = "UnsatWrt"


@dataclass(frozen=True)
class Status:
    kind: Kind
    wrt: FrozenSet[int] = frozenset()

    def __str__(self) -> str:
        if self.kind is Kind.UNSAT_WRT:
            return "UnsatWrt({" + ",".join(str(u) for u in sorted(self.wrt)) + "})"
        return self.kind.value

    @property
    def is_unsat(self) -> bool:
        return self.kind is Kind.UNSAT

    def closed_for(self, u: int) -> bool:
        """True for ``Unsat`` and for ``UnsatWrt(U)`` with ``u`` in ``U``."""
        return self.kind is Kind.UNSAT or (self.kind is Kind.UNSAT_WRT and u in self.wrt)


UNEXPANDED = Status(Kind.UNEXPANDED)
EXPANDED = Status(Kind.EXPANDED)
INCOMPLETE = Status(Kind.INCOMPLETE)
BLOCKED = Status(Kind.BLOCKED)
UNSAT = Status(Kind.UNSAT)


def unsat_wrt(ids: Iterable[int]) -> Status:
    return Status(Kind.UNSAT_WRT, frozenset(ids))


Repl = Optional[Tuple[Tuple[str, str], ...]]


def repl_tuple(mapping: Optional[dict]) -> Repl:
    if mapping is None:
        return None
    return tuple(sorted(mapping.items()))


@dataclass(frozen=True)
class Branch:
    """One successor produced by an expansion.

    ``item`` is the assertion/formula this branch added for the principal
    (for example the chosen disjunct), and ``final`` marks the branch of an
    accepting-state diamond rule that discharges the eventuality.
    """

    succ: int
    item: object = None
    final: bool = False


@dataclass
class Expansion:
    rule: str
    principal: object = None
    branches: List[Branch] = field(default_factory=list)


@dataclass
class Node:
    id: int
    is_state: bool
    is_complex: bool
    label: frozenset
    rformulas: frozenset
    repl: Repl
    status: Status = UNEXPANDED
    ass_sn: Optional[frozenset] = None
    expansion: Optional[Expansion] = None
    full: frozenset = frozenset()
    label_nominals: Tuple[str, ...] = ()

    @property
    def repl_map(self) -> dict:
        return dict(self.repl or ())

    @property
    def key(self) -> tuple:
        return (self.is_state, self.is_complex, self.label, self.rformulas, self.repl)

    @property
    def glyph(self) -> str:
        return ("S" if self.is_state else "N") + ("c" if self.is_complex else "s")

    def describe(self) -> str:
        kind = ("complex " if self.is_complex else "simple ") + ("state" if self.is_state else "non-state")
        return f"v{self.id} [{kind}, {self.status}]"


def compute_full_label(is_complex: bool, label: frozenset, rformulas: frozenset, repl: Repl) -> frozenset:
    full = label | rformulas
    if is_complex and repl:
        full = full | {At(a, Nom(b)) for b, a in repl}
    return full


def bare_nominals(label: Iterable) -> Tuple[str, ...]:
    """Nominals occurring as members of a simple label (``a in Label(v)``)."""
    return tuple(sorted(x.name for x in label if isinstance(x, Nom)))


class Tableau:
    """Mutable tableau graph ``<V, E, root>``."""

    def __init__(self):
        self.nodes: List[Node] = []
        self.succ: List[Dict[int, set]] = []
        self.pred: List[set] = []
        self.cache: Dict[tuple, int] = {}
        self.root: Optional[int] = None
        self.events: List[dict] = []
        self.edges_created = 0
        self.edges_deleted = 0
        self.version = 0  # bumps on every mutation
        self._complex_states: List[int] = []
        self._complex_index: Dict[int, int] = {}
        self._anchored: List[int] = []
        self._wrt_masks: Dict[FrozenSet[int], int] = {}
        self._anchored_version = -1
        self.listeners: List[Callable[[str, int], None]] = []

    # -- basic access ------------------------------------------------------
    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, v: int) -> Node:
        return self.nodes[v]

    def full_label(self, v: int) -> frozenset:
        return self.nodes[v].full

    def successors(self, v: int) -> List[int]:
        return sorted(self.succ[v])

    def predecessors(self, v: int) -> List[int]:
        return sorted(self.pred[v])

    def elabels(self, v: int, w: int) -> frozenset:
        return frozenset(self.succ[v].get(w, ()))

    def edges(self):
        for v, targets in enumerate(self.succ):
            for w in sorted(targets):
                yield v, w

    def log(self, kind: str, **data):
        data["event"] = kind
        self.events.append(data)

    def _notify(self, what: str, v: int):
        self.version += 1
        for fn in self.listeners:
            fn(what, v)

    # -- construction ------------------------------------------------------
    def find(self, is_state: bool, is_complex: bool, label, reduced, repl: Repl) -> Optional[int]:
        return self.cache.get((is_state, is_complex, frozenset(label), frozenset(reduced), repl))

    def new_succ(self, v: Optional[int], is_state: bool, is_complex: bool, label, reduced,
                 repl: Repl, elabel=None) -> int:
        label, reduced = frozenset(label), frozenset(reduced)
        if v is None and is_complex:
            mapping = dict(repl or ())
            for a in sorted(signature(label).nominals):
                mapping[a] = a
            repl = repl_tuple(mapping)
        key = (is_state, is_complex, label, reduced, repl)
        if key in self.cache:
            raise ValueError(f"cache violation: node v{self.cache[key]} already has these attributes")
        w = len(self.nodes)
        node = Node(
            id=w, is_state=is_state, is_complex=is_complex, label=label, rformulas=reduced,
            repl=repl if is_complex else None,
            ass_sn=frozenset() if (is_complex and is_state) else None,
            full=compute_full_label(is_complex, label, reduced, repl),
            label_nominals=() if is_complex else bare_nominals(label),
        )
        self.nodes.append(node)
        self.succ.append({})
        self.pred.append(set())
        self.cache[key] = w
        if is_state and is_complex:
            self._complex_index[w] = len(self._complex_states)
            self._complex_states.append(w)
        if v is None:
            self.root = w
        else:
            self._add_edge(v, w, elabel)
        self.log("new", node=w, parent=v)
        self._notify("new", w)
        return w

    def con_to_succ(self, v: int, is_state: bool, is_complex: bool, label, reduced,
                    repl: Repl, elabel=None) -> int:
        w = self.find(is_state, is_complex, label, reduced, repl)
        if w is None:
            return self.new_succ(v, is_state, is_complex, label, reduced, repl, elabel)
        self._add_edge(v, w, elabel)
        return w

    def _add_edge(self, v: int, w: int, elabel):
        labels = self.succ[v].get(w)
        fresh = labels is None
        if fresh:
            labels = self.succ[v][w] = set()
            self.pred[w].add(v)
            self.edges_created += 1
        if self.nodes[v].is_state and elabel is not None and elabel not in labels:
            labels.add(elabel)
            fresh = True
        if fresh:
            self._notify("edge", v)

    def delete_edge(self, v: int, w: int):
        if w in self.succ[v]:
            del self.succ[v][w]
            self.pred[w].discard(v)
            self.edges_deleted += 1
            self.log("delete-edge", source=v, target=w)
            self._notify("delete", v)

    def set_status(self, v: int, status: Status):
        node = self.nodes[v]
        if node.status == status:
            return
        # Status values, not strings: formatting large UnsatWrt sets on every change is costly
        self.log("status", node=v, old=node.status, new=status)
        node.status = status
        self._notify("status", v)

    def set_ass_sn(self, v: int, items: frozenset):
        self.nodes[v].ass_sn = frozenset(items)
        self.log("ass_sn", node=v, items=[show(x) for x in sorted(items, key=sort_key)])

    # -- queries -----------------------------------------------------------
    def descendants(self, u: int) -> List[int]:
        seen = {u}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for w in self.succ[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return sorted(seen)

    def ancestors(self, v: int) -> set:
        seen = {v}
        stack = [v]
        while stack:
            w = stack.pop()
            for p in self.pred[w]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def ancestor_complex_states(self, v: int) -> List[int]:
        return sorted(a for a in self.ancestors(v) if self.nodes[a].is_state and self.nodes[a].is_complex)

    def complex_states(self) -> List[int]:
        return list(self._complex_states)

    def _reach(self, src: int, bad: Callable[[int], bool]) -> set:
        if bad(src):
            return set()
        seen = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            for w in self.succ[v]:
                if w not in seen and not bad(w):
                    seen.add(w)
                    stack.append(w)
        return seen

    def path_avoiding(self, src: int, via: int, dst: int, bad: Callable[[int], bool]) -> bool:
        """Is there a path src ->* via ->* dst through nodes that are not bad?"""
        if via not in self._reach(src, bad):
            return False
        return dst in self._reach(via, bad)

    def reachable_avoiding(self, src: int, bad: Callable[[int], bool]) -> set:
        return self._reach(src, bad)

    def anchored_reach(self) -> List[int]:
        """For every node v, a bitmask over complex states u such that some
        path root ->* u ->* v avoids every node closed for ``u``.

        Bit ``i`` stands for ``complex_states()[i]`` (see :meth:`anchor_bit`).
        All anchors are propagated at once; the result is cached until the
        next mutation of the graph.
        """
        if self._anchored_version == self.version:
            return self._anchored
        n = len(self.nodes)
        index = self._complex_index
        anchors = (1 << len(self._complex_states)) - 1
        open_mask = []
        for node in self.nodes:
            st = node.status
            if st.kind is Kind.UNSAT:
                open_mask.append(0)
            elif st.kind is Kind.UNSAT_WRT:
                closed = self._wrt_masks.get(st.wrt)
                if closed is None:
                    closed = self._wrt_masks[st.wrt] = sum(1 << index[u] for u in st.wrt if u in index)
                open_mask.append(anchors & ~closed)
            else:
                open_mask.append(anchors)

        def spread(marks: List[int], queue: deque):
            while queue:
                x = queue.popleft()
                for w in self.succ[x]:
                    new = marks[x] & open_mask[w] & ~marks[w]
                    if new:
                        marks[w] |= new
                        queue.append(w)

        from_root = [0] * n
        if self.root is not None:
            from_root[self.root] = open_mask[self.root]
            spread(from_root, deque([self.root]))
        through = [0] * n
        seeds = deque()
        for u, i in index.items():
            if from_root[u] >> i & 1:
                through[u] = 1 << i
                seeds.append(u)
        spread(through, seeds)
        self._anchored, self._anchored_version = through, self.version
        return through

    def anchor_bit(self, u: int) -> int:
        """Position of complex state ``u`` in :meth:`anchored_reach` masks."""
        return self._complex_index[u]

    # -- export ------------------------------------------------------------
    def to_dot(self) -> str:
        def esc(text: str) -> str:
            return text.replace("\\", "\\\\").replace('"', '\\"')

        lines = ["digraph tableau {", "  node [fontname=\"monospace\"];"]
        for n in self.nodes:
            body = "\\l".join(esc(show(x)) for x in sorted(n.label, key=sort_key))
            extra = ""
            if n.rformulas:
                extra += "\\l-- reduced --\\l" + "\\l".join(esc(show(x)) for x in sorted(n.rformulas, key=sort_key))
            if n.repl and any(a != b for a, b in n.repl):
                extra += "\\lrepl: " + ", ".join(f"{a}->{b}" for a, b in n.repl if a != b)
            shape = "box" if n.is_state else "ellipse"
            style = ",style=dashed" if not n.is_complex else ""
            head = f"v{n.id} {n.glyph} {esc(str(n.status))}"
            lines.append(f"  v{n.id} [shape={shape}{style},label=\"{head}\\l{body}{extra}\\l\"];")
        for v, w in self.edges():
            labels = sorted(self.succ[v][w], key=sort_key)
            attr = f" [label=\"{esc(', '.join(show(x) for x in labels))}\"]" if labels else ""
            lines.append(f"  v{v} -> v{w}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"
