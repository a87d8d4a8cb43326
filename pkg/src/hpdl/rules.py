"""Expansion rules: static rules, nominal replacement, nominal blocking,
re-expansion, state forming and the transitional rule.

Each ``apply_*`` function mutates the tableau and records an
:class:`~hpdl.tableau.Expansion` on the expanded node, which the
realizability checker and the model extractor later read back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .automata import compile_program
from .syntax import (
    And, At, Atomic, AutBox, AutDia, Box, Dia, Edge, Nom, Or, Test, attach,
    body, negate_nnf, show, sort_key, subject, substitute_nominal,
)
from .tableau import (
    BLOCKED, EXPANDED, INCOMPLETE, Branch, Expansion, Kind, Tableau, repl_tuple,
    unsat_wrt,
)

# static rule names
AND, OR = "and", "or"
AUT_BOX, AUT_DIA = "aut-box", "aut-dia"
BOX, DIA, BOX_F, DIA_F = "box", "dia", "box-F", "dia-F"
BOX_TEST, DIA_TEST = "box-test", "dia-test"
BOX_TRANS = "box-trans"
REPL_NOM, NOM, REEXPAND, FORMING_STATE, TRANS = "repl-nom", "nom", "reexpand", "forming-state", "trans"

DIAMOND_RULES = (DIA, DIA_F)


@dataclass(frozen=True)
class Conclusion:
    additions: Tuple
    item: object = None   # the item standing for the principal in this branch
    final: bool = False   # the accepting-state branch of a diamond rule


@dataclass(frozen=True)
class RuleInstance:
    kind: str
    target: int
    principal: object = None
    conclusions: Tuple[Conclusion, ...] = ()
    aux: object = None

    @property
    def unary(self) -> bool:
        return len(self.conclusions) == 1

    def __str__(self) -> str:
        p = "" if self.principal is None else " " + show(self.principal)
        return f"{self.kind}@v{self.target}{p}"


# -- static rules ------------------------------------------------------------


def _static_for(item, node) -> List[RuleInstance]:
    """Instances of static schemas whose principal is ``item`` (□trans excluded)."""
    if isinstance(item, Edge):
        return []
    o, f = subject(item), body(item)
    v = node.id

    def mk(kind, conclusions):
        return [RuleInstance(kind, v, item, tuple(conclusions))]

    if isinstance(f, And):
        return mk(AND, [Conclusion((attach(o, f.left), attach(o, f.right)))])
    if isinstance(f, Or):
        return mk(OR, [Conclusion((attach(o, f.left),), attach(o, f.left)),
                       Conclusion((attach(o, f.right),), attach(o, f.right))])
    if isinstance(f, (Box, Dia)) and not isinstance(f.program, (Atomic, Test)):
        aut = compile_program(f.program)
        init = sorted(aut.initial)
        if isinstance(f, Box):
            return mk(AUT_BOX, [Conclusion(tuple(attach(o, AutBox(aut, q, f.arg)) for q in init))])
        branches = []
        for q in init:
            x = attach(o, AutDia(aut, q, f.arg))
            branches.append(Conclusion((x,), x))
        return mk(AUT_DIA, branches)
    if isinstance(f, AutBox):
        aut, q = f.automaton, f.state
        adds = [attach(o, Box(sym, AutBox(aut, r, f.arg))) for sym, r in aut.delta(q)]
        if q in aut.accepting:
            adds.append(attach(o, f.arg))
            return mk(BOX_F, [Conclusion(tuple(adds))])
        return mk(BOX, [Conclusion(tuple(adds))])
    if isinstance(f, AutDia):
        aut, q = f.automaton, f.state
        branches = []
        for sym, r in aut.delta(q):
            x = attach(o, Dia(sym, AutDia(aut, r, f.arg)))
            branches.append(Conclusion((x,), x))
        if q in aut.accepting:
            x = attach(o, f.arg)
            branches.append(Conclusion((x,), x, final=True))
            return mk(DIA_F, branches)
        return mk(DIA, branches)
    if isinstance(f, Box) and isinstance(f.program, Test):
        neg = attach(o, negate_nnf(f.program.formula))
        return mk(BOX_TEST, [Conclusion((neg,), neg),
                             Conclusion((attach(o, f.arg),), attach(o, f.arg))])
    if isinstance(f, Dia) and isinstance(f.program, Test):
        return mk(DIA_TEST, [Conclusion((attach(o, f.program.formula), attach(o, f.arg)), attach(o, f.arg))])
    return []


def _box_trans_for(node) -> List[RuleInstance]:
    out = []
    edges = [x for x in node.label if isinstance(x, Edge)]
    if not edges:
        return out
    for item in sorted(node.label, key=sort_key):
        if not (isinstance(item, At) and isinstance(item.formula, Box)
                and isinstance(item.formula.program, Atomic)):
            continue
        sigma = item.formula.program.name
        for e in sorted(edges, key=sort_key):
            if e.program == sigma and e.source == item.nominal:
                new = At(e.target, item.formula.arg)
                if new not in node.full:
                    out.append(RuleInstance(BOX_TRANS, node.id, item, (Conclusion((new,), new),), aux=e))
    return out


def static_instances(tab: Tableau, v: int, check_blockers: bool = True) -> List[RuleInstance]:
    """All applicable static rule instances at ``v``, in canonical order."""
    node = tab[v]
    if node.status.kind is not Kind.UNEXPANDED or node.is_state:
        return []
    if check_blockers and (repl_nom_choice(tab, v) is not None or nom_applicable(tab, v)):
        return []
    out = []
    for item in sorted(node.label, key=sort_key):
        if item in node.rformulas:
            continue
        out.extend(_static_for(item, node))
    if node.is_complex:
        out.extend(_box_trans_for(node))
    return out


def apply_static(tab: Tableau, inst: RuleInstance) -> List[int]:
    node = tab[inst.target]
    v = node.id
    if inst.kind == BOX_TRANS:
        (c,) = inst.conclusions
        w = tab.con_to_succ(v, False, node.is_complex, node.label | set(c.additions), node.rformulas, node.repl)
        node.expansion = Expansion(inst.kind, inst.principal, [Branch(w, c.item)])
        created = [w]
    else:
        base = node.label - {inst.principal}
        reduced = node.rformulas | {inst.principal}
        branches, created = [], []
        for c in inst.conclusions:
            w = tab.con_to_succ(v, False, node.is_complex, base | set(c.additions), reduced, node.repl)
            branches.append(Branch(w, c.item, c.final))
            created.append(w)
        node.expansion = Expansion(inst.kind, inst.principal, branches)
    tab.set_status(v, EXPANDED)
    tab.log("rule", rule=inst.kind, node=v, principal=show(inst.principal), succ=created)
    return created


# -- nominal replacement -----------------------------------------------------


def repl_nom_choice(tab: Tableau, v: int) -> Optional[At]:
    """The ``a:b`` (``a != b``) that nominal replacement would act on, if any."""
    node = tab[v]
    if not node.is_complex or node.is_state or node.status.kind is not Kind.UNEXPANDED:
        return None
    for item in sorted(node.label, key=sort_key):
        if isinstance(item, At) and isinstance(item.formula, Nom) and item.formula.name != item.nominal:
            return item
    return None


def apply_repl_nom(tab: Tableau, v: int) -> int:
    node = tab[v]
    item = repl_nom_choice(tab, v)
    if item is None:
        raise ValueError(f"nominal replacement is not applicable to v{v}")
    a, b = item.nominal, item.formula.name
    label = frozenset(substitute_nominal(x, b, a) for x in node.label - {item})
    reduced = frozenset(substitute_nominal(x, b, a) for x in node.rformulas)
    old = node.repl_map
    new = dict(old)
    new[b] = a
    for c, target in old.items():
        if target == b:
            new[c] = a
    w = tab.con_to_succ(v, False, True, label, reduced, repl_tuple(new))
    node.expansion = Expansion(REPL_NOM, item, [Branch(w)])
    tab.set_status(v, EXPANDED)
    tab.log("rule", rule=REPL_NOM, node=v, principal=show(item), succ=[w])
    return w


# -- nominals in simple nodes ------------------------------------------------


def _nom_targets(tab: Tableau, v: int):
    """Yield (u, X, clash) for every complex state where the nominal rule has an effect."""
    node = tab[v]
    a = node.label_nominals[0]
    x = frozenset(At(a, phi) for phi in node.label if phi != Nom(a))
    negated = [negate_nnf(xi) for xi in x]
    reach = None
    for u in tab.complex_states():
        un = tab[u]
        if node.status.closed_for(u) or un.status == INCOMPLETE:
            continue
        clash = any(n in un.full for n in negated)
        if not clash and x <= un.full:
            continue
        if reach is None:
            reach = tab.anchored_reach()[v]
        if reach >> tab.anchor_bit(u) & 1:
            yield u, x, clash


def nom_applicable(tab: Tableau, v: int) -> bool:
    """Would the nominal rule change anything at simple node ``v``?"""
    node = tab[v]
    if node.is_complex or node.status.is_unsat or not node.label_nominals:
        return False
    if node.status.kind is Kind.UNEXPANDED:
        return True
    for u, x, clash in _nom_targets(tab, v):
        if clash or not x <= tab[u].full:
            return True
    return False


def apply_nom(tab: Tableau, v: int) -> bool:
    """Run the nominal rule at ``v``; return True if anything changed."""
    node = tab[v]
    if node.is_complex or node.status.is_unsat or not node.label_nominals:
        raise ValueError(f"nominal rule is not applicable to v{v}")
    changed = False
    for u, x, clash in list(_nom_targets(tab, v)):
        if node.status.closed_for(u) or tab[u].status == INCOMPLETE:
            continue
        un = tab[u]
        if clash:
            wrt = node.status.wrt if node.status.kind is Kind.UNSAT_WRT else frozenset()
            tab.set_status(v, unsat_wrt(wrt | {u}))
            tab.log("rule", rule=NOM, node=v, anchor=u, effect="unsat-wrt")
            changed = True
        elif not x <= un.full:
            tab.set_status(u, INCOMPLETE)
            tab.set_ass_sn(u, x - un.full)
            tab.log("rule", rule=NOM, node=v, anchor=u, effect="incomplete")
            changed = True
    if node.status.kind is Kind.UNEXPANDED:
        tab.set_status(v, BLOCKED)
        changed = True
    return changed


# -- re-expansion, forming states, transitions -------------------------------


def apply_reexpand(tab: Tableau, v: int, w: int) -> List[int]:
    node, target = tab[v], tab[w]
    if w not in tab.succ[v] or target.status != INCOMPLETE:
        raise ValueError(f"re-expansion is not applicable to edge (v{v}, v{w})")
    tab.delete_edge(v, w)
    ass = target.ass_sn or frozenset()
    created = [tab.con_to_succ(v, False, node.is_complex, node.label | ass, node.rformulas, node.repl)]
    for xi in sorted(ass, key=sort_key):
        created.append(tab.con_to_succ(v, False, node.is_complex, node.label | {negate_nnf(xi)},
                                       node.rformulas, node.repl))
    node.expansion = Expansion(REEXPAND, None, [Branch(s) for s in tab.successors(v)])
    tab.log("rule", rule=REEXPAND, node=v, incomplete=w, succ=created)
    return created


def forming_state_applicable(tab: Tableau, v: int) -> bool:
    node = tab[v]
    if node.is_state or node.status.kind is not Kind.UNEXPANDED:
        return False
    if repl_nom_choice(tab, v) is not None or nom_applicable(tab, v):
        return False
    return not static_instances(tab, v, check_blockers=False)


def apply_forming_state(tab: Tableau, v: int) -> int:
    node = tab[v]
    if node.is_complex:
        w = tab.con_to_succ(v, True, True, node.label, node.rformulas, node.repl)
    else:
        w = tab.con_to_succ(v, True, False, node.label, frozenset(), None)
    node.expansion = Expansion(FORMING_STATE, None, [Branch(w)])
    tab.set_status(v, EXPANDED)
    tab.log("rule", rule=FORMING_STATE, node=v, succ=[w])
    return w


def trans_successor_labels(node) -> List[Tuple[object, frozenset]]:
    """(edge label, successor label) pairs the transitional rule produces."""
    out = []
    for item in sorted(node.label, key=sort_key):
        f = body(item) if not isinstance(item, Edge) else None
        if not (isinstance(f, Dia) and isinstance(f.program, Atomic)):
            continue
        o, sigma = subject(item), f.program
        boxes = {
            body(y).arg for y in node.label
            if not isinstance(y, Edge) and subject(y) == o
            and isinstance(body(y), Box) and body(y).program == sigma
        }
        out.append((item, frozenset({f.arg} | boxes)))
    return out


def apply_trans(tab: Tableau, v: int) -> List[int]:
    node = tab[v]
    if not node.is_state or node.status.kind is not Kind.UNEXPANDED:
        raise ValueError(f"transitional rule is not applicable to v{v}")
    branches, created = [], []
    for item, label in trans_successor_labels(node):
        w = tab.con_to_succ(v, False, False, label, frozenset(), None, item)
        branches.append(Branch(w, item))
        created.append(w)
    node.expansion = Expansion(TRANS, None, branches)
    tab.set_status(v, EXPANDED)
    tab.log("rule", rule=TRANS, node=v, succ=created)
    return created
