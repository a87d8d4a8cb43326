"""Abstract syntax of hybrid PDL: programs, formulas, assertions and ABoxes.

All AST values are immutable and hashable, so sets of them can be compared
structurally.  Labels of tableau nodes are frozensets of these values; a
canonical ordering for printing and tie-breaking is given by :func:`sort_key`.

A bare :class:`Formula` doubles as an assertion without a subject (a formula
about an anonymous state).  ``At(a, phi)`` is ``a:phi`` and
``Edge(s, a, b)`` is ``s(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Union

if TYPE_CHECKING:
    from .automata import NFA


class Program:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)

    __repr__ = __str__


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)

    __repr__ = __str__


# -- programs ---------------------------------------------------------------


@dataclass(frozen=True, repr=False)
class Atomic(Program):
    name: str


@dataclass(frozen=True, repr=False)
class Seq(Program):
    first: Program
    second: Program


@dataclass(frozen=True, repr=False)
class Choice(Program):
    left: Program
    right: Program


@dataclass(frozen=True, repr=False)
class Star(Program):
    body: Program


@dataclass(frozen=True, repr=False)
class Test(Program):
    formula: Formula


# -- formulas ---------------------------------------------------------------


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Nom(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Dia(Formula):
    program: Program
    arg: Formula


@dataclass(frozen=True, repr=False)
class Box(Formula):
    program: Program
    arg: Formula


@dataclass(frozen=True, repr=False)
class AutDia(Formula):
    """``<A,q>phi``: some word accepted from state ``q`` leads to ``phi``."""

    automaton: "NFA"
    state: int
    arg: Formula


@dataclass(frozen=True, repr=False)
class AutBox(Formula):
    """``[A,q]phi``: every word accepted from state ``q`` leads to ``phi``."""

    automaton: "NFA"
    state: int
    arg: Formula


TOP = Top()
BOT = Bot()


# -- assertions -------------------------------------------------------------


@dataclass(frozen=True, repr=False)
class At:
    nominal: str
    formula: Formula

    def __str__(self) -> str:
        return show(self)

    __repr__ = __str__


@dataclass(frozen=True, repr=False)
class Edge:
    program: str
    source: str
    target: str

    def __str__(self) -> str:
        return show(self)

    __repr__ = __str__




def _memoize_hash(cls):
    """Labels are sets of deep terms; recomputing structural hashes dominates
    without this.  The cached value is dropped when pickling because string
    hashes differ between processes."""
    structural = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = structural(self)
            object.__setattr__(self, "_hash", h)
            return h

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_hash", None)
        return state

    cls.__hash__ = __hash__
    cls.__getstate__ = __getstate__


for _cls in (Atomic, Seq, Choice, Star, Test, Top, Bot, Prop, Nom, Not, And, Or, Implies,
             Dia, Box, AutDia, AutBox, At, Edge):
    _memoize_hash(_cls)

Assertion = Union[At, Edge]
Item = Union[At, Edge, Formula]
ABox = frozenset


def abox(items: Iterable[Assertion]) -> frozenset:
    return frozenset(items)


def subject(item: Item) -> Optional[str]:
    """The nominal an item talks about, or None for a bare formula."""
    if isinstance(item, At):
        return item.nominal
    return None


def body(item: Item) -> Formula:
    if isinstance(item, At):
        return item.formula
    if isinstance(item, Edge):
        raise TypeError(f"{item} has no formula body")
    return item


def attach(nominal: Optional[str], formula: Formula) -> Item:
    """Build ``o:phi``; a missing subject yields the bare formula."""
    if nominal is None:
        return formula
    return At(nominal, formula)


# -- printing ---------------------------------------------------------------

# formula precedence: impl < disj < conj < unary
_IMPL, _DISJ, _CONJ, _UNARY = range(4)
# program precedence: choice < seq < star < prim
_CHOICE, _SEQ, _STAR, _PRIM = range(4)


def _fmt_formula(f: Formula, level: int) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Nom):
        return "'" + f.name
    if isinstance(f, Not):
        return "~" + _fmt_formula(f.arg, _UNARY)
    if isinstance(f, Dia):
        return "<" + _fmt_program(f.program, _CHOICE) + ">" + _fmt_formula(f.arg, _UNARY)
    if isinstance(f, Box):
        return "[" + _fmt_program(f.program, _CHOICE) + "]" + _fmt_formula(f.arg, _UNARY)
    if isinstance(f, AutDia):
        return f"<{f.automaton.name},{f.state}>" + _fmt_formula(f.arg, _UNARY)
    if isinstance(f, AutBox):
        return f"[{f.automaton.name},{f.state}]" + _fmt_formula(f.arg, _UNARY)
    if isinstance(f, And):
        text = _fmt_formula(f.left, _CONJ) + " & " + _fmt_formula(f.right, _UNARY)
        mine = _CONJ
    elif isinstance(f, Or):
        text = _fmt_formula(f.left, _DISJ) + " | " + _fmt_formula(f.right, _CONJ)
        mine = _DISJ
    elif isinstance(f, Implies):
        text = _fmt_formula(f.left, _DISJ) + " -> " + _fmt_formula(f.right, _IMPL)
        mine = _IMPL
    else:
        raise TypeError(f"not a formula: {f!r}")
    return text if mine >= level else "(" + text + ")"


def _fmt_program(p: Program, level: int) -> str:
    if isinstance(p, Atomic):
        return p.name
    if isinstance(p, Test):
        return "?(" + _fmt_formula(p.formula, _IMPL) + ")"
    if isinstance(p, Star):
        return _fmt_program(p.body, _PRIM) + "*"
    if isinstance(p, Seq):
        text = _fmt_program(p.first, _SEQ) + ";" + _fmt_program(p.second, _STAR)
        mine = _SEQ
    elif isinstance(p, Choice):
        text = _fmt_program(p.left, _CHOICE) + "+" + _fmt_program(p.right, _SEQ)
        mine = _CHOICE
    else:
        raise TypeError(f"not a program: {p!r}")
    return text if mine >= level else "(" + text + ")"


@lru_cache(maxsize=None)
def show(x) -> str:
    """Render any AST value in the concrete ASCII syntax."""
    if isinstance(x, At):
        return f"'{x.nominal}:{_fmt_formula(x.formula, _IMPL)}"
    if isinstance(x, Edge):
        return f"{x.program}('{x.source},'{x.target})"
    if isinstance(x, Program):
        return _fmt_program(x, _CHOICE)
    if isinstance(x, Formula):
        return _fmt_formula(x, _IMPL)
    raise TypeError(f"cannot show {x!r}")


def sort_key(x) -> str:
    return show(x)


def show_abox(items: Iterable[Assertion]) -> str:
    return ";\n".join(show(x) for x in sorted(items, key=sort_key))


# -- negation normal form ---------------------------------------------------


def _nnf(f: Formula, negate: bool) -> Formula:
    if isinstance(f, Top):
        return BOT if negate else f
    if isinstance(f, Bot):
        return TOP if negate else f
    if isinstance(f, (Prop, Nom)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return _nnf(f.arg, not negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(_nnf(f.left, negate), _nnf(f.right, negate))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(_nnf(f.left, negate), _nnf(f.right, negate))
    if isinstance(f, Implies):
        if negate:
            return And(_nnf(f.left, False), _nnf(f.right, True))
        return Or(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Dia):
        cls = Box if negate else Dia
        return cls(nnf_program(f.program), _nnf(f.arg, negate))
    if isinstance(f, Box):
        cls = Dia if negate else Box
        return cls(nnf_program(f.program), _nnf(f.arg, negate))
    if isinstance(f, AutDia):
        cls = AutBox if negate else AutDia
        return cls(f.automaton, f.state, _nnf(f.arg, negate))
    if isinstance(f, AutBox):
        cls = AutDia if negate else AutBox
        return cls(f.automaton, f.state, _nnf(f.arg, negate))
    raise TypeError(f"not a formula: {f!r}")


def nnf_program(p: Program) -> Program:
    if isinstance(p, Atomic):
        return p
    if isinstance(p, Test):
        return Test(_nnf(p.formula, False))
    if isinstance(p, Seq):
        return Seq(nnf_program(p.first), nnf_program(p.second))
    if isinstance(p, Choice):
        return Choice(nnf_program(p.left), nnf_program(p.right))
    if isinstance(p, Star):
        return Star(nnf_program(p.body))
    raise TypeError(f"not a program: {p!r}")


def to_nnf(x):
    """NNF of a formula, an assertion, or a whole ABox (any iterable of assertions)."""
    if isinstance(x, Formula):
        return _nnf(x, False)
    if isinstance(x, At):
        return At(x.nominal, _nnf(x.formula, False))
    if isinstance(x, Edge):
        return x
    if isinstance(x, Program):
        return nnf_program(x)
    return frozenset(to_nnf(a) for a in x)


@lru_cache(maxsize=None)
def negate_nnf(x):
    """The NNF of the negation of an NNF formula or formula assertion."""
    if isinstance(x, At):
        return At(x.nominal, _nnf(x.formula, True))
    if isinstance(x, Formula):
        return _nnf(x, True)
    raise TypeError(f"cannot negate {x!r}")


def is_nnf(x) -> bool:
    if isinstance(x, At):
        return is_nnf(x.formula)
    if isinstance(x, Edge):
        return True
    if isinstance(x, (Top, Bot, Prop, Nom)):
        return True
    if isinstance(x, Not):
        return isinstance(x.arg, (Prop, Nom))
    if isinstance(x, Implies):
        return False
    if isinstance(x, (And, Or)):
        return is_nnf(x.left) and is_nnf(x.right)
    if isinstance(x, (Dia, Box)):
        return _program_is_nnf(x.program) and is_nnf(x.arg)
    if isinstance(x, (AutDia, AutBox)):
        return is_nnf(x.arg)
    if isinstance(x, Formula):
        raise TypeError(f"unknown formula {x!r}")
    return all(is_nnf(a) for a in x)


def _program_is_nnf(p: Program) -> bool:
    if isinstance(p, Atomic):
        return True
    if isinstance(p, Test):
        return is_nnf(p.formula)
    if isinstance(p, Seq):
        return _program_is_nnf(p.first) and _program_is_nnf(p.second)
    if isinstance(p, Choice):
        return _program_is_nnf(p.left) and _program_is_nnf(p.right)
    return _program_is_nnf(p.body)


# -- nominal substitution ---------------------------------------------------


def substitute_nominal(x, source, target: Optional[str] = None):
    """Replace nominals everywhere in ``x``, including inside automata.

    Either ``substitute_nominal(x, "b", "a")`` or
    ``substitute_nominal(x, {"b": "a", ...})`` (simultaneous replacement).
    """
    mapping = source if target is None else {source: target}
    if not mapping:
        return x
    return _subst(x, tuple(sorted(mapping.items())))


@lru_cache(maxsize=None)
def _subst(x, pairs: tuple):
    m = dict(pairs)
    if isinstance(x, At):
        return At(m.get(x.nominal, x.nominal), _subst(x.formula, pairs))
    if isinstance(x, Edge):
        return Edge(x.program, m.get(x.source, x.source), m.get(x.target, x.target))
    if isinstance(x, Nom):
        return Nom(m[x.name]) if x.name in m else x
    if isinstance(x, (Top, Bot, Prop, Atomic)):
        return x
    if isinstance(x, Not):
        return Not(_subst(x.arg, pairs))
    if isinstance(x, (And, Or, Implies)):
        return type(x)(_subst(x.left, pairs), _subst(x.right, pairs))
    if isinstance(x, (Dia, Box)):
        return type(x)(_subst(x.program, pairs), _subst(x.arg, pairs))
    if isinstance(x, (AutDia, AutBox)):
        aut, state = x.automaton.substitute_state(m, x.state)
        return type(x)(aut, state, _subst(x.arg, pairs))
    if isinstance(x, Test):
        return Test(_subst(x.formula, pairs))
    if isinstance(x, Seq):
        return Seq(_subst(x.first, pairs), _subst(x.second, pairs))
    if isinstance(x, Choice):
        return Choice(_subst(x.left, pairs), _subst(x.right, pairs))
    if isinstance(x, Star):
        return Star(_subst(x.body, pairs))
    raise TypeError(f"cannot substitute in {x!r}")


# -- traversal helpers ------------------------------------------------------


def children(x) -> tuple:
    """Immediate formula/program constituents of an AST value."""
    if isinstance(x, At):
        return (x.formula,)
    if isinstance(x, (Edge, Top, Bot, Prop, Nom, Atomic)):
        return ()
    if isinstance(x, Not):
        return (x.arg,)
    if isinstance(x, (And, Or, Implies)):
        return (x.left, x.right)
    if isinstance(x, (Dia, Box)):
        return (x.program, x.arg)
    if isinstance(x, (AutDia, AutBox)):
        return tuple(s for s in x.automaton.alphabet if isinstance(s, Test)) + (x.arg,)
    if isinstance(x, Test):
        return (x.formula,)
    if isinstance(x, Seq):
        return (x.first, x.second)
    if isinstance(x, Choice):
        return (x.left, x.right)
    if isinstance(x, Star):
        return (x.body,)
    raise TypeError(f"unknown AST value {x!r}")


def walk(x):
    """Pre-order traversal over every formula and program inside ``x``."""
    stack = [x]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


@dataclass(frozen=True)
class Signature:
    nominals: frozenset
    props: frozenset
    programs: frozenset

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(
            self.nominals | other.nominals,
            self.props | other.props,
            self.programs | other.programs,
        )


def signature(x) -> Signature:
    """Nominals, propositions and atomic programs occurring in ``x``.

    ``x`` may be a single AST value or an iterable of them.
    """
    items = [x] if isinstance(x, (Formula, Program, At, Edge)) else list(x)
    noms, props, progs = set(), set(), set()
    for item in items:
        for node in walk(item):
            if isinstance(node, At):
                noms.add(node.nominal)
            elif isinstance(node, Edge):
                noms.update((node.source, node.target))
                progs.add(node.program)
            elif isinstance(node, Nom):
                noms.add(node.name)
            elif isinstance(node, Prop):
                props.add(node.name)
            elif isinstance(node, Atomic):
                progs.add(node.name)
            elif isinstance(node, (AutDia, AutBox)):
                progs.update(s.name for s in node.automaton.alphabet if isinstance(s, Atomic))
    return Signature(frozenset(noms), frozenset(props), frozenset(progs))


def nominals(x) -> frozenset:
    return signature(x).nominals


def length(x) -> int:
    """Number of symbol occurrences; Edge counts program and both nominals."""
    if isinstance(x, Edge):
        return 3
    if isinstance(x, At):
        return 1 + length(x.formula)
    if isinstance(x, (AutDia, AutBox)):
        return 1 + x.automaton.size + length(x.arg)
    return 1 + sum(length(c) for c in children(x))


def size(items: Iterable) -> int:
    return sum(length(x) for x in items)


def subformulas(x) -> set:
    """All formulas occurring in ``x`` (tests inside programs included)."""
    return {node for node in walk(x) if isinstance(node, Formula)}


def apply_repl(x, repl: Optional[Mapping[str, str]]):
    """Apply a nominal replacement map, skipping identity pairs."""
    if not repl:
        return x
    moved = {k: v for k, v in repl.items() if k != v}
    if not moved:
        return x
    return _subst(x, tuple(sorted(moved.items())))
