"""Finite automata for programs, built with partial derivatives.

States are derivative terms: tuples of programs read as a concatenation,
with ``()`` standing for the empty word.  Tests are ordinary alphabet
symbols, never epsilon moves.  The construction yields at most
``|alpha| + 1`` states and gives one-state automata for programs such as
``s*`` and ``(?(a)+s)*``.

Automata compare equal exactly when their source programs are equal; the
construction is deterministic, so this is the same as structural equality.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .syntax import Atomic, Choice, Program, Seq, Star, Test, show

Term = tuple  # tuple of Program, a concatenation


def _flatten(p: Program) -> Term:
    if isinstance(p, Seq):
        return _flatten(p.first) + _flatten(p.second)
    return (p,)


def _nullable_prog(p: Program) -> bool:
    if isinstance(p, (Atomic, Test)):
        return False
    if isinstance(p, Star):
        return True
    if isinstance(p, Choice):
        return _nullable_prog(p.left) or _nullable_prog(p.right)
    if isinstance(p, Seq):
        return _nullable_prog(p.first) and _nullable_prog(p.second)
    raise TypeError(f"not a program: {p!r}")


def nullable(term: Term) -> bool:
    return all(_nullable_prog(p) for p in term)


def _pd_prog(symbol, p: Program) -> set:
    if isinstance(p, (Atomic, Test)):
        return {()} if p == symbol else set()
    if isinstance(p, Choice):
        return _pd_prog(symbol, p.left) | _pd_prog(symbol, p.right)
    if isinstance(p, Seq):
        return partial_derivative(symbol, _flatten(p))
    if isinstance(p, Star):
        return {t + (p,) for t in _pd_prog(symbol, p.body)}
    raise TypeError(f"not a program: {p!r}")


def partial_derivative(symbol, term: Term) -> set:
    """Antimirov partial derivative of a concatenation term by one symbol."""
    if not term:
        return set()
    head, rest = term[0], term[1:]
    out = {t + rest for t in _pd_prog(symbol, head)}
    if _nullable_prog(head):
        out |= partial_derivative(symbol, rest)
    return out


def symbols(p: Program) -> frozenset:
    """The alphabet of a program: atomic programs and tests occurring in it."""
    if isinstance(p, (Atomic, Test)):
        return frozenset((p,))
    if isinstance(p, (Choice, Seq)):
        a, b = (p.left, p.right) if isinstance(p, Choice) else (p.first, p.second)
        return symbols(a) | symbols(b)
    if isinstance(p, Star):
        return symbols(p.body)
    raise TypeError(f"not a program: {p!r}")


def term_program(term: Term) -> Optional[Program]:
    """Rebuild a program from a term (None for the empty word)."""
    if not term:
        return None
    out = term[-1]
    for p in reversed(term[:-1]):
        out = Seq(p, out)
    return out


class NFA:
    """A finite automaton ``<Sigma, Q, I, delta, F>`` for a program.

    ``Q`` is ``range(n_states)``; ``I`` is always ``{0}``.
    """

    __slots__ = (
        "source", "terms", "n_states", "initial", "accepting", "transitions",
        "alphabet", "_delta", "_index", "_hash",
    )

    def __init__(self, source: Program, terms: Sequence[Term], transitions: Iterable[tuple]):
        self.source = source
        self.terms = tuple(terms)
        self.n_states = len(self.terms)
        self.initial = frozenset((0,))
        self.accepting = frozenset(i for i, t in enumerate(self.terms) if nullable(t))
        self.transitions = tuple(sorted(set(transitions), key=lambda t: (t[0], show(t[1]), t[2])))
        self.alphabet = symbols(source)
        delta = [[] for _ in range(self.n_states)]
        for q, sym, r in self.transitions:
            delta[q].append((sym, r))
        self._delta = tuple(tuple(d) for d in delta)
        self._index = {t: i for i, t in enumerate(self.terms)}
        self._hash = hash(("NFA", source))

    # identity ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, NFA) and self.source == other.source)

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (compile_program, (self.source,))

    @property
    def name(self) -> str:
        return "A[" + show(self.source) + "]"

    @property
    def states(self) -> range:
        return range(self.n_states)

    @property
    def size(self) -> int:
        from .syntax import length
        return length(self.source)

    def __repr__(self) -> str:
        return (
            f"NFA({self.name}, states={self.n_states}, initial={sorted(self.initial)}, "
            f"accepting={sorted(self.accepting)}, transitions="
            + "{" + ", ".join(f"({q},{show(s)},{r})" for q, s, r in self.transitions) + "})"
        )

    __str__ = __repr__

    # queries ----------------------------------------------------------
    def delta(self, q: int) -> tuple:
        """Outgoing transitions of ``q`` as a tuple of (symbol, target)."""
        if not 0 <= q < self.n_states:
            raise KeyError(f"state {q} not in {self.name}")
        return self._delta[q]

    def is_accepting(self, q: int) -> bool:
        return q in self.accepting

    def state_of(self, term: Term) -> int:
        return self._index[term]

    def substitute(self, mapping: Mapping[str, str]) -> "NFA":
        from .syntax import substitute_nominal
        return compile_program(substitute_nominal(self.source, dict(mapping)))

    def substitute_state(self, mapping: Mapping[str, str], q: int) -> tuple:
        """Substitute nominals and follow state ``q`` into the new automaton."""
        from .syntax import substitute_nominal
        m = dict(mapping)
        target = self.substitute(m)
        term = tuple(substitute_nominal(p, m) for p in self.terms[q])
        return target, target.state_of(term)


@lru_cache(maxsize=None)
def compile_program(alpha: Program) -> NFA:
    """Build the partial-derivative automaton recognizing ``L(alpha)``."""
    start = _flatten(alpha)
    alphabet = sorted(symbols(alpha), key=show)
    index = {start: 0}
    order = [start]
    transitions = []
    queue = deque([start])
    while queue:
        term = queue.popleft()
        q = index[term]
        for sym in alphabet:
            for nxt in sorted(partial_derivative(sym, term), key=lambda t: tuple(show(p) for p in t)):
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                transitions.append((q, sym, index[nxt]))
    return NFA(alpha, order, transitions)


def delta(automaton: NFA, q: int) -> frozenset:
    return frozenset(automaton.delta(q))


def accepts(automaton: NFA, start: int, word: Sequence) -> bool:
    """True iff some run from ``start`` over ``word`` ends in an accepting state."""
    current = {start}
    for sym in word:
        current = {r for q in current for s, r in automaton.delta(q) if s == sym}
        if not current:
            return False
    return any(q in automaton.accepting for q in current)


def enumerate_words(automaton: NFA, start: int, max_len: int) -> set:
    """All accepted words (as tuples of symbols) of length at most ``max_len``."""
    if max_len > 6:
        raise ValueError("max_len is capped at 6")
    found = set()
    frontier = {((), start)}
    for length in range(max_len + 1):
        for word, q in frontier:
            if q in automaton.accepting:
                found.add(word)
        if length == max_len:
            break
        frontier = {(word + (s,), r) for word, q in frontier for s, r in automaton.delta(q)}
    return found


def to_dot(automaton: NFA) -> str:
    lines = ["digraph nfa {", "  rankdir=LR;", '  start [shape=point];']
    for q in automaton.states:
        shape = "doublecircle" if q in automaton.accepting else "circle"
        lines.append(f"  q{q} [label=\"{q}\", shape={shape}];")
    for q in sorted(automaton.initial):
        lines.append(f"  start -> q{q};")
    for q, sym, r in automaton.transitions:
        label = show(sym).replace('"', '\\"')
        lines.append(f"  q{q} -> q{r} [label=\"{label}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
