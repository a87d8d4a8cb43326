"""Finite Kripke models, a model checker, and a bounded model finder.

The model finder encodes "Gamma has a model with exactly n worlds" as a
propositional CNF and hands it to pycosat.  It is an independent oracle: it
shares nothing with the tableau beyond the AST and the automaton compiler
(which is only used for automaton-modal operators, absent from user input).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

import pycosat

from .syntax import (
    And, At, AutBox, AutDia, Atomic, Bot, Box, Choice, Dia, Edge, Formula,
    Implies, Nom, Not, Or, Program, Prop, Seq, Star, Test, Top, signature,
    show,
)


class UninterpretedSymbol(KeyError):
    pass


class SearchBudgetExceeded(RuntimeError):
    """The SAT solver hit its propagation budget before deciding."""


@dataclass(frozen=True)
class KripkeModel:
    worlds: Tuple[str, ...]
    props: Mapping[str, FrozenSet[str]] = field(default_factory=dict)
    programs: Mapping[str, FrozenSet[Tuple[str, str]]] = field(default_factory=dict)
    nominals: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        worlds = set(self.worlds)
        for name, ext in self.props.items():
            if not set(ext) <= worlds:
                raise ValueError(f"proposition {name} mentions unknown worlds")
        for name, rel in self.programs.items():
            for x, y in rel:
                if x not in worlds or y not in worlds:
                    raise ValueError(f"program {name} mentions unknown worlds")
        for name, w in self.nominals.items():
            if w not in worlds:
                raise ValueError(f"nominal {name} is mapped to unknown world {w}")

    @classmethod
    def build(cls, worlds: Iterable, props=None, programs=None, nominals=None) -> "KripkeModel":
        return cls(
            tuple(worlds),
            {k: frozenset(v) for k, v in (props or {}).items()},
            {k: frozenset(tuple(e) for e in v) for k, v in (programs or {}).items()},
            dict(nominals or {}),
        )

    def to_json(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "props": {p: sorted(ext) for p, ext in sorted(self.props.items())},
            "programs": {s: sorted([list(e) for e in rel]) for s, rel in sorted(self.programs.items())},
            "nominals": dict(sorted(self.nominals.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, data) -> "KripkeModel":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.build(data["worlds"], data.get("props"), data.get("programs"), data.get("nominals"))


class Evaluator:
    """Computes extensions ``phi^M`` and relations ``alpha^M`` with memoization."""

    def __init__(self, model: KripkeModel):
        self.model = model
        self.all = frozenset(model.worlds)
        self._f: Dict[Formula, frozenset] = {}
        self._p: Dict[Program, frozenset] = {}

    def formula(self, f: Formula) -> frozenset:
        hit = self._f.get(f)
        if hit is None:
            hit = self._f[f] = self._formula(f)
        return hit

    def _formula(self, f: Formula) -> frozenset:
        m = self.model
        if isinstance(f, Top):
            return self.all
        if isinstance(f, Bot):
            return frozenset()
        if isinstance(f, Prop):
            if f.name not in m.props:
                raise UninterpretedSymbol(f"proposition {f.name}")
            return frozenset(m.props[f.name])
        if isinstance(f, Nom):
            if f.name not in m.nominals:
                raise UninterpretedSymbol(f"nominal {f.name}")
            return frozenset((m.nominals[f.name],))
        if isinstance(f, Not):
            return self.all - self.formula(f.arg)
        if isinstance(f, And):
            return self.formula(f.left) & self.formula(f.right)
        if isinstance(f, Or):
            return self.formula(f.left) | self.formula(f.right)
        if isinstance(f, Implies):
            return (self.all - self.formula(f.left)) | self.formula(f.right)
        if isinstance(f, Dia):
            target = self.formula(f.arg)
            return frozenset(x for x, y in self.program(f.program) if y in target)
        if isinstance(f, Box):
            target = self.formula(f.arg)
            bad = {x for x, y in self.program(f.program) if y not in target}
            return self.all - bad
        if isinstance(f, AutDia):
            return self.automaton_dia(f.automaton, self.formula(f.arg))[f.state]
        if isinstance(f, AutBox):
            miss = self.all - self.formula(f.arg)
            return self.all - self.automaton_dia(f.automaton, miss)[f.state]
        raise TypeError(f"not a formula: {f!r}")

    def automaton_dia(self, automaton, target: frozenset) -> list:
        """For each automaton state q, the worlds satisfying ``<A,q>target``.

        Least fixpoint over (world, state) pairs: a pair is good when the
        state accepts and the world is in ``target``, or a transition leads
        to a good pair.
        """
        n = automaton.n_states
        good = [set(target) if q in automaton.accepting else set() for q in range(n)]
        steps = []
        for q, sym, r in automaton.transitions:
            if isinstance(sym, Atomic):
                steps.append((q, r, self.program(sym), None))
            else:
                steps.append((q, r, None, self.formula(sym.formula)))
        changed = True
        while changed:
            changed = False
            for q, r, rel, test in steps:
                if rel is not None:
                    new = {x for x, y in rel if y in good[r]} - good[q]
                else:
                    new = (good[r] & test) - good[q]
                if new:
                    good[q] |= new
                    changed = True
        return [frozenset(g) for g in good]

    def automaton_relation(self, automaton, state: int) -> frozenset:
        """``(A,q)^M`` via reachability in the product of worlds and states."""
        out = set()
        for x in self.model.worlds:
            seen = {(x, state)}
            stack = [(x, state)]
            while stack:
                w, q = stack.pop()
                if q in automaton.accepting:
                    out.add((x, w))
                for sym, r in automaton.delta(q):
                    if isinstance(sym, Atomic):
                        succ = [y for a, y in self.program(sym) if a == w]
                    else:
                        succ = [w] if w in self.formula(sym.formula) else []
                    for y in succ:
                        if (y, r) not in seen:
                            seen.add((y, r))
                            stack.append((y, r))
        return frozenset(out)

    def program(self, p) -> frozenset:
        if isinstance(p, tuple):
            return self.automaton_relation(*p)
        hit = self._p.get(p)
        if hit is None:
            hit = self._p[p] = self._program(p)
        return hit

    def _program(self, p: Program) -> frozenset:
        if isinstance(p, Atomic):
            if p.name not in self.model.programs:
                raise UninterpretedSymbol(f"program {p.name}")
            return frozenset(self.model.programs[p.name])
        if isinstance(p, Test):
            return frozenset((x, x) for x in self.formula(p.formula))
        if isinstance(p, Choice):
            return self.program(p.left) | self.program(p.right)
        if isinstance(p, Seq):
            first, second = self.program(p.first), self.program(p.second)
            succ = {}
            for y, z in second:
                succ.setdefault(y, set()).add(z)
            return frozenset((x, z) for x, y in first for z in succ.get(y, ()))
        if isinstance(p, Star):
            step = {}
            for x, y in self.program(p.body):
                step.setdefault(x, set()).add(y)
            out = set()
            for x in self.model.worlds:
                seen = {x}
                stack = [x]
                while stack:
                    w = stack.pop()
                    for y in step.get(w, ()):
                        if y not in seen:
                            seen.add(y)
                            stack.append(y)
                out.update((x, y) for y in seen)
            return frozenset(out)
        raise TypeError(f"not a program: {p!r}")

    def holds(self, item) -> bool:
        m = self.model
        if isinstance(item, At):
            if item.nominal not in m.nominals:
                raise UninterpretedSymbol(f"nominal {item.nominal}")
            return m.nominals[item.nominal] in self.formula(item.formula)
        if isinstance(item, Edge):
            for a in (item.source, item.target):
                if a not in m.nominals:
                    raise UninterpretedSymbol(f"nominal {a}")
            if item.program not in m.programs:
                raise UninterpretedSymbol(f"program {item.program}")
            return (m.nominals[item.source], m.nominals[item.target]) in m.programs[item.program]
        raise TypeError(f"not an assertion: {item!r}")


def eval_formula(model: KripkeModel, f: Formula) -> frozenset:
    return Evaluator(model).formula(f)


def eval_program(model: KripkeModel, p) -> frozenset:
    """``alpha^M`` for a program, or ``(A,q)^M`` for a pair (automaton, state)."""
    return Evaluator(model).program(p)


def check_abox(model: KripkeModel, abox: Iterable) -> tuple:
    """Return ``(ok, failing)`` where ``failing`` lists violated assertions."""
    ev = Evaluator(model)
    failing = [a for a in sorted(abox, key=show) if not ev.holds(a)]
    return (not failing, failing)


# -- bounded model search -----------------------------------------------------


class _Cnf:
    """Small Tseitin helper; literals are ints, constants are True/False."""

    def __init__(self):
        self.n = 0
        self.clauses = []

    def var(self) -> int:
        self.n += 1
        return self.n

    @staticmethod
    def neg(a):
        return (not a) if isinstance(a, bool) else -a

    def conj(self, lits):
        lits = [x for x in lits if x is not True]
        if any(x is False for x in lits):
            return False
        lits = list(dict.fromkeys(lits))
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        v = self.var()
        for x in lits:
            self.clauses.append([-v, x])
        self.clauses.append([v] + [-x for x in lits])
        return v

    def disj(self, lits):
        return self.neg(self.conj([self.neg(x) for x in lits]))

    def assert_lit(self, a):
        if a is True:
            return
        if a is False:
            self.clauses.append([])
        else:
            self.clauses.append([a])


class _Encoder:
    def __init__(self, abox, n: int):
        self.n = n
        self.cnf = _Cnf()
        sig = signature(abox)
        self.sig = sig
        W = range(n)
        self.prop = {p: [self.cnf.var() for _ in W] for p in sorted(sig.props)}
        self.rel = {s: [[self.cnf.var() for _ in W] for _ in W] for s in sorted(sig.programs)}
        self.nom = {a: [self.cnf.var() for _ in W] for a in sorted(sig.nominals)}
        for a, xs in self.nom.items():
            self.cnf.clauses.append(list(xs))
            for i in W:
                for j in range(i + 1, n):
                    self.cnf.clauses.append([-xs[i], -xs[j]])
        self._f = {}
        self._p = {}

    def f(self, phi: Formula) -> list:
        hit = self._f.get(phi)
        if hit is None:
            hit = self._f[phi] = self._formula(phi)
        return hit

    def _formula(self, phi: Formula) -> list:
        c, W = self.cnf, range(self.n)
        if isinstance(phi, Top):
            return [True] * self.n
        if isinstance(phi, Bot):
            return [False] * self.n
        if isinstance(phi, Prop):
            return list(self.prop[phi.name])
        if isinstance(phi, Nom):
            return list(self.nom[phi.name])
        if isinstance(phi, Not):
            return [c.neg(x) for x in self.f(phi.arg)]
        if isinstance(phi, And):
            a, b = self.f(phi.left), self.f(phi.right)
            return [c.conj([a[i], b[i]]) for i in W]
        if isinstance(phi, Or):
            a, b = self.f(phi.left), self.f(phi.right)
            return [c.disj([a[i], b[i]]) for i in W]
        if isinstance(phi, Implies):
            a, b = self.f(phi.left), self.f(phi.right)
            return [c.disj([c.neg(a[i]), b[i]]) for i in W]
        if isinstance(phi, Dia):
            r, t = self.p(phi.program), self.f(phi.arg)
            return [c.disj([c.conj([r[i][j], t[j]]) for j in W]) for i in W]
        if isinstance(phi, Box):
            r, t = self.p(phi.program), self.f(phi.arg)
            return [c.conj([c.disj([c.neg(r[i][j]), t[j]]) for j in W]) for i in W]
        if isinstance(phi, AutDia):
            return self._aut_dia(phi.automaton, self.f(phi.arg))[phi.state]
        if isinstance(phi, AutBox):
            miss = [c.neg(x) for x in self.f(phi.arg)]
            return [c.neg(x) for x in self._aut_dia(phi.automaton, miss)[phi.state]]
        raise TypeError(f"not a formula: {phi!r}")

    def _aut_dia(self, aut, target: list) -> list:
        c, W = self.cnf, range(self.n)
        good = [[target[i] if q in aut.accepting else False for i in W] for q in aut.states]
        for _ in range(self.n * aut.n_states):
            nxt = []
            for q in aut.states:
                row = []
                for i in W:
                    opts = [good[q][i]]
                    for sym, r in aut.delta(q):
                        if isinstance(sym, Atomic):
                            rel = self.rel[sym.name]
                            opts.extend(c.conj([rel[i][j], good[r][j]]) for j in W)
                        else:
                            opts.append(c.conj([self.f(sym.formula)[i], good[r][i]]))
                    row.append(c.disj(opts))
                nxt.append(row)
            good = nxt
        return good

    def p(self, prog: Program) -> list:
        hit = self._p.get(prog)
        if hit is None:
            hit = self._p[prog] = self._program(prog)
        return hit

    def _program(self, prog: Program) -> list:
        c, W = self.cnf, range(self.n)
        if isinstance(prog, Atomic):
            return [list(row) for row in self.rel[prog.name]]
        if isinstance(prog, Test):
            t = self.f(prog.formula)
            return [[t[i] if i == j else False for j in W] for i in W]
        if isinstance(prog, Choice):
            a, b = self.p(prog.left), self.p(prog.right)
            return [[c.disj([a[i][j], b[i][j]]) for j in W] for i in W]
        if isinstance(prog, Seq):
            a, b = self.p(prog.first), self.p(prog.second)
            return [[c.disj([c.conj([a[i][k], b[k][j]]) for k in W]) for j in W] for i in W]
        if isinstance(prog, Star):
            step = self.p(prog.body)
            reach = [[i == j for j in W] for i in W]
            for _ in range(max(self.n - 1, 0)):
                reach = [
                    [c.disj([reach[i][j]] + [c.conj([reach[i][k], step[k][j]]) for k in W]) for j in W]
                    for i in W
                ]
            return reach
        raise TypeError(f"not a program: {prog!r}")

    def encode(self, abox):
        c = self.cnf
        for item in abox:
            if isinstance(item, At):
                t, xs = self.f(item.formula), self.nom[item.nominal]
                for i in range(self.n):
                    if t[i] is True:
                        continue
                    c.clauses.append([-xs[i]] if t[i] is False else [-xs[i], t[i]])
            elif isinstance(item, Edge):
                xs, ys, rel = self.nom[item.source], self.nom[item.target], self.rel[item.program]
                for i in range(self.n):
                    for j in range(self.n):
                        c.clauses.append([-xs[i], -ys[j], rel[i][j]])
            else:
                raise TypeError(f"not an assertion: {item!r}")

    def decode(self, solution) -> KripkeModel:
        true = {v for v in solution if v > 0}
        worlds = [f"w{i}" for i in range(self.n)]
        props = {p: {worlds[i] for i, v in enumerate(vs) if v in true} for p, vs in self.prop.items()}
        programs = {
            s: {(worlds[i], worlds[j]) for i in range(self.n) for j in range(self.n) if m[i][j] in true}
            for s, m in self.rel.items()
        }
        nominals = {a: worlds[next(i for i, v in enumerate(vs) if v in true)] for a, vs in self.nom.items()}
        return KripkeModel.build(worlds, props, programs, nominals)


def bounded_search(abox, max_worlds: int = 3, prop_limit: int = 10_000_000) -> Optional[KripkeModel]:
    """Find a model of ``abox`` with at most ``max_worlds`` worlds, or None.

    None only means no small model exists; it does not prove unsatisfiability.
    Raises :class:`SearchBudgetExceeded` if the solver gives up.
    """
    abox = frozenset(abox)
    for n in range(1, max_worlds + 1):
        enc = _Encoder(abox, n)
        enc.encode(abox)
        result = pycosat.solve(enc.cnf.clauses, vars=enc.cnf.n, prop_limit=prop_limit)
        if result == "UNKNOWN":
            raise SearchBudgetExceeded(f"solver budget exhausted at {n} worlds")
        if result == "UNSAT":
            continue
        model = enc.decode(result)
        ok, failing = check_abox(model, abox)
        if not ok:
            raise AssertionError(f"bounded_search produced a non-model; failing: {failing}")
        return model
    return None
