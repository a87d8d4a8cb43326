"""Seeded random generators for formulas, programs, ABoxes and models."""

from __future__ import annotations

import random

from hpdl.kripke import KripkeModel
from hpdl.syntax import (
    BOT, TOP, And, At, Atomic, Box, Choice, Dia, Edge, Implies, Nom, Not, Or,
    Prop, Seq, Star, Test, to_nnf,
)

PROPS = ("p", "q")
PROGRAMS = ("s", "r")
NOMINALS = ("a", "b")


def program(rng: random.Random, depth: int, props=PROPS, programs=PROGRAMS, nominals=NOMINALS,
            tests: bool = True):
    if depth <= 0:
        return Atomic(rng.choice(programs))
    k = rng.randrange(6 if tests else 5)
    if k == 0:
        return Atomic(rng.choice(programs))
    if k == 1:
        return Seq(program(rng, depth - 1, props, programs, nominals, tests),
                   program(rng, depth - 1, props, programs, nominals, tests))
    if k == 2:
        return Choice(program(rng, depth - 1, props, programs, nominals, tests),
                      program(rng, depth - 1, props, programs, nominals, tests))
    if k in (3, 4):
        return Star(program(rng, depth - 1, props, programs, nominals, tests))
    return Test(formula(rng, 1, 0, props, programs, nominals))


def formula(rng: random.Random, depth: int, prog_depth: int = 2, props=PROPS, programs=PROGRAMS,
            nominals=NOMINALS, implies: bool = True):
    if depth <= 0:
        k = rng.randrange(10)
        if k == 0:
            return TOP
        if k == 1:
            return BOT
        if k < 4 and nominals:
            return Nom(rng.choice(nominals))
        return Prop(rng.choice(props))
    k = rng.randrange(8 if implies else 7)
    sub = lambda: formula(rng, depth - 1, prog_depth, props, programs, nominals, implies)
    if k == 0:
        return Not(sub())
    if k == 1:
        return And(sub(), sub())
    if k == 2:
        return Or(sub(), sub())
    if k in (3, 4):
        return Dia(program(rng, prog_depth, props, programs, nominals), sub())
    if k in (5, 6):
        return Box(program(rng, prog_depth, props, programs, nominals), sub())
    return Implies(sub(), sub())


def abox(rng: random.Random, max_items: int = 4, depth: int = 2, prog_depth: int = 2,
         nominals=NOMINALS, programs=PROGRAMS, props=PROPS) -> frozenset:
    """A random NNF ABox within the small signature."""
    n = rng.randint(1, max_items)
    items = []
    for _ in range(n):
        if rng.random() < 0.25:
            items.append(Edge(rng.choice(programs), rng.choice(nominals), rng.choice(nominals)))
        else:
            items.append(At(rng.choice(nominals),
                            formula(rng, rng.randint(0, depth), prog_depth, props, programs, nominals)))
    return to_nnf(frozenset(items))


def model(rng: random.Random, n_worlds: int, props=PROPS, programs=PROGRAMS, nominals=NOMINALS,
          density: float = 0.35) -> KripkeModel:
    worlds = [f"w{i}" for i in range(n_worlds)]
    return KripkeModel.build(
        worlds,
        {p: {w for w in worlds if rng.random() < 0.5} for p in props},
        {s: {(x, y) for x in worlds for y in worlds if rng.random() < density} for s in programs},
        {a: rng.choice(worlds) for a in nominals},
    )
