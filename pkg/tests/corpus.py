"""Shared test corpus: the hand-written ABoxes and a seeded random sample.

Decisions and bounded searches are cached so the acceptance criteria that
look at the same corpus do not pay for it twice.
"""

from __future__ import annotations

import random
from functools import lru_cache
from pathlib import Path

import randgen
from hpdl import bounded_search, decide, parse_abox

DATA = Path(__file__).parent / "data"
WORKED_EXAMPLE = DATA / "unsat" / "box_star_vs_diamond.abox"
RANDOM_SEED = 20240917
RANDOM_SIZE = 200
SEEDS = (0, 1, 2, 3, 4)

# filled by the acceptance tests, printed at the end of the session
RESULTS: dict = {}


def load(path) -> frozenset:
    return parse_abox(Path(path).read_text(encoding="utf-8"))


def handwritten(kind: str):
    """(name, abox) pairs from tests/data/<kind>/."""
    return [(p.stem, load(p)) for p in sorted((DATA / kind).glob("*.abox"))]


@lru_cache(maxsize=None)
def random_aboxes(n: int = RANDOM_SIZE, seed: int = RANDOM_SEED):
    rng = random.Random(seed)
    return tuple(randgen.abox(rng, max_items=4, depth=2, prog_depth=2) for _ in range(n))


def full_corpus():
    named = [(f"random-{i:03d}", g) for i, g in enumerate(random_aboxes())]
    return named + handwritten("sat") + handwritten("unsat")


@lru_cache(maxsize=None)
def decision(abox: frozenset, seed: int = 0):
    return decide(abox, seed=seed)


@lru_cache(maxsize=None)
def small_model(abox: frozenset, max_worlds: int = 3):
    return bounded_search(abox, max_worlds)
