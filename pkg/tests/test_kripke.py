import json
import random

import pytest

import oracles
import randgen
from hpdl import (
    KripkeModel, SearchBudgetExceeded, UninterpretedSymbol, bounded_search, check_abox,
    compile_program, enumerate_words, eval_formula, eval_program, negate_nnf, parse_abox,
    parse_formula, parse_program, to_nnf,
)
from hpdl.syntax import TOP, AutBox, AutDia, Prop
from hpdl.syntax import Test as Guard

TWO = KripkeModel.build(["x", "y"], {"p": {"x", "y"}}, {"s": {("x", "y")}}, {"a": "x", "b": "y"})


def compose(r1, r2):
    return frozenset((x, z) for x, y in r1 for y2, z in r2 if y == y2)


def word_relation(model, word):
    rel = frozenset((w, w) for w in model.worlds)
    for sym in word:
        rel = compose(rel, eval_program(model, sym))
    return rel


def relation_by_words(model, aut, q):
    """Union of word relations over all accepted words, by closing the set of
    (relation so far, automaton state) pairs under single steps."""
    start = (frozenset((w, w) for w in model.worlds), q)
    seen, stack, out = {start}, [start], set()
    while stack:
        rel, state = stack.pop()
        if state in aut.accepting:
            out |= rel
        for sym, r in aut.delta(state):
            nxt = (compose(rel, eval_program(model, sym)), r)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(out)


class TestEvaluation:
    def test_constants(self):
        assert eval_formula(TWO, TOP) == {"x", "y"}
        assert eval_formula(TWO, parse_formula("false")) == frozenset()

    def test_box_star(self):
        assert eval_formula(TWO, parse_formula("[s*]p")) == {"x", "y"}
        assert eval_formula(TWO, parse_formula("<s*>~p")) == frozenset()

    def test_star_relation(self):
        assert eval_program(TWO, parse_program("s*")) == {("x", "x"), ("y", "y"), ("x", "y")}

    def test_test_and_choice(self):
        m = KripkeModel.build(["x", "y"], {"p": {"x"}}, {"s": {("x", "y")}, "r": {("y", "x")}}, {})
        assert eval_program(m, Guard(Prop("p"))) == {("x", "x")}
        assert eval_program(m, parse_program("s+r")) == {("x", "y"), ("y", "x")}
        assert eval_program(m, parse_program("s;r")) == {("x", "x")}

    def test_empty_word_acceptance(self):
        aut = compile_program(parse_program("s*"))
        assert eval_formula(TWO, AutDia(aut, 0, TOP)) == {"x", "y"}

    def test_nominals(self):
        assert eval_formula(TWO, parse_formula("'a")) == {"x"}
        assert eval_formula(TWO, parse_formula("<s>'b")) == {"x"}

    def test_unknown_symbols_raise(self):
        with pytest.raises(UninterpretedSymbol):
            eval_formula(TWO, parse_formula("q"))
        with pytest.raises(UninterpretedSymbol):
            check_abox(TWO, parse_abox("'c:p"))

    def test_automaton_duality(self):
        rng = random.Random(21)
        for _ in range(100):
            m = randgen.model(rng, rng.randint(1, 3))
            alpha = randgen.program(rng, 2)
            phi = to_nnf(randgen.formula(rng, 1))
            aut = compile_program(alpha)
            for q in aut.states:
                dia = eval_formula(m, AutDia(aut, q, phi))
                box = eval_formula(m, AutBox(aut, q, negate_nnf(phi)))
                assert dia == frozenset(m.worlds) - box

    def test_automaton_matches_program(self):
        rng = random.Random(22)
        for _ in range(100):
            m = randgen.model(rng, rng.randint(1, 3))
            alpha = randgen.program(rng, 3)
            aut = compile_program(alpha)
            assert eval_program(m, (aut, 0)) == eval_program(m, alpha)

    def test_accepted_words_compose_into_the_relation(self):
        rng = random.Random(23)
        for _ in range(60):
            m = randgen.model(rng, rng.randint(1, 3))
            aut = compile_program(randgen.program(rng, 2))
            for q in aut.states:
                rel = eval_program(m, (aut, q))
                for w in enumerate_words(aut, q, 3):
                    assert word_relation(m, w) <= rel
                assert rel == relation_by_words(m, aut, q)


class TestCheckAbox:
    def test_one_world(self):
        m = KripkeModel.build(["w"], {"p": {"w"}}, {}, {"a": "w"})
        assert check_abox(m, parse_abox("'a:p")) == (True, [])
        ok, failing = check_abox(m, parse_abox("'a:~p"))
        assert not ok and [str(x) for x in failing] == ["'a:~p"]

    def test_edges(self):
        assert check_abox(TWO, parse_abox("s('a,'b)"))[0]
        assert not check_abox(TWO, parse_abox("s('b,'a)"))[0]

    def test_json_round_trip(self):
        data = TWO.dumps()
        assert KripkeModel.from_json(data) == TWO
        assert json.loads(data)["nominals"] == {"a": "x", "b": "y"}

    def test_rejects_dangling_worlds(self):
        with pytest.raises(ValueError):
            KripkeModel.build(["x"], {"p": {"z"}}, {}, {})
        with pytest.raises(ValueError):
            KripkeModel.build(["x"], {}, {}, {"a": "z"})


class TestBoundedSearch:
    def test_single_assertion(self):
        m = bounded_search(parse_abox("'a:p"))
        assert m is not None and len(m.worlds) == 1

    def test_clash(self):
        assert bounded_search(parse_abox("'a:p; 'a:~p"), 4) is None

    def test_needs_two_worlds(self):
        g = parse_abox("s('a,'b); 'b:<s*>q; 'a:~q; 'b:~q")
        assert bounded_search(g, 1) is None
        m = bounded_search(g, 2)
        assert m is not None and check_abox(m, g)[0]

    def test_edge_then_star(self):
        g = parse_abox("s('a,'b); 'b:<s*>q")
        m = bounded_search(g, 2)
        assert m is not None and check_abox(m, g)[0]

    def test_agrees_with_brute_force(self):
        rng = random.Random(24)
        for _ in range(40):
            g = randgen.abox(rng, max_items=3, depth=2, prog_depth=1,
                             nominals=("a",), programs=("s",), props=("p",))
            found = bounded_search(g, 2)
            assert (found is not None) == oracles.has_small_model(g, 2), g
            if found is not None:
                assert check_abox(found, g)[0]

    def test_budget(self):
        g = parse_abox("'a:<s;s;s;s>p; 'a:[s*]<s>~p; 'b:<r*>q")
        with pytest.raises(SearchBudgetExceeded):
            bounded_search(g, 3, prop_limit=1)


def test_unused_prop_is_still_interpreted():
    m = bounded_search(parse_abox("'a:p | q"))
    assert set(m.props) == {"p", "q"} and "s" not in m.programs
