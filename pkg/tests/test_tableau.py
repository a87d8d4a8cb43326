import random

import pytest

from hpdl import Tableau
from hpdl.syntax import At, Edge, Nom, Not, Prop
from hpdl.tableau import (
    EXPANDED, UNSAT, Kind, compute_full_label, repl_tuple, unsat_wrt,
)

p, q = Prop("p"), Prop("q")


def rooted(label=None):
    tab = Tableau()
    tab.new_succ(None, False, True, label or {At("a", p), Edge("s", "a", "b")}, (), None)
    return tab


class TestConstruction:
    def test_root_replacement_is_identity_on_its_nominals(self):
        tab = rooted()
        assert tab.root == 0
        assert tab[0].repl_map == {"a": "a", "b": "b"}

    def test_full_label_adds_equalities_for_replaced_nominals(self):
        full = compute_full_label(True, frozenset({At("a", p)}), frozenset({At("a", q)}),
                                  repl_tuple({"a": "a", "b": "a"}))
        assert full == {At("a", p), At("a", q), At("a", Nom("a")), At("a", Nom("b"))}
        assert compute_full_label(False, frozenset({p}), frozenset({q}), None) == {p, q}

    def test_simple_nodes_drop_the_replacement(self):
        tab = rooted()
        w = tab.new_succ(0, False, False, {p, Nom("a")}, (), repl_tuple({"a": "a"}))
        assert tab[w].repl is None
        assert tab[w].label_nominals == ("a",)

    def test_cache_rejects_duplicates(self):
        tab = rooted()
        tab.new_succ(0, False, False, {p}, (), None)
        with pytest.raises(ValueError, match="cache violation"):
            tab.new_succ(0, False, False, {p}, (), None)

    def test_con_to_succ_reuses_nodes(self):
        tab = rooted()
        w1 = tab.con_to_succ(0, False, False, {p}, (), None)
        w2 = tab.con_to_succ(0, False, False, {p}, (), None)
        assert w1 == w2 and len(tab) == 2
        assert tab.successors(0) == [w1] and tab.predecessors(w1) == [0]
        assert tab.edges_created == 1

    def test_state_and_non_state_are_distinct_keys(self):
        tab = rooted()
        a = tab.con_to_succ(0, False, False, {p}, (), None)
        b = tab.con_to_succ(a, True, False, {p}, (), None)
        assert a != b

    def test_cache_keys_are_unique(self):
        rng = random.Random(9)
        tab = rooted()
        for _ in range(300):
            v = rng.randrange(len(tab))
            label = {x for x in (p, q, Not(p), Nom("a")) if rng.random() < 0.5}
            tab.con_to_succ(v, rng.random() < 0.3, False, label, (), None)
        keys = [n.key for n in tab.nodes]
        assert len(keys) == len(set(keys))
        assert all(tab.cache[n.key] == n.id for n in tab.nodes)


class TestEdgeLabels:
    def test_only_states_label_their_edges(self):
        tab = rooted()
        w = tab.con_to_succ(0, False, False, {p}, (), None, elabel=At("a", p))
        assert tab.elabels(0, w) == frozenset()
        s = tab.con_to_succ(w, True, False, {p}, (), None)
        t = tab.con_to_succ(s, False, False, {q}, (), None, elabel="x")
        tab.con_to_succ(s, False, False, {q}, (), None, elabel="y")
        assert tab.elabels(s, t) == {"x", "y"}
        assert tab.edges_created == 3

    def test_delete_edge(self):
        tab = rooted()
        w = tab.con_to_succ(0, False, False, {p}, (), None)
        tab.delete_edge(0, w)
        assert tab.successors(0) == [] and tab.predecessors(w) == []
        assert tab.edges_deleted == 1
        tab.delete_edge(0, w)
        assert tab.edges_deleted == 1


class TestStatus:
    def test_closed_for(self):
        assert UNSAT.closed_for(3)
        assert unsat_wrt({1, 2}).closed_for(2) and not unsat_wrt({1, 2}).closed_for(3)
        assert not EXPANDED.closed_for(0)
        assert str(unsat_wrt({2, 1})) == "UnsatWrt({1,2})"

    def test_set_status_logs_only_changes(self):
        tab = rooted()
        tab.set_status(0, EXPANDED)
        tab.set_status(0, EXPANDED)
        changes = [e for e in tab.events if e["event"] == "status"]
        assert len(changes) == 1 and changes[0]["new"] is EXPANDED

    def test_version_counts_mutations(self):
        tab = rooted()
        before = tab.version
        tab.set_status(0, EXPANDED)
        assert tab.version == before + 1


def diamond():
    """root -> 1 -> {2 (state), 3}; 2 -> 4; 3 -> 4; 4 -> 5 (state); 5 -> 1."""
    tab = rooted()
    n1 = tab.con_to_succ(0, False, True, {At("a", q)}, (), tab[0].repl)
    n2 = tab.con_to_succ(n1, True, True, {At("a", q)}, (), tab[0].repl)
    n3 = tab.con_to_succ(n1, False, True, {At("a", Not(q))}, (), tab[0].repl)
    n4 = tab.con_to_succ(n2, False, False, {p}, (), None)
    tab.con_to_succ(n3, False, False, {p}, (), None)
    n5 = tab.con_to_succ(n4, True, True, {At("b", p)}, (), tab[0].repl)
    tab.con_to_succ(n5, False, True, {At("a", q)}, (), tab[0].repl)
    return tab


class TestQueries:
    def test_descendants_and_ancestors(self):
        tab = diamond()
        assert tab.descendants(2) == [1, 2, 3, 4, 5]
        assert tab.ancestors(4) == {0, 1, 2, 3, 4, 5}
        assert tab.ancestor_complex_states(4) == [2, 5]
        assert tab.complex_states() == [2, 5]

    def test_path_avoiding(self):
        tab = diamond()
        assert tab.path_avoiding(0, 2, 4, lambda n: False)
        assert not tab.path_avoiding(0, 2, 4, lambda n: n == 1)
        assert tab.path_avoiding(0, 3, 4, lambda n: n == 2)

    def test_anchored_reach_agrees_with_paths(self):
        rng = random.Random(10)
        for _ in range(30):
            tab = diamond()
            for v in range(len(tab)):
                r = rng.random()
                if r < 0.2:
                    tab.set_status(v, UNSAT)
                elif r < 0.5:
                    tab.set_status(v, unsat_wrt(rng.sample(tab.complex_states(), 1)))
            masks = tab.anchored_reach()
            for u in tab.complex_states():
                bad = lambda n, u=u: tab[n].status.closed_for(u)
                for v in range(len(tab)):
                    expected = tab.path_avoiding(tab.root, u, v, bad)
                    assert bool(masks[v] >> tab.anchor_bit(u) & 1) == expected

    def test_anchored_reach_is_cached_per_version(self):
        tab = diamond()
        first = tab.anchored_reach()
        assert tab.anchored_reach() is first
        tab.set_status(1, UNSAT)
        assert tab.anchored_reach() is not first
        assert tab.anchored_reach()[4] == 0

    def test_dot(self):
        text = diamond().to_dot()
        assert text.startswith("digraph") and "v5" in text


def test_kinds_cover_all_statuses():
    assert {k.value for k in Kind} == {
        "Unexpanded", "Expanded", "Incomplete", "Blocked", "Unsat", "UnsatWrt"}
