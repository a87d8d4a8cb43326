import pytest

import corpus
from hpdl import Tableau, apply_unsat, compile_program, compute_realizability, decide, parse_program
from hpdl.status import anchors, clause_1a, clause_2, clause_3, is_eventuality, propagate
from hpdl.syntax import At, AutDia, Dia, Edge, Nom, Not, Prop
from hpdl.tableau import EXPANDED, INCOMPLETE, UNSAT, Branch, Expansion, Kind, unsat_wrt
from hpdl.witness import trace_realization

p, q = Prop("p"), Prop("q")
S = parse_program("s")
A1 = compile_program(parse_program("s*"))
EV = AutDia(A1, 0, p)


def state(*items):
    """root -> complex state u carrying ``items``."""
    tab = Tableau()
    tab.new_succ(None, False, True, set(items), (), None)
    u = tab.new_succ(0, True, True, set(items), (), tab[0].repl)
    tab[0].expansion = Expansion("forming-state", None, [Branch(u)])
    tab.set_status(0, EXPANDED)
    return tab, u


def test_eventualities():
    assert is_eventuality(At("a", EV))
    assert is_eventuality(Dia(S, EV))
    assert not is_eventuality(Dia(S, p))
    assert not is_eventuality(Edge("s", "a", "b"))


class TestRealizability:
    def test_unexpanded_nodes_count_as_open(self):
        tab, u = state(At("a", Dia(S, EV)))
        table = compute_realizability(tab, u)
        assert table.marks[(u, At("a", Dia(S, EV)))].tag == "open"

    def test_fulfilled_in_place(self):
        tab, u = state(At("a", EV), At("a", p))
        tab.set_status(u, EXPANDED)
        table = compute_realizability(tab, u)
        mark = table.marks[(u, At("a", EV))]
        assert mark.tag == "a" and mark.next == (u, At("a", p)) and mark.round == 1

    def test_along_a_transition(self):
        xi = At("a", Dia(S, EV))
        tab, u = state(xi)
        w = tab.new_succ(u, False, False, {EV, p}, (), None, elabel=xi)
        tab[u].expansion = Expansion("trans", None, [Branch(w, xi)])
        tab.set_status(u, EXPANDED)
        tab.set_status(w, EXPANDED)
        table = compute_realizability(tab, u)
        assert table.marks[(u, xi)].tag == "j"
        assert trace_realization(table, u, xi) == [(u, xi), (w, EV), (w, p)]

    def test_closed_successors_do_not_count(self):
        xi = At("a", Dia(S, EV))
        tab, u = state(xi)
        w = tab.new_succ(u, False, False, {EV, p}, (), None, elabel=xi)
        tab[u].expansion = Expansion("trans", None, [Branch(w, xi)])
        tab.set_status(u, EXPANDED)
        tab.set_status(w, unsat_wrt({u}))
        table = compute_realizability(tab, u)
        assert not table.marked(u, xi)
        assert table.unmarked(u) == [xi]

    def test_a_cycle_alone_never_realizes(self):
        # u -> w -> u with the eventuality passed around but never fulfilled
        xi = At("a", Dia(S, EV))
        tab, u = state(xi)
        w = tab.new_succ(u, False, False, {Dia(S, EV)}, (), None, elabel=xi)
        tab[u].expansion = Expansion("trans", None, [Branch(w, xi)])
        s = tab.new_succ(w, True, False, {Dia(S, EV)}, (), None)
        tab[w].expansion = Expansion("forming-state", None, [Branch(s)])
        tab.con_to_succ(s, False, False, {Dia(S, EV)}, (), None, elabel=Dia(S, EV))
        for v in (u, w, s):
            tab.set_status(v, EXPANDED)
        tab[s].expansion = Expansion("trans", None, [Branch(w, Dia(S, EV))])
        table = compute_realizability(tab, u)
        assert table.marks == {}
        assert apply_unsat(tab)
        assert tab[w].status == unsat_wrt({u}) and tab[s].status == unsat_wrt({u})
        assert tab[u].status == UNSAT and tab[0].status == UNSAT


class TestClauses:
    def test_clash(self):
        tab, u = state(At("a", p), At("a", Not(p)))
        assert clause_1a(tab, u) and tab[u].status == UNSAT
        assert not clause_1a(tab, u)

    def test_self_closed_node_is_unsat(self):
        tab, u = state(At("a", p))
        tab.set_status(u, unsat_wrt({u, 7}))
        assert clause_1a(tab, u) and tab[u].status == UNSAT

    def test_negated_own_nominal(self):
        tab, u = state(At("a", Not(Nom("a"))))
        assert clause_1a(tab, u)

    def branching(self, statuses):
        tab = Tableau()
        tab.new_succ(None, False, True, {At("a", p)}, (), None)
        kids = [tab.new_succ(0, False, False, {Prop(f"k{i}")}, (), None) for i in range(len(statuses))]
        tab[0].expansion = Expansion("or", None, [Branch(k) for k in kids])
        tab.set_status(0, EXPANDED)
        for k, st in zip(kids, statuses):
            tab.set_status(k, st)
        return tab

    def test_all_branches_unsat(self):
        tab = self.branching([UNSAT, UNSAT])
        assert clause_2(tab, 0) and tab[0].status == UNSAT

    def test_branches_closed_for_a_common_anchor(self):
        tab = self.branching([unsat_wrt({1, 2}), UNSAT, unsat_wrt({2, 3})])
        assert clause_2(tab, 0) and tab[0].status == unsat_wrt({2})
        assert not clause_2(tab, 0)

    def test_disjoint_anchors_leave_the_node_open(self):
        tab = self.branching([unsat_wrt({1}), unsat_wrt({2})])
        assert not clause_2(tab, 0) and tab[0].status == EXPANDED

    def test_one_open_branch_suffices(self):
        tab = self.branching([UNSAT, EXPANDED])
        assert not clause_2(tab, 0)

    def test_state_fails_with_any_successor(self):
        tab, u = state(At("a", Dia(S, p)), At("a", Dia(S, q)))
        x = tab.new_succ(u, False, False, {p}, (), None, elabel="x")
        y = tab.new_succ(u, False, False, {q}, (), None, elabel="y")
        tab.set_status(u, EXPANDED)
        tab.set_status(x, unsat_wrt({5}))
        tab.set_status(y, unsat_wrt({6}))
        assert clause_3(tab, u) and tab[u].status == unsat_wrt({5, 6})
        tab.set_status(y, UNSAT)
        assert clause_3(tab, u) and tab[u].status == UNSAT

    def test_incomplete_state_is_left_alone(self):
        tab, u = state(At("a", Dia(S, p)))
        x = tab.new_succ(u, False, False, {p}, (), None)
        tab.set_status(u, INCOMPLETE)
        tab.set_status(x, UNSAT)
        assert not clause_3(tab, u)

    def test_propagation_reaches_the_root(self):
        tab, u = state(At("a", Dia(S, p)))
        x = tab.new_succ(u, False, False, {p, Not(p)}, (), None)
        tab.set_status(u, EXPANDED)
        assert propagate(tab)
        assert [tab[v].status for v in (x, u, 0)] == [UNSAT] * 3


class TestWorkedExample:
    def test_final_statuses(self, worked_decision):
        tab = worked_decision.tableau
        assert tab[tab.root].status == UNSAT
        kinds = {n.status.kind for n in tab.nodes}
        assert Kind.INCOMPLETE in kinds and Kind.UNSAT_WRT in kinds
        wrt = {n.status.wrt for n in tab.nodes if n.status.kind is Kind.UNSAT_WRT}
        (anchors,) = wrt
        assert all(tab[u].is_state and tab[u].is_complex for u in anchors)

    def test_loop_is_closed_by_realizability(self, worked_decision):
        rules = {e["rule"] for e in worked_decision.tableau.events if e["event"] == "rule"}
        assert {"unsat-1a", "unsat-1b", "unsat-2a", "unsat-2b"} <= rules

    def test_fixpoint_is_idempotent(self, worked_abox):
        tab = decide(worked_abox).tableau
        assert apply_unsat(tab) == set()


def status_rank(st):
    return {Kind.UNSAT: 3, Kind.UNSAT_WRT: 2}.get(st.kind, 0)


@pytest.mark.parametrize("name,abox", corpus.handwritten("sat") + corpus.handwritten("unsat"))
def test_closing_statuses_only_grow(name, abox):
    tab = corpus.decision(abox).tableau
    for e in tab.events:
        if e["event"] != "status":
            continue
        old, new = e["old"], e["new"]
        assert status_rank(new) >= status_rank(old), (name, e)
        if old.kind is Kind.UNSAT_WRT and new.kind is Kind.UNSAT_WRT:
            assert old.wrt <= new.wrt


@pytest.mark.parametrize("name,abox", corpus.handwritten("sat") + corpus.handwritten("unsat"))
def test_justifications_terminate(name, abox):
    tab = corpus.decision(abox).tableau
    for u in anchors(tab):
        table = compute_realizability(tab, u)
        for (v, xi), mark in table.marks.items():
            if mark.tag == "open":
                continue
            chain = trace_realization(table, v, xi)
            assert len(chain) <= len(table.marks) + 2
            rounds = [table.marks[c].round for c in chain[:-1]]
            assert rounds == sorted(rounds, reverse=True) and len(set(rounds)) == len(rounds)
