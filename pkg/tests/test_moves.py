import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_fronts, fronts_strategy
from legcalc.constructions import StabSite, stabilize
from legcalc.cobordism import Isotopy, _window, carry_directions
from legcalc.front import FrontDiagram, invariants, orient, orient_from_arcs
from legcalc.moves import (
    MOVE_TABLE, IsotopyCertificate, IsotopyMove, MoveError, SearchBudgetExceeded,
    apply_move, commute_candidates, enumerate_moves, inverse_move, normal_form,
    search_isotopy, verify_isotopy, words_equal,
)
from legcalc.moves import invariant_signature


def signature(d):
    inv = invariants(d)
    return d.num_components, inv.tb, inv.rot, inv.total


def carried(od, m):
    """Apply m and carry the orientation of od across it."""
    e = apply_move(od.diagram, m)
    g, old, new = _window(Isotopy(m))
    return e, orient_from_arcs(e, carry_directions(od, e, g, old, new))


def oriented_signature(od):
    inv = invariants(od)
    return od.diagram.num_components, sorted(zip(inv.tb, inv.rot)), inv.total


def test_no_bigon_template():
    for variants in MOVE_TABLE.values():
        for simple, complex_ in variants.values():
            for a, b in ((simple, complex_), (complex_, simple)):
                bigon = len(a) == 2 and a[0] == a[1] and a[0][0] == "X"
                assert not (bigon and b == ())


def test_commutation_never_cancels_a_bigon():
    ev = FrontDiagram.from_word("L1 L3 X2 X2 R1 R1").events
    for b, a in commute_candidates(ev, 2):
        assert (b.kind, a.kind) == ("X", "X")


def test_fish_insertion_keeps_invariants():
    d = FrontDiagram.from_word("L1 R1")
    m = IsotopyMove("R1", "below.1", 1, "fwd")
    e = apply_move(d, m)
    assert e.word == "L1 L2 X1 R2 R1"
    assert signature(e) == signature(d)
    assert apply_move(e, inverse_move(d, m)) == d


def test_mismatched_move_is_rejected():
    d = FrontDiagram.from_word("L1 R1")
    with pytest.raises(MoveError):
        apply_move(d, IsotopyMove("R3", "braid.1", 0, "fwd"))
    with pytest.raises(MoveError):
        apply_move(d, IsotopyMove("R1", "below.1", 1, "inv"))


@settings(max_examples=60, deadline=None)
@given(fronts_strategy(max_events=10), st.integers(0, 2 ** 32 - 1))
def test_random_moves_preserve_invariants(d, seed):
    rng = random.Random(seed)
    od = orient(d)
    sig = oriented_signature(od)
    for _ in range(rng.randint(1, 30)):
        m = rng.choice(enumerate_moves(od.diagram))
        e, oe = carried(od, m)
        assert oriented_signature(oe) == sig, m
        assert apply_move(e, inverse_move(od.diagram, m)) == od.diagram
        od = oe


@settings(max_examples=60, deadline=None)
@given(fronts_strategy())
def test_normal_form_is_reached_by_its_moves(d):
    nf, moves = normal_form(d)
    cur = d
    for m in moves:
        cur = apply_move(cur, m)
    assert cur == nf
    assert normal_form(nf)[0] == nf
    assert words_equal(d, nf)


def test_search_finds_two_stabilized_unknots():
    u = FrontDiagram.from_word("L1 R1")
    a = stabilize(u, StabSite(1, 1, "-"))
    b = stabilize(u, StabSite(1, 2, "-"))
    assert a != b
    cert = search_isotopy(a, b, depth=4)
    assert cert is not None
    assert verify_isotopy(a, b, cert).ok


def test_search_refuses_different_invariants():
    a = FrontDiagram.from_word("L1 L1 R2 R1")
    b = FrontDiagram.from_word("L1 L2 R1 R1")
    assert invariant_signature(a) == invariant_signature(b)
    assert search_isotopy(a, FrontDiagram.from_word("L1 R1"), depth=3) is None


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("LEGCALC_NODE_BUDGET", "5")
    a = corpus_fronts()["trefoil_stab"]
    b = FrontDiagram.from_word("L1 L3 X2 X2 X2 R1 L1 R2 R1")
    with pytest.raises(SearchBudgetExceeded):
        search_isotopy(a, b, depth=6)


def test_verify_reports_failing_index():
    d = FrontDiagram.from_word("L1 R1")
    cert = IsotopyCertificate((IsotopyMove("R1", "below.1", 1, "fwd"),
                               IsotopyMove("R3", "braid.1", 0, "fwd")))
    v = verify_isotopy(d, d, cert)
    assert not v.ok and v.failed_index == 1


def test_corpus_moves_are_sound():
    for d in corpus_fronts().values():
        od = orient(d)
        sig = oriented_signature(od)
        for m in enumerate_moves(d):
            assert oriented_signature(carried(od, m)[1]) == sig


@settings(max_examples=100, deadline=None)
@given(fronts_strategy(max_events=16))
def test_every_enumerated_move_applies(d):
    # enumeration checks validity on the rewritten window only
    for m in enumerate_moves(d):
        apply_move(d, m)
