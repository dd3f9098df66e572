import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, corpus_certificates, corpus_fronts, fronts_strategy
from legcalc.cobordism import (
    CertificateStore, CertificateSyntaxError, CobordismCertificate, Cup, Pinch, ReplayError,
    apply_step, check, classify_pinch, endocobordism_audit, load_certificate,
    parse_certificate, serialize_certificate, session_consistency,
)
from legcalc.constructions import endocobordism
from legcalc.front import FrontDiagram, LegcalcError, orient
from legcalc.moves import MoveError

F = FrontDiagram.from_word


def test_pinch_inserts_right_then_left_cusp():
    d = F("L1 L3 X2 X2 X2 R1 R1")
    assert apply_step(d, Pinch(3, 1)).word == "L1 L3 X2 R1 L1 X2 X2 R1 R1"


def test_cup_removes_an_isolated_unknot():
    assert apply_step(F("L1 R1 L1 R1"), Cup(2)).word == "L1 R1"
    with pytest.raises(MoveError):
        apply_step(F("L1 L1 R2 R1"), Cup(0))


def test_cup_rejects_a_crossed_unknot():
    # the pair L1 ... R1 is interrupted by a crossing
    with pytest.raises(MoveError):
        apply_step(F("L1 L3 X2 X2 R1 R1"), Cup(0))


@pytest.mark.parametrize("word, gap, pos, expected", [
    ("L1 R1", 1, 1, "orientable"),
    ("L1 L1 R2 R1", 2, 2, "orientable"),
    ("L1 L3 X2 X2 X2 R1 R1", 3, 2, "non-orientable"),
])
def test_pinch_classification(word, gap, pos, expected):
    assert classify_pinch(orient(F(word)), gap, pos) == expected


def test_classification_follows_the_orientation_of_one_strand():
    # two nested unknots: reversing the inner one changes the verdict
    od = orient(F("L1 L2 R2 R1"))
    base = classify_pinch(od, 2, 1)
    flipped = classify_pinch(od.reversed(1), 2, 1)
    assert {base, flipped} == {"orientable", "non-orientable"}


@settings(max_examples=80, deadline=None)
@given(fronts_strategy(), st.data())
def test_pinch_law_on_random_fronts(d, data):
    gap = data.draw(st.integers(1, len(d) - 1))
    n = d.strand_count(gap)
    if n < 2:
        return
    pos = data.draw(st.integers(1, n - 1))
    cert = CobordismCertificate(d, (Pinch(gap, pos),), apply_step(d, Pinch(gap, pos)))
    rep = check(cert, audit=False)
    assert [r.delta for r in rep.steps] == [-1]
    assert rep.euler == -1


def test_trefoil_filling_is_orientable_genus_one():
    rep = check(load_certificate(CORPUS / "trefoil_fill.lcob"))
    assert rep.orientable and rep.genus == 1 and rep.euler == -1
    assert (rep.pinches, rep.cups) == (2, 1)
    assert not rep.flags


@pytest.mark.parametrize("path", corpus_certificates(), ids=lambda p: p.name)
def test_shipped_certificates_obey_the_step_laws(path):
    rep = check(load_certificate(path))
    expected = {"PINCH": -1, "MOVE": 0, "CUP": 1}
    assert all(r.delta == expected[r.kind] for r in rep.steps)
    assert rep.euler == rep.cups - rep.pinches
    assert not rep.violations


def test_truncated_certificate_fails_at_the_last_step():
    cert = load_certificate(CORPUS / "trefoil_fill.lcob")
    short = dataclasses.replace(cert, steps=cert.steps[:-1])
    with pytest.raises(ReplayError) as err:
        check(short)
    assert err.value.index == len(short.steps)


def test_bad_step_is_reported_with_its_index():
    cert = load_certificate(CORPUS / "trefoil_fill.lcob")
    bad = dataclasses.replace(cert, steps=cert.steps[:2] + (Cup(0),) + cert.steps[2:])
    with pytest.raises(ReplayError) as err:
        check(bad)
    assert err.value.index == 2


def test_audit_flags_a_crosscap_two_endocobordism():
    d = corpus_fronts()["stab_unknot"]
    cert = endocobordism(d, 1)
    rep = check(cert)
    assert rep.crosscap_genus == 4 and not rep.violations
    forged = dataclasses.replace(rep, crosscap_genus=2)
    flags = endocobordism_audit(cert, forged)
    assert [f.kind for f in flags] == ["TheoremViolation"]


def test_audit_ignores_cobordisms_between_different_ends():
    cert = load_certificate(CORPUS / "trefoil_tounknot.lcob")
    rep = check(cert)
    assert endocobordism_audit(cert, dataclasses.replace(rep, crosscap_genus=2)) == []


def test_session_flags_an_endocobordism_of_a_fillable_knot():
    store = CertificateStore()
    store.add(load_certificate(CORPUS / "unknot_fill.lcob"))
    assert session_consistency(store) == []
    # a non-orientable endocobordism of the max unknot would contradict its filling
    u = F("L1 R1")
    fake = load_certificate(CORPUS / "stab_unknot_endo.lcob")
    rep = dataclasses.replace(check(fake), orientable=False)
    store.add(CobordismCertificate(u, fake.steps, u), rep)
    flags = session_consistency(store)
    assert flags and all(f.kind == "TheoremViolation" for f in flags)


def test_session_over_the_shipped_corpus_is_clean():
    store = CertificateStore()
    for p in corpus_certificates():
        store.add(load_certificate(p))
    assert session_consistency(store) == []


def test_lcob_roundtrip():
    for p in corpus_certificates():
        cert = load_certificate(p)
        again = parse_certificate(serialize_certificate(cert))
        assert again.top == cert.top and again.bottom == cert.bottom
        assert again.steps == cert.steps


@pytest.mark.parametrize("text", [
    "TOP L1 R1\nBOTTOM L1 R1\n",
    "LCOB 1\nPINCH 1 1\nBOTTOM L1 R1\n",
    "LCOB 1\nTOP L1 R1\nPINCH 1\nBOTTOM EMPTY\n",
    "LCOB 1\nTOP L1 R1\nTWIST 0\nBOTTOM EMPTY\n",
    "LCOB 1\nTOP L1 R1\nCUP 0\n",
    "LCOB 1\nTOP L1 R1\nBOTTOM EMPTY\nCUP 0\n",
])
def test_lcob_syntax_errors(text):
    with pytest.raises(CertificateSyntaxError):
        parse_certificate(text)


def test_stacking_requires_matching_ends():
    a = load_certificate(CORPUS / "trefoil_tounknot.lcob")
    with pytest.raises(LegcalcError):
        a.then(a)

