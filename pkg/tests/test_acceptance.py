"""Acceptance criteria.  Each test records its sub-checks with `record`;
the terminal summary prints one PASS/FAIL line per criterion."""
import dataclasses
import os
import random
import subprocess
import sys
import textwrap
import time

import pytest

from conftest import CORPUS, ROOT, corpus_certificates, corpus_fronts, record
from legcalc.cli import read_index
from legcalc.cobordism import (
    CertificateStore, check, endocobordism_audit, load_certificate, session_consistency,
)
from legcalc.constructions import (
    ConstructionError, FamilyParams, StabSite, between_stabilized, endocobordism, fill_family,
    reverse_to_stabilized, stabilize, to_unknot, twist_reduction,
)
from legcalc.front import invariants, orient
from legcalc.moves import MOVE_TABLE, apply_move, enumerate_moves
from legcalc.rulings import count_rulings, enumerate_rulings, fillability_report
from oracles import rulings_bruteforce, tb_rot
from test_moves import carried, oriented_signature

STEP_LAW = {"PINCH": -1, "MOVE": 0, "CUP": 1}


def stabilized_knots():
    return {n: d for n, d in corpus_fronts().items() if "stab" in n}


def generated_certificates():
    fr = corpus_fronts()
    out = [endocobordism(d, k) for d in stabilized_knots().values() for k in (1, 2)]
    down = to_unknot(fr["trefoil_max"])
    out += [down, reverse_to_stabilized(down), to_unknot(fr["figure_eight_max"])]
    out.append(between_stabilized(fr["stab_unknot"], fr["trefoil_stab"]))
    out += [twist_reduction(m) for m in range(3)]
    for params in (FamilyParams("twist", m=-4, variant="SZ"), FamilyParams("twist", m=-5),
                   FamilyParams("twist", m=3),
                   FamilyParams("negtorus", p=7, k=1, n1=1, n2=1)):
        out.append(fill_family(params))
    return out


# --- 1 ---------------------------------------------------------------------

def test_criterion_1_invariant_baselines():
    t0 = time.perf_counter()
    fr = corpus_fronts()
    u = invariants(fr["unknot_max"])
    ok = record(1, "max unknot (-1, 0)", (u.tb[0], u.rot[0]) == (-1, 0))
    t = invariants(fr["trefoil_max"])
    ok &= record(1, "max right trefoil tb 1", t.tb[0] == 1 and tb_rot(fr["trefoil_max"].word)[0] == 1)
    rng = random.Random(2024)
    knots = [d for d in fr.values() if d.is_knot()]
    shifts = True
    for _ in range(200):
        d = rng.choice(knots)
        gap = rng.randint(1, len(d) - 1)
        site = StabSite(gap, rng.randint(1, d.strand_count(gap)), rng.choice("+-"))
        tb0, rot0 = tb_rot(d.word)
        want = (tb0 - 1, rot0 + (1 if site.sign == "+" else -1))
        shifts &= tb_rot(stabilize(d, site).word) == want
    ok &= record(1, "200 stabilizations shift (tb, rot) by (-1, +-1)", shifts)
    ok &= record(1, "runtime < 1 s", time.perf_counter() - t0 < 1.0)
    assert ok


# --- 2 ---------------------------------------------------------------------

def test_criterion_2_move_soundness():
    rng = random.Random(99)
    fronts = list(corpus_fronts().values())
    sound = True
    for _ in range(1000):
        od = orient(rng.choice(fronts))
        sig = oriented_signature(od)
        for _ in range(rng.randint(1, 30)):
            m = rng.choice(enumerate_moves(od.diagram))
            _, od = carried(od, m)
            if oriented_signature(od) != sig:
                sound = False
                break
    ok = record(2, "1000 random sequences keep components, tb, rot, w-rc", sound)
    no_bigon = all(
        not (len(a) == 2 and a[0] == a[1] and a[0][0] == "X" and b == ())
        for variants in MOVE_TABLE.values()
        for simple, cplx in variants.values()
        for a, b in ((simple, cplx), (cplx, simple)))
    ok &= record(2, "no bigon rewrite in the move table", no_bigon)
    assert ok


# --- 3 ---------------------------------------------------------------------

def test_criterion_3_genus_bookkeeping():
    certs = [load_certificate(p) for p in corpus_certificates()] + generated_certificates()
    laws = chi = True
    for cert in certs:
        rep = check(cert)
        laws &= all(r.delta == STEP_LAW[r.kind] for r in rep.steps)
        chi &= rep.euler == cert.cups - cert.pinches
    ok = record(3, f"step laws on {len(certs)} certificates", laws)
    ok &= record(3, "chi = #cup - #pinch", chi)
    assert ok


# --- 4 ---------------------------------------------------------------------

def test_criterion_4_endocobordism_theorem():
    ok = True
    for name, d in stabilized_knots().items():
        for k in (1, 2, 3):
            rep = check(endocobordism(d, k))
            good = (not rep.orientable and rep.crosscap_genus == 4 * k and not rep.flags)
            ok &= record(4, f"{name} k={k} crosscap {4 * k}", good)
    cert = endocobordism(stabilized_knots()["stab_unknot"], 1)
    forged = dataclasses.replace(check(cert), crosscap_genus=2)
    flags = endocobordism_audit(cert, forged)
    ok &= record(4, "forged crosscap-2 report flagged",
                 [f.kind for f in flags] == ["TheoremViolation"])
    assert ok


# --- 5 ---------------------------------------------------------------------

def test_criterion_5_descent_and_ascent():
    fr = corpus_fronts()
    down = to_unknot(fr["trefoil_max"])
    rep = check(down)
    ok = record(5, "to_unknot(trefoil) verifies, non-orientable",
                not rep.orientable and not rep.violations)
    both = down.then(reverse_to_stabilized(down))
    rep = check(both)
    ok &= record(5, "composition trefoil -> stabilized trefoil verifies",
                 not rep.violations and both.top == fr["trefoil_max"])
    a, b = fr["trefoil_stab"], fr["stab_unknot"]
    for x, y in ((a, b), (b, a)):
        cert = between_stabilized(x, y)
        ok &= record(5, f"between {x.word} -> {y.word}",
                     cert.top == x and cert.bottom == y and not check(cert).violations)
    assert ok


# --- 6 ---------------------------------------------------------------------

def test_criterion_6_fillings():
    rep = check(load_certificate(CORPUS / "trefoil_fill.lcob"))
    ok = record(6, "trefoil filling orientable genus 1",
                rep.orientable and rep.genus == 1 and rep.euler == -1)
    for m, v in ((-2, ""), (-3, "S"), (-3, "Z"), (-4, "SZ"), (-5, "ZZS"), (-6, "SZSZ")):
        cert = fill_family(FamilyParams("twist", m=m, variant=v))
        r = check(cert)
        ok &= record(6, f"TwistKnot({m}) 2 pinches",
                     r.pinches == 2 and not cert.bottom.events and not r.violations)
    for m in range(4):
        ok &= record(6, f"K_{m + 1} -> K_{m} one pinch", twist_reduction(m).pinches == 1)
    for p, n1, n2 in ((3, 0, 0), (5, 1, 0), (5, 0, 1), (7, 1, 1), (9, 3, 0)):
        cert = fill_family(FamilyParams("negtorus", p=p, k=1, n1=n1, n2=n2))
        r = check(cert)
        ok &= record(6, f"NegTorus({p},1,{n1},{n2}) 1 pinch",
                     r.pinches == 1 and not cert.bottom.events and not r.violations)
    assert ok


@pytest.mark.xfail(strict=True, raises=ConstructionError,
                   reason="no k-pinch filling schedule is known for NegTorus with k >= 2")
def test_criterion_6_negative_torus_k2():
    try:
        cert = fill_family(FamilyParams("negtorus", p=5, k=2))
    except ConstructionError:
        record(6, "NegTorus(5,2,0,0) 2 pinches", False)
        raise
    record(6, "NegTorus(5,2,0,0) 2 pinches", cert.pinches == 2 and not check(cert).violations)


# --- 7 ---------------------------------------------------------------------

def test_criterion_7_rulings():
    fr = corpus_fronts()
    small = {n: d for n, d in fr.items() if sum(e.kind == "X" for e in d.events) <= 12}
    ok = record(7, f"sweep = brute force on {len(small)} corpus fronts",
                all(set(enumerate_rulings(d)) == rulings_bruteforce(d.word) for d in small.values()))
    rng = random.Random(5)
    pool = list(small.values())
    inv = True
    for _ in range(500):
        d = rng.choice(pool)
        inv &= count_rulings(apply_move(d, rng.choice(enumerate_moves(d)))) == count_rulings(d)
    ok &= record(7, "counts invariant over 500 random moves", inv)
    ok &= record(7, "stabilized knots have 0 ungraded rulings",
                 all(count_rulings(d)[0] == 0 for d in stabilized_knots().values()))
    certs = [load_certificate(p) for p in corpus_certificates()]
    reports = [fillability_report(d, certs) for d in fr.values()]
    ok &= record(7, "every filled corpus knot has a ruling",
                 all(r.ungraded >= 1 for r in reports if r.filled)
                 and sum(r.filled for r in reports) >= 10)
    store = CertificateStore()
    for c in certs:
        store.add(c)
    flags = session_consistency(store) + [f for r in reports for f in r.flags]
    ok &= record(7, "session consistency: no TheoremViolation",
                 not [f for f in flags if f.kind == "TheoremViolation"])
    assert ok


# --- 8 ---------------------------------------------------------------------

DRIVER = textwrap.dedent("""
    import contextlib, io, sys
    from legcalc.cli import main
    for line in sys.stdin.read().splitlines():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(buf):
            code = main(line.split())
        sys.stdout.write(f"$ {line}\\n{buf.getvalue()}[exit {code}]\\n")
""")


def cli_commands():
    cmds = []
    for _, f, certs in read_index(CORPUS):
        path = f"corpus/{f}"
        cmds += [f"validate {path}", f"inv {path}", f"move {path} --list",
                 f"rulings count {path}", f"rulings count {path} --graded"]
        cmds += [f"check corpus/{c}" for c in certs]
    cmds += [
        "corpus list", "corpus check --jobs 4",
        "search corpus/stab_unknot.front corpus/stab_unknot.front --depth 2",
        "move corpus/unknot_max.front R1 below.1 1 fwd",
        "gen tounknot corpus/trefoil_max.front",
        "gen endo corpus/trefoil_stab.front --k 2",
        "gen between corpus/stab_unknot.front corpus/trefoil_stab.front",
        "gen family --family twist --m -4 --variant SZ",
        "gen family --family twist --m 3",
        "gen family --family negtorus --p 7 --k 1 --n1 1 --n2 1",
        "gen family --family negtorus --p 5 --k 2 --front-only",
        "gen family --family negtorus --p 5 --k 2",
    ]
    return cmds


def run_cli(cmds, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    res = subprocess.run([sys.executable, "-c", DRIVER], input="\n".join(cmds).encode(),
                         cwd=ROOT, env=env, capture_output=True, check=True)
    return res.stdout


def test_criterion_8_determinism():
    cmds = cli_commands()
    first, second = run_cli(cmds, 1), run_cli(cmds, 2)
    ok = record(8, f"{len(cmds)} CLI commands byte-identical across two runs", first == second)
    ok &= record(8, "every command ran", first.count(b"[exit ") == len(cmds))
    script = [sys.executable, "-m", "legcalc.cli", "corpus", "check"]
    a = subprocess.run(script, cwd=ROOT, capture_output=True)
    b = subprocess.run(script, cwd=ROOT, capture_output=True)
    ok &= record(8, "corpus check as a program", a.stdout == b.stdout and a.returncode == b.returncode == 0)
    assert ok
