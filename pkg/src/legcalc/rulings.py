"""
Normal rulings of a front, graded and ungraded.

A ruling pairs the strands at every slice.  Left cusps pair their two
branches, right cusps must close a pair, and each crossing either passes
(partners follow their strands) or switches (the pairing on positions is
unchanged).  Partners may never cross, and a switch must leave the two
partner intervals nested or disjoint.  Graded rulings additionally switch
only where the Maslov potentials of the crossing strands agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .cobordism import CobordismCertificate, Flag, ReplayError, check
from .front import FrontDiagram, LegcalcError, invariants
from .moves import words_equal


class RulingError(LegcalcError):
    pass


@dataclass(frozen=True)
class MaslovPotential:
    values: tuple[int, ...]   # one per arc
    modulus: int              # 0 means plain integers

    def agree(self, a: int, b: int) -> bool:
        diff = self.values[a] - self.values[b]
        return diff == 0 if self.modulus == 0 else diff % self.modulus == 0


def maslov_potential(d: FrontDiagram) -> MaslovPotential:
    """Potential on arcs: the upper branch of each cusp sits one above the lower.

    Each component is normalised to 0 on its first arc; values are reduced
    modulo 2|rot| when the rotation number is nonzero.
    """
    if not d.is_knot():
        raise RulingError("Maslov potentials are only normalised for knots")
    rot = abs(invariants(d).rot[0])
    mod = 2 * rot
    val: dict[int, int] = {}
    upper_of: dict[tuple[int, int], int] = {}
    for upper, lower in d.trace.cusps.values():
        upper_of[(upper, lower)] = upper_of[(lower, upper)] = upper
    for cycle in d.components():
        val[cycle[0]] = 0
        for a, b in zip(cycle, cycle[1:]):
            val[b] = val[a] - 1 if upper_of[(a, b)] == a else val[a] + 1
    values = tuple(val[a] % mod if mod else val[a] for a in range(len(val)))
    return MaslovPotential(values, mod)


def _normal(pair: list[int], i: int) -> bool:
    """Switch at positions i, i+1 (0-based): partner intervals nested or disjoint."""
    a, b = pair[i], pair[i + 1]
    lo1, hi1 = sorted((i, a))
    lo2, hi2 = sorted((i + 1, b))
    disjoint = hi1 < lo2 or hi2 < lo1
    nested = (lo1 <= lo2 and hi2 <= hi1) or (lo2 <= lo1 and hi1 <= hi2)
    return disjoint or nested


def enumerate_rulings(d: FrontDiagram, graded: bool = False) -> list[frozenset[int]]:
    """All normal rulings, each given as its set of switched crossing indices."""
    mp = maslov_potential(d) if graded else None
    events = d.events
    crossings = d.trace.crossings
    found: list[frozenset[int]] = []

    def sweep(k: int, pair: list[int], switches: tuple[int, ...]):
        while k < len(events):
            kind, pos = events[k]
            i = pos - 1
            if kind == "L":
                pair = [p + 2 if p >= i else p for p in pair]
                pair[i:i] = [i + 1, i]
            elif kind == "R":
                if pair[i] != i + 1:
                    return
                del pair[i:i + 2]
                pair = [p - 2 if p > i + 1 else p for p in pair]
            else:
                if pair[i] == i + 1:
                    return
                over, under = crossings[k]
                if _normal(pair, i) and (mp is None or mp.agree(over, under)):
                    sweep(k + 1, list(pair), switches + (k,))
                # pass: partners follow their strands through the crossing
                a, b = pair[i], pair[i + 1]
                pair = list(pair)
                pair[i], pair[i + 1] = b, a
                pair[a], pair[b] = i + 1, i
            k += 1
        found.append(frozenset(switches))

    sweep(0, [], ())
    return sorted(found, key=sorted)


def count_rulings(d: FrontDiagram) -> tuple[int, int | None]:
    """(ungraded, graded) counts; graded is None for links."""
    ungraded = len(enumerate_rulings(d))
    graded = len(enumerate_rulings(d, graded=True)) if d.is_knot() else None
    return ungraded, graded


@dataclass(frozen=True)
class FillabilityReport:
    ungraded: int
    graded: int | None
    filled: bool
    flags: tuple[Flag, ...] = field(default=())

    def summary(self) -> str:
        g = "-" if self.graded is None else str(self.graded)
        lines = [f"RULINGS {self.ungraded} {g}"]
        if self.filled:
            lines.append("filling certificate: verified")
        elif self.ungraded == 0:
            lines.append("note: no ruling: not exactly fillable")
        lines.append("kauffman bound sharpness: not evaluated")
        lines += [str(f) for f in self.flags]
        return "\n".join(lines)


def fillability_report(d: FrontDiagram, store: Iterable[CobordismCertificate] = (),
                       ) -> FillabilityReport:
    """Ruling counts plus a cross-check against any stored filling of d.

    A verified filling of a front with no ungraded ruling contradicts the
    chain fillable => augmentation => ruling, so it is flagged.
    """
    ungraded, graded = count_rulings(d)
    filled = False
    flags = []
    for cert in store:
        if cert.bottom.events or not words_equal(cert.top, d):
            continue
        try:
            rep = check(cert)
        except ReplayError:
            continue
        if rep.violations:
            continue
        filled = True
        if ungraded == 0:
            flags.append(Flag("TheoremViolation",
                              f"verified filling of {d.word} but it has no ungraded ruling"))
    return FillabilityReport(ungraded, graded, filled, tuple(flags))
