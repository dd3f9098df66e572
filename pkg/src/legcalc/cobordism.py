"""
Cobordism certificates and their verifier.

A certificate is a movie read from the top link down to the bottom link.
Each step is a Legendrian isotopy move, a pinch (a 0-tangle between the
strands at positions i, i+1 replaced by the oo-tangle ``R i L i``) or a cup
(an isolated ``L i R i`` unknot deleted).

The verifier replays the movie, tracks orientations through it, and
reports Euler characteristic, orientability and genus.  Theorem checks
are reported as flags; a ``TheoremViolation`` flag always means a bug.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

from .front import (
    Event, FrontDiagram, LegcalcError, OrientedDiagram, invariants, orient,
    orient_from_arcs, parse_front, parse_token,
)
from .moves import (
    IsotopyCertificate, IsotopyMove, MoveError, apply_move, move_window, normal_form,
    verify_isotopy,
)

LCOB_HEADER = "LCOB"
LCOB_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_STEP = 2
EXIT_THEOREM = 3


class ReplayError(LegcalcError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"step {index}: {reason}")
        self.index = index
        self.reason = reason


class CertificateSyntaxError(LegcalcError):
    pass


class CobordismStep(NamedTuple):
    kind: str                     # "MOVE", "PINCH" or "CUP"
    gap: int
    pos: int = 0
    move: IsotopyMove | None = None

    def __str__(self) -> str:
        if self.kind == "MOVE":
            return str(self.move)
        if self.kind == "PINCH":
            return f"PINCH {self.gap} {self.pos}"
        return f"CUP {self.gap}"


def Isotopy(move: IsotopyMove) -> CobordismStep:
    return CobordismStep("MOVE", move.gap, 0, move)


def Pinch(gap: int, pos: int) -> CobordismStep:
    return CobordismStep("PINCH", gap, pos)


def Cup(gap: int) -> CobordismStep:
    return CobordismStep("CUP", gap)


@dataclass(frozen=True)
class CobordismCertificate:
    top: FrontDiagram
    steps: tuple[CobordismStep, ...]
    bottom: FrontDiagram
    # optional proof that bottom is isotopic to top, for endocobordism audits
    end_isotopy: IsotopyCertificate | None = None

    @property
    def pinches(self) -> int:
        return sum(s.kind == "PINCH" for s in self.steps)

    @property
    def cups(self) -> int:
        return sum(s.kind == "CUP" for s in self.steps)

    def then(self, other: "CobordismCertificate") -> "CobordismCertificate":
        """Stack other below self.  The ends must match word for word."""
        if self.bottom.events != other.top.events:
            raise LegcalcError("cannot stack: bottom and top differ")
        return CobordismCertificate(self.top, self.steps + other.steps, other.bottom)


# --- step application ----------------------------------------------------

def apply_step(d: FrontDiagram, step: CobordismStep) -> FrontDiagram:
    ev = d.events
    if step.kind == "MOVE":
        return apply_move(d, step.move)
    if not 0 <= step.gap <= len(ev):
        raise MoveError(f"gap {step.gap} out of range")
    if step.kind == "PINCH":
        n = d.strand_count(step.gap)
        if not 1 <= step.pos <= n - 1:
            raise MoveError(f"pinch position {step.pos} invalid with {n} strands")
        i = step.pos
        return FrontDiagram(ev[:step.gap] + (Event("R", i), Event("L", i)) + ev[step.gap:])
    if step.kind == "CUP":
        g = step.gap
        if g + 1 >= len(ev) or ev[g].kind != "L" or ev[g + 1] != Event("R", ev[g].pos):
            raise MoveError(f"no isolated 'L i R i' unknot at gap {g}")
        return FrontDiagram(ev[:g] + ev[g + 2:])
    raise MoveError(f"unknown step kind {step.kind!r}")


def _window(step: CobordismStep) -> tuple[int, int, int]:
    """(gap, old width, new width) of the rewritten window."""
    if step.kind == "PINCH":
        return step.gap, 0, 2
    if step.kind == "CUP":
        return step.gap, 2, 0
    return (step.gap,) + move_window(step.move)


def replay(cert: CobordismCertificate) -> list[FrontDiagram]:
    """All diagrams of the movie, top first.  Raises ReplayError."""
    out = [cert.top]
    for idx, step in enumerate(cert.steps):
        try:
            out.append(apply_step(out[-1], step))
        except LegcalcError as exc:
            raise ReplayError(idx, str(exc)) from None
    if out[-1].events != cert.bottom.events:
        raise ReplayError(len(cert.steps),
                          f"final word {out[-1].word!r} != declared bottom {cert.bottom.word!r}")
    return out


# --- orientation transport -----------------------------------------------

def _arc_map(before: FrontDiagram, after: FrontDiagram, gap: int, old: int, new: int):
    """Pairs (arc of after, arc of before) sharing a slice outside the window."""
    sb, sa = before.trace.slices, after.trace.slices
    pairs = []
    for g in range(gap + 1):
        pairs.extend(zip(sa[g], sb[g]))
    for g in range(gap + old, len(sb)):
        pairs.extend(zip(sa[g - old + new], sb[g]))
    return pairs


def carry_directions(before: OrientedDiagram, after: FrontDiagram,
                     gap: int, old: int, new: int) -> list[int]:
    """Arc directions of `after` copied from `before` outside the window.

    Arcs living entirely inside the window take the direction opposite to
    an already directed partner at one of their cusps.
    """
    dirs = [0] * len(after.trace.arc_start)
    for a_new, a_old in _arc_map(before.diagram, after, gap, old, new):
        dirs[a_new] = before.arc_dirs[a_old]
    partners: dict[int, list[int]] = {}
    for a, b in after.trace.cusps.values():
        partners.setdefault(a, []).append(b)
        partners.setdefault(b, []).append(a)
    changed = True
    while changed:
        changed = False
        for a, d in enumerate(dirs):
            if d == 0:
                for b in partners.get(a, ()):
                    if dirs[b]:
                        dirs[a] = -dirs[b]
                        changed = True
                        break
    return [d or 1 for d in dirs]


def _component_links(before: FrontDiagram, after: FrontDiagram, gap, old, new):
    cb, ca = before.arc_component, after.arc_component
    return {(ca[a], cb[b]) for a, b in _arc_map(before, after, gap, old, new)}


@dataclass(frozen=True)
class StepRecord:
    index: int
    kind: str
    total_before: int
    total_after: int            # w - rc of the carried direction field
    reorientation: int = 0      # change when the field is made consistent
    antiparallel: bool | None = None

    @property
    def delta(self) -> int:
        return self.total_after - self.total_before


@dataclass(frozen=True)
class Flag:
    kind: str                   # "TheoremViolation" or "note"
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class CobordismReport:
    euler: int
    orientable: bool
    genus: int | None
    crosscap_genus: int | None
    pinches: int
    cups: int
    surface_components: int
    boundary_components: int
    exact: bool = True
    flags: tuple[Flag, ...] = ()
    pinch_orientability: tuple[bool, ...] = ()
    steps: tuple[StepRecord, ...] = field(default=(), repr=False)
    top_choices: tuple[bool, ...] = ()

    @property
    def violations(self) -> list[Flag]:
        return [f for f in self.flags if f.kind == "TheoremViolation"]

    def summary(self) -> str:
        kind = (f"orientable genus={self.genus}" if self.orientable
                else f"non-orientable crosscap={self.crosscap_genus}")
        lines = [f"chi={self.euler} {kind} pinches={self.pinches} cups={self.cups} exact={'yes' if self.exact else 'no'}"]
        lines += [str(f) for f in self.flags]
        return "\n".join(lines)


def _walk(diagrams: Sequence[FrontDiagram], steps: Sequence[CobordismStep],
          choices: Sequence[bool]) -> list[StepRecord]:
    od = orient(diagrams[0], choices)
    records = []
    for idx, step in enumerate(steps):
        after = diagrams[idx + 1]
        gap, old, new = _window(step)
        carried = carry_directions(od, after, gap, old, new)
        total_before = invariants(od).total
        pseudo = OrientedDiagram(after, (), tuple(carried))
        total_after = invariants(pseudo).total
        anti = None
        if step.kind == "PINCH":
            sl = od.slice_dirs(gap)
            anti = sl[step.pos - 1] != sl[step.pos]
        try:
            od2 = orient_from_arcs(after, carried)
        except LegcalcError:
            if step.kind != "PINCH":
                raise LegcalcError(f"step {idx}: orientation lost across an isotopy")
            od2 = orient(after, [carried[c[0]] == 1 for c in after.components()])
        records.append(StepRecord(idx, step.kind, total_before, total_after,
                                  invariants(od2).total - total_after, anti))
        od = od2
    return records


def _surface_components(diagrams, steps) -> int:
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, d in enumerate(diagrams):
        for c in range(d.num_components):
            find((k, c))
    for idx, step in enumerate(steps):
        before, after = diagrams[idx], diagrams[idx + 1]
        gap, old, new = _window(step)
        for ca, cb in _component_links(before, after, gap, old, new):
            ra, rb = find((idx + 1, ca)), find((idx, cb))
            parent[ra] = rb
    return len({find(x) for x in list(parent)})


def check(cert: CobordismCertificate, audit: bool = True) -> CobordismReport:
    """Verify a certificate and compute its topology.  Raises ReplayError."""
    diagrams = replay(cert)
    top = cert.top
    nc = top.num_components
    walks = []
    chosen = None
    # a global reversal keeps every pinch's (anti)parallelism, so fix the first choice
    for rest in itertools.product([True, False], repeat=max(nc - 1, 0)):
        choices = ((True,) + rest) if nc else ()
        recs = _walk(diagrams, cert.steps, choices)
        walks.append((choices, recs))
        if all(r.antiparallel for r in recs if r.kind == "PINCH"):
            chosen = (choices, recs)
            break
    orientable = chosen is not None
    choices, recs = chosen if orientable else walks[0]
    chi = cert.cups - cert.pinches
    s = _surface_components(diagrams, cert.steps)
    b = nc + cert.bottom.num_components
    twice = 2 * s - b - chi
    report = CobordismReport(
        euler=chi,
        orientable=orientable,
        genus=twice // 2 if orientable else None,
        crosscap_genus=None if orientable else twice,
        pinches=cert.pinches,
        cups=cert.cups,
        surface_components=s,
        boundary_components=b,
        pinch_orientability=tuple(bool(r.antiparallel) for r in recs if r.kind == "PINCH"),
        steps=tuple(recs),
        top_choices=tuple(choices),
    )
    flags = list(bookkeeping_flags(report))
    if audit:
        flags += endocobordism_audit(cert, report)
    return _with_flags(report, flags)


def _with_flags(report: CobordismReport, flags) -> CobordismReport:
    from dataclasses import replace
    return replace(report, flags=tuple(report.flags) + tuple(flags))


def bookkeeping_flags(report: CobordismReport) -> list[Flag]:
    """Step laws: pinch -1, isotopy 0, cup +1 on w - rc; genus laws."""
    flags = []
    expected = {"PINCH": -1, "MOVE": 0, "CUP": 1}
    for r in report.steps:
        if r.delta != expected[r.kind]:
            flags.append(Flag("TheoremViolation",
                              f"step {r.index} ({r.kind}) changed w-rc by {r.delta}"))
    if report.euler + report.pinches - report.cups != 0:
        flags.append(Flag("TheoremViolation", "euler characteristic bookkeeping"))
    if (report.orientable and report.boundary_components == 2
            and report.surface_components == 1 and report.cups == 0
            and (report.pinches % 2 or report.genus != report.pinches // 2)):
        flags.append(Flag("TheoremViolation", "orientable knot cobordism with odd pinch count"))
    return flags


def ends_equal(cert: CobordismCertificate) -> bool:
    if cert.top.events == cert.bottom.events:
        return True
    if cert.end_isotopy is not None:
        return verify_isotopy(cert.bottom, cert.top, cert.end_isotopy).ok
    return normal_form(cert.top)[0].events == normal_form(cert.bottom)[0].events


def endocobordism_audit(cert: CobordismCertificate, report: CobordismReport) -> list[Flag]:
    """Crosscap genus of a non-orientable endocobordism is a multiple of 4;
    an orientable one has genus 0."""
    if not (cert.top.is_knot() and cert.bottom.events and ends_equal(cert)):
        return []
    if report.orientable:
        if report.pinches:
            return [Flag("TheoremViolation",
                         f"orientable endocobordism with {report.pinches} pinches")]
        return []
    if report.crosscap_genus % 4:
        return [Flag("TheoremViolation",
                     f"non-orientable endocobordism of crosscap genus {report.crosscap_genus}")]
    return []


# --- the certificate store -----------------------------------------------

def _key(d: FrontDiagram) -> tuple:
    return normal_form(d)[0].events


class CertificateStore:
    """Verified certificates; concurrent reads, serialized writes."""

    def __init__(self, items: Sequence[tuple[CobordismCertificate, CobordismReport]] = ()):
        self._items = list(items)
        self._lock = threading.Lock()

    def add(self, cert: CobordismCertificate, report: CobordismReport | None = None):
        report = report or check(cert)
        with self._lock:
            self._items = self._items + [(cert, report)]
        return report

    def __iter__(self):
        return iter(list(self._items))

    def __len__(self):
        return len(self._items)

    def fillings(self, d: FrontDiagram) -> list[CobordismCertificate]:
        k = _key(d)
        return [c for c, _ in self if not c.bottom.events and _key(c.top) == k]


def session_consistency(store) -> list[Flag]:
    """Cross-certificate checks: a fillable knot has no non-orientable
    endocobordism, and non-orientable cobordism between fillable knots is
    anti-symmetric."""
    items = list(store)
    fillable = {_key(c.top) for c, _ in items if not c.bottom.events and c.top.is_knot()}
    flags = []
    arrows = set()
    for c, r in items:
        if r.orientable or not c.bottom.events or not (c.top.is_knot() and c.bottom.is_knot()):
            continue
        k1, k2 = _key(c.top), _key(c.bottom)
        arrows.add((k1, k2))
        if k1 == k2 and k1 in fillable:
            flags.append(Flag("TheoremViolation",
                              f"fillable knot {c.top.word!r} has a non-orientable endocobordism"))
    for k1, k2 in sorted(arrows):
        if k1 < k2 and (k2, k1) in arrows and (k1 in fillable or k2 in fillable):
            flags.append(Flag("TheoremViolation",
                              "non-orientable cobordisms both ways between fillable knots"))
    return flags


# --- LCOB text format ----------------------------------------------------

def _parse_end(rest: str, base: Path | None) -> FrontDiagram:
    rest = rest.strip()
    if rest == "EMPTY" or rest == "":
        return FrontDiagram(())
    toks = rest.split()
    if len(toks) == 1 and not _looks_like_token(toks[0]):
        path = Path(toks[0])
        if base is not None and not path.is_absolute():
            path = base / path
        return parse_front(path.read_text())
    return FrontDiagram.from_word(rest)


def _looks_like_token(t: str) -> bool:
    try:
        parse_token(t)
        return True
    except LegcalcError:
        return False


def parse_certificate(text: str, base: Path | None = None) -> CobordismCertificate:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines or lines[0].split() != [LCOB_HEADER, str(LCOB_VERSION)]:
        raise CertificateSyntaxError(f"missing '{LCOB_HEADER} {LCOB_VERSION}' header")
    if len(lines) < 2 or not lines[1].startswith("TOP"):
        raise CertificateSyntaxError("missing TOP line")
    top = _parse_end(lines[1][3:], base)
    steps: list[CobordismStep] = []
    bottom = None
    ends_move: list[IsotopyMove] = []
    for n, line in enumerate(lines[2:], start=3):
        parts = line.split()
        head = parts[0]
        try:
            if bottom is not None and head != "ENDMOVE":
                raise CertificateSyntaxError(f"line {n}: content after BOTTOM")
            if head == "MOVE":
                steps.append(Isotopy(IsotopyMove.parse(line)))
            elif head == "PINCH" and len(parts) == 3:
                steps.append(Pinch(int(parts[1]), int(parts[2])))
            elif head == "CUP" and len(parts) == 2:
                steps.append(Cup(int(parts[1])))
            elif head == "BOTTOM":
                bottom = _parse_end(line[6:], base)
            elif head == "ENDMOVE":
                ends_move.append(IsotopyMove.parse(line[3:]))
            else:
                raise CertificateSyntaxError(f"line {n}: unknown step {line!r}")
        except (ValueError, MoveError) as exc:
            if isinstance(exc, CertificateSyntaxError):
                raise
            raise CertificateSyntaxError(f"line {n}: {exc}") from None
    if bottom is None:
        raise CertificateSyntaxError("missing BOTTOM line")
    end_iso = IsotopyCertificate(tuple(ends_move)) if ends_move else None
    return CobordismCertificate(top, tuple(steps), bottom, end_iso)


def serialize_certificate(cert: CobordismCertificate) -> str:
    lines = [f"{LCOB_HEADER} {LCOB_VERSION}", f"TOP {cert.top.word or 'EMPTY'}"]
    lines += [str(s) for s in cert.steps]
    lines.append(f"BOTTOM {cert.bottom.word or 'EMPTY'}")
    if cert.end_isotopy:
        lines += [f"END{m}" for m in cert.end_isotopy.moves]
    return "\n".join(lines) + "\n"


def load_certificate(path: str | Path) -> CobordismCertificate:
    path = Path(path)
    return parse_certificate(path.read_text(), path.parent)


def classify_pinch(od: OrientedDiagram, gap: int, pos: int) -> str:
    """'orientable' when the strands at (gap, pos), (gap, pos+1) are anti-parallel."""
    n = od.diagram.strand_count(gap)
    if not 1 <= pos <= n - 1:
        raise MoveError(f"pinch position {pos} invalid with {n} strands")
    sl = od.slice_dirs(gap)
    return "orientable" if sl[pos - 1] != sl[pos] else "non-orientable"
