"""
Legendrian Reidemeister moves and planar commutations as word rewrites.

Every move replaces a short window of the event word.  The three
Reidemeister families are fixed templates written in terms of an anchor
strand position ``i``; the commutation family is computed by following
labelled strands through two adjacent events.

The move table below is a reconstruction of the standard pictures.  It is
not trusted on its own: the test-suite checks that every move preserves
the component count and the classical invariants.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .front import (
    Event, FrontDiagram, FrontValidityError, LegcalcError, check_events,
    invariants, orient,
)

FAMILIES = ("R1", "R2", "R3", "Commute")
DEFAULT_NODE_BUDGET = 10 ** 6


class MoveError(LegcalcError):
    """A move does not match the word at its anchor."""


class SearchBudgetExceeded(LegcalcError):
    pass


# (kind, offset from the anchor position i)
Pattern = tuple[tuple[str, int], ...]

# family -> variant name -> (simple side, complex side).
# "fwd" rewrites simple -> complex, "inv" the other way.
MOVE_TABLE: dict[str, dict[str, tuple[Pattern, Pattern]]] = {
    # fish tail on the strand at position i, hanging below or above it
    "R1": {
        "below": ((), (("L", 1), ("X", 0), ("R", 1))),
        "above": ((), (("L", 0), ("X", 1), ("R", 0))),
    },
    # the strand at position i slides across a cusp
    "R2": {
        "Lhi": ((("L", 1),), (("L", 0), ("X", 1), ("X", 0))),
        "Llo": ((("L", 0),), (("L", 1), ("X", 0), ("X", 1))),
        "Rhi": ((("R", 1),), (("X", 0), ("X", 1), ("R", 0))),
        "Rlo": ((("R", 0),), (("X", 1), ("X", 0), ("R", 1))),
    },
    "R3": {
        "braid": ((("X", 0), ("X", 1), ("X", 0)), (("X", 1), ("X", 0), ("X", 1))),
    },
}


class IsotopyMove(NamedTuple):
    family: str
    variant: str
    gap: int
    direction: str = "fwd"

    def __str__(self) -> str:
        return f"MOVE {self.family} {self.variant} {self.gap} {self.direction}"

    @classmethod
    def parse(cls, line: str) -> "IsotopyMove":
        parts = line.split()
        if len(parts) != 5 or parts[0] != "MOVE":
            raise MoveError(f"bad move line {line!r}")
        _, family, variant, gap, direction = parts
        if family not in FAMILIES or direction not in ("fwd", "inv"):
            raise MoveError(f"bad move line {line!r}")
        return cls(family, variant, int(gap), direction)


@dataclass(frozen=True)
class IsotopyCertificate:
    moves: tuple[IsotopyMove, ...] = ()

    def __len__(self):
        return len(self.moves)


def _instantiate(pattern: Pattern, i: int) -> tuple[Event, ...]:
    return tuple(Event(k, i + off) for k, off in pattern)


def _split_variant(variant: str) -> tuple[str, int]:
    name, _, pos = variant.partition(".")
    try:
        return name, int(pos)
    except ValueError:
        raise MoveError(f"bad variant {variant!r}") from None


def _splice(events, gap, width, new) -> tuple[Event, ...] | None:
    out = tuple(events[:gap]) + tuple(new) + tuple(events[gap + width:])
    try:
        check_events(out)
    except FrontValidityError:
        return None
    return out


def _window_ok(counts, gap, width, pattern: Pattern, i: int) -> bool:
    """Would replacing events[gap:gap+width] by the pattern anchored at i
    keep a valid word?  The rest of the word is already valid, so only the
    window is checked.
    """
    n = counts[gap]
    for kind, off in pattern:
        pos = i + off
        if kind == "L":
            if not 1 <= pos <= n + 1:
                return False
            n += 2
        else:
            if not 1 <= pos <= n - 1:
                return False
            if kind == "R":
                n -= 2
    return n == counts[gap + width]


# --- commutation ---------------------------------------------------------

def _run(strands: list, ev: Event, tag: str):
    """Apply ev to a labelled strand list; return (new list, touched labels)."""
    s = list(strands)
    i = ev.pos - 1
    if ev.kind == "L":
        new = [(tag, 0), (tag, 1)]
        s[i:i] = new
        return s, tuple(new)
    a, b = s[i], s[i + 1]
    if ev.kind == "R":
        del s[i:i + 2]
    else:
        s[i], s[i + 1] = b, a
    return s, (a, b)


def _event_key(e: Event) -> tuple[int, int]:
    return (e.pos, "LXR".index(e.kind))


def commute_candidates(events: Sequence[Event], gap: int) -> list[tuple[Event, Event]]:
    """All reorderings (B', A') of the pair A B = events[gap], events[gap+1].

    The pair is swapped only when the two events touch disjoint strands
    and the strand order on both sides of the window is unchanged.
    """
    if gap < 0 or gap + 1 >= len(events):
        return []
    A, B = events[gap], events[gap + 1]
    n = 0
    for e in events[:gap]:
        n += e.delta()
    pre = [("o", j) for j in range(n)]
    mid, touched_a = _run(pre, A, "A")
    post, touched_b = _run(mid, B, "B")
    if set(touched_a) & set(touched_b):
        return []

    def b_first_options():
        if B.kind == "L":
            return [Event("L", j) for j in range(1, n + 2)]
        upper = pre.index(touched_b[0]) if touched_b[0] in pre else -1
        if upper < 0 or upper + 1 >= n or pre[upper + 1] != touched_b[1]:
            return []
        return [Event(B.kind, upper + 1)]

    out = []
    for b2 in b_first_options():
        mid2, _ = _run(pre, Event(b2.kind, b2.pos), "B")
        if A.kind == "L":
            a_opts = [Event("L", j) for j in range(1, len(mid2) + 2)]
        else:
            if touched_a[0] not in mid2:
                continue
            u = mid2.index(touched_a[0])
            if u + 1 >= len(mid2) or mid2[u + 1] != touched_a[1]:
                continue
            a_opts = [Event(A.kind, u + 1)]
        for a2 in a_opts:
            fin, _ = _run(mid2, a2, "A")
            if fin == post and (b2, a2) != (A, B):
                out.append((b2, a2))
    out.sort(key=lambda p: (_event_key(p[0]), _event_key(p[1])))
    return out


# --- enumeration and application -----------------------------------------

def _match(events, gap, pattern: Pattern) -> int | None:
    """Anchor position i if pattern occurs at gap, else None."""
    if not pattern or gap + len(pattern) > len(events):
        return None
    k0, off0 = pattern[0]
    e0 = events[gap]
    if e0.kind != k0:
        return None
    i = e0.pos - off0
    if i < 1:
        return None
    if tuple(events[gap:gap + len(pattern)]) != _instantiate(pattern, i):
        return None
    return i


def _strand_counts(events) -> list[int]:
    counts = [0]
    for e in events:
        counts.append(counts[-1] + e.delta())
    return counts


def enumerate_moves(d: FrontDiagram) -> list[IsotopyMove]:
    """Every applicable move, ordered by gap, family, variant, direction."""
    ev = d.events
    counts = _strand_counts(ev)
    found: list[tuple] = []
    for family, variants in MOVE_TABLE.items():
        fam_rank = FAMILIES.index(family)
        for name, (simple, cplx) in variants.items():
            for gap in range(len(ev) + 1):
                if simple:
                    i = _match(ev, gap, simple)
                    anchors = [] if i is None else [i]
                else:
                    anchors = range(1, counts[gap] + 1)
                for i in anchors:
                    if _window_ok(counts, gap, len(simple), cplx, i):
                        found.append(((gap, fam_rank, name, i, 0),
                                      IsotopyMove(family, f"{name}.{i}", gap, "fwd")))
                i = _match(ev, gap, cplx)
                if i is not None and _window_ok(counts, gap, len(cplx), simple, i):
                    found.append(((gap, fam_rank, name, i, 1),
                                  IsotopyMove(family, f"{name}.{i}", gap, "inv")))
    fam_rank = FAMILIES.index("Commute")
    for gap in range(len(ev) - 1):
        for k, _ in enumerate(commute_candidates(ev, gap)):
            found.append(((gap, fam_rank, "", k, 0),
                          IsotopyMove("Commute", str(k), gap, "fwd")))
    found.sort(key=lambda t: t[0])
    return [m for _, m in found]


def apply_move(d: FrontDiagram, m: IsotopyMove) -> FrontDiagram:
    ev = d.events
    if m.family == "Commute":
        try:
            k = int(m.variant)
        except ValueError:
            raise MoveError(f"bad commute variant {m.variant!r}") from None
        cands = commute_candidates(ev, m.gap)
        if not 0 <= k < len(cands):
            raise MoveError(f"no commutation {k} at gap {m.gap} of {d.word!r}")
        return FrontDiagram(ev[:m.gap] + cands[k] + ev[m.gap + 2:])
    if m.family not in MOVE_TABLE:
        raise MoveError(f"unknown family {m.family!r}")
    name, i = _split_variant(m.variant)
    if name not in MOVE_TABLE[m.family]:
        raise MoveError(f"unknown variant {m.variant!r} of {m.family}")
    simple, cplx = MOVE_TABLE[m.family][name]
    src, dst = (simple, cplx) if m.direction == "fwd" else (cplx, simple)
    if not 0 <= m.gap <= len(ev):
        raise MoveError(f"gap {m.gap} out of range")
    if src:
        if _match(ev, m.gap, src) != i:
            raise MoveError(f"{m} does not match {d.word!r}")
    elif not 1 <= i <= _strand_counts(ev)[m.gap]:
        raise MoveError(f"{m}: no strand {i} at gap {m.gap}")
    out = _splice(ev, m.gap, len(src), _instantiate(dst, i))
    if out is None:
        raise MoveError(f"{m} produces an invalid word")
    return FrontDiagram(out)


def move_window(m: IsotopyMove) -> tuple[int, int]:
    """(old width, new width) of the events a move rewrites."""
    if m.family == "Commute":
        return 2, 2
    simple, cplx = MOVE_TABLE[m.family][_split_variant(m.variant)[0]]
    if m.direction == "fwd":
        return len(simple), len(cplx)
    return len(cplx), len(simple)


def inverse_move(d: FrontDiagram, m: IsotopyMove) -> IsotopyMove:
    """The move undoing m, given the diagram m was applied to."""
    if m.family != "Commute":
        return m._replace(direction="inv" if m.direction == "fwd" else "fwd")
    after = apply_move(d, m)
    a, b = d.events[m.gap], d.events[m.gap + 1]
    for k, pair in enumerate(commute_candidates(after.events, m.gap)):
        if pair == (a, b):
            return IsotopyMove("Commute", str(k), m.gap, "fwd")
    raise MoveError(f"commutation {m} has no inverse")  # pragma: no cover


def replay_moves(d: FrontDiagram, moves: Sequence[IsotopyMove]) -> list[FrontDiagram]:
    out = [d]
    for m in moves:
        out.append(apply_move(out[-1], m))
    return out


# --- equality and search -------------------------------------------------

def normal_form(d: FrontDiagram) -> tuple[FrontDiagram, list[IsotopyMove]]:
    """Commutation normal form: swap adjacent commuting events while that
    makes the word lexicographically smaller.  Returns the form and the
    commute moves reaching it."""
    ev = list(d.events)
    moves: list[IsotopyMove] = []
    g = 0
    while g < len(ev) - 1:
        cands = commute_candidates(ev, g)
        cur = (_event_key(ev[g]), _event_key(ev[g + 1]))
        best = None
        for k, (b2, a2) in enumerate(cands):
            key = (_event_key(b2), _event_key(a2))
            if key < cur and (best is None or key < best[0]):
                best = (key, k, b2, a2)
        if best is None:
            g += 1
            continue
        _, k, b2, a2 = best
        moves.append(IsotopyMove("Commute", str(k), g, "fwd"))
        ev[g], ev[g + 1] = b2, a2
        g = max(g - 1, 0)
    return FrontDiagram(tuple(ev)), moves


def words_equal(a: FrontDiagram, b: FrontDiagram) -> bool:
    """Token equality after commutation normal form."""
    return a.events == b.events or normal_form(a)[0].events == normal_form(b)[0].events


@dataclass(frozen=True)
class Verdict:
    ok: bool
    failed_index: int | None = None
    reason: str = ""


def verify_isotopy(start: FrontDiagram, target: FrontDiagram,
                   cert: IsotopyCertificate) -> Verdict:
    d = start
    for idx, m in enumerate(cert.moves):
        try:
            d = apply_move(d, m)
        except LegcalcError as exc:
            return Verdict(False, idx, str(exc))
    if d.events != target.events:
        return Verdict(False, len(cert.moves), f"final word {d.word!r} != target {target.word!r}")
    return Verdict(True)


def _commute_path_back(moves_to_nf: list[IsotopyMove], d: FrontDiagram) -> list[IsotopyMove]:
    """Moves from normal_form(d) back to d."""
    states = replay_moves(d, moves_to_nf)
    back = []
    for m, before in zip(reversed(moves_to_nf), reversed(states[:-1])):
        back.append(inverse_move(before, m))
    return back


def invariant_signature(d: FrontDiagram):
    """Orientation-free summary preserved by every move."""
    inv = invariants(d)
    best = None
    for flip in range(2 ** inv.components):
        od = orient(d, [not (flip >> c) & 1 for c in range(inv.components)])
        i2 = invariants(od)
        sig = tuple(sorted(zip(i2.tb, (abs(r) for r in i2.rot))))
        best = sig if best is None or sig < best else best
    return (inv.components, best)


def node_budget() -> int:
    return int(os.environ.get("LEGCALC_NODE_BUDGET", DEFAULT_NODE_BUDGET))


def search_isotopy(start: FrontDiagram, target: FrontDiagram, depth: int,
                   budget: int | None = None, max_length: int | None = None,
                   families: Sequence[str] = FAMILIES) -> IsotopyCertificate | None:
    """Breadth-first search for an isotopy certificate.

    Words are expanded breadth-first by move count, so the search is
    complete up to ``depth``.  A word counts as reaching the target when
    their commutation normal forms agree; the commutations bridging the two
    are appended to the certificate and not counted against ``depth``.

    Returns None when nothing is found within ``depth``; raises
    SearchBudgetExceeded once more than ``budget`` words have been stored.
    ``max_length`` optionally caps intermediate word length.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    budget = node_budget() if budget is None else budget
    if invariant_signature(start) != invariant_signature(target):
        return None
    target_nf, target_moves = normal_form(target)
    tail = tuple(_commute_path_back(target_moves, target))
    target_profile = _profile(target)
    nf_memo: dict[tuple, tuple] = {}

    def hits(d: FrontDiagram):
        if _profile(d) != target_profile:
            return None
        if d.events not in nf_memo:
            nf, to_nf = normal_form(d)
            nf_memo[d.events] = (nf.events, tuple(to_nf))
        nf, to_nf = nf_memo[d.events]
        return to_nf if nf == target_nf.events else None

    found = hits(start)
    if found is not None:
        return IsotopyCertificate(found + tail)
    seen = {start.events}
    frontier = [(start, ())]
    for _level in range(depth):
        nxt = []
        for d, path in frontier:
            for m in enumerate_moves(d):
                if m.family not in families:
                    continue
                d2 = apply_move(d, m)
                if d2.events in seen or (max_length is not None and len(d2) > max_length):
                    continue
                seen.add(d2.events)
                if len(seen) > budget:
                    raise SearchBudgetExceeded(f"node budget {budget} exceeded")
                p2 = path + (m,)
                found = hits(d2)
                if found is not None:
                    return IsotopyCertificate(p2 + found + tail)
                nxt.append((d2, p2))
        frontier = nxt
    return None


def _profile(d: FrontDiagram):
    return (len(d), sorted(e.kind for e in d.events))
