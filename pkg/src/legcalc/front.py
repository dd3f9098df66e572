"""
Front diagrams encoded as words of Morse events.

A front is read left to right.  At every vertical slice the strands are
numbered 1..n from the top.  Three events occur:

    L i   left cusp, inserts two new strands at positions i, i+1
    R i   right cusp, joins the strands at positions i, i+1
    X i   crossing, swaps the strands at positions i, i+1

No coordinates are stored.  All the invariants below are computed from
the word alone.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

FORMAT_VERSION = 1
HEADER = "LFRONT"
KINDS = ("L", "R", "X")

_TOKEN_RE = re.compile(r"^([LRX])(\d+)$")


class LegcalcError(ValueError):
    """Base class for every error raised by the package."""


class FrontSyntaxError(LegcalcError):
    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class FrontValidityError(LegcalcError):
    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class Event(NamedTuple):
    kind: str
    pos: int

    def __str__(self) -> str:
        return f"{self.kind}{self.pos}"

    def delta(self) -> int:
        return _DELTA[self.kind]


_DELTA = {"L": 2, "R": -2, "X": 0}


def parse_token(token: str, column: int | None = None) -> Event:
    m = _TOKEN_RE.match(token)
    if not m:
        raise FrontSyntaxError(f"bad token {token!r}", column)
    return Event(m.group(1), int(m.group(2)))


def check_events(events: Sequence[Event]) -> None:
    """Raise FrontValidityError unless the word describes a closed front."""
    n = 0
    for col, (kind, pos) in enumerate(events):
        if kind == "L":
            if not 1 <= pos <= n + 1:
                raise FrontValidityError(
                    f"L{pos} at column {col}: need 1 <= i <= {n + 1}", col)
        elif not 1 <= pos <= n - 1:
            raise FrontValidityError(
                f"{kind}{pos} at column {col}: need 1 <= i <= {n - 1}", col)
        n += _DELTA[kind]
    if n != 0:
        raise FrontValidityError(
            f"word ends with {n} open strands", len(events))


class Trace(NamedTuple):
    """Arc bookkeeping for a word.

    slices[g] lists the arc ids occupying positions 1..n after g events.
    An arc runs from a left cusp to a right cusp.  cusps[k] gives the
    (upper, lower) arcs at cusp event k; crossings[k] gives (over, under)
    at crossing event k, the over strand being the one that moves down.
    """
    slices: tuple[tuple[int, ...], ...]
    cusps: dict[int, tuple[int, int]]
    crossings: dict[int, tuple[int, int]]
    arc_start: tuple[int, ...]
    arc_end: tuple[int, ...]


def trace_events(events: Sequence[Event]) -> Trace:
    current: list[int] = []
    slices = [()]
    cusps: dict[int, tuple[int, int]] = {}
    crossings: dict[int, tuple[int, int]] = {}
    starts: list[int] = []
    ends: dict[int, int] = {}
    for k, (kind, pos) in enumerate(events):
        i = pos - 1
        if kind == "L":
            a, b = len(starts), len(starts) + 1
            starts += [k, k]
            current[i:i] = [a, b]
            cusps[k] = (a, b)
        elif kind == "R":
            a, b = current[i], current[i + 1]
            del current[i:i + 2]
            cusps[k] = (a, b)
            ends[a] = ends[b] = k
        else:
            a, b = current[i], current[i + 1]
            current[i], current[i + 1] = b, a
            crossings[k] = (a, b)
        slices.append(tuple(current))
    return Trace(tuple(slices), cusps, crossings, tuple(starts),
                 tuple(ends[a] for a in range(len(starts))))


@dataclass(frozen=True)
class FrontDiagram:
    events: tuple[Event, ...]
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(Event(*e) for e in self.events))
        check_events(self.events)

    @classmethod
    def from_word(cls, word: str | Iterable[Event]) -> "FrontDiagram":
        if isinstance(word, str):
            return cls(tuple(parse_token(t, c) for c, t in enumerate(word.split())))
        return cls(tuple(word))

    def __len__(self) -> int:
        return len(self.events)

    def __str__(self) -> str:
        return self.word

    @property
    def word(self) -> str:
        return " ".join(map(str, self.events))

    @cached_property
    def trace(self) -> Trace:
        return trace_events(self.events)

    def strand_count(self, gap: int) -> int:
        """Number of strands after the first `gap` events."""
        return len(self.trace.slices[gap])

    @cached_property
    def arc_component(self) -> tuple[int, ...]:
        """Component index of every arc; components ordered by first arc."""
        tr = self.trace
        n_arcs = len(tr.arc_start)
        parent = list(range(n_arcs))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in tr.cusps.values():
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        labels: dict[int, int] = {}
        out = []
        for a in range(n_arcs):
            out.append(labels.setdefault(find(a), len(labels)))
        return tuple(out)

    @property
    def num_components(self) -> int:
        return len(set(self.arc_component))

    def components(self) -> list[list[int]]:
        """Arcs of each closed component, in traversal order from its first arc."""
        tr = self.trace
        partner: dict[tuple[int, str], int] = {}
        for k, (a, b) in tr.cusps.items():
            side = "L" if self.events[k].kind == "L" else "R"
            partner[(a, side)] = b
            partner[(b, side)] = a
        comps: list[list[int]] = []
        seen: set[int] = set()
        for a0 in range(len(tr.arc_start)):
            if a0 in seen:
                continue
            cycle, a, side = [], a0, "R"
            while True:
                cycle.append(a)
                seen.add(a)
                a = partner[(a, side)]
                side = "L" if side == "R" else "R"
                if a == a0:
                    break
            comps.append(cycle)
        return comps

    def is_knot(self) -> bool:
        return self.num_components == 1

    def serialize(self) -> str:
        return serialize_front(self)


def parse_front(text: str) -> FrontDiagram:
    """Parse LFRONT text.  The header line is required."""
    lines = text.splitlines()
    body: list[str] = []
    header_seen = False
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            parts = line.split()
            if len(parts) != 2 or parts[0] != HEADER:
                raise FrontSyntaxError(f"expected '{HEADER} {FORMAT_VERSION}' header")
            if parts[1] != str(FORMAT_VERSION):
                raise FrontSyntaxError(f"unsupported format version {parts[1]}")
            header_seen = True
            continue
        body.extend(line.split())
    if not header_seen:
        raise FrontSyntaxError(f"missing '{HEADER} {FORMAT_VERSION}' header")
    events = tuple(parse_token(t, c) for c, t in enumerate(body))
    return FrontDiagram(events)


def serialize_front(d: FrontDiagram) -> str:
    return f"{HEADER} {FORMAT_VERSION}\n{d.word}"


@dataclass(frozen=True)
class OrientedDiagram:
    """A front plus one direction per arc: +1 rightward, -1 leftward."""
    diagram: FrontDiagram
    choices: tuple[bool, ...]
    arc_dirs: tuple[int, ...] = field(compare=False, repr=False, default=())

    def __post_init__(self):
        if not self.arc_dirs:
            object.__setattr__(self, "arc_dirs", _directions(self.diagram, self.choices))

    def slice_dirs(self, gap: int) -> tuple[int, ...]:
        return tuple(self.arc_dirs[a] for a in self.diagram.trace.slices[gap])

    def reversed(self, component: int | None = None) -> "OrientedDiagram":
        ch = list(self.choices)
        for c in range(len(ch)):
            if component is None or c == component:
                ch[c] = not ch[c]
        return orient(self.diagram, ch)

    def crossing_sign(self, k: int) -> int:
        over, under = self.diagram.trace.crossings[k]
        return 1 if self.arc_dirs[over] == self.arc_dirs[under] else -1

    def cusp_is_down(self, k: int) -> bool:
        upper, lower = self.diagram.trace.cusps[k]
        if self.diagram.events[k].kind == "L":
            return self.arc_dirs[lower] == 1
        return self.arc_dirs[upper] == 1


def _directions(d: FrontDiagram, choices: Sequence[bool]) -> tuple[int, ...]:
    comps = d.components()
    if len(choices) != len(comps):
        raise LegcalcError(
            f"need {len(comps)} orientation choices, got {len(choices)}")
    dirs = [0] * len(d.trace.arc_start)
    for cycle, choice in zip(comps, choices):
        # consecutive arcs of a cycle meet at a cusp, so directions alternate
        s = 1 if choice else -1
        for j, a in enumerate(cycle):
            dirs[a] = s if j % 2 == 0 else -s
    return tuple(dirs)


def orient(d: FrontDiagram, choices: Sequence[bool] | None = None) -> OrientedDiagram:
    """Orient each component.  True (the default) sends its first arc rightward."""
    if choices is None:
        choices = [True] * d.num_components
    return OrientedDiagram(d, tuple(bool(c) for c in choices))


def orient_from_arcs(d: FrontDiagram, arc_dirs: Sequence[int]) -> OrientedDiagram:
    """Build an orientation from explicit arc directions, checking consistency."""
    comps = d.components()
    choices = []
    for cycle in comps:
        first = arc_dirs[cycle[0]]
        for j, a in enumerate(cycle):
            want = first if j % 2 == 0 else -first
            if arc_dirs[a] != want:
                raise LegcalcError("arc directions are not a consistent orientation")
        choices.append(first == 1)
    return orient(d, choices)


@dataclass(frozen=True)
class ClassicalInvariants:
    tb: tuple[int, ...]
    rot: tuple[int, ...]
    components: int
    writhe: int
    right_cusps: int
    linking: int

    @property
    def total(self) -> int:
        """writhe - #right cusps over the whole diagram."""
        return self.writhe - self.right_cusps


def invariants(od: OrientedDiagram | FrontDiagram) -> ClassicalInvariants:
    if isinstance(od, FrontDiagram):
        od = orient(od)
    d = od.diagram
    comp = d.arc_component
    nc = d.num_components
    tb = [0] * nc
    down = [0] * nc
    up = [0] * nc
    writhe = linking = rc = 0
    for k, (a, b) in d.trace.crossings.items():
        s = od.crossing_sign(k)
        writhe += s
        if comp[a] == comp[b]:
            tb[comp[a]] += s
        else:
            linking += s
    for k, (a, _) in d.trace.cusps.items():
        c = comp[a]
        if d.events[k].kind == "R":
            tb[c] -= 1
            rc += 1
        if od.cusp_is_down(k):
            down[c] += 1
        else:
            up[c] += 1
    rot = tuple((dn - u) // 2 for dn, u in zip(down, up))
    return ClassicalInvariants(tuple(tb), rot, nc, writhe, rc, linking)
