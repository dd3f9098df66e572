"""
Certificate generators: stabilization, zig-zag pairs, endocobordisms,
descent to the unknot and back, and the filling schedules of the twist
knot and negative torus knot families.

Local rewrites that need a nontrivial isotopy are stored as small LCOB
files under ``macros/`` (found once by bounded search) and replayed here
after shifting their gaps and strand positions into place.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .cobordism import (
    CobordismCertificate, CobordismStep, Cup, Isotopy, Pinch, apply_step,
    parse_certificate,
)
from .front import Event, FrontDiagram, LegcalcError, orient
from .moves import (
    IsotopyMove, apply_move, commute_candidates, enumerate_moves, inverse_move,
    move_window,
)


class ConstructionError(LegcalcError):
    pass


# --- macros --------------------------------------------------------------

# name -> (context events before the tangle, context events after it)
MACRO_CONTEXT = {
    "add_pair_top": (1, 1),
    "add_pair_bottom": (1, 1),
    "remove_DU_D": (1, 1),
    "remove_DU_U": (1, 1),
    "remove_UD_U": (1, 1),
    "remove_UD_D": (1, 1),
    "kink_right": (1, 0),
    "reverse_pinch": (1, 1),
    "slide_X_down_U": (1, 1),
    "slide_X_down_D": (1, 1),
    "slide_X_up_U": (1, 1),
    "slide_X_up_D": (1, 1),
    "slide_R_U": (1, 0),
    "slide_R_D": (1, 0),
    "slide_L_U": (0, 1),
    "slide_L_D": (0, 1),
}


@dataclass(frozen=True)
class Macro:
    name: str
    cert: CobordismCertificate
    lead: int
    trail: int

    @property
    def before(self) -> tuple[Event, ...]:
        ev = self.cert.top.events
        return ev[self.lead:len(ev) - self.trail]

    @property
    def after(self) -> tuple[Event, ...]:
        ev = self.cert.bottom.events
        return ev[self.lead:len(ev) - self.trail]


@lru_cache(maxsize=None)
def load_macro(name: str, inverse: bool = False) -> Macro:
    if name not in MACRO_CONTEXT:
        raise ConstructionError(f"unknown macro {name!r}")
    text = (resources.files("legcalc") / "macros" / f"{name}.lcob").read_text()
    lead, trail = MACRO_CONTEXT[name]
    cert = parse_certificate(text)
    if inverse:
        cert = CobordismCertificate(cert.bottom, tuple(invert_isotopy(cert.top, cert.steps)), cert.top)
    return Macro(name, cert, lead, trail)


def invert_isotopy(start: FrontDiagram, steps: Sequence[CobordismStep]) -> list[CobordismStep]:
    """Steps undoing an isotopy-only step list applied to start."""
    ds = [start]
    for st in steps:
        if st.kind != "MOVE":
            raise ConstructionError("only isotopy steps can be inverted")
        ds.append(apply_step(ds[-1], st))
    return [Isotopy(inverse_move(ds[k], steps[k].move)) for k in reversed(range(len(steps)))]


def _shift_events(events, off: int) -> tuple[Event, ...]:
    return tuple(Event(e.kind, e.pos + off) for e in events)


def _shift_step(step: CobordismStep, dg: int, off: int) -> CobordismStep:
    if step.kind == "PINCH":
        return Pinch(step.gap + dg, step.pos + off)
    if step.kind == "CUP":
        return Cup(step.gap + dg)
    m = step.move
    variant = m.variant
    if m.family != "Commute":
        name, _, i = variant.partition(".")
        variant = f"{name}.{int(i) + off}"
    return Isotopy(IsotopyMove(m.family, variant, m.gap + dg, m.direction))


def run_steps(d: FrontDiagram, steps: Sequence[CobordismStep]) -> FrontDiagram:
    for k, s in enumerate(steps):
        try:
            d = apply_step(d, s)
        except LegcalcError as exc:
            raise ConstructionError(f"step {k} ({s}) failed: {exc}") from None
    return d


def apply_macro(d: FrontDiagram, name: str, gap: int, pos: int, inverse: bool = False):
    """Replay a macro with its tangle starting at `gap`, top strand at `pos`.

    Returns (steps, result).  The events at the site must match the
    macro's input tangle exactly.
    """
    mac = load_macro(name, inverse)
    off = pos - 1
    want = _shift_events(mac.before, off)
    if d.events[gap:gap + len(want)] != want:
        raise ConstructionError(
            f"{name}: expected {' '.join(map(str, want)) or 'nothing'} at gap {gap}")
    steps = [_shift_step(s, gap - mac.lead, off) for s in mac.cert.steps]
    out = run_steps(d, steps)
    expect = d.events[:gap] + _shift_events(mac.after, off) + d.events[gap + len(want):]
    if out.events != expect:
        raise ConstructionError(f"{name} did not embed at gap {gap}, strand {pos}")
    return steps, out


# --- zig-zags ------------------------------------------------------------

def zigzag(shape: str, i: int) -> tuple[Event, Event]:
    """The two events of a zig-zag on the strand at position i.

    'D' turns the strand back below itself, 'U' above itself.
    """
    if shape == "D":
        return Event("L", i + 1), Event("R", i)
    if shape == "U":
        return Event("L", i), Event("R", i + 1)
    raise ConstructionError(f"bad zig-zag shape {shape!r}")


def zigzag_shape(a: Event, b: Event) -> tuple[str, int] | None:
    """(shape, strand) if the adjacent events a, b form a zig-zag."""
    if a.kind != "L" or b.kind != "R":
        return None
    if b.pos == a.pos - 1:
        return "D", b.pos
    if b.pos == a.pos + 1:
        return "U", a.pos
    return None


def zigzag_sites(d: FrontDiagram) -> list[tuple[int, str, int]]:
    """(gap, shape, strand) for every literal zig-zag in the word."""
    ev = d.events
    out = []
    for g in range(len(ev) - 1):
        z = zigzag_shape(ev[g], ev[g + 1])
        if z:
            out.append((g,) + z)
    return out


@dataclass(frozen=True)
class StabSite:
    gap: int
    strand: int
    sign: str  # "+" or "-"


def stabilize(d: FrontDiagram, site: StabSite, choices=None) -> FrontDiagram:
    """Insert a zig-zag on a strand.  '+' raises rot by one under the
    given orientation (default orientation if choices is None)."""
    if site.sign not in "+-" or len(site.sign) != 1:
        raise ConstructionError(f"bad sign {site.sign!r}")
    if not 0 <= site.gap <= len(d):
        raise ConstructionError(f"gap {site.gap} out of range")
    n = d.strand_count(site.gap)
    if not 1 <= site.strand <= n:
        raise ConstructionError(f"no strand {site.strand} at gap {site.gap}")
    rightward = orient(d, choices).slice_dirs(site.gap)[site.strand - 1] == 1
    shape = "D" if (site.sign == "+") == rightward else "U"
    ev = d.events
    return FrontDiagram(ev[:site.gap] + zigzag(shape, site.strand) + ev[site.gap:])


def _same_component(d: FrontDiagram, gap: int, p: int, q: int) -> bool:
    sl = d.trace.slices[gap]
    return d.arc_component[sl[p - 1]] == d.arc_component[sl[q - 1]]


def add_zigzag_pair(d: FrontDiagram, gap: int, strand: int):
    """Two pinches plus isotopy inserting 'U D' on a strand.

    Returns (steps, result).  The neighbouring strand used for the pinches
    must belong to the same component.
    """
    n = d.strand_count(gap) if 0 <= gap <= len(d) else 0
    if not 1 <= strand <= n or n < 2:
        raise ConstructionError(f"need a strand {strand} and a neighbour at gap {gap}")
    if strand < n and _same_component(d, gap, strand, strand + 1):
        return apply_macro(d, "add_pair_top", gap, strand)
    if strand > 1 and _same_component(d, gap, strand - 1, strand):
        return apply_macro(d, "add_pair_bottom", gap, strand - 1)
    raise ConstructionError("no neighbouring strand of the same component")


def remove_zigzag(d: FrontDiagram, gap: int, keep: str):
    """One pinch turning an adjacent opposite pair at `gap` into the single
    zig-zag `keep` ('U' or 'D').  Returns (steps, result)."""
    ev = d.events
    if not 0 <= gap <= len(ev) - 4:
        raise ConstructionError(f"no zig-zag pair at gap {gap}")
    z1 = zigzag_shape(*ev[gap:gap + 2])
    z2 = zigzag_shape(*ev[gap + 2:gap + 4])
    if not z1 or not z2 or z1[1] != z2[1] or z1[0] == z2[0]:
        raise ConstructionError(f"no opposite zig-zag pair at gap {gap}")
    if keep not in ("U", "D"):
        raise ConstructionError(f"bad shape {keep!r}")
    return apply_macro(d, f"remove_{z1[0]}{z2[0]}_{keep}", gap, z1[1])


def flip_zigzag(d: FrontDiagram, gap: int):
    """Four pinches replacing the zig-zag at `gap` by the other shape."""
    z = zigzag_shape(*d.events[gap:gap + 2])
    if not z:
        raise ConstructionError(f"no zig-zag at gap {gap}")
    shape, s = z
    other = "U" if shape == "D" else "D"
    steps, cur = add_zigzag_pair(d, gap + 2, s)      # Z U D
    if shape == "D":
        more, cur = remove_zigzag(cur, gap, "U")     # (D U) D -> U D
    else:
        more, cur = remove_zigzag(cur, gap + 2, "D")  # U (U D) -> U D
    steps += more
    more, cur = remove_zigzag(cur, gap, other)
    return steps + more, cur


def endocobordism_once(d: FrontDiagram, site=None):
    """Four pinches from d back to d, using an existing zig-zag."""
    sites = zigzag_sites(d)
    if site is None:
        if not sites:
            raise ConstructionError("diagram has no visible zig-zag")
        site = sites[0]
    g, shape, s = site
    steps, cur = add_zigzag_pair(d, g, s)            # U D Z0
    if shape == "D":
        more, cur = remove_zigzag(cur, g, "U")       # (U D) D -> U D
    else:
        more, cur = remove_zigzag(cur, g + 2, "D")   # U (D U) -> U D
    steps += more
    more, cur = remove_zigzag(cur, g, shape)
    steps += more
    if cur.events != d.events:
        raise ConstructionError("endocobordism did not return to the start word")
    return steps


def endocobordism(d: FrontDiagram, k: int) -> CobordismCertificate:
    """Non-orientable endocobordism of crosscap genus 4k."""
    if k < 1:
        raise ConstructionError("k must be positive")
    if not d.is_knot():
        raise ConstructionError("endocobordisms are generated for knots only")
    steps = []
    for _ in range(k):
        steps += endocobordism_once(d)
    return CobordismCertificate(d, tuple(steps), d)


# --- moving zig-zags along a knot ----------------------------------------

def swap_step(d: FrontDiagram, gap: int, k: int = 0) -> CobordismStep:
    """The k-th planar commutation of events gap, gap+1."""
    if len(commute_candidates(d.events, gap)) <= k:
        raise ConstructionError(f"events at gap {gap} do not commute")
    return Isotopy(IsotopyMove("Commute", str(k), gap, "fwd"))


def _hop_plans(d: FrontDiagram, gaps: Sequence[int], check: Sequence[int]):
    """Ways to run the commutations at `gaps` in order such that zig-zags
    sit at every gap of `check` afterwards; yields (steps, result)."""
    def rec(cur, i, acc):
        if i == len(gaps):
            if all(zigzag_shape(*cur.events[c:c + 2]) for c in check):
                yield acc, cur
            return
        for k in range(len(commute_candidates(cur.events, gaps[i]))):
            st = swap_step(cur, gaps[i], k)
            yield from rec(apply_step(cur, st), i + 1, acc + [st])
    yield from rec(d, 0, [])


class Tracker:
    """A word under construction with a set of tracked zig-zag blocks.

    Every tracked block is a literal two-event zig-zag; `gaps` maps a block
    id to the index of its left cusp.  Steps are accumulated in `steps`.
    """

    def __init__(self, d: FrontDiagram, gaps: dict | None = None):
        self.d = d
        self.steps: list[CobordismStep] = []
        self.gaps: dict = dict(gaps or {})
        self.heading: dict = {}
        self.max_iter = 50 * (len(d) + 10) ** 2

    def shape(self, zid) -> tuple[str, int]:
        g = self.gaps[zid]
        z = zigzag_shape(*self.d.events[g:g + 2])
        if z is None:
            raise ConstructionError(f"tracked block {zid} lost at gap {g}")
        return z

    def block_at(self, g: int):
        for zid, h in self.gaps.items():
            if h == g:
                return zid
        return None

    def run(self, steps):
        self.d = run_steps(self.d, steps)
        self.steps.extend(steps)

    def hop(self, gaps, check):
        for steps, out in _hop_plans(self.d, gaps, check):
            self.d = out
            self.steps.extend(steps)
            return
        raise ConstructionError(f"cannot commute across gaps {list(gaps)}")

    def macro(self, name: str, gap: int, pos: int, inverse: bool = False):
        steps, self.d = apply_macro(self.d, name, gap, pos, inverse)
        self.steps.extend(steps)

    # one event of progress for block zid; returns the adjacent block id or None
    def step_right(self, zid):
        g = self.gaps[zid]
        shape, s = self.shape(zid)
        ev = self.d.events
        if g + 2 >= len(ev):
            raise ConstructionError("zig-zag ran off the end of the word")
        other = self.block_at(g + 2)
        if other is not None:
            if self.shape(other)[1] == s:
                return other
            self.hop((g + 1, g, g + 2, g + 1), (g, g + 2))
            self.gaps[other], self.gaps[zid] = g, g + 2
            return None
        kind, p = ev[g + 2]
        if kind == "X" and s in (p, p + 1):
            self.macro(f"slide_X_{'down' if s == p else 'up'}_{shape}", g, p)
            self.gaps[zid] = g + 1
        elif kind == "R" and s in (p, p + 1):
            if s == p:
                self.macro(f"slide_R_{shape}", g, p)
            else:
                self.macro(f"slide_R_{'U' if shape == 'D' else 'D'}", g, p, inverse=True)
            self.heading[zid] = "L"
        else:
            self.hop((g + 1, g), (g + 1,))
            self.gaps[zid] = g + 1
        return None

    def step_left(self, zid):
        g = self.gaps[zid]
        shape, s = self.shape(zid)
        ev = self.d.events
        if g == 0:
            raise ConstructionError("zig-zag ran off the start of the word")
        other = self.block_at(g - 2)
        if other is not None:
            if self.shape(other)[1] == s:
                return other
            self.hop((g - 1, g, g - 2, g - 1), (g - 2, g))
            self.gaps[other], self.gaps[zid] = g, g - 2
            return None
        kind, p = ev[g - 1]
        if kind == "X" and s in (p, p + 1):
            self.macro(f"slide_X_{'down' if s == p + 1 else 'up'}_{shape}", g - 1, p, inverse=True)
            self.gaps[zid] = g - 1
        elif kind == "L" and s in (p, p + 1):
            if s == p:
                self.macro(f"slide_L_{shape}", g - 1, p)
            else:
                self.macro(f"slide_L_{'U' if shape == 'D' else 'D'}", g - 1, p, inverse=True)
            self.heading[zid] = "R"
        else:
            self.hop((g - 1, g), (g - 1,))
            self.gaps[zid] = g - 1
        return None

    def advance(self, zid):
        """One step along the component in the block's current heading."""
        if self.heading.setdefault(zid, "R") == "R":
            return self.step_right(zid)
        return self.step_left(zid)

    def transport(self, zid, heading: str | None = None, stop=None):
        """Move block zid along its component until it sits next to another
        tracked block on the same strand (returned) or stop(self) holds."""
        if heading is not None:
            self.heading[zid] = heading
        for _ in range(self.max_iter):
            if stop is not None and stop(self):
                return None
            other = self.advance(zid)
            if other is not None:
                return other
        raise ConstructionError("zig-zag transport did not terminate")

    def merge(self, a, b, survivor):
        """Cancel adjacent tracked blocks a, b down to one block kept under the
        id `survivor` with its shape; flips the other one first if needed."""
        first, second = sorted((a, b), key=self.gaps.get)
        if self.gaps[second] != self.gaps[first] + 2:
            raise ConstructionError("blocks are not adjacent")
        keep = self.shape(survivor)[0]
        loser = a if survivor == b else b
        if self.shape(loser)[0] == keep:
            steps, self.d = flip_zigzag(self.d, self.gaps[loser])
            self.steps.extend(steps)
        g = self.gaps[first]
        steps, self.d = remove_zigzag(self.d, g, keep)
        self.steps.extend(steps)
        del self.gaps[loser]
        self.heading.pop(loser, None)
        self.gaps[survivor] = g
        for zid, h in self.gaps.items():
            if h > g:
                self.gaps[zid] = h - 2

    # blocks sit between the events of a "skeleton" word; these map between
    # skeleton indices and current indices
    def skeleton(self) -> tuple[Event, ...]:
        slots = {g + j for g in self.gaps.values() for j in (0, 1)}
        return tuple(e for k, e in enumerate(self.d.events) if k not in slots)

    def cur_index(self, k: int) -> int:
        for b in sorted(self.gaps.values()):
            if b <= k:
                k += 2
        return k

    def clear_window(self, g: int, w: int):
        """Move tracked blocks out from between skeleton events g..g+w-1."""
        if w < 2:
            return
        for _ in range(self.max_iter):
            a, b = self.cur_index(g), self.cur_index(g + w - 1)
            inside = sorted(z for z, c in self.gaps.items() if a < c < b)
            if not inside:
                return
            z = inside[0]
            other = self.advance(z)
            if other is not None:
                self.heading[other] = self.heading[z]
                self.advance(other)
        raise ConstructionError("could not clear a window of tracked blocks")

    def shift_after(self, c: int, delta: int):
        for z, h in self.gaps.items():
            if h >= c:
                self.gaps[z] = h + delta


# --- descent to the unknot and back ---------------------------------------

def resolve_crossing(d: FrontDiagram, k: int):
    """One pinch plus an isotopy turning the crossing X i at index k into
    'L i R i+1 R i L i'.  Returns (steps, result)."""
    if not 0 <= k < len(d) or d.events[k].kind != "X":
        raise ConstructionError(f"event {k} is not a crossing")
    i = d.events[k].pos
    pinch = Pinch(k + 1, i)
    steps, out = apply_macro(apply_step(d, pinch), "kink_right", k, i)
    return [pinch] + steps, out


def _has_positive_crossing(d: FrontDiagram) -> bool:
    od = orient(d)
    return any(e.kind == "X" and od.crossing_sign(k) > 0 for k, e in enumerate(d.events))


def _positive_fish(d: FrontDiagram) -> IsotopyMove:
    for m in enumerate_moves(d):
        if m.family == "R1" and m.direction == "fwd":
            if _has_positive_crossing(apply_move(d, m)):
                return m
    raise ConstructionError("no R1 move creates a positive crossing")


def to_unknot(d: FrontDiagram) -> CobordismCertificate:
    """Resolve every crossing, then merge the pieces into one unknot."""
    if not d.is_knot():
        raise ConstructionError("to_unknot needs a one-component diagram")
    steps: list[CobordismStep] = []
    cur = d
    if not _has_positive_crossing(cur):
        m = _positive_fish(cur)
        steps.append(Isotopy(m))
        cur = apply_move(cur, m)
    while True:
        ks = [k for k, e in enumerate(cur.events) if e.kind == "X"]
        if not ks:
            break
        more, cur = resolve_crossing(cur, ks[0])
        steps += more
    while cur.num_components > 1:
        site = next((g, i) for g in range(1, len(cur))
                    for i in range(1, cur.strand_count(g))
                    if not _same_component(cur, g, i, i + 1))
        st = Pinch(*site)
        steps.append(st)
        cur = apply_step(cur, st)
    return CobordismCertificate(d, tuple(steps), cur)


def _is_descent(cert: CobordismCertificate) -> bool:
    b = cert.bottom
    return (cert.top.is_knot() and b.is_knot() and len(b) > 0
            and all(e.kind != "X" for e in b.events)
            and all(st.kind in ("MOVE", "PINCH") for st in cert.steps))


def ascend(cert_down: CobordismCertificate) -> Tracker:
    """Walk a descent certificate backwards from its bottom.

    Isotopies are inverted; each pinch is undone by the reverse pinch macro,
    which leaves a D zig-zag on each of its two strands.  Those extras are
    tracked and moved out of the way of later windows.
    """
    if not _is_descent(cert_down):
        raise ConstructionError("not a descent certificate (knot to crossingless knot)")
    ds = [cert_down.top]
    for st in cert_down.steps:
        ds.append(apply_step(ds[-1], st))
    t = Tracker(cert_down.bottom)
    n = 0
    for j in reversed(range(len(cert_down.steps))):
        st, before, after = cert_down.steps[j], ds[j], ds[j + 1]
        if st.kind == "PINCH":
            t.clear_window(st.gap, 2)
            c = t.cur_index(st.gap)
            t.shift_after(c + 2, 2)
            t.macro("reverse_pinch", c, st.pos)
            t.gaps[f"x{n}"], t.gaps[f"x{n + 1}"] = c, c + 2
            n += 2
        else:
            inv = inverse_move(before, st.move)
            old_w, new_w = move_window(inv)
            t.clear_window(inv.gap, old_w)
            if inv.gap < len(after):
                c = t.cur_index(inv.gap)
            else:
                c = len(t.d)
            m = IsotopyMove(inv.family, inv.variant, c, inv.direction)
            t.run([Isotopy(m)])
            t.shift_after(c + 1 if old_w else c, new_w - old_w)
        if t.skeleton() != before.events:
            raise ConstructionError(f"ascent lost track of the diagram at step {j}")
    return t


def reverse_to_stabilized(cert_down: CobordismCertificate) -> CobordismCertificate:
    """From the unknot at the bottom of a descent back up to the top knot
    with two extra zig-zags per pinch."""
    t = ascend(cert_down)
    return CobordismCertificate(cert_down.bottom, tuple(t.steps), t.d)


# --- crossingless unknots -------------------------------------------------

def normalize_unknot(u: FrontDiagram):
    """Isotopy from a crossingless one-component front to 'L1 Z ... Z R1'
    with every zig-zag on the top strand.  Returns (steps, result)."""
    if not u.is_knot() or any(e.kind == "X" for e in u.events):
        raise ConstructionError("expected a crossingless knot")
    t = Tracker(u)
    for n in range(len(u)):
        start = 1 + 2 * n                       # first event after the pile
        k = next(j for j in range(start, len(t.d)) if t.d.events[j].kind == "R")
        while k > start and zigzag_shape(*t.d.events[k - 1:k + 1]) is None:
            t.hop((k - 1,), ())
            k -= 1
        if k == start:                          # the closing R1
            return t.steps, t.d
        zid = f"z{n}"
        t.gaps[zid] = k - 1
        if n == 0:
            t.transport(zid, "L", stop=lambda tr, z=zid: tr.gaps[z] == 1 and tr.shape(z)[1] == 1)
        else:
            other = t.transport(zid, "L")
            if other is None or sorted(t.gaps.values()) != list(range(1, start + 1, 2)):
                raise ConstructionError("zig-zag did not join the pile")
    raise ConstructionError("normalization did not terminate")


def pile_shapes(u: FrontDiagram) -> str:
    """Shapes of a normalized unknot's zig-zags, left to right."""
    ev = u.events
    return "".join(zigzag_shape(*ev[g:g + 2])[0] for g in range(1, len(ev) - 1, 2))


def adjust_pile(u: FrontDiagram, target: str):
    """Pinches from one normalized unknot to the one with the given shapes."""
    if not target:
        raise ConstructionError("target unknot needs at least one zig-zag")
    steps: list[CobordismStep] = []
    cur = u

    def do(res):
        nonlocal cur
        more, cur = res
        steps.extend(more)

    while len(pile_shapes(cur)) < len(target):
        n = len(pile_shapes(cur))
        do(add_zigzag_pair(cur, 1 + 2 * n, 1))
        if len(pile_shapes(cur)) > len(target):
            do(remove_zigzag(cur, 1 + 2 * n, "U"))
    while len(pile_shapes(cur)) > len(target):
        sh = pile_shapes(cur)
        if sh[0] == sh[1]:
            do(flip_zigzag(cur, 3))
        do(remove_zigzag(cur, 1, sh[0]))
    for j, (a, b) in enumerate(zip(pile_shapes(cur), target)):
        if a != b:
            do(flip_zigzag(cur, 1 + 2 * j))
    return steps, cur


def bridge(u1: FrontDiagram, u2: FrontDiagram):
    """Cobordism steps between two crossingless unknots.  Returns (steps, u2)."""
    s1, n1 = normalize_unknot(u1)
    s2, n2 = normalize_unknot(u2)
    mid, cur = adjust_pile(n1, pile_shapes(n2))
    if cur.events != n2.events:
        raise ConstructionError("pile adjustment missed its target")
    steps = list(s1) + list(mid) + invert_isotopy(u2, s2)
    return steps, run_steps(u1, steps)


def absorb_extras(t: Tracker, target: FrontDiagram):
    """Merge every tracked block into one literal zig-zag of `target`."""
    sites = zigzag_sites(target)
    if not sites:
        raise ConstructionError("target has no visible zig-zag to absorb into")
    g0 = sites[0][0]
    t.gaps["z0"] = t.cur_index(g0)
    if t.skeleton() != tuple(e for k, e in enumerate(target.events) if k not in (g0, g0 + 1)):
        raise ConstructionError("tracked word does not match the target")
    while len(t.gaps) > 1:
        zid = sorted(z for z in t.gaps if z != "z0")[0]
        other = t.transport(zid)
        t.merge(zid, other, "z0" if other == "z0" else other)
    if t.d.events != target.events:
        raise ConstructionError("absorbing zig-zags did not reach the target")


def between_stabilized(d1: FrontDiagram, d2: FrontDiagram) -> CobordismCertificate:
    """A cobordism from d1 down to an unknot, across to the unknot below d2,
    up to d2 with extra zig-zags, and finally into d2 itself."""
    if not zigzag_sites(d2):
        raise ConstructionError("d2 must show a literal zig-zag")
    down1, down2 = to_unknot(d1), to_unknot(d2)
    mid, _ = bridge(down1.bottom, down2.bottom)
    t = ascend(down2)
    absorb_extras(t, d2)
    steps = list(down1.steps) + mid + t.steps
    out = run_steps(d1, steps)
    if out.events != d2.events:
        raise ConstructionError("between_stabilized missed d2")
    return CobordismCertificate(d1, tuple(steps), d2)


# --- knot families ---------------------------------------------------------

@dataclass(frozen=True)
class FamilyParams:
    """TwistKnot(m, variant) or NegTorus(p, k, n1, n2)."""
    family: str
    m: int = 0
    variant: str = ""
    p: int = 0
    k: int = 0
    n1: int = 0
    n2: int = 0

    def __post_init__(self):
        if self.family == "twist":
            if self.m in (0, -1):
                raise ConstructionError("K_0 and K_-1 are unknots")
            if self.m >= 1 and self.variant:
                raise ConstructionError("positive twist knots take no variant")
            if self.m <= -2:
                v = self.variant or "S" * (-self.m - 2)
                if len(v) != -self.m - 2 or set(v) - {"S", "Z"}:
                    raise ConstructionError(f"variant must be {-self.m - 2} letters from S/Z")
                object.__setattr__(self, "variant", v)
        elif self.family == "negtorus":
            p, k = self.p, self.k
            if p % 2 == 0 or not p > 2 * k > 0 or self.n1 < 0 or self.n2 < 0:
                raise ConstructionError("need p odd and p > 2k > 0, n1, n2 >= 0")
            e = p - (1 + self.n1 + self.n2) * 2 * k
            if not 0 < e < 2 * k:
                raise ConstructionError(f"p = (1+n1+n2)(2k) + e needs 0 < e < 2k, got e = {e}")
        else:
            raise ConstructionError(f"unknown family {self.family!r}")

    def __str__(self):
        if self.family == "twist":
            return f"TwistKnot({self.m}{', ' + self.variant if self.variant else ''})"
        return f"NegTorus({self.p}, {self.k}, {self.n1}, {self.n2})"


# positive twist knots: K_m = L1 L3 X2 (X2)^m X1 X1 R2 R1; K_0 is the max unknot
def _pos_twist_word(m: int) -> str:
    return " ".join(["L1", "L3", "X2"] + ["X2"] * m + ["X1", "X1", "R2", "R1"])


_POS_REDUCE = [
    Pinch(3, 1),
    Isotopy(IsotopyMove("Commute", "0", 0, "fwd")),
    Isotopy(IsotopyMove("R1", "above.1", 1, "inv")),
    Isotopy(IsotopyMove("Commute", "0", 0, "fwd")),
]
_POS_BASE = [
    Isotopy(IsotopyMove("Commute", "0", 0, "fwd")),
    Isotopy(IsotopyMove("R2", "Lhi.1", 1, "inv")),
    Isotopy(IsotopyMove("R1", "below.1", 1, "inv")),
    Cup(0),
]


def twist_reduction(m: int) -> CobordismCertificate:
    """One pinch from the positive twist knot K_{m+1} to K_m (m >= 0)."""
    if m < 0:
        raise ConstructionError("reduction is defined for m >= 0")
    top = FrontDiagram.from_word(_pos_twist_word(m + 1))
    bottom = run_steps(top, _POS_REDUCE)
    if bottom.word != _pos_twist_word(m):
        raise ConstructionError("twist reduction missed K_m")
    return CobordismCertificate(top, tuple(_POS_REDUCE), bottom)


def _pos_base_certificate() -> CobordismCertificate:
    top = FrontDiagram.from_word(_pos_twist_word(0))
    return CobordismCertificate(top, tuple(_POS_BASE), run_steps(top, _POS_BASE))


# negative twist knots: the box holds |m+2| half twists of shape S or Z
_NEG_BLOCK = {"S": "L1 X2 R3", "Z": "L3 X2 R1"}


def _neg_twist_word(variant: str) -> str:
    return " ".join(["L1 L3 X2"] + [_NEG_BLOCK[c] for c in variant] + ["X2 X2 R1 R1"])


def _neg_twist_steps(variant: str) -> list[CobordismStep]:
    # one pinch closes off the clasp, the other cuts the box loose; each
    # half twist then unwinds with a commutation and a fish removal
    j = len(variant)
    steps: list[CobordismStep] = [Pinch(3, 1), Pinch(6 + 3 * j, 1)]
    for c in variant:
        steps.append(Isotopy(IsotopyMove("Commute", "0", 4, "fwd")))
        steps.append(Isotopy(IsotopyMove("R1", "below.2" if c == "S" else "above.1", 5, "inv")))
    steps.append(Isotopy(IsotopyMove("Commute", "0", 0, "fwd")))
    steps += [Isotopy(IsotopyMove("R1", "above.1", 1, "inv"))] * 3
    steps.append(Cup(0))
    return steps


# negative torus knots T(-p, 2k): a 2k-copy of a max unknot carrying
# n1 + n2 zig-zags (the B tangles), with e turnbacks that carry the top
# strand of the copy bundle down to the bottom

def _interleave_swaps(q: int, base: int) -> list[Event]:
    """Crossings taking q nested cusp pairs to two parallel q-strand bundles."""
    cur = [(side, j) for j in reversed(range(q)) for side in ("u", "l")]
    out = []
    for d in range(1, q):
        changed = True
        while changed:
            changed = False
            for i in range(len(cur) - 1):
                a, b = cur[i], cur[i + 1]
                if a[0] == "l" and b[0] == "u" and a[1] - b[1] == d:
                    cur[i], cur[i + 1] = b, a
                    out.append(Event("X", base + i))
                    changed = True
    return out


def _copies(d: FrontDiagram, q: int, after_first: Sequence[Event] = ()) -> FrontDiagram:
    out: list[Event] = []
    for n, e in enumerate(d.events):
        b = q * (e.pos - 1) + 1
        if e.kind == "L":
            out += [Event("L", b)] * q + _interleave_swaps(q, b)
            if n == 0:
                out += list(after_first)
        elif e.kind == "R":
            out += list(reversed(_interleave_swaps(q, b)))
            out += [Event("R", b + 2 * (q - 1 - j)) for j in range(q)]
        else:
            raise ConstructionError("copies are only built from crossingless fronts")
    return FrontDiagram(tuple(out))


def _neg_torus_front(p: int, k: int, n1: int, n2: int) -> FrontDiagram:
    q = 2 * k
    e = p - (1 + n1 + n2) * q
    core = FrontDiagram.from_word("L1 " + "L1 R2 " * n1 + "L2 R1 " * n2 + "R1")
    turn = [Event("L", q + 1)] + [Event("X", j) for j in range(q, 1, -1)] + [Event("R", 1)]
    return _copies(core, q, turn * e)


def _moves(text: str) -> list[CobordismStep]:
    """'Commute 0 1 fwd; R1 below.4 4 inv' -> isotopy steps."""
    out = []
    for part in text.split(";"):
        fam, var, gap, dirn = part.split()
        out.append(Isotopy(IsotopyMove(fam, var, int(gap), dirn)))
    return out


# k = 1: after the pinch the two copies close off into "L1 L1"; each
# doubled zig-zag then folds into that pair of cusps
_NT_OPEN = _moves("R1 above.1 1 inv; Commute 0 1 fwd; R1 above.1 2 inv")
_NT_ABSORB = {
    "L1 R2": _moves("Commute 0 1 fwd; Commute 0 2 fwd; Commute 0 3 fwd; R1 below.4 4 inv;"
                    " Commute 0 1 fwd; R1 below.2 2 inv"),
    "L2 R1": _moves("Commute 0 1 fwd; Commute 0 2 fwd; Commute 0 6 fwd; Commute 0 3 fwd;"
                    " R1 above.1 4 inv; R1 above.1 2 inv"),
}
_NT_CLOSE = _moves("Commute 0 0 fwd; R1 below.2 1 inv") + [Cup(0)]


def _neg_torus_steps(params: FamilyParams) -> list[CobordismStep]:
    if params.k != 1:
        raise ConstructionError(
            f"no {params.k}-pinch filling schedule is known for {params} (only k = 1 is built)")
    steps: list[CobordismStep] = [Pinch(3, 1)] + _NT_OPEN
    for zz in ["L1 R2"] * params.n1 + ["L2 R1"] * params.n2:
        steps += _NT_ABSORB[zz]
    return steps + _NT_CLOSE


def make_family(params: FamilyParams) -> FrontDiagram:
    """The maximal-tb front of a family member."""
    if params.family == "twist":
        if params.m >= 1:
            return FrontDiagram.from_word(_pos_twist_word(params.m))
        return FrontDiagram.from_word(_neg_twist_word(params.variant))
    return _neg_torus_front(params.p, params.k, params.n1, params.n2)


def fill_family(params: FamilyParams) -> CobordismCertificate:
    """A filling: the family front down to the empty word."""
    top = make_family(params)
    if params.family == "twist" and params.m >= 1:
        steps: list[CobordismStep] = []
        for m in range(params.m - 1, -1, -1):
            steps += twist_reduction(m).steps
        steps += _POS_BASE
    elif params.family == "twist":
        steps = _neg_twist_steps(params.variant)
    else:
        steps = _neg_torus_steps(params)
    bottom = run_steps(top, steps)
    if bottom.events:
        raise ConstructionError(f"filling of {params} did not end empty")
    return CobordismCertificate(top, tuple(steps), bottom)
