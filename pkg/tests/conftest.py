import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from legcalc.front import FrontDiagram, parse_front  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

# acceptance criterion -> list of (sub-check, passed), printed at the end
ACCEPTANCE: dict[int, list[tuple[str, bool]]] = {}
N_CRITERIA = 8


def record(n: int, name: str, ok: bool) -> bool:
    ACCEPTANCE.setdefault(n, []).append((name, bool(ok)))
    return bool(ok)


def corpus_fronts() -> dict[str, FrontDiagram]:
    out = {}
    for line in (CORPUS / "INDEX").read_text().splitlines():
        parts = line.split("#", 1)[0].split()
        if parts:
            out[parts[0]] = parse_front((CORPUS / parts[1]).read_text())
    return out


def corpus_certificates() -> list[Path]:
    out = []
    for line in (CORPUS / "INDEX").read_text().splitlines():
        parts = line.split("#", 1)[0].split()
        out += [CORPUS / c for c in parts[2:]]
    return out


@pytest.fixture(scope="session")
def fronts():
    return corpus_fronts()


def random_word(rng: random.Random, max_events: int = 14, max_strands: int = 6) -> str:
    """A random closed front: cusps and crossings, then closed off with R1s."""
    ev = []
    n = 0
    for _ in range(rng.randint(1, max_events)):
        choices = []
        if n + 2 <= max_strands:
            choices += ["L"] * 2
        if n >= 2:
            choices += ["R", "X", "X"]
        kind = rng.choice(choices)
        if kind == "L":
            ev.append(f"L{rng.randint(1, n + 1)}")
            n += 2
        elif kind == "R":
            ev.append(f"R{rng.randint(1, n - 1)}")
            n -= 2
        else:
            ev.append(f"X{rng.randint(1, n - 1)}")
    ev += ["R1"] * (n // 2)
    return " ".join(ev)


@st.composite
def fronts_strategy(draw, max_events=14, knots_only=False):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = random.Random(seed)
    while True:
        d = FrontDiagram.from_word(random_word(rng, max_events))
        if not knots_only or d.is_knot():
            return d


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        checks = ACCEPTANCE.get(n, [])
        ok = bool(checks) and all(c for _, c in checks)
        failed = [name for name, c in checks if not c]
        detail = "not run" if not checks else (
            f"{len(checks)} checks" if ok else "failed: " + ", ".join(failed))
        terminalreporter.write_line(f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}")
