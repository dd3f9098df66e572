"""Command line entry point: ``legcalc <command> ...``.

Exit codes: 0 success, 1 input error, 2 a certificate step failed to
replay, 3 a theorem check was violated.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .cobordism import (
    EXIT_INPUT, EXIT_OK, EXIT_STEP, EXIT_THEOREM, CertificateStore, CobordismCertificate,
    ReplayError, check, load_certificate, serialize_certificate, session_consistency,
)
from .constructions import (
    ConstructionError, FamilyParams, between_stabilized, endocobordism, fill_family,
    make_family, to_unknot,
)
from .front import LegcalcError, invariants, parse_front, serialize_front
from .moves import (
    IsotopyMove, MoveError, SearchBudgetExceeded, apply_move, enumerate_moves,
    search_isotopy,
)
from .rulings import enumerate_rulings, fillability_report


class InputError(Exception):
    pass


def _front(path: str):
    try:
        return parse_front(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except LegcalcError as exc:
        raise InputError(f"{path}: {exc}") from None


def _cert(path: str) -> CobordismCertificate:
    try:
        return load_certificate(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except LegcalcError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_validate(args) -> int:
    d = _front(args.file)
    print(f"ok events={len(d)} components={d.num_components}")
    return EXIT_OK


def cmd_inv(args) -> int:
    inv = invariants(_front(args.file))
    if inv.components == 1:
        print(f"tb={inv.tb[0]} rot={inv.rot[0]} components=1")
    else:
        tb = ",".join(map(str, inv.tb))
        rot = ",".join(map(str, inv.rot))
        print(f"tb={tb} rot={rot} components={inv.components} lk={inv.linking // 2}")
    return EXIT_OK


def cmd_move(args) -> int:
    d = _front(args.file)
    if args.list:
        for m in enumerate_moves(d):
            print(str(m)[5:])
        return EXIT_OK
    if not args.words or len(args.words) != 4:
        raise InputError("move needs FAMILY VARIANT GAP DIRECTION (or --list)")
    try:
        m = IsotopyMove.parse("MOVE " + " ".join(args.words))
        out = apply_move(d, m)
    except MoveError as exc:
        raise InputError(str(exc)) from None
    print(serialize_front(out))
    return EXIT_OK


def cmd_search(args) -> int:
    a, b = _front(args.start), _front(args.target)
    try:
        cert = search_isotopy(a, b, args.depth)
    except SearchBudgetExceeded as exc:
        print(f"NOT-FOUND ({exc})")
        return EXIT_OK
    if cert is None:
        print("NOT-FOUND")
        return EXIT_OK
    print(f"FOUND {len(cert.moves)} moves")
    for m in cert.moves:
        print(m)
    return EXIT_OK


def _report(cert: CobordismCertificate) -> int:
    try:
        rep = check(cert)
    except ReplayError as exc:
        print(f"FAILED at step {exc.index}: {exc.reason}")
        return EXIT_STEP
    print(rep.summary())
    return EXIT_THEOREM if rep.violations else EXIT_OK


def cmd_check(args) -> int:
    return _report(_cert(args.file))


def _write_verified(cert: CobordismCertificate, out: str | None) -> int:
    """Verify, then write (atomically) or print.  Nothing unverified is left on disk."""
    try:
        rep = check(cert)
    except ReplayError as exc:
        print(f"generated certificate failed at step {exc.index}: {exc.reason}", file=sys.stderr)
        return EXIT_STEP
    if rep.violations:
        print(rep.summary())
        return EXIT_THEOREM
    text = serialize_certificate(cert)
    if out is None:
        sys.stdout.write(text)
    else:
        target = Path(out)
        fd, tmp = tempfile.mkstemp(dir=target.parent or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            if _report_quiet(load_certificate(tmp)) != EXIT_OK:
                return EXIT_STEP
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        print(rep.summary())
    return EXIT_OK


def _report_quiet(cert: CobordismCertificate) -> int:
    try:
        return EXIT_THEOREM if check(cert).violations else EXIT_OK
    except ReplayError:
        return EXIT_STEP


def _family(args) -> FamilyParams:
    if args.family == "twist":
        if args.m is None:
            raise InputError("--family twist needs --m")
        variant = args.variant or ""
        if variant.isdigit():
            # an integer picks S/Z per half twist from its binary digits
            n = max(-args.m - 2, 0)
            bits = int(variant)
            if bits >= 2 ** n:
                raise InputError(f"--variant {variant} out of range for m={args.m}")
            variant = "".join("Z" if bits >> j & 1 else "S" for j in range(n))
        return FamilyParams("twist", m=args.m, variant=variant)
    return FamilyParams("negtorus", p=args.p or 0, k=args.k or 0,
                        n1=args.n1 or 0, n2=args.n2 or 0)


def cmd_gen(args) -> int:
    try:
        if args.kind == "endo":
            cert = endocobordism(_front(args.files[0]), args.k)
        elif args.kind == "tounknot":
            cert = to_unknot(_front(args.files[0]))
        elif args.kind == "between":
            if len(args.files) != 2:
                raise InputError("gen between needs two fronts")
            cert = between_stabilized(_front(args.files[0]), _front(args.files[1]))
        elif args.kind == "family":
            params = _family(args)
            if args.front_only:
                print(serialize_front(make_family(params)))
                return EXIT_OK
            cert = fill_family(params)
        else:
            raise InputError(f"unknown generator {args.kind!r}")
    except (ConstructionError, MoveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return _write_verified(cert, args.output)


def cmd_rulings(args) -> int:
    d = _front(args.file)
    if args.graded and not d.is_knot():
        print("error: graded rulings are only defined here for knots", file=sys.stderr)
        return EXIT_INPUT
    ungraded = enumerate_rulings(d)
    graded = enumerate_rulings(d, graded=True) if d.is_knot() else None
    for r in graded if args.graded else ungraded:
        print("switches " + (" ".join(map(str, sorted(r))) or "-"))
    print(f"RULINGS {len(ungraded)} {'-' if graded is None else len(graded)}")
    return EXIT_OK


# --- corpus --------------------------------------------------------------

def read_index(root: Path) -> list[tuple[str, str, list[str]]]:
    """Lines ``name front [cert ...]``; '#' starts a comment."""
    entries = []
    for raw in (root / "INDEX").read_text().splitlines():
        line = raw.split("#", 1)[0].split()
        if line:
            entries.append((line[0], line[1], line[2:]))
    return entries


def cmd_corpus(args) -> int:
    root = Path(args.corpus)
    try:
        entries = read_index(root)
    except OSError as exc:
        raise InputError(f"{root}: {exc.strerror}") from None
    fronts = {name: _front(str(root / f)) for name, f, _ in entries}
    if args.action == "list":
        for name, f, certs in entries:
            print(f"{name} {f} {' '.join(certs)}".rstrip())
        return EXIT_OK
    jobs = [(name, c) for name, _, certs in entries for c in certs]
    loaded = [(name, c, _cert(str(root / c))) for name, c in jobs]

    def verify(item):
        name, c, cert = item
        try:
            return name, c, cert, check(cert), None
        except ReplayError as exc:
            return name, c, cert, None, exc

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        results = list(pool.map(verify, loaded))
    store = CertificateStore()
    code = EXIT_OK
    for name, c, cert, rep, err in results:
        if err is not None:
            print(f"{c}: FAILED at step {err.index}: {err.reason}")
            code = max(code, EXIT_STEP)
            continue
        store.add(cert, rep)
        status = "VIOLATION" if rep.violations else "ok"
        print(f"{c}: {status} {rep.summary().splitlines()[0]}")
        if rep.violations:
            code = EXIT_THEOREM
    certs = [c for c, _ in store]
    for name, d in fronts.items():
        rep = fillability_report(d, certs)
        g = "-" if rep.graded is None else rep.graded
        print(f"{name}: RULINGS {rep.ungraded} {g}{' filled' if rep.filled else ''}")
        for f in rep.flags:
            print(f"  {f}")
            code = EXIT_THEOREM
    for f in session_consistency(store):
        print(str(f))
        code = EXIT_THEOREM
    print(f"corpus: {len(fronts)} fronts, {len(certs)} certificates")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="legcalc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and validate an LFRONT file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("inv", help="print tb, rot and component count")
    s.add_argument("file")
    s.set_defaults(func=cmd_inv)

    s = sub.add_parser("move", help="apply one move, or list applicable moves")
    s.add_argument("file")
    s.add_argument("words", nargs="*", help="FAMILY VARIANT GAP DIRECTION")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_move)

    s = sub.add_parser("search", help="bounded isotopy search between two fronts")
    s.add_argument("start")
    s.add_argument("target")
    s.add_argument("--depth", type=int, default=6)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("check", help="verify an LCOB certificate")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("gen", help="generate a verified certificate")
    s.add_argument("kind", choices=["endo", "tounknot", "between", "family"])
    s.add_argument("files", nargs="*")
    s.add_argument("--k", type=int, default=1, help="endo: number of rounds; negtorus: k")
    s.add_argument("--family", choices=["twist", "negtorus"])
    s.add_argument("--m", type=int)
    s.add_argument("--variant")
    s.add_argument("--p", type=int)
    s.add_argument("--n1", type=int)
    s.add_argument("--n2", type=int)
    s.add_argument("--front-only", action="store_true", help="family: print the front instead")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("rulings", help="normal ruling enumeration")
    s.add_argument("action", choices=["count"])
    s.add_argument("file")
    s.add_argument("--graded", action="store_true")
    s.set_defaults(func=cmd_rulings)

    s = sub.add_parser("corpus", help="list or check the shipped corpus")
    s.add_argument("action", choices=["list", "check"])
    s.add_argument("--corpus", default="corpus")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "gen" and args.kind == "family" and args.family is None:
        print("error: gen family needs --family", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "gen" and args.kind in ("endo", "tounknot") and len(args.files) != 1:
        print(f"error: gen {args.kind} needs one front", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
