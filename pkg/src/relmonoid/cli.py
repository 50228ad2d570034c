"""Command-line front end.

    relmonoid sieve --n 4
    relmonoid certify --relations --n 4 --mode both
    relmonoid certify --lattice chain3 --n 5
    relmonoid lattice-check --file m3.lat
    relmonoid localize --lattice boolean2 --n 5 --Y 1,2,3,4

Output files go to ``--outdir``, defaulting to ``$RELMONOID_OUTDIR`` or the
current directory.  Points of Y are given 1-based on the command line.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import lattice as lat
from .cert import HOM_MODES, INFINITE, certify_correspondences, certify_relations, localization_checks
from .sieve import MODES, classify_all, summary_lines

OUTDIR_ENV = "RELMONOID_OUTDIR"
DEFAULT_SEED = 20240601
DEFAULT_COUNT = 100_000


def _outdir(args: argparse.Namespace) -> Path:
    path = Path(args.outdir or os.environ.get(OUTDIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_Y(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(tok) - 1 for tok in text.split(","))
    except ValueError:
        raise SystemExit(f"error: --Y expects comma-separated point numbers, got {text!r}")


def _load_lattice(args: argparse.Namespace) -> lat.Lattice:
    if getattr(args, "poset", None):
        k, edges = lat.parse_poset(Path(args.poset).read_text())
        return lat.build_downsets(k, edges, Path(args.poset).stem)
    source = getattr(args, "file", None) or args.lattice
    return lat.load_lattice(source)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def run_sieve(args: argparse.Namespace) -> int:
    try:
        c = classify_all(args.n, args.sieve_mode, args.workers)
    except ValueError as exc:
        return _fail(str(exc))
    out = _outdir(args)
    with open(out / f"classification_n{args.n}.csv", "w", newline="") as fh:
        c.write_csv(fh)
    summary = "\n".join(summary_lines(c)) + "\n"
    (out / f"sieve_n{args.n}.txt").write_text(summary)
    print(summary, end="")
    return 0


def run_certify(args: argparse.Namespace) -> int:
    try:
        if args.relations:
            cert = certify_relations(args.n, args.mode, args.workers)
            stem = f"certificate_B{args.n}"
        else:
            l = _load_lattice(args)
            cert = certify_correspondences(
                l, args.n, _parse_Y(args.Y), args.atom, args.mode, args.seed, args.count, args.workers
            )
            stem = f"certificate_{l.name or 'custom'}_n{args.n}"
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    text = cert.to_text(timings=args.timings)
    (_outdir(args) / f"{stem}.txt").write_text(text)
    print(text, end="")
    return 0 if cert.verdict == INFINITE else 1


def run_lattice_check(args: argparse.Namespace) -> int:
    try:
        l = _load_lattice(args)
    except lat.LatticeError as exc:
        print(f"rejected: {exc}")
        if exc.witness:
            print("witness=" + " ".join(map(str, exc.witness)))
        return 1
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(f"accepted: {l.size} elements, distributive")
    print(f"bottom={lat.bottom(l)} top={lat.top(l)} atoms={','.join(map(str, lat.atoms(l)))}")
    return 0


def run_localize(args: argparse.Namespace) -> int:
    try:
        l = _load_lattice(args)
        loc = lat.make_localizer(l, args.n, _parse_Y(args.Y), args.atom)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    checks = localization_checks(loc, args.seed, args.count)
    lines = ["LOCALIZER"] + [f"{k}={v}" for k, v in loc.describe()] + ["", "CHECKS"]
    lines += [r.line(args.timings) for r in checks]
    ok = all(r.passed for r in checks)
    lines += ["", "RESULT", "pass" if ok else "fail"]
    text = "\n".join(lines) + "\n"
    (_outdir(args) / f"localizer_{l.name or 'custom'}_n{args.n}.txt").write_text(text)
    print(text, end="")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relmonoid", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or .)")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")

    def lattice_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--Y", help="four 1-based points, e.g. 1,2,3,4")
        p.add_argument("--atom", type=int, default=None, help="atom id (default: smallest)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--count", type=int, default=DEFAULT_COUNT, help="random pairs per check")
        p.add_argument("--timings", action="store_true", help="record elapsed times (output no longer byte-stable)")

    p = sub.add_parser("sieve", help="classify every element of B_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sieve-mode", choices=MODES, default="reduced")
    common(p)
    p.set_defaults(func=run_sieve)

    p = sub.add_parser("certify", help="emit a certificate for B_n or lattice-valued correspondences")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--relations", action="store_true", help="subject B_n")
    target.add_argument("--lattice", help="builtin name or lattice file")
    target.add_argument("--poset", help="poset file; uses its lattice of downsets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=HOM_MODES, default="structured")
    lattice_opts(p)
    common(p)
    p.set_defaults(func=run_certify)

    p = sub.add_parser("lattice-check", help="validate a distributive lattice")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file")
    src.add_argument("--lattice")
    src.add_argument("--poset")
    p.set_defaults(func=run_lattice_check)

    p = sub.add_parser("localize", help="build e_{Y,c} and test the localization")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lattice")
    src.add_argument("--poset")
    p.add_argument("--n", type=int, required=True)
    lattice_opts(p)
    common(p)
    p.set_defaults(func=run_localize)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
