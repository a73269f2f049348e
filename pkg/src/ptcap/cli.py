"""``pt``: solve configurations, compute the constants, trace continua.

Exit codes: 0 success, 1 usage error, 2 numerical failure (or a rejected
partition), 3 infeasible geometry.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from . import __version__
from .configurations import CONFIG_IDS, MODES, PTProblem, continuum_arcs, solve_pt
from .errors import InfeasibleGeometryError, PipelineError, PTError
from .io import (arcs_to_csv, arcs_to_svg, atomic_write, check_writable, dumps, parse_points,
                 read_json, report_to_dict, solution_from_dict, solution_to_dict)
from .partitions import partition_from_json, validate_partition

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_GEOMETRY = 0, 1, 2, 3
WHICH = {"bloch": "bloch_landau", "lifetime": "lifetime", "frequency": "frequency"}

log = logging.getLogger("ptcap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_name(text: str) -> str:
    cid = text.replace("-", "_")
    if cid not in CONFIG_IDS:
        names = ", ".join(c.replace("_", "-") for c in CONFIG_IDS)
        raise argparse.ArgumentTypeError(f"unknown configuration {text!r} (choose from {names})")
    return cid


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a point configuration")
    s.add_argument("--config", required=True, type=_config_name)
    s.add_argument("--points", required=True, help='comma separated anchors, e.g. "1+1i,2-0.5i"')
    s.add_argument("--tol", type=_positive, default=1e-12)
    s.add_argument("--mode", choices=MODES, default="auto")
    s.add_argument("--topology", type=int, choices=(1, 2))
    s.add_argument("--out", help="output file (default: standard output)")

    c = sub.add_parser("constants", help="bounds for the Bloch-Landau, lifetime and frequency constants")
    c.add_argument("--which", required=True, choices=sorted(WHICH))
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=float)
    g.add_argument("--scan", nargs=3, metavar=("LO", "HI", "N"))
    c.add_argument("--R", type=_positive, help="skip the radius search and use this R")
    c.add_argument("--reading", choices=("c2c3", "c1c2"), default="c2c3")
    c.add_argument("--max-degree", type=int, default=99)
    c.add_argument("--no-check", action="store_true", help="skip the Fourier cross-check")
    c.add_argument("--out")

    t = sub.add_parser("trace", help="export the arcs of a solved continuum")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--solution", help="solution JSON written by 'pt solve'")
    src.add_argument("--config", type=_config_name)
    t.add_argument("--points")
    t.add_argument("--format", choices=("csv", "svg"), default="csv")
    t.add_argument("--step", type=_positive, default=1e-3)
    t.add_argument("--out")

    v = sub.add_parser("validate-partition", help="check a nested partition JSON file")
    v.add_argument("file")
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _points(text: Optional[str]):
    if text is None:
        raise UsageError("--points is required")
    try:
        return parse_points(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _problem(cid: str, text: Optional[str], topology=None) -> PTProblem:
    try:
        return PTProblem(cid, tuple(_points(text)), topology=topology)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_solve(args) -> int:
    prob = _problem(args.config, args.points, args.topology)
    if args.out:
        check_writable(args.out)
    sol = solve_pt(prob, mode=args.mode, tol=args.tol)
    _emit(dumps(solution_to_dict(sol)) + "\n", args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    from .constants import constant_report, scan_optimize

    if args.out:
        check_writable(args.out)
    kind = WHICH[args.which]
    opts = {"reading": args.reading}
    if kind != "bloch_landau":
        opts.update(max_degree=args.max_degree, check=not args.no_check)
    if args.scan:
        try:
            lo, hi, n = float(args.scan[0]), float(args.scan[1]), int(args.scan[2])
        except ValueError as exc:
            raise UsageError(f"--scan expects LO HI N: {exc}") from exc
        try:
            report = scan_optimize(kind, lo, hi, n, **opts)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        report = constant_report(kind, args.x, args.R, **opts)
    _emit(dumps(report_to_dict(report)) + "\n", args.out)
    return EXIT_OK


def cmd_trace(args) -> int:
    if args.solution:
        try:
            sol = solution_from_dict(read_json(args.solution))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {args.solution}: {exc}") from exc
    else:
        sol = solve_pt(_problem(args.config, args.points))
    if args.out:
        check_writable(args.out)
    arcs = continuum_arcs(sol, step=args.step)
    for k, arc in enumerate(arcs):
        print(f"arc {k}: {len(arc)} points", file=sys.stderr)
    text = arcs_to_csv(arcs) if args.format == "csv" else arcs_to_svg(arcs)
    _emit(text, args.out)
    return EXIT_OK


def cmd_validate_partition(args) -> int:
    try:
        part = partition_from_json(read_json(args.file))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from exc
    rep = validate_partition(part)
    if rep.ok:
        print("valid")
        return EXIT_OK
    print(f"invalid: {rep.violation} ({rep.detail})")
    return EXIT_NUMERIC


COMMANDS = {"solve": cmd_solve, "constants": cmd_constants, "trace": cmd_trace,
            "validate-partition": cmd_validate_partition}


def _is_geometry(exc: BaseException) -> bool:
    while exc is not None:
        if isinstance(exc, InfeasibleGeometryError):
            return True
        exc = exc.cause if isinstance(exc, PipelineError) else exc.__cause__
    return False


_VALUE_OPTIONS = ("--points",)


def _join_values(argv: List[str]) -> List[str]:
    """Glue values such as ``-1,1`` to their option; argparse reads them as flags."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _VALUE_OPTIONS and k + 1 < len(argv) and argv[k + 1].startswith("-") \
                and not argv[k + 1].startswith("--"):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
            continue
        out.append(tok)
        k += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_values(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        # the reader went away (e.g. ``| head``); silence the final flush too
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PTError as exc:
        print(f"pt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY if _is_geometry(exc) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
