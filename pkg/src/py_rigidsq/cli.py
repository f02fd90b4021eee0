"""CLI entry point: argparse setup and command dispatch."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from py_rigidsq import __version__
from py_rigidsq.db import DEFAULTS, Database, find_db, init_db, open_db
from py_rigidsq.errors import DomainError, ParseError
from py_rigidsq.exactlin import BaseRing
from py_rigidsq.lang import VERBS, parse_input
from py_rigidsq.report import Report, run_job
from py_rigidsq.utils import confirm, error, info, print_table

COMPUTE_VERBS = (*VERBS, "oracle")

VERB_HELP = {
    "groebner": "Reduced Groebner basis of a ring's ideal",
    "snf": "Smith normal form of an integer matrix",
    "koszul": "Koszul complex homology and regularity",
    "resolve": "Semi-free resolution of a ring map or a complex",
    "sq": "Cohomology of the squaring of a complex",
    "sq-mor": "Squaring of a scalar endomorphism",
    "cup": "Cup product on a tower of polynomial extensions",
    "omega": "Kaehler differentials and their exterior powers",
    "ext": "Ext of a complete intersection via Koszul duality",
    "etale": "Separating idempotent of an etale algebra",
    "flat-shriek": "Rigid f^flat along a finite or surjective map",
    "sharp": "Rigid f^sharp along a smooth map",
    "trace": "Rigid trace morphism and its witness",
    "rigid-exists": "Construct and verify a rigid complex over a ring",
    "verify-rigid": "Check a rigidified complex",
    "oracle": "Cross-check the pipeline against a brute-force path",
    "run": "Run every statement of a source file in order",
}


# -- Settings --

def _open_settings() -> Database | None:
    path = find_db()
    return open_db(path) if path is not None else None


def _setting(db: Database | None, key: str) -> str:
    value = db.get_config(key) if db is not None else None
    return value if value is not None else DEFAULTS[key]


def _read_source(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text()


def _report_path(args: argparse.Namespace, db: Database | None, report: Report) -> Path | None:
    if args.out:
        return Path(args.out)
    report_dir = db.get_config("report_dir") if db is not None else None
    if report_dir:
        return Path(report_dir).expanduser() / f"{report.digest}-{args.command}.txt"
    return None


# -- Commands --

def cmd_compute(args: argparse.Namespace) -> int:
    """Parse a source file and run the statements of one verb (all of them for 'run')."""
    db = _open_settings()
    try:
        return _compute(args, db)
    finally:
        if db is not None:
            db.close()


def _compute(args: argparse.Namespace, db: Database | None) -> int:
    try:
        base = BaseRing.parse("".join(args.base) if args.base else _setting(db, "default_base"))
        window = tuple(args.window) if args.window else (
            int(_setting(db, "default_window_lo")), int(_setting(db, "default_window_hi")))
        if window[0] > window[1]:
            raise DomainError(f"empty window {window[0]}..{window[1]}")
        depth = args.depth if args.depth is not None else int(_setting(db, "default_depth"))
        text = _read_source(args.source)
        job = parse_input(text, base)
    except ParseError as exc:
        error(f"{args.source}:{exc}")
        return 2
    except (DomainError, OSError) as exc:
        error(str(exc))
        return 2

    verb = None if args.command == "run" else args.command
    if verb is not None and not job.select(verb):
        error(f"no '{verb}' statements in {args.source}")
        return 2

    report = run_job(job, window, depth, args.trace, verb)
    text = report.render()
    path = _report_path(args, db, report)
    if path is None:
        print(text, end="")
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        info(f"Report written to {path}")

    if db is not None:
        for sec in report.sections:
            db.record_run(sec.verb, sec.digest, sec.exit_code, sec.elapsed,
                          str(path) if path else None)

    if report.exit_code:
        bad = [s for s in report.sections if s.exit_code]
        error(f"{len(bad)} of {len(report.sections)} statement(s) {report.status}: "
              + ", ".join(f"line {s.line} {s.status}" for s in bad))
    return report.exit_code


def cmd_init(args: argparse.Namespace) -> int:
    """Create the settings database with default values."""
    existing = find_db()
    if existing and not args.force:
        info(f"py-rigidsq is already initialized (DB: {existing})")
        info("Use --force to reset the settings.")
        return 0
    if existing and not args.yes and not confirm("Reset all settings to their defaults?"):
        info("Cancelled.")
        return 0

    db = init_db(Path(args.home).expanduser() if args.home else None)
    info(f"Database created: {db.db_path}")
    db.close()
    return 0


def cmd_config(args: argparse.Namespace) -> int:
    """Show or modify configuration."""
    db = open_db()

    if args.action == "set" and args.key and args.value is not None:
        old_value = db.get_config(args.key)
        try:
            db.set_config(args.key, args.value)
        except KeyError as exc:
            error(exc.args[0])
            db.close()
            return 2
        info(f"Config '{args.key}' updated: {old_value} -> {args.value}")
    elif args.action is not None:
        error("usage: py-rigidsq config [set KEY VALUE]")
        db.close()
        return 2
    else:
        info("py-rigidsq configuration:")
        for key, value in db.all_config().items():
            info(f"  {key}: {value}")
        info(f"  database: {db.db_path}")

    db.close()
    return 0


def cmd_history(args: argparse.Namespace) -> int:
    """List recent runs."""
    db = open_db()
    runs = db.recent_runs(args.limit)
    if not runs:
        info("No runs recorded.")
        db.close()
        return 0

    rows = [[str(r["id"]), r["verb"], r["digest"], str(r["status"]), f"{r['elapsed']:.2f}s",
             r["run_date"][:19]] for r in runs]
    print_table(["Run", "Verb", "Digest", "Exit", "Elapsed", "Date"], rows)
    db.close()
    return 0


# -- Parser --

def _add_compute_parser(subparsers, verb: str) -> None:
    p = subparsers.add_parser(verb, help=VERB_HELP.get(verb))
    p.add_argument("source", help="Declaration file ('-' for stdin)")
    p.add_argument("--window", nargs=2, type=int, metavar=("LO", "HI"),
                   help="Cohomological degree window (default from settings)")
    p.add_argument("--base", nargs="+", metavar="BASE",
                   help="Default base ring: QQ, ZZ or Fp P")
    p.add_argument("--depth", type=int, help="Resolution depth (default from settings)")
    p.add_argument("--out", help="Write the report to this path")
    p.add_argument("--trace", action="store_true",
                   help="Include resolution traces and log at DEBUG")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="py-rigidsq",
        description="Exact squaring operations and rigid complexes over commutative rings",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    for verb in (*COMPUTE_VERBS, "run"):
        _add_compute_parser(subparsers, verb)

    # init
    p_init = subparsers.add_parser("init", help="Create the settings database")
    p_init.add_argument("--home", help="Directory for the database (default: $RIGIDSQ_HOME "
                                       "or ~/.py-rigidsq)")
    p_init.add_argument("--force", action="store_true", help="Reset settings if the DB exists")
    p_init.add_argument("--yes", action="store_true", help="Do not ask for confirmation")

    # config
    p_config = subparsers.add_parser("config", help="Show or modify configuration")
    p_config.add_argument("action", nargs="?", help="'set' to modify a config value")
    p_config.add_argument("key", nargs="?", help="Config key to set")
    p_config.add_argument("value", nargs="?", help="New value")

    # history
    p_history = subparsers.add_parser("history", help="List recent runs")
    p_history.add_argument("--limit", type=int, default=20, help="Number of runs to show")

    return parser


def main() -> None:
    parser = build_parser()
    args = parser.parse_args()

    if args.command is None:
        parser.print_help()
        sys.exit(0)

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "trace", False) else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    dispatch = {verb: cmd_compute for verb in (*COMPUTE_VERBS, "run")}
    dispatch.update({
        "init": cmd_init,
        "config": cmd_config,
        "history": cmd_history,
    })

    handler = dispatch.get(args.command)
    if handler:
        try:
            sys.exit(handler(args))
        except FileNotFoundError as exc:
            error(str(exc))
            sys.exit(2)
    else:
        parser.print_help()
        sys.exit(1)
