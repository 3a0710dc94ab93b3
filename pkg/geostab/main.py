"""
geostab command-line entry point.

    python -m geostab.main run <scenario.json> [--output DIR]
    python -m geostab.main validate <scenario.json>
    python -m geostab.main examples [--directory DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from . import __version__
from .config import GEOSTAB_THREADS, LOG_LEVEL, OUTPUT_DIR, validate_config
from .runner import ScenarioRunner, write_builtin_scenarios
from .reports.writer import render_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geostab", description="Geometric stability analysis of dynamical systems")
    parser.add_argument("--version", action="version", version=f"geostab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    parser.add_argument("-q", "--quiet", action="store_true", help="no banner or step lines")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its reports")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--output", default=None, help="output directory (overrides the scenario)")

    validate = sub.add_parser("validate", help="check a scenario without integrating")
    validate.add_argument("scenario", help="scenario JSON file")

    examples = sub.add_parser("examples", help="write the built-in scenarios")
    examples.add_argument("--directory", default="scenarios", help="where to write them")
    return parser


def _banner(title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)


def _report(result: dict, quiet: bool) -> int:
    if not quiet:
        for step in result["steps"]:
            print(f"  {step['step']:<12} {step['status']}")
        for path in result["outputs"]:
            print(f"  wrote {path}")
    if result["error"] is not None:
        sys.stderr.write(render_json(result["error"]))
    return result["exit_code"]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not validate_config():
        return 2
    level = "INFO" if args.verbose else LOG_LEVEL
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")

    if args.command == "examples":
        paths = write_builtin_scenarios(args.directory)
        if not args.quiet:
            for path in paths:
                print(f"  wrote {path}")
        return 0

    runner = ScenarioRunner(output_dir=args.output if args.command == "run" else None, max_workers=GEOSTAB_THREADS)
    if not args.quiet:
        _banner(f"geostab {args.command}: {args.scenario}")
        if args.command == "run":
            print(f"Output: {args.output or 'scenario output block'} (default {OUTPUT_DIR})")
            print(f"Threads: {GEOSTAB_THREADS}")
    result = runner.run(args.scenario, validate_only=args.command == "validate")
    code = _report(result, args.quiet)
    if not args.quiet:
        if args.command == "validate" and code == 0:
            print(json.dumps(result.get("checks", []), indent=2))
        print(f"Status: {result['status']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
