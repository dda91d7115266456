# pleat/cli.py

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from pleat.config import PROFILES, show_defaults
from pleat.coordinator import COMMANDS, EXIT_CONFIG, Coordinator
from pleat.schemas import BumpExperimentRequest, JobConfig

logger = logging.getLogger(__name__)

REPRODUCIBLE = ("fig1", "fig1-third-strip", "fig2", "fig3", "bump-experiment")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("pleat", description="Propagate curved folds across nested foldlines")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Pipeline stage to run")
    parser.add_argument("target", nargs="?", choices=REPRODUCIBLE, help="Figure to reproduce (with 'reproduce')")
    parser.add_argument("--config", help="JSON job configuration")
    parser.add_argument("--profile", choices=sorted(PROFILES), help="Builtin job configuration")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--resolution", type=int, help="Samples per closed curve")
    parser.add_argument("--show-defaults", action="store_true", help="Print numeric defaults and profiles as JSON")
    parser.add_argument(
        "-l", "--log-level", default="warning", choices=("debug", "info", "warning", "error", "critical"), help="Log level"
    )
    return parser


def load_job(args: argparse.Namespace) -> JobConfig:
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    else:
        name = args.profile or (args.target if args.target in PROFILES else None)
        if name is None:
            raise ValueError("give --config, --profile or a reproducible target")
        data = json.loads(json.dumps(PROFILES[name]))
    if args.resolution is not None:
        data["resolution"] = args.resolution
    if args.out is not None:
        data["output_dir"] = args.out
    return JobConfig.model_validate(data)


def format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()), format="%(levelname)s %(name)s: %(message)s")

    if args.show_defaults:
        print(json.dumps(show_defaults(), indent=2, sort_keys=True))
        return 0
    if args.command is None:
        parser.error("a command is required")
    if args.command == "reproduce" and args.target is None:
        parser.error("reproduce needs a target")

    try:
        if args.command == "reproduce" and args.target == "bump-experiment":
            if not args.config and not args.profile:
                args.profile = "fig1"
            job = load_job(args)
            summary = Coordinator(job, args.out).handle_bump(BumpExperimentRequest(job=job))
        else:
            job = load_job(args)
            summary = Coordinator(job, args.out).handle(args.command)
    except ValidationError as e:
        print(format_validation_error(e), file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print(summary.model_dump_json(indent=2, exclude_none=True))
    if summary.message:
        print(summary.message, file=sys.stderr)
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
