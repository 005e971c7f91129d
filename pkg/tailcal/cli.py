"""Command-line entry point."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from typing import Sequence

from .config import load_config
from .const import EXPERIMENT_KINDS, EXPORT_TUBE, INGEST
from .core.exceptions import TailcalError
from .experiments import run_experiment
from .helpers import get_error_message, get_library_info

_LOGGER = logging.getLogger(__name__)


def _command(kind: str) -> str:
    return kind.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    """Subcommands mirror the experiment kinds plus ingest and export-tube."""
    parser = argparse.ArgumentParser(
        prog="tailcal",
        description="Audit the tail calibration of trajectory uncertainty models.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {get_library_info()['version']}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [experiment], [data], [model] ... sections")
    common.add_argument("--out", dest="output", help="output directory")
    common.add_argument("--seed", type=int, help="root seed, a 64-bit unsigned integer")
    common.add_argument("--quick", action="store_true", default=None,
                        help="cap the test set at 1e5 for a fast run")
    common.add_argument("--workers", type=int, help="worker threads; results do not depend on it")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="log debug detail; progress is logged by default")

    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for kind in [*EXPERIMENT_KINDS, INGEST, EXPORT_TUBE]:
        commands.add_parser(_command(kind), parents=[common], help=f"run {kind}")
    return parser


def _log_level(verbose: int) -> int:
    return logging.DEBUG if verbose else logging.INFO


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; return the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=_log_level(args.verbose),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    overrides = {
        "kind": args.command.replace("-", "_"),
        "output": args.output,
        "seed": args.seed,
        "quick": args.quick,
        "workers": args.workers,
    }
    try:
        cfg = load_config(args.config, overrides)
        result = run_experiment(cfg)
    except TailcalError as err:
        print(f"{get_error_message(err.key)}: {err}", file=sys.stderr)
        if err.diagnostics:
            print(json.dumps(err.diagnostics, indent=2, sort_keys=True, default=str), file=sys.stderr)
        return err.exit_code
    except Exception:  # pylint: disable=broad-except
        print(get_error_message("unknown"), file=sys.stderr)
        traceback.print_exc()
        return 1
    print(f"{result.kind}: wrote {len(result.files) + 1} files to {result.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
