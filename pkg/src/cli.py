"""module for the uec-lab command line: run, describe and curves"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from .core.config import load_config
from .core.exceptions import ConfigValidationError, UecLabError
from .core.logging_config import configure_logging
from .repositories.files import FileReportRepository
from .services.experiment import ExperimentService
from .services.families import FamilyFactory

logger = logging.getLogger(__name__)


def _service(config_path: Path, out: str | None) -> ExperimentService:
    # matrix files of custom families resolve against the config's directory
    return ExperimentService(FileReportRepository(out or "."), FamilyFactory(config_path.parent))


async def _run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    config = load_config(config_path)
    report = await _service(config_path, args.out).run(config)
    print(f"{len(report['analyses'])} analyses done in {report['wall_time']:.3g} s")
    return 0


async def _describe(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    config = load_config(config_path)
    print(_service(config_path, None).describe(config))
    return 0


async def _curves(args: argparse.Namespace) -> int:
    report = await FileReportRepository().get_report(args.report)
    if report is None:
        raise ConfigValidationError(f"report {args.report} not found")
    service = ExperimentService(FileReportRepository(args.out))
    for path in await service.emit_curves(report, "."):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uec-lab", description="Equicontinuity experiments on truncations.")
    parser.add_argument("--log-level", default="WARNING")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the analyses of a config and write the report")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output root for the report and curve files")
    run.set_defaults(handler=_run)

    describe = commands.add_parser("describe", help="summarize the configured family")
    describe.add_argument("config")
    describe.set_defaults(handler=_describe)

    curves = commands.add_parser("curves", help="write one CSV per modulus curve of a report")
    curves.add_argument("report")
    curves.add_argument("--out", required=True)
    curves.set_defaults(handler=_curves)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level.upper())
    try:
        return asyncio.run(args.handler(args))
    except UecLabError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
