"""module for report JSON and curve CSV files under one output root"""

import csv
import json
import logging
from pathlib import Path

from ..core.exceptions import ConfigValidationError, ReportWriteError
from ..services.report import dump_report
from .base import BaseReportRepository

logger = logging.getLogger(__name__)


class FileReportRepository(BaseReportRepository):
    def __init__(self, root: str | Path = ".") -> None:
        self.root = Path(root)

    def _path(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.root / path

    async def save_report(self, name: str, report: dict) -> str:
        path = self._path(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(dump_report(report), encoding="utf-8")
        except OSError as exc:
            raise ReportWriteError(f"cannot write report {path}: {exc}") from exc
        logger.info("report written to %s", path)
        return str(path)

    async def get_report(self, name: str) -> dict | None:
        path = self._path(name)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigValidationError(f"cannot read report {path}: {exc}") from exc

    async def save_curves(self, directory: str, tables: list[tuple[str, list[tuple[str, ...]]]]) -> list[str]:
        target = self._path(directory)
        written = []
        try:
            target.mkdir(parents=True, exist_ok=True)
            for file_name, rows in tables:
                path = target / file_name
                with path.open("w", newline="", encoding="utf-8") as handle:
                    csv.writer(handle, lineterminator="\n").writerows(rows)
                written.append(str(path))
        except OSError as exc:
            raise ReportWriteError(f"cannot write curves to {target}: {exc}") from exc
        logger.info("%d curve files written to %s", len(written), target)
        return written

    async def list_reports(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(str(p.relative_to(self.root)) for p in self.root.rglob("*.json"))
