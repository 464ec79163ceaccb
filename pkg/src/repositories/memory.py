from .base import BaseReportRepository


class InMemoryReportRepository(BaseReportRepository):
    """Keeps reports and curve tables in dictionaries; used by the HTTP surface and tests."""

    def __init__(self) -> None:
        self.reports: dict[str, dict] = {}
        self.curves: dict[str, list[tuple[str, ...]]] = {}

    async def save_report(self, name: str, report: dict) -> str:
        self.reports[name] = report
        return name

    async def get_report(self, name: str) -> dict | None:
        return self.reports.get(name)

    async def save_curves(self, directory: str, tables: list[tuple[str, list[tuple[str, ...]]]]) -> list[str]:
        names = []
        for file_name, rows in tables:
            key = f"{directory}/{file_name}"
            self.curves[key] = rows
            names.append(key)
        return names

    async def list_reports(self) -> list[str]:
        return sorted(self.reports)
