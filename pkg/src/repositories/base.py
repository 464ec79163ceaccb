from abc import ABC, abstractmethod

# Interfaces


class BaseReportRepository(ABC):
    @abstractmethod
    async def save_report(self, name: str, report: dict) -> str:
        pass

    @abstractmethod
    async def get_report(self, name: str) -> dict | None:
        pass

    @abstractmethod
    async def save_curves(self, directory: str, tables: list[tuple[str, list[tuple[str, ...]]]]) -> list[str]:
        pass

    @abstractmethod
    async def list_reports(self) -> list[str]:
        pass
