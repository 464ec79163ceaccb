from ..repositories.memory import InMemoryReportRepository
from ..services.experiment import ExperimentService


def get_experiment_service() -> ExperimentService:
    report_repository = InMemoryReportRepository()
    experiment_service = ExperimentService(report_repository)
    return experiment_service
