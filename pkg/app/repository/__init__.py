# This file makes the repository directory a Python package

from .checkpoint_repository import CheckpointRepository
from .dataset_repository import DatasetRepository
from .report_repository import ReportRepository

__all__ = [
    'CheckpointRepository',
    'DatasetRepository',
    'ReportRepository'
]
