"""
Services package for zzbound.
"""

from src.services.experiment_service import ExperimentService
from src.services.repro_service import ReproService

__all__ = ["ExperimentService", "ReproService"]
