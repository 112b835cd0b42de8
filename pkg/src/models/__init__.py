"""
Models package for zzbound.
"""

from src.models.bounds import BoundCurve, BoundReport, HypothesisSpec, OracleConfig
from src.models.channel import AwgnChannel
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig
from src.models.prior import ProductPrior, ScalarPrior, parse_prior

__all__ = [
    "AwgnChannel",
    "BoundCurve",
    "BoundReport",
    "GridSpec",
    "HypothesisSpec",
    "OracleConfig",
    "ProductPrior",
    "QuadratureConfig",
    "ScalarPrior",
    "SearchConfig",
    "parse_prior",
]
