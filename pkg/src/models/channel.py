"""
Observation model: Y = X + N with N ~ N(0, eta).
"""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class AwgnChannel(BaseModel):
    """Additive white Gaussian noise at variance eta per dimension."""

    model_config = ConfigDict(frozen=True)

    type: Literal["awgn"] = "awgn"
    eta: float = Field(..., gt=0, description="Noise variance; zero is not allowed")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.eta)
