"""
Channel Service - AWGN likelihood, sampling and the binary test closed form
"""

import logging
import math
from typing import Union

import numpy as np

from src.core.exceptions import ContractError
from src.core.numerics import normal_pdf, q_function
from src.models.channel import AwgnChannel

logger = logging.getLogger(__name__)

SeedStream = Union[np.random.Generator, np.random.SeedSequence, int]


def likelihood(ch: AwgnChannel, y: float, x: float) -> float:
    """Density of Y = y given X = x."""
    return normal_pdf((y - x) / ch.sigma) / ch.sigma


def as_generator(stream: SeedStream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


def sample(ch: AwgnChannel, x, stream: SeedStream):
    """x + sqrt(eta) * z; x may be a scalar or an array."""
    rng = as_generator(stream)
    x_arr = np.asarray(x, dtype=float)
    y = x_arr + ch.sigma * rng.standard_normal(x_arr.shape)
    return float(y) if y.ndim == 0 else y


def binary_error_closed_form(ch: AwgnChannel, t: float, prior0: float) -> float:
    """
    Minimum Bayes error between N(0, eta) and N(t, eta) with priors (prior0, 1 - prior0).

    Raises:
        ContractError: If t <= 0 or prior0 is outside [0, 1]
    """
    if not t > 0:
        raise ContractError(f"separation must be positive, got {t}")
    if not 0.0 <= prior0 <= 1.0:
        raise ContractError(f"prior0 must lie in [0, 1], got {prior0}")
    if prior0 in (0.0, 1.0):
        return 0.0
    prior1 = 1.0 - prior0
    shift = ch.sigma / t * math.log(prior0 / prior1)
    center = t / (2.0 * ch.sigma)
    return prior0 * q_function(center + shift) + prior1 * q_function(center - shift)
