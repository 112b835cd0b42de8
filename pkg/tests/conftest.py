"""
Pytest configuration and shared fixtures.
"""

import os
import tempfile

import pytest

from src.models.bounds import OracleConfig
from src.models.channel import AwgnChannel
from src.models.numerics import QuadratureConfig, SearchConfig
from src.models.prior import (
    FinitePMFPrior,
    GaussianPrior,
    MixedPrior,
    UniformPrior,
    bernoulli_prior,
    two_box_prior,
    weighted_gaussian_prior,
)


@pytest.fixture
def quad():
    """Quadrature settings with slightly looser tolerances for fast tests."""
    return QuadratureConfig(abs_tol=1e-8, rel_tol=1e-8)


@pytest.fixture
def search():
    return SearchConfig(coarse_points=48, refine_tol=1e-6)


@pytest.fixture
def unit_channel():
    return AwgnChannel(eta=1.0)


@pytest.fixture
def gaussian():
    return GaussianPrior(mean=0.0, variance=1.0)


@pytest.fixture
def uniform():
    return UniformPrior(a=0.0, b=1.0)


@pytest.fixture
def two_box():
    """Unit density on [0, 1/2] and [1, 3/2]."""
    return two_box_prior()


@pytest.fixture
def bernoulli_03():
    return bernoulli_prior(0.3)


@pytest.fixture
def bernoulli_05():
    return bernoulli_prior(0.5)


@pytest.fixture
def mixture_mu1():
    """0.5 N(-1, 1) + 0.5 N(1, 1)."""
    return weighted_gaussian_prior(0.5, 1.0)


@pytest.fixture
def mixture_mu3():
    return weighted_gaussian_prior(0.5, 3.0)


@pytest.fixture
def mixed_uniform_atom():
    """Half Uniform(0, 1), half an atom at 2."""
    return MixedPrior(
        alpha=0.5, continuous=UniformPrior(), discrete=FinitePMFPrior(atoms=((2.0, 1.0),))
    )


@pytest.fixture
def mc_config():
    return OracleConfig(method="monte_carlo", samples=40_000, seed=12345, chunks=8)


@pytest.fixture
def experiment_file():
    """Write an experiment file and remove it afterwards."""
    paths = []

    def _write(content: str, suffix: str = ".yaml") -> str:
        with tempfile.NamedTemporaryFile(mode="w", suffix=suffix, delete=False) as f:
            f.write(content)
            paths.append(f.name)
            return f.name

    yield _write
    for path in paths:
        os.unlink(path)
