"""
Tests for prior models and the prior service.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import RegularityError, UnsupportedOperationError
from src.models.prior import (
    FinitePMFPrior,
    GaussianMixturePrior,
    GaussianPrior,
    MixedPrior,
    PiecewiseUniformPrior,
    ProductPrior,
    UniformPrior,
    parse_prior,
    weighted_gaussian_prior,
)
from src.services import prior_service, zz_service


@pytest.mark.unit
class TestPriorValidation:
    """Test schema validation of prior records."""

    def test_gaussian_defaults(self):
        prior = parse_prior({"type": "gaussian"})
        assert isinstance(prior, GaussianPrior)
        assert prior.mean_variance() == (0.0, 1.0)

    def test_bernoulli_shorthand(self):
        prior = parse_prior({"type": "bernoulli", "p": 0.25})
        assert isinstance(prior, FinitePMFPrior)
        assert prior.atoms == ((0.0, 0.75), (1.0, 0.25))

    def test_weighted_gaussian_shorthand(self):
        prior = parse_prior({"type": "weighted_gaussian", "omega": 0.2, "mu": 1.5})
        assert prior == weighted_gaussian_prior(0.2, 1.5)

    def test_nested_mixed_shorthand(self):
        prior = parse_prior(
            {
                "type": "mixed",
                "alpha": 0.5,
                "continuous": {"type": "uniform"},
                "discrete": {"type": "bernoulli", "p": 0.5},
            }
        )
        assert isinstance(prior, MixedPrior)
        assert prior.discrete.atoms == ((0.0, 0.5), (1.0, 0.5))

    def test_product(self):
        prior = parse_prior({"type": "product", "components": [{"type": "gaussian"}] * 3})
        assert isinstance(prior, ProductPrior)
        assert prior.dimension == 3

    @pytest.mark.parametrize(
        "record",
        [
            {"type": "gaussian", "variance": 0.0},
            {"type": "uniform", "a": 1.0, "b": 1.0},
            {"type": "pmf", "atoms": [[0.0, 0.5], [1.0, 0.4]]},
            {"type": "pmf", "atoms": [[0.0, 0.5], [0.0, 0.5]]},
            {"type": "gaussian_mixture", "weights": [0.5, 0.5], "means": [0.0], "variances": [1.0]},
            {"type": "piecewise_uniform", "intervals": [[0, 1], [0.5, 1.5]], "heights": [0.5, 0.5]},
            {"type": "cauchy"},
        ],
    )
    def test_invalid_records_rejected(self, record):
        with pytest.raises(ValidationError):
            parse_prior(record)

    def test_pmf_atoms_sorted(self):
        prior = FinitePMFPrior(atoms=((3.0, 0.5), (-1.0, 0.5)))
        assert [loc for loc, _ in prior.atoms] == [-1.0, 3.0]

    def test_priors_are_hashable(self, gaussian, two_box):
        assert len({gaussian, two_box, GaussianPrior()}) == 2

    @pytest.mark.parametrize("alpha,bounded", [(0.0, True), (0.5, False), (1.0, False)])
    def test_mixed_boundedness_follows_mass(self, alpha, bounded, bernoulli_05):
        prior = MixedPrior(alpha=alpha, continuous=GaussianPrior(), discrete=bernoulli_05)
        assert prior.is_bounded is bounded

    def test_atoms_only_mixed_grid_stops_at_width(self, bernoulli_05):
        prior = MixedPrior(alpha=0.0, continuous=GaussianPrior(), discrete=bernoulli_05)
        assert zz_service.default_grid(prior, 1.0).t_max == pytest.approx(1.0)


@pytest.mark.unit
class TestPriorMoments:
    """Test means and variances of each variant."""

    def test_uniform(self, uniform):
        mean, var = uniform.mean_variance()
        assert mean == pytest.approx(0.5)
        assert var == pytest.approx(1 / 12)

    def test_two_box(self, two_box):
        mean, var = two_box.mean_variance()
        assert mean == pytest.approx(0.75)
        assert var == pytest.approx(1 / 48 + 0.25)

    def test_weighted_gaussian(self):
        prior = weighted_gaussian_prior(0.5, 1.0)
        assert prior.mean_variance() == pytest.approx((0.0, 2.0))

    def test_mixed(self, mixed_uniform_atom):
        mean, var = mixed_uniform_atom.mean_variance()
        assert mean == pytest.approx(1.25)
        assert var == pytest.approx(0.5 * (1 / 12 + 0.75**2) + 0.5 * 0.75**2)

    def test_product_variance_sums(self, gaussian, uniform):
        prior = ProductPrior(components=(gaussian, uniform))
        assert prior_service.variance(prior) == pytest.approx(1 + 1 / 12)

    @pytest.mark.parametrize(
        "prior",
        [
            GaussianPrior(mean=1.0, variance=2.0),
            GaussianMixturePrior(weights=(0.3, 0.7), means=(-1.0, 2.0), variances=(0.5, 1.5)),
            PiecewiseUniformPrior(intervals=((0.0, 0.5), (1.0, 1.5)), heights=(1.0, 1.0)),
        ],
    )
    def test_sample_moments(self, prior):
        rng = np.random.default_rng(7)
        draws = prior.sample(rng, 200_000)
        mean, var = prior.mean_variance()
        assert draws.mean() == pytest.approx(mean, abs=0.02)
        assert draws.var() == pytest.approx(var, rel=0.02)


@pytest.mark.unit
class TestPriorEvaluation:
    """Test density evaluation and atom extraction."""

    def test_density_scaled_by_alpha(self, mixed_uniform_atom):
        assert prior_service.density(mixed_uniform_atom, 0.5) == pytest.approx(0.5)
        assert prior_service.density(mixed_uniform_atom, 2.0) == 0.0

    def test_pmf_has_no_density(self, bernoulli_03):
        with pytest.raises(UnsupportedOperationError):
            prior_service.density(bernoulli_03, 0.0)

    def test_atoms_scaled(self, mixed_uniform_atom, bernoulli_03):
        assert prior_service.atoms(mixed_uniform_atom) == [(2.0, 0.5)]
        locations, masses = zip(*prior_service.atoms(bernoulli_03))
        assert locations == (0.0, 1.0)
        assert masses == pytest.approx((0.7, 0.3))

    def test_array_density_matches_scalar(self, mixture_mu1, two_box):
        xs = np.linspace(-3.0, 3.0, 31)
        for prior in (mixture_mu1, two_box):
            expected = [prior.pdf(float(x)) for x in xs]
            assert prior_service.continuous_pdf_array(prior, xs) == pytest.approx(expected)

    def test_log_pdf_far_tail(self, gaussian):
        log_f = prior_service.gaussian_log_pdf_array(gaussian, np.array([60.0]))[0]
        assert log_f == pytest.approx(-1800.0 - 0.5 * math.log(2 * math.pi))

    def test_cdf(self, two_box, mixture_mu1):
        assert two_box.cdf(0.75) == pytest.approx(0.5)
        assert mixture_mu1.cdf(0.0) == pytest.approx(0.5)


@pytest.mark.unit
class TestInformationFunctionals:
    """Test Fisher information and differential entropy."""

    def test_gaussian_fisher(self):
        assert prior_service.fisher_information(GaussianPrior(variance=4.0)) == 0.25

    def test_degenerate_mixture_fisher(self, quad):
        prior = weighted_gaussian_prior(0.5, 0.0)
        assert prior_service.fisher_information(prior, quad) == pytest.approx(1.0, abs=1e-6)

    def test_separated_mixture_fisher_below_component(self, mixture_mu1, quad):
        assert prior_service.fisher_information(mixture_mu1, quad) < 1.0

    def test_box_fisher_rejected(self, uniform):
        with pytest.raises(RegularityError):
            prior_service.fisher_information(uniform)

    def test_pmf_fisher_rejected(self, bernoulli_05):
        with pytest.raises(UnsupportedOperationError):
            prior_service.fisher_information(bernoulli_05)

    @pytest.mark.parametrize(
        "prior,expected",
        [
            (GaussianPrior(variance=2.0), 0.5 * math.log(2 * math.pi * math.e * 2.0)),
            (UniformPrior(a=0.0, b=3.0), math.log(3.0)),
            (PiecewiseUniformPrior(intervals=((0.0, 0.5), (1.0, 1.5)), heights=(1.0, 1.0)), 0.0),
            (weighted_gaussian_prior(0.5, 0.0), 0.5 * math.log(2 * math.pi * math.e)),
        ],
    )
    def test_entropy(self, prior, expected, quad):
        assert prior_service.differential_entropy(prior, quad) == pytest.approx(expected, abs=1e-6)

    def test_entropy_undefined_with_atoms(self, mixed_uniform_atom, bernoulli_03):
        for prior in (mixed_uniform_atom, bernoulli_03):
            with pytest.raises(UnsupportedOperationError):
                prior_service.differential_entropy(prior)

    def test_mixture_decomposition(self, mixed_uniform_atom, gaussian, bernoulli_05):
        assert prior_service.mixture_decomposition(mixed_uniform_atom) == (0.5, 1)
        assert prior_service.mixture_decomposition(
            ProductPrior(components=(gaussian, gaussian))
        ) == (1.0, 2)
        with pytest.raises(UnsupportedOperationError):
            prior_service.mixture_decomposition(ProductPrior(components=(gaussian, bernoulli_05)))
