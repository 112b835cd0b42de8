"""
Tests for M-ary MAP detection and the integrated max-joint.
"""

import math

import pytest

from src.core.exceptions import ContractError
from src.core.numerics import integrate_1d, normal_cdf, q_function
from src.models.bounds import HypothesisSpec
from src.models.channel import AwgnChannel
from src.services import detect_service
from src.services.channel_service import binary_error_closed_form, likelihood


@pytest.mark.unit
class TestBayesError:
    """Test the MAP error probability of shifted Gaussian hypotheses."""

    def test_binary_equal_priors(self, unit_channel):
        spec = HypothesisSpec.equispaced(2.0, (0.5, 0.5))
        assert detect_service.bayes_error(unit_channel, spec) == pytest.approx(
            q_function(1.0), abs=1e-6
        )

    def test_binary_matches_closed_form(self):
        ch = AwgnChannel(eta=0.5)
        spec = HypothesisSpec.equispaced(1.0, (0.3, 0.7))
        closed = binary_error_closed_form(ch, 1.0, 0.3)
        assert detect_service.bayes_error(ch, spec) == pytest.approx(closed, abs=1e-6)

    def test_binary_matches_min_integrand(self):
        ch = AwgnChannel(eta=0.5)
        oracle = integrate_1d(
            lambda y: min(0.3 * likelihood(ch, y, 0.0), 0.7 * likelihood(ch, y, 1.0)),
            -10.0,
            11.0,
            breakpoints=[0.5 + 0.5 * math.log(0.3 / 0.7)],
        )
        assert binary_error_closed_form(ch, 1.0, 0.3) == pytest.approx(oracle, abs=1e-6)

    def test_ternary_equal_priors(self):
        ch = AwgnChannel(eta=0.25)
        spec = HypothesisSpec.equispaced(1.0, (1 / 3, 1 / 3, 1 - 2 / 3))
        # Inner hypothesis errs on both sides, the outer two on one side each
        expected = 4.0 / 3.0 * q_function(1.0)
        assert detect_service.bayes_error(ch, spec) == pytest.approx(expected, abs=1e-6)

    def test_degenerate_prior(self, unit_channel):
        spec = HypothesisSpec.equispaced(0.5, (0.0, 1.0, 0.0))
        assert detect_service.bayes_error(unit_channel, spec) == pytest.approx(0.0, abs=1e-9)

    def test_clamped_below_chance(self):
        ch = AwgnChannel(eta=1e6)
        spec = HypothesisSpec.equispaced(1e-3, (0.2, 0.3, 0.5))
        error = detect_service.bayes_error(ch, spec)
        assert 0.0 <= error <= 0.5

    def test_anchor_invariance(self, unit_channel):
        a = HypothesisSpec.equispaced(1.5, (0.25, 0.75))
        b = HypothesisSpec.equispaced(1.5, (0.25, 0.75), anchor=-4.0)
        assert detect_service.bayes_error(unit_channel, a) == pytest.approx(
            detect_service.bayes_error(unit_channel, b), abs=1e-9
        )

    @pytest.mark.parametrize(
        "offsets,priors",
        [
            ((0.0,), (1.0,)),
            ((0.0, 1.0), (0.5, 0.4)),
            ((0.0, 1.0, 3.0), (0.3, 0.3, 0.4)),
            ((1.0, 0.0), (0.5, 0.5)),
        ],
    )
    def test_invalid_specs(self, offsets, priors):
        with pytest.raises(ValueError):
            HypothesisSpec(offsets=offsets, priors=priors)


@pytest.mark.unit
class TestEnvelope:
    """Test the closed-form MAP correct mass."""

    def test_binary_agrees_with_envelope(self):
        mass, kinks = detect_service.bayes_error_envelope([0.3, 0.7], [0.0, 1.2], 0.8)
        direct = detect_service.binary_correct_mass(0.3, 0.7, 1.2, math.sqrt(0.8))
        assert mass == pytest.approx(direct, abs=1e-14)
        assert len(kinks) == 1

    def test_zero_weight_never_wins(self):
        mass, kinks = detect_service.bayes_error_envelope([0.0, 1.0, 0.0], [0.0, 1.0, 2.0], 1.0)
        assert mass == pytest.approx(1.0)
        assert kinks == ()

    def test_dominated_hypothesis_skipped(self):
        # The middle line never reaches the envelope
        mass, kinks = detect_service.bayes_error_envelope([0.5, 1e-9, 0.5], [0.0, 1.0, 2.0], 1.0)
        assert len(kinks) == 1
        assert mass == pytest.approx(normal_cdf(1.0), abs=1e-8)

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            detect_service.bayes_error_envelope([0.5, 0.5], [0.0], 1.0)


@pytest.mark.unit
class TestIntegratedMaxJoint:
    """Test M - h_M(t) for each prior variant."""

    def test_gaussian_closed_form(self, gaussian, unit_channel, quad):
        value = detect_service.integrated_max_joint(gaussian, unit_channel, 1.0, 2, quad)
        assert value == pytest.approx(2.0 - 2.0 * q_function(math.sqrt(0.5)), abs=1e-4)

    @pytest.mark.parametrize("M", [2, 3])
    def test_disjoint_supports(self, uniform, unit_channel, quad, M):
        value = detect_service.integrated_max_joint(uniform, unit_channel, 100.0, M, quad)
        assert value == pytest.approx(float(M), abs=1e-3)

    def test_bernoulli_generic_offset(self, bernoulli_03, unit_channel):
        value = detect_service.integrated_max_joint(bernoulli_03, unit_channel, 0.37, 2)
        assert value == pytest.approx(2.0, abs=1e-9)

    def test_bernoulli_at_critical_offset(self, bernoulli_05, unit_channel):
        value = detect_service.integrated_max_joint(bernoulli_05, unit_channel, 1.0, 2)
        assert value == pytest.approx(1.0 + normal_cdf(0.5), abs=1e-12)

    def test_within_range(self, mixed_uniform_atom, unit_channel, quad):
        for t in (0.05, 0.5, 1.5, 2.0):
            value = detect_service.integrated_max_joint(
                mixed_uniform_atom, unit_channel, t, 3, quad
            )
            assert 1.0 <= value <= 3.0

    def test_group_shifted_atoms(self, bernoulli_05):
        groups = detect_service.group_shifted_atoms(bernoulli_05, 1.0, 2)
        assert groups == [[0.0, 0.5], [0.5, 0.5], [0.5, 0.0]]

    @pytest.mark.parametrize("t,M", [(0.0, 2), (-1.0, 2), (1.0, 1)])
    def test_bad_arguments(self, gaussian, unit_channel, t, M):
        with pytest.raises(ContractError):
            detect_service.integrated_max_joint(gaussian, unit_channel, t, M)
