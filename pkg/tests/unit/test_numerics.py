"""
Tests for the numerical primitives.
"""

import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.curves import integrate_curve, offset_ratios, single_point_sup
from src.core.exceptions import ContractError, ConvergenceError, DomainError
from src.core.numerics import (
    build_grid,
    gaussian_mass,
    golden_section_max,
    integrate_1d,
    maximize_1d,
    q_function,
    suffix_max,
)
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig

finite_t = st.floats(min_value=-30, max_value=30, allow_nan=False)
curve_values = st.lists(
    st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=1, max_size=40
)


def as_samples(values):
    return [(float(i + 1), v) for i, v in enumerate(values)]


@pytest.mark.unit
class TestQFunction:
    """Test the normal tail function."""

    def test_reference_values(self):
        assert q_function(0.0) == 0.5
        assert q_function(1.0) == pytest.approx(0.158655, abs=1e-6)

    def test_complement(self):
        assert q_function(-2.3) + q_function(2.3) == pytest.approx(1.0, abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            q_function(math.inf)
        with pytest.raises(DomainError):
            q_function(math.nan)

    @given(finite_t, finite_t)
    def test_strictly_decreasing(self, a, b):
        if a < b and q_function(a) > 0:
            assert q_function(a) >= q_function(b)

    @given(finite_t)
    def test_symmetry_property(self, t):
        assert q_function(-t) == pytest.approx(1.0 - q_function(t), abs=1e-12)

    def test_gaussian_mass_tails(self):
        assert gaussian_mass(8.0, 9.0) == pytest.approx(q_function(8.0) - q_function(9.0), rel=1e-9)
        assert gaussian_mass(1.0, 1.0) == 0.0


@pytest.mark.unit
class TestIntegrate1d:
    """Test the adaptive Simpson integrator."""

    def test_polynomial_exactness(self):
        assert integrate_1d(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_normal_density_normalization(self):
        value = integrate_1d(lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -8.0, 8.0)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_x_times_q(self):
        assert integrate_1d(lambda x: x * q_function(x), 0.0, 40.0) == pytest.approx(0.25, abs=1e-6)

    def test_breakpoints_handle_kinks(self):
        value = integrate_1d(lambda x: abs(x - 0.3), 0.0, 1.0, breakpoints=[0.3])
        assert value == pytest.approx(0.3**2 / 2 + 0.7**2 / 2, abs=1e-12)

    def test_linearity(self):
        cfg = QuadratureConfig()
        f = lambda x: math.sin(3 * x)  # noqa: E731
        g = lambda x: math.exp(-x)  # noqa: E731
        both = integrate_1d(lambda x: f(x) + g(x), 0.0, 2.0, cfg)
        apart = integrate_1d(f, 0.0, 2.0, cfg) + integrate_1d(g, 0.0, 2.0, cfg)
        assert abs(both - apart) <= 3 * cfg.abs_tol

    def test_empty_interval_rejected(self):
        with pytest.raises(ContractError):
            integrate_1d(lambda x: x, 1.0, 1.0)

    def test_budget_exhaustion_carries_partial(self):
        cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3, initial_panels=1)
        with pytest.raises(ConvergenceError) as exc:
            integrate_1d(lambda x: math.sin(50 * x), 0.0, 3.0, cfg)
        assert math.isfinite(exc.value.partial_estimate)

    def test_depth_capped_panels_logged(self, caplog):
        cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14, max_depth=4, initial_panels=1)
        with caplog.at_level(logging.DEBUG, logger="src.core.numerics"):
            value = integrate_1d(lambda x: 1.0 if x > 1 / 3 else 0.0, 0.0, 1.0, cfg)
        assert value == pytest.approx(2 / 3, abs=0.05)
        assert any("hit max_depth=4" in r.getMessage() for r in caplog.records)

    def test_converged_integral_logs_no_cap(self, caplog):
        with caplog.at_level(logging.DEBUG, logger="src.core.numerics"):
            integrate_1d(lambda x: x * x, 0.0, 1.0)
        assert not any("max_depth" in r.getMessage() for r in caplog.records)


@pytest.mark.unit
class TestSuffixMax:
    """Test the valley-filling transform on samples."""

    def test_example(self):
        samples = [(1, 1.0), (2, 0.5), (3, 0.8), (4, 0.2)]
        assert suffix_max(samples) == [(1, 1.0), (2, 0.8), (3, 0.8), (4, 0.2)]

    def test_single_backfill(self):
        assert suffix_max([(1, 0.0), (2, 1.0)]) == [(1, 1.0), (2, 1.0)]

    def test_unsorted_rejected(self):
        with pytest.raises(ContractError):
            suffix_max([(2, 0.1), (1, 0.2)])

    @given(curve_values)
    def test_idempotent(self, values):
        once = suffix_max(as_samples(values))
        assert suffix_max(once) == once

    @given(curve_values)
    def test_dominates_and_non_increasing(self, values):
        filled = [v for _, v in suffix_max(as_samples(values))]
        assert all(f >= v for f, v in zip(filled, values))
        assert all(a >= b for a, b in zip(filled, filled[1:]))

    @given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=30))
    def test_non_increasing_input_unchanged(self, values):
        ordered = sorted(values, reverse=True)
        assert [v for _, v in suffix_max(as_samples(ordered))] == ordered


@pytest.mark.unit
class TestMaximize:
    """Test scan-and-refine maximization."""

    def test_t_squared_q(self):
        t, value = maximize_1d(lambda t: t * t * q_function(t), 1e-9, 10.0)
        assert t == pytest.approx(1.19, abs=1e-2)
        assert value == pytest.approx(0.1655, abs=1e-3)

    def test_quadratic_vertex(self):
        t, value = maximize_1d(lambda t: -((t - 3.0) ** 2), 0.0, 10.0)
        assert t == pytest.approx(3.0, abs=1e-6)
        assert value == pytest.approx(0.0, abs=1e-10)

    def test_constant(self):
        assert maximize_1d(lambda t: 2.5, 0.0, 1.0)[1] == 2.5

    def test_dominates_dense_scan(self):
        f = lambda t: math.sin(t) * math.exp(-0.1 * t)  # noqa: E731
        cfg = SearchConfig()
        _, best = maximize_1d(f, 0.0, 10.0, cfg)
        scan = np.linspace(0.0, 10.0, 1000)
        assert best >= max(f(float(p)) for p in scan) - cfg.refine_tol

    def test_golden_section(self):
        x, fx = golden_section_max(lambda x: -abs(x - 0.7), 0.0, 1.0, 1e-10)
        assert x == pytest.approx(0.7, abs=1e-8)


@pytest.mark.unit
class TestGrids:
    """Test t-grid construction."""

    def test_points_increasing_and_in_range(self):
        grid = GridSpec(t_max=5.0, n_points=64, extra_atoms=(1.0, 2.5))
        points = build_grid(grid)
        assert np.all(np.diff(points) > 0)
        assert points[0] > 0 and points[-1] == pytest.approx(5.0)
        assert 1.0 in points and 2.5 in points

    def test_linear_spacing(self):
        points = build_grid(GridSpec(t_max=1.0, n_points=10, spacing="linear"))
        assert points.size == 10
        assert np.allclose(np.diff(points), 0.1)

    def test_atoms_deduplicated(self):
        assert GridSpec(t_max=2.0, extra_atoms=(1.0, 1.0, 0.5)).extra_atoms == (0.5, 1.0)

    def test_atom_outside_range_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(t_max=1.0, extra_atoms=(2.0,))

    def test_with_atoms_keeps_those_in_range(self):
        grid = GridSpec(t_max=2.0, extra_atoms=(1.0,))
        assert grid.with_atoms([0.5, 3.0, 0.0]).extra_atoms == (0.5, 1.0)
        assert grid.with_atoms([1.0]) is grid


@pytest.mark.unit
class TestCurves:
    """Test curve integration and offset enumeration."""

    def test_plain_integral_of_linear_curve(self):
        points = np.linspace(0.01, 1.0, 100)
        value = integrate_curve(points.tolist(), (1.0 - points).tolist(), valley=False)
        # Holding g(0.01) on [0, 0.01] adds a tiny sliver
        assert value == pytest.approx(1 / 12, abs=1e-4)

    def test_valley_at_least_plain(self):
        points = [0.5, 1.0, 1.5, 2.0]
        values = [0.9, 0.1, 0.6, 0.0]
        assert integrate_curve(points, values) >= integrate_curve(points, values, valley=False)

    def test_spikes_only_count_when_filled(self):
        points = [0.5, 1.0, 1.5]
        values = [0.0, 0.0, 0.0]
        spikes = [(1.0, 0.5)]
        assert integrate_curve(points, values, spikes, valley=False) == 0.0
        # Filled value 0.5 on (0, 1]: integral of t/4 = 1/8
        assert integrate_curve(points, values, spikes) == pytest.approx(0.125, abs=1e-15)

    def test_convex_curve_chords_corrected(self):
        points = np.geomspace(1e-3, 20.0, 200).tolist()
        values = [2.0 * q_function(t / 2.0) for t in points]
        # integral of t Q(t/2) over (0, inf) is 1; chords alone overshoot by about 1e-3
        assert integrate_curve(points, values, valley=False) == pytest.approx(1.0, abs=5e-5)
        assert integrate_curve(points, values) == pytest.approx(1.0, abs=5e-5)

    def test_piecewise_linear_curve_exact_across_kink(self):
        points = [i / 100 for i in range(1, 101)]
        values = [min(1.0, 2.0 * (1.0 - t)) for t in points]
        # 1/16 on [0, 1/2] plus 1/12 on [1/2, 1]
        assert integrate_curve(points, values, valley=False) == pytest.approx(7 / 48, abs=1e-12)
        assert integrate_curve(points, values) == pytest.approx(7 / 48, abs=1e-12)

    def test_spike_inside_segment_fills_to_its_location(self):
        spikes = [(1.0, 0.5)]
        assert integrate_curve([0.5, 1.5], [0.0, 0.0], spikes, valley=False) == 0.0
        assert integrate_curve([0.5, 1.5], [0.0, 0.0], spikes) == pytest.approx(0.125, abs=1e-15)

    def test_single_point_sup_prefers_spike(self):
        t, value = single_point_sup([0.5, 1.0], [0.1, 0.0], [(1.0, 0.5)])
        assert (t, value) == (1.0, 0.25)

    @pytest.mark.parametrize(
        "locations,M,expected",
        [
            ((0.0, 1.0), 2, [1.0]),
            ((0.0, 1.0), 4, [1 / 3, 1 / 2, 1.0]),
            ((0.0, 0.4, 1.0), 2, [0.4, 0.6, 1.0]),
            ((5.0,), 3, []),
        ],
    )
    def test_offset_ratios(self, locations, M, expected):
        assert offset_ratios(locations, M) == pytest.approx(expected)

    @settings(max_examples=50)
    @given(curve_values)
    def test_valley_dominance_property(self, values):
        values = [abs(v) / 5 for v in values]
        points = [0.1 * (i + 1) for i in range(len(values))]
        plain = integrate_curve(points, values, valley=False)
        assert integrate_curve(points, values) >= plain - 1e-15
