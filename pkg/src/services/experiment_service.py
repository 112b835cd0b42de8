"""
Experiment Service - config-driven bound evaluation, sweeps and the self-test

Sweep points are dispatched to a thread pool; rows come back in sweep order.
"""

import logging
import math
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

import numpy as np

from src.core.curves import integrate_curve
from src.core.numerics import integrate_1d, q_function, suffix_max
from src.models.bounds import OracleConfig
from src.models.channel import AwgnChannel
from src.models.experiment import ZZ_FAMILY_NAMES, ExperimentConfig, ResultRow
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig
from src.models.prior import (
    GaussianPrior,
    ProductPrior,
    ScalarPrior,
    UniformPrior,
    bernoulli_prior,
)
from src.services import asymptotic_service, baseline_service, zz_service
from src.services.channel_service import binary_error_closed_form

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ("sweep_value", "family", "M", "value")
TRAILING_COLUMNS = ("tail_flag", "argmax_delta", "wall_time_ms")
HIGH_NOISE_FIELDS = {"highnoise_valley": "v_bar", "highnoise_plain": "v", "highnoise_sp": "v_sp"}


class ExperimentService:
    """
    Evaluate experiment configs against the bound engine

    Args:
        quad: Default quadrature settings (per-experiment overrides merge on top)
        search: Default single-point search settings
        oracle: Default MMSE oracle settings
        n_points: Default grid size
        threads: Worker pool size for sweeps
        timing: Fill wall_time_ms (off by default so output is reproducible)
    """

    def __init__(
        self,
        quad: Optional[QuadratureConfig] = None,
        search: Optional[SearchConfig] = None,
        oracle: Optional[OracleConfig] = None,
        n_points: int = 512,
        threads: int = 1,
        timing: bool = False,
    ):
        self.quad = quad or QuadratureConfig()
        self.search = search or SearchConfig()
        self.oracle = oracle or OracleConfig()
        self.n_points = n_points
        self.threads = max(1, threads)
        self.timing = timing

    # ========== Settings ==========

    def _quad(self, config: ExperimentConfig) -> QuadratureConfig:
        return QuadratureConfig(**{**self.quad.model_dump(), **config.quad})

    def _search(self, config: ExperimentConfig) -> SearchConfig:
        return SearchConfig(**{**self.search.model_dump(), **config.search})

    def _oracle(self, config: ExperimentConfig) -> OracleConfig:
        merged = {**self.oracle.model_dump(exclude={"quad"}), **config.oracle}
        if config.seed is not None:
            merged["seed"] = config.seed
        return OracleConfig(**merged, quad=self._quad(config))

    def _grid(self, prior: ScalarPrior, eta: Optional[float], config: ExperimentConfig) -> GridSpec:
        overrides = config.grid
        grid = zz_service.default_grid(
            prior,
            eta,
            config.bound.M,
            n_points=overrides.n_points or self.n_points,
            spacing=overrides.spacing or "log_linear",
        )
        if overrides.t_max is None:
            return grid
        t_max = overrides.t_max
        extra = tuple(a for a in grid.extra_atoms if a <= t_max)
        if grid.spacing == "linear":
            return GridSpec(
                t_max=t_max, n_points=grid.n_points, spacing="linear", extra_atoms=extra
            )
        t_split = min(grid.t_split or 0.25 * t_max, 0.5 * t_max)
        t_min = min(grid.t_min or 1e-4 * t_split, 0.25 * t_split)
        return GridSpec(
            t_max=t_max, n_points=grid.n_points, t_split=t_split, t_min=t_min, extra_atoms=extra
        )

    # ========== Evaluation ==========

    def evaluate(self, config: ExperimentConfig, sweep_value: Optional[float] = None) -> ResultRow:
        """Compute the configured bound for one (already swept) config."""
        started = time.perf_counter()
        prior = config.prior_model()
        family = config.bound.family
        M = config.bound.M
        components = prior.components if isinstance(prior, ProductPrior) else (prior,)
        ch = config.channel
        quad = self._quad(config)

        tail_flag = False
        argmax_delta = None
        if family in ZZ_FAMILY_NAMES:
            reports = [
                zz_service.scalar_bound(
                    c,
                    ch,
                    M,
                    ZZ_FAMILY_NAMES[family],
                    self._grid(c, ch.eta, config),
                    quad,
                    self._search(config),
                )
                for c in components
            ]
            per_axis = tuple(r.value for r in reports)
            tail_flag = any(r.diagnostics.tail_flag for r in reports)
            if len(reports) == 1:
                argmax_delta = reports[0].diagnostics.argmax_delta
        elif family in HIGH_NOISE_FIELDS:
            field = HIGH_NOISE_FIELDS[family]
            results = [
                asymptotic_service.high_noise_bounds(
                    c, M, self._grid(c, None, config), quad, self._search(config)
                )
                for c in components
            ]
            per_axis = tuple(getattr(r, field) for r in results)
            tail_flag = any(r.diagnostics.tail_flag for r in results)
            if family == "highnoise_sp" and len(results) == 1:
                argmax_delta = results[0].diagnostics.argmax_delta
        elif family == "mmse":
            estimates = [
                baseline_service.mmse(c, ch, self._oracle(config), self.threads) for c in components
            ]
            per_axis = tuple(e.value for e in estimates)
            tail_flag = any(e.flagged for e in estimates)
        elif family == "variance":
            per_axis = tuple(c.mean_variance()[1] for c in components)
        else:
            # crb, crb_channel and meb are joint in the dimension, not sums
            value = self._joint_value(family, prior, ch, quad)
            per_axis = (value,)

        value = math.fsum(per_axis)
        elapsed = (time.perf_counter() - started) * 1000.0 if self.timing else None
        logger.info(f"{family} (M={M}, sweep={sweep_value}) = {value:.12g}")
        return ResultRow(
            sweep_value=sweep_value,
            family=family,
            M=M,
            value=value,
            per_axis=per_axis,
            tail_flag=tail_flag,
            argmax_delta=argmax_delta,
            wall_time_ms=elapsed,
        )

    @staticmethod
    def _joint_value(
        family: str,
        prior: Union[ScalarPrior, ProductPrior],
        ch: Optional[AwgnChannel],
        quad: QuadratureConfig,
    ) -> float:
        if family == "crb":
            return baseline_service.crb_high_noise(prior, quad)
        if family == "crb_channel":
            return baseline_service.crb_gaussian_channel(prior, ch.eta, quad)
        return baseline_service.meb(prior, quad)

    def run(self, config: ExperimentConfig) -> list[ResultRow]:
        """One row per sweep value (or a single row), in sweep order."""
        if config.sweep is None:
            return [self.evaluate(config)]
        values = config.sweep.values
        points = [config.at(v) for v in values]
        logger.info(f"Sweeping {config.sweep.parameter} over {len(values)} values")
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(self.evaluate, points, values))

    @staticmethod
    def columns(rows: list[ResultRow]) -> list[str]:
        width = max((len(r.per_axis) for r in rows), default=1)
        return [*RESULT_COLUMNS, *(f"per_axis_{i + 1}" for i in range(width)), *TRAILING_COLUMNS]

    @staticmethod
    def as_record(row: ResultRow) -> dict:
        record = row.model_dump(exclude={"per_axis"})
        record.update({f"per_axis_{i + 1}": v for i, v in enumerate(row.per_axis)})
        return record


# ========== Self-test ==========

def _check(condition: bool, detail: str) -> tuple[bool, str]:
    return bool(condition), detail


def _q_checks() -> tuple[bool, str]:
    ts = np.linspace(-6.0, 6.0, 241)
    qs = [q_function(float(t)) for t in ts]
    ok = (
        q_function(0.0) == 0.5
        and abs(q_function(1.0) - 0.158655) < 1e-6
        and all(abs(q_function(-t) + q_function(t) - 1.0) < 1e-12 for t in ts)
        and all(a > b for a, b in zip(qs, qs[1:]))
    )
    return _check(ok, "Q(0), Q(1), complement and monotonicity")


def _quadrature_checks() -> tuple[bool, str]:
    normal = integrate_1d(lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -8.0, 8.0)
    tail = integrate_1d(lambda x: x * q_function(x), 0.0, 40.0)
    return _check(
        abs(normal - 1.0) < 1e-9 and abs(tail - 0.25) < 1e-6,
        f"normalization {normal:.12g}, integral of xQ(x) {tail:.12g}",
    )


def _suffix_max_checks() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    for _ in range(50):
        ts = np.cumsum(rng.random(20) + 0.01)
        samples = list(zip(ts.tolist(), rng.random(20).tolist()))
        filled = suffix_max(samples)
        values = [v for _, v in filled]
        if suffix_max(filled) != filled:
            return _check(False, "suffix_max is not idempotent")
        if any(f < s for (_, f), (_, s) in zip(filled, samples)):
            return _check(False, "suffix_max does not dominate its input")
        if any(a < b for a, b in zip(values, values[1:])):
            return _check(False, "suffix_max output is not non-increasing")
    return _check(True, "idempotence, dominance, monotonicity on 50 random curves")


def _channel_checks() -> tuple[bool, str]:
    for t in np.linspace(0.1, 4.0, 20):
        errors = [
            binary_error_closed_form(AwgnChannel(eta=float(eta)), float(t), 0.3)
            for eta in np.geomspace(0.01, 100.0, 20)
        ]
        if any(b < a - 1e-15 for a, b in zip(errors, errors[1:])):
            return _check(False, f"binary error decreases in eta at t={t:.3g}")
    limit = binary_error_closed_form(AwgnChannel(eta=1e6), 1.0, 0.3)
    return _check(abs(limit - 0.3) < 1e-4, f"high-noise limit {limit:.6g} (expected 0.3)")


def _gaussian_checks() -> tuple[bool, str]:
    prior = GaussianPrior()
    ch = AwgnChannel(eta=1.0)
    grid = zz_service.default_grid(prior, ch.eta, 2, n_points=512)
    curve = zz_service.h_curve(prior, ch, 2, grid)
    plain = integrate_curve(curve.points, curve.values, valley=False)
    valley = integrate_curve(curve.points, curve.values, valley=True)
    return _check(
        abs(plain - 0.5) < 1e-3 and valley >= plain,
        f"plain ZZ {plain:.6g}, valley-filled {valley:.6g} (expected 0.5)",
    )


def _high_noise_checks() -> tuple[bool, str]:
    uniform = UniformPrior()
    hn = asymptotic_service.high_noise_bounds(
        uniform, 2, zz_service.default_grid(uniform, None, 2, 128)
    )
    bern = bernoulli_prior(0.3)
    hb = asymptotic_service.high_noise_bounds(bern, 2, zz_service.default_grid(bern, None, 2, 64))
    ok = (
        abs(hn.v - 1 / 12) < 1e-3
        and abs(hn.v_sp - 2 / 27) < 1e-3
        and abs(hb.v_bar - 0.075) < 1e-3
        and hb.v == 0.0
    )
    return _check(ok, f"uniform V={hn.v:.6g} V_sp={hn.v_sp:.6g}; Bernoulli V_bar={hb.v_bar:.6g}")


def _gamma_checks() -> tuple[bool, str]:
    gamma = asymptotic_service.gamma_constant()
    return _check(abs(gamma - 0.662) < 1e-3 and gamma < 1.0, f"gamma = {gamma:.6g}")


SELFTEST_CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "q_function": _q_checks,
    "quadrature": _quadrature_checks,
    "suffix_max": _suffix_max_checks,
    "channel_monotonicity": _channel_checks,
    "gaussian_closed_form": _gaussian_checks,
    "high_noise_examples": _high_noise_checks,
    "gamma_constant": _gamma_checks,
}


def selftest() -> list[tuple[str, bool, str]]:
    """Run the in-package property suite; returns (name, passed, detail) per check."""
    results = []
    for name, check in SELFTEST_CHECKS.items():
        try:
            passed, detail = check()
        except Exception as e:
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, f"selftest {name}: {'pass' if passed else 'FAIL'} ({detail})")
        results.append((name, passed, detail))
    return results
