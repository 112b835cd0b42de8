"""
Repro Service - reference tables and figure data as plot-ready CSV

Targets:
- table1: high-noise bounds of the unit uniform and the two-box prior
- fig3: Gaussian-mixture comparison of MMSE, ZZ variants, CRB and MEB
- bernoulli: high-noise bounds over the Bernoulli parameter
- gaussian_lownoise: bound-to-noise ratios at small eta with extrapolation
- example3_limits: two-box bounds as M grows, against their limits
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

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
from src.services import asymptotic_service, baseline_service, zz_service
from src.utils.csv_utils import write_csv_file

logger = logging.getLogger(__name__)

TABLE1_M = (2, 3, 4, 64)
FIG3_MU = (1.0, 1.5, 2.5, 3.0)
FIG3_OMEGA = tuple(round(0.05 * k, 2) for k in range(21))
BERNOULLI_P = tuple(round(0.1 * k, 1) for k in range(1, 10))
LOW_NOISE_ETAS = (1e-2, 1e-3, 1e-4)
EXAMPLE3_M = (2, 3, 4, 8, 16, 32, 64)

TARGETS = ("table1", "fig3", "bernoulli", "gaussian_lownoise", "example3_limits")

Table = tuple[list[str], list[dict]]


class ReproService:
    """Builds each reproduction target as (columns, rows)."""

    def __init__(
        self,
        n_points: int = 256,
        threads: int = 1,
        quad: Optional[QuadratureConfig] = None,
        search: Optional[SearchConfig] = None,
    ):
        self.n_points = n_points
        self.threads = max(1, threads)
        self.quad = quad or QuadratureConfig()
        self.search = search or SearchConfig()

    def _high_noise(self, prior, M: int):
        grid = zz_service.default_grid(prior, None, M, n_points=self.n_points)
        return asymptotic_service.high_noise_bounds(prior, M, grid, self.quad, self.search)

    def _map(self, fn: Callable, items: list) -> list:
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(fn, items))

    # ========== Targets ==========

    def table1(self) -> Table:
        priors = {
            "X1": (UniformPrior(), lambda M: asymptotic_service.uniform_references()),
            "X2": (two_box_prior(), asymptotic_service.two_box_references),
        }

        def row(item):
            name, M = item
            prior, references = priors[name]
            bounds = self._high_noise(prior, M)
            ref = references(M)
            return {
                "prior": name,
                "M": M,
                "variance": prior.mean_variance()[1],
                "v_bar": bounds.v_bar,
                "v": bounds.v,
                "v_sp": bounds.v_sp,
                "ref_variance": ref["variance"],
                "ref_v_bar": ref["v_bar"],
                "ref_v": ref["v"],
                "ref_v_sp": ref["v_sp"],
            }

        items = [(name, M) for name in priors for M in TABLE1_M]
        columns = [
            "prior", "M", "variance", "v_bar", "v", "v_sp",
            "ref_variance", "ref_v_bar", "ref_v", "ref_v_sp",
        ]
        return columns, self._map(row, items)

    def fig3(self) -> Table:
        def row(item):
            mu, omega = item
            prior = weighted_gaussian_prior(omega, mu)
            bounds = self._high_noise(prior, 2)
            return {
                "mu": mu,
                "omega": omega,
                "mmse": prior.mean_variance()[1],
                "zzb": bounds.v,
                "zzb_valley": bounds.v_bar,
                "szzb": bounds.v_sp,
                "crb": baseline_service.crb_high_noise(prior, self.quad),
                "meb": baseline_service.meb(prior, self.quad),
            }

        items = [(mu, omega) for mu in FIG3_MU for omega in FIG3_OMEGA]
        columns = ["mu", "omega", "mmse", "zzb", "zzb_valley", "szzb", "crb", "meb"]
        return columns, self._map(row, items)

    def bernoulli(self) -> Table:
        def row(p):
            prior = bernoulli_prior(p)
            bounds = self._high_noise(prior, 2)
            ref = asymptotic_service.bernoulli_references(p)
            return {
                "p": p,
                "variance": ref["variance"],
                "v_bar": bounds.v_bar,
                "v": bounds.v,
                "v_sp": bounds.v_sp,
                "ref_v_bar": ref["v_bar"],
                "ref_v_sp": ref["v_sp"],
            }

        columns = ["p", "variance", "v_bar", "v", "v_sp", "ref_v_bar", "ref_v_sp"]
        return columns, self._map(row, list(BERNOULLI_P))

    def gaussian_lownoise(self) -> Table:
        gamma = asymptotic_service.gamma_constant()
        mixed = MixedPrior(
            alpha=0.5, continuous=UniformPrior(), discrete=FinitePMFPrior(atoms=((2.0, 1.0),))
        )
        runs = [
            ("gaussian", GaussianPrior(), "zz_plain"),
            ("gaussian", GaussianPrior(), "zz_single_point"),
            ("mixed", mixed, "zz_plain"),
        ]

        def estimate(item):
            _, prior, family = item
            return asymptotic_service.low_noise_slope_estimate(
                prior, family, LOW_NOISE_ETAS, 2, self.n_points, self.quad, self.search
            )

        slopes = self._map(estimate, runs)
        rows = []
        for (name, _, family), slope in zip(runs, slopes):
            common = {"prior": name, "family": family, "target": slope.target}
            for eta, ratio in zip(slope.etas, slope.ratios):
                rows.append({**common, "kind": "measured", "eta": eta, "ratio": ratio})
            rows.append({**common, "kind": "extrapolated", "eta": 0.0, "ratio": slope.intercept})
        logger.info(f"Low-noise ratios computed (gamma = {gamma:.6g})")
        return ["prior", "family", "kind", "eta", "ratio", "target"], rows

    def example3_limits(self) -> Table:
        prior = two_box_prior()
        limits = asymptotic_service.two_box_references(None)

        def row(M):
            bounds = self._high_noise(prior, M)
            ref = asymptotic_service.two_box_references(M)
            return {
                "M": M,
                "v_bar": bounds.v_bar,
                "v": bounds.v,
                "ref_v_bar": ref["v_bar"],
                "ref_v": ref["v"],
                "limit_v_bar": limits["v_bar"],
                "limit_v": limits["v"],
            }

        columns = ["M", "v_bar", "v", "ref_v_bar", "ref_v", "limit_v_bar", "limit_v"]
        return columns, self._map(row, list(EXAMPLE3_M))

    # ========== Output ==========

    def build(self, target: str) -> Table:
        if target not in TARGETS:
            raise ValueError(f"Unknown repro target '{target}'. Choose from: {', '.join(TARGETS)}")
        logger.info(f"Building repro target {target} (n_points={self.n_points})")
        return getattr(self, target)()

    def write(self, target: str, out_dir: Path) -> Path:
        columns, rows = self.build(target)
        path = write_csv_file(out_dir / f"{target}.csv", columns, rows)
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path


def fig3_spot(rows: list[dict], mu: float, omega: float) -> dict:
    """The fig3 row for (mu, omega)."""
    for row in rows:
        if np.isclose(row["mu"], mu) and np.isclose(row["omega"], omega):
            return row
    raise KeyError(f"no fig3 row for mu={mu}, omega={omega}")
