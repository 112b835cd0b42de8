"""
Diagnostics Service - sampled checks of the tightness conditions

A failed check is certified by its witnesses; a passing check is evidence
on the sampled points only.
"""

import logging
from collections.abc import Sequence
from typing import Optional

import numpy as np

from src.core.exceptions import UnsupportedOperationError
from src.core.numerics import golden_section_max
from src.models.bounds import OracleConfig, TightnessVerdict
from src.models.channel import AwgnChannel
from src.models.prior import ScalarPrior
from src.services.baseline_service import (
    posterior_density,
    posterior_moments,
    summarize_squared_errors,
)
from src.services.channel_service import sample as channel_sample
from src.services.prior_service import split_prior

logger = logging.getLogger(__name__)

SHAPE_GRID_POINTS = 2001
SHAPE_SPAN_SDS = 8.0
MIRROR_PAIRS = 64
MIRROR_SPAN_SDS = 4.0
MAX_WITNESSES = 16


def _require_continuous(prior: ScalarPrior, check: str) -> None:
    alpha, cont, _ = split_prior(prior)
    if cont is None or alpha < 1:
        raise UnsupportedOperationError(f"{check} needs a purely continuous prior")


def _count_modes(values: np.ndarray, floor: float) -> int:
    """Local maxima above floor, plateaus counted once, endpoints included."""
    v = np.where(values > floor, values, 0.0)
    modes = 0
    rising = True
    for i in range(1, v.size):
        if v[i] > v[i - 1]:
            rising = True
        elif v[i] < v[i - 1]:
            if rising and v[i - 1] > 0:
                modes += 1
            rising = False
    if rising and v[-1] > 0:
        modes += 1
    return modes


def check_posterior_shape(
    prior: ScalarPrior, ch: AwgnChannel, y_grid: Sequence[float], tol: float = 1e-6
) -> TightnessVerdict:
    """
    Unimodality and symmetry about the mode of f(x | y) for each y.

    Symmetry is tested on mirrored pairs m +/- u within tol times the density
    at the mode m.
    """
    _require_continuous(prior, "check_posterior_shape")
    lo, hi = prior.support()
    witnesses = []
    for y in y_grid:
        _, mean, var = posterior_moments(prior, ch, y)
        sd = float(np.sqrt(var[0]))
        a = max(lo, float(mean[0]) - SHAPE_SPAN_SDS * sd)
        b = min(hi, float(mean[0]) + SHAPE_SPAN_SDS * sd)
        xs = np.linspace(a, b, SHAPE_GRID_POINTS)
        dens = posterior_density(prior, ch, y, xs)
        peak = float(dens.max())
        if _count_modes(dens, tol * peak) != 1:
            logger.debug(f"posterior at y={y:.6g} is multimodal")
            witnesses.append((float(y),))
            continue

        i = int(np.argmax(dens))
        left, right = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
        mode, top = golden_section_max(
            lambda x: float(posterior_density(prior, ch, y, [x])[0]),
            float(left),
            float(right),
            1e-10 * max(sd, 1e-12),
        )
        u = np.linspace(MIRROR_SPAN_SDS * sd / MIRROR_PAIRS, MIRROR_SPAN_SDS * sd, MIRROR_PAIRS)
        gap = np.abs(
            posterior_density(prior, ch, y, mode - u) - posterior_density(prior, ch, y, mode + u)
        )
        if np.any(gap > tol * top):
            logger.debug(f"posterior at y={y:.6g} is asymmetric about {mode:.6g}")
            witnesses.append((float(y),))

    holds = not witnesses
    logger.info(f"Posterior shape check: {len(y_grid)} y-values, holds={holds}")
    return TightnessVerdict(
        condition="cor1_unimodal_symmetric",
        holds=holds,
        witnesses=tuple(witnesses[:MAX_WITNESSES]),
        tolerance=tol,
        samples_checked=len(y_grid),
    )


def default_prop6_samples(
    prior: ScalarPrior, ch: AwgnChannel, shape: tuple[int, int, int] = (20, 20, 10)
) -> list[tuple[float, float, float]]:
    """(x, y, t) product grid over the prior's effective range."""
    lo, hi = prior.support()
    nx, ny, nt = shape
    xs = np.linspace(lo, hi, nx)
    ys = np.linspace(lo - ch.sigma, hi + ch.sigma, ny)
    ts = np.linspace((hi - lo) / nt, hi - lo, nt)
    return [(float(x), float(y), float(t)) for x in xs for y in ys for t in ts]


def check_prop6_condition(
    prior: ScalarPrior,
    ch: AwgnChannel,
    M: int = 2,
    samples: Optional[Sequence[tuple[float, float, float]]] = None,
    tol: float = 1e-9,
) -> TightnessVerdict:
    """
    At each (x, y, t): the hypotheses x + k t of largest posterior density
    must include one closest to E[X|Y=y].

    Off-axis offset components are fixed to zero.
    """
    _require_continuous(prior, "check_prop6_condition")
    samples = list(samples) if samples is not None else default_prop6_samples(prior, ch)
    ks = np.arange(M)
    witnesses = []
    for x, y, t in samples:
        candidates = x + ks * t
        dens = posterior_density(prior, ch, y, candidates)
        top = float(dens.max())
        best_density = set(np.flatnonzero(dens >= top - tol * max(top, 1.0)).tolist())
        mean = float(posterior_moments(prior, ch, y)[1][0])
        dist = np.abs(mean - candidates)
        nearest = set(np.flatnonzero(dist <= dist.min() + tol * max(dist.min(), 1.0)).tolist())
        if not best_density & nearest:
            witnesses.append((x, y, t))

    holds = not witnesses
    logger.info(f"Argmax-intersection check: {len(samples)} samples, holds={holds}")
    return TightnessVerdict(
        condition="prop6_argmax_intersection",
        holds=holds,
        witnesses=tuple(witnesses[:MAX_WITNESSES]),
        tolerance=tol,
        samples_checked=len(samples),
    )


def _clusters(values: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    """Single linkage on sorted values: split where consecutive gaps exceed cluster_tol."""
    ordered = np.sort(values)
    cuts = np.flatnonzero(np.diff(ordered) > cluster_tol) + 1
    return np.split(ordered, cuts)


def check_prop7_atoms(
    prior: ScalarPrior,
    ch: AwgnChannel,
    mc: Optional[OracleConfig] = None,
    cluster_tol: float = 0.02,
) -> TightnessVerdict:
    """
    Whether |E[X|Y] - X| is (empirically) supported on at most two points.

    Holds iff the sorted errors form at most two single-linkage clusters and
    every sample lies within cluster_tol of its cluster mean.
    """
    mc = mc or OracleConfig(method="monte_carlo")
    rng = np.random.default_rng(np.random.SeedSequence(mc.seed))
    x = prior.sample(rng, mc.samples)
    y = channel_sample(ch, x, rng)
    errors = np.abs(posterior_moments(prior, ch, y)[1] - x)
    squared = errors * errors
    estimate = summarize_squared_errors(
        float(np.sum(squared)), float(np.sum(squared * squared)), int(errors.size)
    )

    clusters = _clusters(errors, cluster_tol)
    witnesses: list[tuple[float, ...]] = []
    if len(clusters) > 2:
        witnesses = [(float(c.mean()),) for c in clusters]
    else:
        for c in clusters:
            center = c.mean()
            outliers = c[np.abs(c - center) > cluster_tol]
            witnesses.extend((float(v),) for v in outliers[:MAX_WITNESSES])

    holds = not witnesses
    logger.info(
        f"Atom-count check: {mc.samples} samples, {len(clusters)} clusters, holds={holds}, "
        f"mmse~{estimate.value:.6g} (flagged={estimate.flagged})"
    )
    return TightnessVerdict(
        condition="prop7_atom_count",
        holds=holds,
        witnesses=tuple(witnesses[:MAX_WITNESSES]),
        tolerance=cluster_tol,
        samples_checked=mc.samples,
        mmse_estimate=estimate,
    )
