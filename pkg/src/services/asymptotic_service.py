"""
Asymptotic Service - channel-free high-noise limits and low-noise slopes

High-noise quantities depend on P_X alone through
H_M(t) = integral of max_j f_X(x + j t) dx + sum_v max_j p_X(v + j t),
so nothing here touches a channel except the low-noise slope estimate.
"""

import logging
import math
import threading
from collections.abc import Sequence
from itertools import pairwise
from typing import Optional, Union

import numpy as np
from cachetools import LRUCache, cached
from scipy.optimize import brentq

from src.core.curves import integrate_curve, offset_ratios, single_point_sup
from src.core.exceptions import ContractError, UnsupportedOperationError
from src.core.numerics import build_grid, golden_section_max, maximize_1d, q_function
from src.models.bounds import (
    BoundDiagnostics,
    BoundFamily,
    HighNoiseBounds,
    HighNoiseCurve,
    LowNoiseSlope,
)
from src.models.channel import AwgnChannel
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig
from src.models.prior import BoxFamily, GaussianFamily, ProductPrior, ScalarPrior
from src.services.detect_service import group_shifted_atoms
from src.services.prior_service import (
    ContinuousPart,
    atoms,
    gaussian_log_pdf_array,
    mixture_decomposition,
    split_prior,
)

logger = logging.getLogger(__name__)

CROSSING_SCAN_POINTS = 4001
TAIL_FACTOR = 10.0
# H moves only to second order in a crossing error, since the densities agree there
DEFAULT_XTOL = QuadratureConfig().abs_tol


def critical_offsets(prior: ScalarPrior, M: int) -> list[float]:
    """Separations (x_w - x_z)/(l - k) > 0 at which shifted atoms coincide."""
    return offset_ratios((loc for loc, _ in atoms(prior)), M)


# ========== H_M ==========

def _box_H(box: BoxFamily, t: float, M: int) -> float:
    edges = sorted({e - j * t for e in box.breakpoints() for j in range(M)})
    return math.fsum(
        (b - a) * max(box.pdf(0.5 * (a + b) + j * t) for j in range(M))
        for a, b in pairwise(edges)
    )


def _gaussian_H(cont: GaussianFamily, t: float, M: int, xtol: float) -> float:
    lo, hi = cont.support()
    a, b = lo - (M - 1) * t, hi
    xs = np.linspace(a, b, CROSSING_SCAN_POINTS)
    logs = np.stack([gaussian_log_pdf_array(cont, xs + j * t) for j in range(M)])
    winner = np.argmax(logs, axis=0)

    def gap(x: float, j: int, k: int) -> float:
        return cont.log_pdf(x + j * t) - cont.log_pdf(x + k * t)

    cuts = [a]
    for i in np.flatnonzero(winner[:-1] != winner[1:]):
        j, k = int(winner[i]), int(winner[i + 1])
        left, right = float(xs[i]), float(xs[i + 1])
        if gap(left, j, k) * gap(right, j, k) < 0:
            cuts.append(brentq(gap, left, right, args=(j, k), xtol=xtol))
        else:
            cuts.append(0.5 * (left + right))
    cuts.append(b)

    total = []
    for x0, x1 in pairwise(cuts):
        mid = 0.5 * (x0 + x1)
        j = max(range(M), key=lambda m: cont.log_pdf(mid + m * t))
        total.append(cont.cdf(x1 + j * t) - cont.cdf(x0 + j * t))
    return math.fsum(total)


_H_CACHE: LRUCache = LRUCache(maxsize=65536)


@cached(cache=_H_CACHE, lock=threading.Lock())
def continuous_H(cont: ContinuousPart, t: float, M: int, xtol: float = DEFAULT_XTOL) -> float:
    """integral of max_j f(x + j t) dx; xtol bounds the density-crossing roots."""
    if isinstance(cont, BoxFamily):
        return _box_H(cont, t, M)
    return _gaussian_H(cont, t, M, xtol)


def discrete_H(prior: ScalarPrior, t: float, M: int) -> float:
    _, _, disc = split_prior(prior)
    if disc is None:
        return float(M)
    return math.fsum(max(w) for w in group_shifted_atoms(disc, t, M))


def high_noise_H(
    prior: ScalarPrior, t: float, M: int, cfg: Optional[QuadratureConfig] = None
) -> float:
    """H_M(t) in [1, M]; mixed priors weight both parts."""
    if not t > 0:
        raise ContractError(f"separation must be positive, got {t}")
    if M < 2:
        raise ContractError(f"need at least two hypotheses, got M={M}")
    cfg = cfg or QuadratureConfig()
    alpha, cont, disc = split_prior(prior)
    total = 0.0
    if cont is not None:
        total += alpha * continuous_H(cont, t, M, cfg.abs_tol)
    if disc is not None:
        total += (1.0 - alpha) * discrete_H(prior, t, M)
    return min(max(total, 1.0), float(M))


def _grid_H(prior: ScalarPrior, t: float, M: int, xtol: float = DEFAULT_XTOL) -> float:
    """H with the discrete part at its generic (non-aligned) value M."""
    alpha, cont, _ = split_prior(prior)
    cont_part = alpha * continuous_H(cont, t, M, xtol) if cont is not None else 0.0
    return min(max(cont_part + (1.0 - alpha) * M, 1.0), float(M))


def high_noise_curve(
    prior: ScalarPrior, M: int, grid: GridSpec, cfg: Optional[QuadratureConfig] = None
) -> HighNoiseCurve:
    cfg = cfg or QuadratureConfig()
    offsets = critical_offsets(prior, M)
    grid = grid.with_atoms(offsets)
    points = build_grid(grid)
    logger.info(f"Evaluating H_M curve: prior={prior.type}, M={M}, points={points.size}")
    H_values = tuple(_grid_H(prior, float(t), M, cfg.abs_tol) for t in points)
    spikes = tuple((t, high_noise_H(prior, t, M, cfg)) for t in offsets if t <= grid.t_max)
    return HighNoiseCurve(
        grid=grid,
        M=M,
        points=tuple(float(t) for t in points),
        H_values=H_values,
        spike_atoms=spikes,
    )


def high_noise_bounds(
    prior: ScalarPrior,
    M: int,
    grid: GridSpec,
    cfg: Optional[QuadratureConfig] = None,
    search: Optional[SearchConfig] = None,
) -> HighNoiseBounds:
    """
    High-noise limits (V_bar, V, V_sp) of the valley-filled, plain and
    single-point bounds.
    """
    cfg = cfg or QuadratureConfig()
    search = search or SearchConfig()
    curve = high_noise_curve(prior, M, grid, cfg)
    values = curve.g_values()
    spikes = tuple((t, (M - h) / (M - 1)) for t, h in curve.spike_atoms)

    v_bar = integrate_curve(curve.points, values, spikes, valley=True)
    v = integrate_curve(curve.points, values, spikes, valley=False)

    best_t, v_sp = single_point_sup(curve.points, values, spikes)
    i = int(np.argmax([t * t * g for t, g in zip(curve.points, values)]))
    left = curve.points[max(i - 1, 0)]
    right = curve.points[min(i + 1, len(curve.points) - 1)]
    if right > left:
        t_ref, v_ref = golden_section_max(
            lambda t: 0.5 * t * t * (M - _grid_H(prior, t, M, cfg.abs_tol)) / (M - 1),
            left,
            right,
            search.refine_tol,
        )
        if v_ref > v_sp:
            best_t, v_sp = t_ref, v_ref

    flagged = values[-1] > TAIL_FACTOR * cfg.abs_tol
    if flagged:
        logger.warning(
            f"High-noise curve not decayed at t_max={grid.t_max:.6g}: g={values[-1]:.3g}"
        )
    logger.info(f"High-noise bounds (M={M}): V_bar={v_bar:.12g}, V={v:.12g}, V_sp={v_sp:.12g}")
    return HighNoiseBounds(
        v_bar=max(v_bar, 0.0),
        v=max(v, 0.0),
        v_sp=max(v_sp, 0.0),
        M=M,
        diagnostics=BoundDiagnostics(
            tail_flag=flagged,
            grid_used=grid,
            argmax_delta=best_t if best_t > 0 else None,
            spike_count=len(spikes),
        ),
    )


# ========== Low-noise regime ==========

def low_noise_slope_target(prior: Union[ScalarPrior, ProductPrior]) -> float:
    """alpha * d, the limit of ZZ(eta, M=2) / eta as eta -> 0."""
    alpha, d = mixture_decomposition(prior)
    return alpha * d


_GAMMA_CACHE: LRUCache = LRUCache(maxsize=1)


@cached(cache=_GAMMA_CACHE, lock=threading.Lock())
def gamma_constant() -> float:
    """4 * sup over t > 0 of t^2 Q(t)."""
    _, best = maximize_1d(
        lambda t: t * t * q_function(t),
        1e-6,
        10.0,
        SearchConfig(coarse_points=1000, refine_tol=1e-12),
    )
    return 4.0 * best


def low_noise_slope_estimate(
    prior: ScalarPrior,
    family: BoundFamily = "zz_plain",
    etas: Sequence[float] = (1e-2, 1e-3, 1e-4),
    M: int = 2,
    n_points: int = 256,
    cfg: Optional[QuadratureConfig] = None,
    search: Optional[SearchConfig] = None,
) -> LowNoiseSlope:
    """
    Bound(eta)/eta at each eta, extrapolated to eta -> 0 by a least-squares line.
    """
    from src.services import zz_service

    if isinstance(prior, ProductPrior):
        raise UnsupportedOperationError("slope estimates run per scalar component")
    ratios = []
    for eta in etas:
        ch = AwgnChannel(eta=eta)
        grid = zz_service.default_grid(prior, eta, M, n_points=n_points)
        report = zz_service.scalar_bound(prior, ch, M, family, grid, cfg, search)
        ratios.append(report.value / eta)
        logger.info(f"{family} slope at eta={eta:g}: {ratios[-1]:.6g}")
    if len(etas) >= 2:
        _, intercept = np.polyfit(np.asarray(etas), np.asarray(ratios), 1)
    else:
        intercept = ratios[0]
    target = low_noise_slope_target(prior)
    if family == "zz_single_point":
        target *= gamma_constant()
    return LowNoiseSlope(
        family=family,
        M=M,
        etas=tuple(etas),
        ratios=tuple(ratios),
        intercept=float(intercept),
        target=target,
    )


# ========== Closed-form references ==========

def uniform_references() -> dict[str, float]:
    """Uniform(0, 1): the same for every M."""
    return {"variance": 1 / 12, "v_bar": 1 / 12, "v": 1 / 12, "v_sp": 2 / 27}


def two_box_references(M: Optional[int] = None) -> dict[str, float]:
    """Unit density on [0, 1/2] and [1, 3/2]; M=None gives the M -> infinity limits."""
    if M is None:
        return {"variance": 13 / 48, "v_bar": 5 / 24, "v": 71 / 384, "v_sp": 1 / 4}
    if M == 2:
        v_bar = 77 / 384
    else:
        v_bar = (20 * M * M - 43 * M + 26) / (96 * (M - 1) ** 2)
    v = (71 * M**3 - 232 * M**2 + 251 * M - 86) / (384 * (M - 1) ** 3)
    return {"variance": 13 / 48, "v_bar": v_bar, "v": v, "v_sp": 1 / 4}


def bernoulli_references(p: float) -> dict[str, float]:
    m = min(p, 1 - p)
    return {"variance": p * (1 - p), "v_bar": m / 4, "v": 0.0, "v_sp": m / 2}


def gaussian_references(eta: float, variance: float = 1.0) -> dict[str, float]:
    """Gaussian prior under AWGN: both ZZ variants are tight, SZZ loses gamma."""
    zz = variance * eta / (variance + eta)
    return {"mmse": zz, "zz": zz, "szz": gamma_constant() * zz}
