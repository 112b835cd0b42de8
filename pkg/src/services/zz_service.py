"""
ZZ Service - h_M curves and the Ziv-Zakai bound family

Grid samples carry only the continuous part of h_M: for a discrete part the
shifted supports overlap only at critical offsets, so those values enter as
spikes evaluated with the full prior.
"""

import logging
import math
from typing import Optional

from src.core.curves import integrate_curve, offset_ratios
from src.core.exceptions import ContractError
from src.core.numerics import build_grid, maximize_1d
from src.models.bounds import BoundCurve, BoundDiagnostics, BoundFamily, BoundReport
from src.models.channel import AwgnChannel
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig
from src.models.prior import IQR_PER_STD, BoxFamily, MixedPrior, ProductPrior, ScalarPrior
from src.services.asymptotic_service import critical_offsets
from src.services.detect_service import continuous_joint, integrated_max_joint
from src.services.prior_service import split_prior

logger = logging.getLogger(__name__)

TAIL_FACTOR = 10.0
NOISE_HEAD_START = 1e-2
NOISE_HEAD_WIDTH = 16.0


# ========== Grids ==========

def default_grid(
    prior: ScalarPrior,
    eta: Optional[float] = None,
    M: int = 2,
    n_points: int = 512,
    spacing: str = "log_linear",
) -> GridSpec:
    """
    Prior-derived t-grid; eta=None builds the channel-free (high-noise) grid.

    Bounded priors stop at their support width, where h_M vanishes. Unbounded
    priors add 8 noise (or prior) standard deviations to the effective spread.
    """
    lo, hi = prior.support()
    width = hi - lo
    std = prior.std
    scale = std if std > 0 else (width if width > 0 else 1.0)
    if prior.is_bounded:
        t_max = width if width > 0 else 1.0
    else:
        noise = scale if eta is None else min(math.sqrt(eta), scale)
        t_max = width + 8.0 * noise

    extra = list(critical_offsets(prior, M))
    box = prior.continuous if isinstance(prior, MixedPrior) else prior
    if eta is None and isinstance(box, BoxFamily):
        extra.extend(offset_ratios(box.breakpoints(), M))
    extra = [t for t in extra if 0 < t <= t_max]

    if spacing == "linear":
        return GridSpec(t_max=t_max, n_points=n_points, spacing="linear", extra_atoms=extra)
    t_split = min(IQR_PER_STD * scale, 0.5 * t_max)
    if eta is None:
        t_min = 1e-4 * t_split
    else:
        # g falls from 1 to 2Q(8) over a few sqrt(eta) once the noise is small
        noise = math.sqrt(eta)
        t_split = min(t_split, NOISE_HEAD_WIDTH * noise)
        t_min = NOISE_HEAD_START * min(noise, t_split)
    return GridSpec(
        t_max=t_max,
        n_points=n_points,
        spacing="log_linear",
        t_split=t_split,
        t_min=t_min,
        extra_atoms=extra,
    )


# ========== Curves ==========

def h_value(
    prior: ScalarPrior, ch: AwgnChannel, t: float, M: int, cfg: Optional[QuadratureConfig] = None
) -> float:
    """h_M(t) = M - integrated_max_joint, including atom alignments at t."""
    return float(M) - integrated_max_joint(prior, ch, t, M, cfg)


def _continuous_g(
    prior: ScalarPrior, ch: AwgnChannel, t: float, M: int, cfg: QuadratureConfig
) -> float:
    alpha, cont, _ = split_prior(prior)
    if cont is None:
        return 0.0
    g = alpha * (M - continuous_joint(cont, ch, t, M, cfg)) / (M - 1)
    return min(max(g, 0.0), 1.0)


def _full_g(
    prior: ScalarPrior, ch: AwgnChannel, t: float, M: int, cfg: QuadratureConfig
) -> float:
    return min(max(h_value(prior, ch, t, M, cfg) / (M - 1), 0.0), 1.0)


def h_curve(
    prior: ScalarPrior,
    ch: AwgnChannel,
    M: int = 2,
    grid: Optional[GridSpec] = None,
    cfg: Optional[QuadratureConfig] = None,
) -> BoundCurve:
    """Sample g(t) = h_M(t)/(M-1) on the grid; critical offsets become spikes."""
    if M < 2:
        raise ContractError(f"need at least two hypotheses, got M={M}")
    cfg = cfg or QuadratureConfig()
    offsets = critical_offsets(prior, M)
    grid = (grid or default_grid(prior, ch.eta, M)).with_atoms(offsets)
    points = build_grid(grid)
    logger.info(
        f"Evaluating h_M curve: prior={prior.type}, M={M}, eta={ch.eta:g}, points={points.size}"
    )

    values = []
    for t in points:
        g = _continuous_g(prior, ch, float(t), M, cfg)
        logger.debug(f"g({t:.6g}) = {g:.12g}")
        values.append(g)

    spikes = tuple((t, _full_g(prior, ch, t, M, cfg)) for t in offsets if t <= grid.t_max)
    return BoundCurve(
        grid=grid,
        M=M,
        points=tuple(float(t) for t in points),
        values=tuple(values),
        spike_atoms=spikes,
    )


def tail_flagged(last_value: float, cfg: QuadratureConfig) -> bool:
    return last_value > TAIL_FACTOR * cfg.abs_tol


# ========== Bounds ==========

def zzb(
    prior: ScalarPrior,
    ch: AwgnChannel,
    M: int = 2,
    valley: bool = True,
    grid: Optional[GridSpec] = None,
    cfg: Optional[QuadratureConfig] = None,
) -> BoundReport:
    """Valley-filled (valley=True) or plain Ziv-Zakai bound."""
    cfg = cfg or QuadratureConfig()
    curve = h_curve(prior, ch, M, grid, cfg)
    value = integrate_curve(curve.points, curve.values, curve.spike_atoms, valley=valley)
    value = max(value, 0.0)
    flagged = tail_flagged(curve.values[-1], cfg)
    family = "zz_valley" if valley else "zz_plain"
    if flagged:
        logger.warning(
            f"{family}: g(t_max={curve.grid.t_max:.6g}) = {curve.values[-1]:.3g} "
            "exceeds the tail threshold; the grid may truncate mass"
        )
    logger.info(f"{family} (M={M}, eta={ch.eta:g}) = {value:.12g}")
    return BoundReport(
        value=value,
        family=family,
        M=M,
        per_axis=(value,),
        diagnostics=BoundDiagnostics(
            tail_flag=flagged, grid_used=curve.grid, spike_count=len(curve.spike_atoms)
        ),
    )


def _search_probes(
    prior: ScalarPrior, ch: AwgnChannel, M: int, search: SearchConfig
) -> GridSpec:
    base = default_grid(prior, ch.eta, M, n_points=search.coarse_points)
    if search.delta_max is None or search.delta_max == base.t_max:
        return base.model_copy(update={"extra_atoms": ()})
    t_split = min(base.t_split or 0.25 * search.delta_max, 0.5 * search.delta_max)
    return GridSpec(
        t_max=search.delta_max,
        n_points=search.coarse_points,
        t_split=t_split,
        t_min=min(base.t_min or 1e-4 * t_split, 0.25 * t_split),
    )


def szzb(
    prior: ScalarPrior,
    ch: AwgnChannel,
    M: int = 2,
    search: Optional[SearchConfig] = None,
    cfg: Optional[QuadratureConfig] = None,
) -> BoundReport:
    """Single-point bound: sup over delta of delta^2 h_M(delta) / (2(M-1))."""
    if M < 2:
        raise ContractError(f"need at least two hypotheses, got M={M}")
    search = search or SearchConfig()
    cfg = cfg or QuadratureConfig()
    probe_grid = _search_probes(prior, ch, M, search)
    probes = build_grid(probe_grid)
    delta_max = probe_grid.t_max

    def objective(delta: float) -> float:
        return 0.5 * delta * delta * _continuous_g(prior, ch, delta, M, cfg)

    best_delta, best = maximize_1d(objective, float(probes[0]), delta_max, search, probes=probes)
    for t in critical_offsets(prior, M):
        if t <= delta_max:
            candidate = 0.5 * t * t * _full_g(prior, ch, t, M, cfg)
            if candidate > best:
                best_delta, best = t, candidate

    logger.info(f"zz_single_point (M={M}, eta={ch.eta:g}) = {best:.12g} at delta={best_delta:.6g}")
    return BoundReport(
        value=best,
        family="zz_single_point",
        M=M,
        per_axis=(best,),
        diagnostics=BoundDiagnostics(grid_used=probe_grid, argmax_delta=best_delta),
    )


def scalar_bound(
    prior: ScalarPrior,
    ch: AwgnChannel,
    M: int,
    family: BoundFamily,
    grid: Optional[GridSpec] = None,
    cfg: Optional[QuadratureConfig] = None,
    search: Optional[SearchConfig] = None,
) -> BoundReport:
    if family == "zz_single_point":
        return szzb(prior, ch, M, search, cfg)
    return zzb(prior, ch, M, valley=(family == "zz_valley"), grid=grid, cfg=cfg)


def zzb_product(
    prior: ProductPrior,
    ch: AwgnChannel,
    M: int = 2,
    family: BoundFamily = "zz_valley",
    grid: Optional[GridSpec] = None,
    cfg: Optional[QuadratureConfig] = None,
    search: Optional[SearchConfig] = None,
) -> BoundReport:
    """Tensorized bound: one scalar bound per independent component, summed."""
    reports = [scalar_bound(c, ch, M, family, grid, cfg, search) for c in prior.components]
    per_axis = tuple(r.value for r in reports)
    if len(reports) == 1:
        return reports[0]
    return BoundReport(
        value=math.fsum(per_axis),
        family=family,
        M=M,
        per_axis=per_axis,
        diagnostics=BoundDiagnostics(
            tail_flag=any(r.diagnostics.tail_flag for r in reports),
            grid_used=grid,
            spike_count=sum(r.diagnostics.spike_count for r in reports),
        ),
    )
