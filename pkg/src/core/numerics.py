"""
Deterministic numerical primitives shared by every bound computation.

Covers the normal tail function, adaptive Simpson quadrature, the
suffix-maximum (valley-filling) transform, a scan-and-refine maximizer and
grid construction. Everything here is a pure function of its inputs.
"""

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from itertools import pairwise
from typing import Optional

import numpy as np

from src.core.exceptions import ContractError, ConvergenceError, DomainError
from src.models.numerics import GridSpec, QuadratureConfig, SearchConfig

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0


# ========== Special functions ==========

def q_function(t: float) -> float:
    """Standard normal tail probability Q(t) = P(Z > t)."""
    if not math.isfinite(t):
        raise DomainError(f"q_function needs a finite argument, got {t}")
    return 0.5 * math.erfc(t / SQRT2)


def normal_cdf(t: float) -> float:
    """Standard normal CDF; +/-inf are allowed."""
    if t == math.inf:
        return 1.0
    if t == -math.inf:
        return 0.0
    return 0.5 * math.erfc(-t / SQRT2)


def normal_pdf(t: float) -> float:
    return math.exp(-0.5 * t * t) / SQRT2PI


def gaussian_mass(lo: float, hi: float) -> float:
    """P(lo < Z < hi) computed on the side of the smaller tail."""
    if hi <= lo:
        return 0.0
    if lo >= 0.0:
        return normal_cdf(-lo) - normal_cdf(-hi)
    return normal_cdf(hi) - normal_cdf(lo)


# ========== Quadrature ==========

def integrate_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: Optional[QuadratureConfig] = None,
    breakpoints: Iterable[float] = (),
) -> float:
    """
    Adaptive Simpson estimate of the integral of f over [a, b].

    Args:
        f: Integrand, finite on [a, b] except at finitely many points
        a: Lower limit
        b: Upper limit (must exceed a)
        cfg: Tolerances and budgets
        breakpoints: Known kinks/discontinuities; each becomes a panel edge

    Returns:
        Integral estimate with estimated error below max(abs_tol, rel_tol*|I|)

    Raises:
        ContractError: If a >= b
        ConvergenceError: If the subdivision budget is exhausted
    """
    cfg = cfg or QuadratureConfig()
    if not a < b:
        raise ContractError(f"integration limits must satisfy a < b, got [{a}, {b}]")

    edges = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    panels = []
    for lo, hi in pairwise(edges):
        n = cfg.initial_panels
        cuts = [lo + (hi - lo) * k / n for k in range(n)] + [hi]
        panels.extend(pairwise(cuts))

    # (lo, hi, f(lo), f(mid), f(hi), simpson estimate, depth)
    stack = []
    for lo, hi in panels:
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        stack.append((lo, hi, flo, fmid, fhi, whole, 0))

    coarse = math.fsum(item[5] for item in stack)
    eps = max(cfg.abs_tol, cfg.rel_tol * abs(coarse))
    width = b - a

    accepted = []
    capped_error = []
    subdivisions = 0
    stack.reverse()
    while stack:
        lo, hi, flo, fmid, fhi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm = f(lmid)
        frm = f(rmid)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - whole
        converged = abs(delta) <= 15.0 * eps * (hi - lo) / width
        if converged or depth + 1 >= cfg.max_depth:
            accepted.append(left + right + delta / 15.0)
            if not converged:
                capped_error.append(abs(delta) / 15.0)
            continue
        subdivisions += 1
        if subdivisions > cfg.max_subdivisions:
            partial = math.fsum(accepted) + left + right + math.fsum(s[5] for s in stack)
            raise ConvergenceError(
                f"integrate_1d exhausted {cfg.max_subdivisions} subdivisions on [{a}, {b}]",
                partial,
            )
        stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, depth + 1))

    if capped_error:
        logger.debug(
            f"integrate_1d on [{a:.6g}, {b:.6g}]: {len(capped_error)} panels hit max_depth="
            f"{cfg.max_depth} unconverged, estimated error {math.fsum(capped_error):.3g}"
        )
    return math.fsum(accepted)


# ========== Valley filling ==========

def suffix_max(samples: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """
    Suffix maximum of sampled values: out[i] = max(values[i:]).

    This is the valley-filling transform restricted to a finite sample set.
    """
    if not samples:
        return []
    ts = np.array([float(s[0]) for s in samples])
    if np.any(np.diff(ts) <= 0):
        raise ContractError("suffix_max needs strictly increasing t-coordinates")
    values = np.array([float(s[1]) for s in samples])
    filled = np.maximum.accumulate(values[::-1])[::-1]
    return [(float(t), float(v)) for t, v in zip(ts, filled)]


# ========== Maximization ==========

def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Golden-section search for a maximum of f on [a, b]; returns (x, f(x))."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc > yd:
            b = d
            d, yd = c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c, yc = d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
    return (c, yc) if yc > yd else (d, yd)


def maximize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: Optional[SearchConfig] = None,
    probes: Optional[Sequence[float]] = None,
) -> tuple[float, float]:
    """
    Coarse scan followed by golden-section refinement around the best bracket.

    Args:
        f: Objective
        lo: Lower end of the search interval
        hi: Upper end of the search interval
        cfg: Scan size and refinement tolerance
        probes: Optional explicit coarse points (sorted, inside [lo, hi])

    Returns:
        (argmax, max); max is never below any coarse sample
    """
    cfg = cfg or SearchConfig()
    if not lo < hi:
        raise ContractError(f"maximize_1d needs lo < hi, got [{lo}, {hi}]")

    if probes is None:
        xs = np.linspace(lo, hi, cfg.coarse_points)
    else:
        xs = np.array(sorted(float(p) for p in probes if lo <= p <= hi))
        if xs.size < 2:
            xs = np.linspace(lo, hi, cfg.coarse_points)
    values = [f(float(x)) for x in xs]
    best = int(np.argmax(values))
    best_x, best_val = float(xs[best]), float(values[best])

    left = float(xs[max(best - 1, 0)])
    right = float(xs[min(best + 1, xs.size - 1)])
    if right > left:
        x_ref, val_ref = golden_section_max(f, left, right, cfg.refine_tol)
        if val_ref > best_val:
            best_x, best_val = x_ref, val_ref
    return best_x, best_val


# ========== Grids ==========

def build_grid(grid: GridSpec) -> np.ndarray:
    """Strictly increasing t-points in (0, t_max], extra atoms spliced in."""
    if grid.spacing == "linear":
        points = np.linspace(grid.t_max / grid.n_points, grid.t_max, grid.n_points)
    else:
        t_split = grid.t_split or 0.25 * grid.t_max
        t_min = grid.t_min or 1e-4 * t_split
        n_log = grid.n_points // 2
        head = np.geomspace(t_min, t_split, n_log, endpoint=False)
        tail = np.linspace(t_split, grid.t_max, grid.n_points - n_log)
        points = np.concatenate([head, tail])
    if grid.extra_atoms:
        points = np.concatenate([points, np.asarray(grid.extra_atoms)])
    return np.unique(points)


def pairwise_sum(values: Iterable[float]) -> float:
    """Order-independent, correctly rounded sum used for every reduction."""
    return math.fsum(values)
