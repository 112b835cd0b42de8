"""
Integration and maximization of sampled bound curves t -> g(t).

A curve is given by grid samples (t_i, g_i) and optional spikes (t_k, g_k)
at isolated points. The plain integral uses the linear interpolant of the
samples with a limited curvature term; spikes carry no Lebesgue mass. The
valley-filled integral uses the suffix supremum of the interpolant, where
spikes do count. Spike locations become grid nodes before integrating.
"""

import math
from collections.abc import Iterable, Sequence

import numpy as np

from src.core.exceptions import ContractError
from src.core.numerics import suffix_max

MERGE_TOL = 1e-12


def offset_ratios(locations: Iterable[float], M: int) -> list[float]:
    """Sorted distinct values (x_w - x_z)/k > 0 for k in 1..M-1."""
    locs = sorted(set(float(v) for v in locations))
    raw = sorted(
        (hi - lo) / k
        for i, lo in enumerate(locs)
        for hi in locs[i + 1:]
        for k in range(1, M)
    )
    merged: list[float] = []
    for v in raw:
        if not merged or v - merged[-1] > MERGE_TOL * max(1.0, v):
            merged.append(v)
    return merged


def _weighted_linear(t0: float, t1: float, g0: float, g1: float) -> float:
    """Exact integral of (t/2) * (linear g) over [t0, t1]."""
    tm = 0.5 * (t0 + t1)
    gm = 0.5 * (g0 + g1)
    return (t1 - t0) / 6.0 * (0.5 * t0 * g0 + 2.0 * tm * gm + 0.5 * t1 * g1)


def _weighted_max(t0: float, t1: float, g0: float, g1: float, floor: float) -> float:
    """Exact integral of (t/2) * max(linear g, floor) over [t0, t1]."""
    if g0 >= floor and g1 >= floor:
        return _weighted_linear(t0, t1, g0, g1)
    if g0 <= floor and g1 <= floor:
        return _weighted_linear(t0, t1, floor, floor)
    tc = t0 + (floor - g0) / (g1 - g0) * (t1 - t0)
    if g0 > floor:
        return _weighted_linear(t0, tc, g0, floor) + _weighted_linear(tc, t1, floor, floor)
    return _weighted_linear(t0, tc, floor, floor) + _weighted_linear(tc, t1, floor, g1)


def _limited_mean(a: float, b: float) -> float:
    """Mean of two curvature estimates that agree; minmod otherwise."""
    if a * b <= 0.0:
        return 0.0
    if abs(a - b) <= 0.5 * max(abs(a), abs(b)):
        return 0.5 * (a + b)
    return a if abs(a) < abs(b) else b


def segment_curvatures(points: Sequence[float], values: Sequence[float]) -> list[float]:
    """
    Limited estimate of g'' on each segment [t_k, t_k+1].

    Three-point divided differences at both ends of a segment are combined by
    a limiter, so a segment next to a kink or at either end of the grid gets 0
    and a piecewise-linear curve is integrated exactly.
    """
    n = len(points)
    second = [0.0] * n
    for k in range(1, n - 1):
        left = (values[k] - values[k - 1]) / (points[k] - points[k - 1])
        right = (values[k + 1] - values[k]) / (points[k + 1] - points[k])
        second[k] = 2.0 * (right - left) / (points[k + 1] - points[k - 1])
    return [_limited_mean(second[k], second[k + 1]) for k in range(n - 1)]


def _curvature_term(t0: float, t1: float, bend: float) -> float:
    """integral of (t/2) * (bend/2) (t - t0)(t - t1) over [t0, t1]."""
    return -bend * 0.5 * (t0 + t1) * (t1 - t0) ** 3 / 24.0


def splice_spikes(
    points: Sequence[float], values: Sequence[float], spikes: Sequence[tuple[float, float]]
) -> tuple[list[float], list[float]]:
    """Add spike locations inside the grid as nodes on the linear interpolant."""
    ts = [float(t) for t in points]
    extra = [
        float(t)
        for t, _ in spikes
        if 0.0 < t < ts[-1] and all(abs(t - p) > MERGE_TOL * max(1.0, t) for p in ts)
    ]
    if not extra:
        return ts, [float(g) for g in values]
    merged = np.unique(np.concatenate([ts, extra]))
    held = np.interp(merged, ts, [float(g) for g in values])
    return merged.tolist(), held.tolist()


def integrate_curve(
    points: Sequence[float],
    values: Sequence[float],
    spikes: Sequence[tuple[float, float]] = (),
    valley: bool = True,
) -> float:
    """
    integral from 0 to t_max of (t/2) * g(t), g held at its first sample near 0.

    Between samples g is integrated as the linear interpolant plus a limited
    curvature term, which removes the O(h^2) bias of chords on smooth convex
    stretches without touching piecewise-linear ones.

    Args:
        points: Strictly increasing grid t-points
        values: g at the grid points
        spikes: (t, g) at isolated points, sorted by t
        valley: Integrate the suffix supremum instead of g itself
    """
    if len(points) != len(values) or not len(points):
        raise ContractError("points and values must be nonempty and of equal length")
    points, values = splice_spikes(points, values, spikes)
    ts = [0.0, *points]
    gs = [values[0], *values]
    bends = [0.0, *segment_curvatures(points, values)]

    if not valley:
        return math.fsum(
            _weighted_linear(ts[i], ts[i + 1], gs[i], gs[i + 1])
            + _curvature_term(ts[i], ts[i + 1], bends[i])
            for i in range(len(ts) - 1)
        )

    filled = [g for _, g in suffix_max(list(zip(points, values)))]
    spike_ts = [t for t, _ in spikes]
    spike_tail = [g for _, g in suffix_max(list(spikes))] if spikes else []

    pieces = []
    k = 0
    for i in range(len(ts) - 1):
        right = ts[i + 1]
        while k < len(spike_ts) and spike_ts[k] < right * (1.0 - MERGE_TOL):
            k += 1
        spike_floor = spike_tail[k] if k < len(spike_tail) else 0.0
        floor = max(filled[i], spike_floor)
        bend = _curvature_term(ts[i], right, bends[i])
        filled_piece = _weighted_max(ts[i], right, gs[i], gs[i + 1], floor)
        if gs[i] >= floor and gs[i + 1] >= floor:
            filled_piece += bend
        # the envelope never falls below the curve itself
        pieces.append(max(filled_piece, _weighted_linear(ts[i], right, gs[i], gs[i + 1]) + bend))
    return math.fsum(pieces)


def single_point_sup(
    points: Sequence[float],
    values: Sequence[float],
    spikes: Sequence[tuple[float, float]] = (),
) -> tuple[float, float]:
    """(argmax, max) of (t^2 / 2) * g over grid samples and spikes."""
    candidates = [*zip(points, values), *spikes]
    if not candidates:
        raise ContractError("no samples to maximize over")
    best_t, best_g = max(candidates, key=lambda s: s[0] * s[0] * s[1])
    return best_t, 0.5 * best_t * best_t * best_g
