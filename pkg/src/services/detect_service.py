"""
Detect Service - M-ary MAP error probabilities under AWGN

The MAP correct-decision mass for equal-variance Gaussian hypotheses has a
closed form: the decision regions are the pieces of the upper envelope of the
lines log w_j + m_j*y/eta - m_j^2/(2*eta). That envelope seeds the kinks of
bayes_error's quadrature and evaluates the inner y-integral of h_M exactly.
"""

import logging
import math
from collections.abc import Sequence
from typing import Optional

from src.core.exceptions import ContractError
from src.core.numerics import gaussian_mass, integrate_1d, normal_cdf
from src.models.bounds import HypothesisSpec
from src.models.channel import AwgnChannel
from src.models.numerics import QuadratureConfig
from src.models.prior import FinitePMFPrior, ScalarPrior
from src.services.channel_service import likelihood
from src.services.prior_service import ContinuousPart, split_prior

logger = logging.getLogger(__name__)

ATOM_MATCH_TOL = 1e-9
SEED_SIGMAS = (1.0, 3.0, 6.0)


def bayes_error_envelope(
    weights: Sequence[float], means: Sequence[float], eta: float
) -> tuple[float, tuple[float, ...]]:
    """
    Closed-form MAP correct mass sum_j w_j * P(Y in region_j | N(m_j, eta)).

    Weights need not be normalized; zero weights never win a region.

    Returns:
        (correct mass, switch points of the MAP decision)
    """
    if len(weights) != len(means):
        raise ContractError("weights and means must have the same length")
    order = sorted(range(len(means)), key=lambda j: means[j])
    active = [j for j in order if weights[j] > 0]
    if not active:
        return 0.0, ()
    sigma = math.sqrt(eta)
    slope = {j: means[j] / eta for j in active}
    intercept = {j: math.log(weights[j]) - means[j] ** 2 / (2.0 * eta) for j in active}

    segments = []
    current = active[0]
    lo = -math.inf
    while True:
        best_k, best_y = None, math.inf
        for k in active:
            if slope[k] <= slope[current]:
                continue
            y = (intercept[current] - intercept[k]) / (slope[k] - slope[current])
            if y < best_y or (y == best_y and best_k is not None and slope[k] > slope[best_k]):
                best_k, best_y = k, y
        if best_k is None:
            segments.append((current, lo, math.inf))
            break
        if best_y > lo:
            segments.append((current, lo, best_y))
            lo = best_y
        current = best_k

    mass = math.fsum(
        weights[j] * gaussian_mass((a - means[j]) / sigma, (b - means[j]) / sigma)
        for j, a, b in segments
    )
    kinks = tuple(b for _, _, b in segments[:-1])
    return mass, kinks


def binary_correct_mass(w0: float, w1: float, t: float, sigma: float) -> float:
    """Two-hypothesis case of bayes_error_envelope with means 0 and t."""
    if w0 <= 0:
        return max(w1, 0.0)
    if w1 <= 0:
        return w0
    boundary = 0.5 * t + sigma * sigma * math.log(w0 / w1) / t
    return w0 * normal_cdf(boundary / sigma) + w1 * normal_cdf((t - boundary) / sigma)


def correct_mass(weights: Sequence[float], t: float, eta: float) -> float:
    """MAP correct mass for hypotheses at 0, t, ..., (M-1)t with unnormalized weights."""
    if len(weights) == 2:
        return binary_correct_mass(weights[0], weights[1], t, math.sqrt(eta))
    return bayes_error_envelope(weights, [j * t for j in range(len(weights))], eta)[0]


def bayes_error(
    ch: AwgnChannel, spec: HypothesisSpec, cfg: Optional[QuadratureConfig] = None
) -> float:
    """
    1 - integral of max_i p_i f(y | anchor + u_i) dy, clamped to [0, 1 - max p_i].

    Raises:
        ConvergenceError: Propagated from the quadrature
    """
    cfg = cfg or QuadratureConfig()
    means = spec.means
    priors = spec.priors
    sigma = ch.sigma
    _, kinks = bayes_error_envelope(priors, means, ch.eta)
    seeds = [m + s * k * sigma for m in means for k in SEED_SIGMAS for s in (-1.0, 1.0)]

    margin = cfg.domain_margin_sigmas * sigma
    lo, hi = means[0] - margin, means[-1] + margin

    def integrand(y: float) -> float:
        return max(p * likelihood(ch, y, m) for p, m in zip(priors, means))

    correct = integrate_1d(integrand, lo, hi, cfg, breakpoints=[*kinks, *means, *seeds])
    return min(max(1.0 - correct, 0.0), 1.0 - max(priors))


def continuous_joint(
    cont: ContinuousPart, ch: AwgnChannel, t: float, M: int, cfg: QuadratureConfig
) -> float:
    """integral over x of the MAP correct mass with weights f(x + j t); lies in [1, M]."""
    lo, hi = cont.support()
    breaks = {b - j * t for b in cont.breakpoints() for j in range(M)}

    def integrand(x: float) -> float:
        weights = [cont.pdf(x + j * t) for j in range(M)]
        return correct_mass(weights, t, ch.eta)

    return integrate_1d(integrand, lo - (M - 1) * t, hi, cfg, breakpoints=breaks)


def group_shifted_atoms(
    pmf: FinitePMFPrior, t: float, M: int
) -> list[list[float]]:
    """
    Weight vectors over j of the atoms landing on each point v = a - j t.

    Points closer than ATOM_MATCH_TOL (relative to the atom scale) are merged.
    """
    scale = max(1.0, max(abs(loc) for loc, _ in pmf.atoms))
    tol = ATOM_MATCH_TOL * scale
    shifted = sorted(
        (loc - j * t, j, mass) for loc, mass in pmf.atoms if mass > 0 for j in range(M)
    )
    groups: list[list[float]] = []
    last_v = None
    for v, j, mass in shifted:
        if last_v is None or v - last_v > tol:
            groups.append([0.0] * M)
        groups[-1][j] += mass
        last_v = v
    return groups


def discrete_joint(pmf: FinitePMFPrior, ch: AwgnChannel, t: float, M: int) -> float:
    """Sum over the union support of the MAP correct mass of the aligned atoms."""
    return math.fsum(correct_mass(w, t, ch.eta) for w in group_shifted_atoms(pmf, t, M))


def integrated_max_joint(
    prior: ScalarPrior,
    ch: AwgnChannel,
    t: float,
    M: int,
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    M - h_M(t): the double integral of max_j f_X(x + j t) f(y | x + j t).

    Mixed priors split exactly into alpha * continuous + (1 - alpha) * discrete.
    """
    if M < 2:
        raise ContractError(f"need at least two hypotheses, got M={M}")
    if not t > 0:
        raise ContractError(f"separation must be positive, got {t}")
    cfg = cfg or QuadratureConfig()
    alpha, cont, disc = split_prior(prior)
    total = 0.0
    if cont is not None:
        total += alpha * continuous_joint(cont, ch, t, M, cfg)
    if disc is not None:
        total += (1.0 - alpha) * discrete_joint(disc, ch, t, M)
    return min(max(total, 1.0), float(M))
