"""
Prior Service - evaluation, moments and information functionals of P_X

Every consumer evaluates priors at translated arguments (f_X(x + u)); shifted
distributions are never materialized.
"""

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from src.core.exceptions import RegularityError, UnsupportedOperationError
from src.core.numerics import integrate_1d
from src.models.numerics import QuadratureConfig
from src.models.prior import (
    BoxFamily,
    FinitePMFPrior,
    GaussianFamily,
    GaussianPrior,
    MixedPrior,
    PiecewiseUniformPrior,
    ProductPrior,
    ScalarPrior,
    UniformPrior,
)

logger = logging.getLogger(__name__)

ContinuousPart = Union[GaussianFamily, BoxFamily]
AnyPrior = Union[ScalarPrior, ProductPrior]


def split_prior(
    prior: ScalarPrior,
) -> tuple[float, Optional[ContinuousPart], Optional[FinitePMFPrior]]:
    """Return (alpha, continuous part, discrete part); absent parts are None."""
    if isinstance(prior, FinitePMFPrior):
        return 0.0, None, prior
    if isinstance(prior, MixedPrior):
        cont = prior.continuous if prior.alpha > 0 else None
        disc = prior.discrete if prior.alpha < 1 else None
        return prior.alpha, cont, disc
    return 1.0, prior, None


def density(prior: ScalarPrior, x: float) -> float:
    """Lebesgue density of the continuous component, scaled by its weight."""
    alpha, cont, _ = split_prior(prior)
    if isinstance(prior, FinitePMFPrior):
        raise UnsupportedOperationError("a pure pmf prior has no Lebesgue density")
    if cont is None:
        return 0.0
    return alpha * cont.pdf(x)


def continuous_pdf_array(cont: ContinuousPart, xs: np.ndarray) -> np.ndarray:
    """Vectorized density of a continuous variant (unscaled)."""
    xs = np.asarray(xs, dtype=float)
    if isinstance(cont, GaussianFamily):
        weights, means, variances = (np.asarray(c, dtype=float) for c in cont.components())
        z = (xs[..., None] - means) ** 2 / variances
        return np.sum(weights * np.exp(-0.5 * z) / np.sqrt(2.0 * np.pi * variances), axis=-1)
    out = np.zeros_like(xs)
    for a, b, h in cont.pieces():
        out = np.where((xs >= a) & (xs <= b), h, out)
    return out


def gaussian_log_pdf_array(cont: GaussianFamily, xs: np.ndarray) -> np.ndarray:
    weights, means, variances = (np.asarray(c, dtype=float) for c in cont.components())
    keep = weights > 0
    weights, means, variances = weights[keep], means[keep], variances[keep]
    xs = np.asarray(xs, dtype=float)
    terms = (
        np.log(weights)
        - 0.5 * (xs[..., None] - means) ** 2 / variances
        - 0.5 * np.log(2.0 * np.pi * variances)
    )
    return logsumexp(terms, axis=-1)


def atoms(prior: ScalarPrior) -> list[tuple[float, float]]:
    """Discrete atoms scaled by their weight (1 - alpha for mixed priors)."""
    alpha, _, disc = split_prior(prior)
    if disc is None:
        return []
    scale = 1.0 - alpha
    return [(loc, scale * mass) for loc, mass in disc.atoms if scale * mass > 0]


def mean_variance(prior: ScalarPrior) -> tuple[float, float]:
    return prior.mean_variance()


def variance(prior: AnyPrior) -> float:
    """Var(X), summed over components for product priors."""
    if isinstance(prior, ProductPrior):
        return math.fsum(c.mean_variance()[1] for c in prior.components)
    return prior.mean_variance()[1]


def _mixture_score_density(cont: GaussianFamily, x: float) -> tuple[float, float]:
    """(log f(x), f'(x)/f(x)) computed through responsibilities."""
    weights, means, variances = cont.components()
    log_terms = []
    slopes = []
    for w, m, v in zip(weights, means, variances):
        if w <= 0:
            continue
        log_terms.append(math.log(w) - 0.5 * (x - m) ** 2 / v - 0.5 * math.log(2.0 * math.pi * v))
        slopes.append(-(x - m) / v)
    log_f = float(logsumexp(log_terms))
    score = math.fsum(math.exp(lt - log_f) * s for lt, s in zip(log_terms, slopes))
    return log_f, score


def fisher_information(prior: ScalarPrior, cfg: Optional[QuadratureConfig] = None) -> float:
    """
    J(X) = integral of f'(x)^2 / f(x).

    Closed form for a single Gaussian; quadrature for mixtures with f' taken
    from the mixture formula.

    Raises:
        RegularityError: For densities that are not differentiable on an open support
    """
    if isinstance(prior, GaussianPrior):
        return 1.0 / prior.variance
    if not isinstance(prior, GaussianFamily):
        raise RegularityError(
            f"fisher information needs a smooth density, got a '{prior.type}' prior"
        )
    cfg = cfg or QuadratureConfig()
    lo, hi = prior.support()

    def integrand(x: float) -> float:
        log_f, score = _mixture_score_density(prior, x)
        return math.exp(log_f) * score * score

    value = integrate_1d(integrand, lo, hi, cfg, breakpoints=prior.breakpoints())
    logger.debug(f"Fisher information of {prior.type}: {value:.12g}")
    return value


def differential_entropy(prior: ScalarPrior, cfg: Optional[QuadratureConfig] = None) -> float:
    """h(X) = -integral of f ln f, in nats."""
    if isinstance(prior, MixedPrior):
        if prior.alpha < 1:
            raise UnsupportedOperationError("differential entropy is undefined with atoms present")
        prior = prior.continuous
    if isinstance(prior, FinitePMFPrior):
        raise UnsupportedOperationError("differential entropy is undefined for a pmf prior")
    if isinstance(prior, GaussianPrior):
        return 0.5 * math.log(2.0 * math.pi * math.e * prior.variance)
    if isinstance(prior, UniformPrior):
        return math.log(prior.b - prior.a)
    if isinstance(prior, PiecewiseUniformPrior):
        return -math.fsum(h * (b - a) * math.log(h) for a, b, h in prior.pieces())

    cfg = cfg or QuadratureConfig()
    lo, hi = prior.support()

    def integrand(x: float) -> float:
        log_f = prior.log_pdf(x)
        return -math.exp(log_f) * log_f

    return integrate_1d(integrand, lo, hi, cfg, breakpoints=prior.breakpoints())


def mixture_decomposition(prior: AnyPrior) -> tuple[float, int]:
    """
    (alpha, d): continuous weight and dimension.

    Raises:
        UnsupportedOperationError: Product prior whose components disagree on alpha
    """
    if isinstance(prior, ProductPrior):
        alphas = {split_prior(c)[0] for c in prior.components}
        if len(alphas) != 1:
            raise UnsupportedOperationError(
                f"product prior mixes continuous weights {sorted(alphas)}; "
                "the low-noise slope is only defined for a common alpha"
            )
        return alphas.pop(), prior.dimension
    return split_prior(prior)[0], 1


def product_fisher_information(prior: AnyPrior, cfg: Optional[QuadratureConfig] = None) -> float:
    """Total Fisher information (trace) of independent components."""
    if isinstance(prior, ProductPrior):
        return math.fsum(fisher_information(c, cfg) for c in prior.components)
    return fisher_information(prior, cfg)


def product_entropy(prior: AnyPrior, cfg: Optional[QuadratureConfig] = None) -> float:
    if isinstance(prior, ProductPrior):
        return math.fsum(differential_entropy(c, cfg) for c in prior.components)
    return differential_entropy(prior, cfg)
