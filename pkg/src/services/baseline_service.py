"""
Baseline Service - MMSE oracle and the competing Bayesian bounds

The posterior of every supported prior under AWGN is a finite mixture of
closed-form pieces: conjugate normals for Gaussian components, truncated
normals for box pieces and point masses for atoms. Both oracles evaluate
E[X|Y] and Var(X|Y) from that mixture.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

import numpy as np
from scipy.special import log_ndtr, logsumexp
from scipy.stats import truncnorm

from src.core.numerics import integrate_1d
from src.models.bounds import OracleConfig, OracleEstimate
from src.models.channel import AwgnChannel
from src.models.numerics import QuadratureConfig
from src.models.prior import GaussianFamily, ProductPrior, ScalarPrior
from src.services.channel_service import sample as channel_sample
from src.services.prior_service import (
    continuous_pdf_array,
    product_entropy,
    product_fisher_information,
    split_prior,
    variance,
)

logger = logging.getLogger(__name__)

MC_FLAG_RATIO = 0.01
ORACLE_MARGIN = 10.0
LOG_2PI = math.log(2.0 * math.pi)


# ========== Posterior ==========

def _log_box_mass(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """log(Phi(hi) - Phi(lo)), evaluated on the side of the smaller tail."""
    flip = lo > 0
    a = np.where(flip, -hi, lo)
    b = np.where(flip, -lo, hi)
    log_b = log_ndtr(b)
    log_a = log_ndtr(a)
    with np.errstate(divide="ignore"):
        return log_b + np.log1p(-np.exp(np.minimum(log_a - log_b, 0.0)))


def _posterior_pieces(prior: ScalarPrior, ch: AwgnChannel, y: np.ndarray):
    """Per-piece (log weight, mean, variance) arrays of the posterior mixture."""
    alpha, cont, disc = split_prior(prior)
    eta, sigma = ch.eta, ch.sigma
    log_w, means, variances = [], [], []

    if cont is not None and isinstance(cont, GaussianFamily):
        for w, m, v in zip(*cont.components()):
            if w <= 0:
                continue
            s2 = v + eta
            log_w.append(
                math.log(alpha * w) - 0.5 * (y - m) ** 2 / s2 - 0.5 * (LOG_2PI + math.log(s2))
            )
            means.append((v * y + eta * m) / s2)
            variances.append(np.full_like(y, v * eta / s2))
    elif cont is not None:
        for a, b, h in cont.pieces():
            lo = (a - y) / sigma
            hi = (b - y) / sigma
            log_w.append(math.log(alpha * h) + _log_box_mass(lo, hi))
            mean, var = truncnorm.stats(lo, hi, loc=y, scale=sigma, moments="mv")
            means.append(np.nan_to_num(np.asarray(mean, dtype=float), nan=0.5 * (a + b)))
            variances.append(np.nan_to_num(np.asarray(var, dtype=float), nan=0.0))

    if disc is not None:
        for loc, mass in disc.atoms:
            if mass <= 0:
                continue
            log_w.append(
                math.log((1.0 - alpha) * mass)
                - 0.5 * (y - loc) ** 2 / eta
                - 0.5 * (LOG_2PI + math.log(eta))
            )
            means.append(np.full_like(y, loc))
            variances.append(np.zeros_like(y))

    return np.stack(log_w), np.stack(means), np.stack(variances)


def posterior_moments(
    prior: ScalarPrior, ch: AwgnChannel, y
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Closed-form evidence p(y), E[X|Y=y] and Var(X|Y=y), vectorized over y.

    The variance uses the law of total variance over the posterior pieces.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    log_w, means, variances = _posterior_pieces(prior, ch, y)
    log_evidence = logsumexp(log_w, axis=0)
    with np.errstate(invalid="ignore"):
        resp = np.exp(log_w - log_evidence)
    resp = np.nan_to_num(resp, nan=0.0)
    mean = np.sum(resp * means, axis=0)
    var = np.sum(resp * (variances + (means - mean) ** 2), axis=0)
    return np.exp(log_evidence), mean, np.maximum(var, 0.0)


def posterior_density(prior: ScalarPrior, ch: AwgnChannel, y: float, xs) -> np.ndarray:
    """Density of the continuous part of P_{X|Y=y} on the points xs."""
    alpha, cont, _ = split_prior(prior)
    xs = np.asarray(xs, dtype=float)
    if cont is None:
        return np.zeros_like(xs)
    evidence = posterior_moments(prior, ch, y)[0][0]
    if evidence <= 0:
        return np.zeros_like(xs)
    lik = np.exp(-0.5 * (y - xs) ** 2 / ch.eta) / math.sqrt(2.0 * math.pi * ch.eta)
    return alpha * continuous_pdf_array(cont, xs) * lik / evidence


# ========== MMSE oracle ==========

def _y_breakpoints(prior: ScalarPrior, ch: AwgnChannel) -> list[float]:
    _, cont, disc = split_prior(prior)
    points: list[float] = []
    if cont is not None:
        points.extend(cont.breakpoints())
    if disc is not None:
        points.extend(loc for loc, _ in disc.atoms)
    sigma = ch.sigma
    return [p + s * k * sigma for p in points for k in (0.0, 1.0, 3.0) for s in (-1.0, 1.0)]


def _mmse_quadrature(prior: ScalarPrior, ch: AwgnChannel, quad: QuadratureConfig) -> float:
    lo, hi = prior.support()
    margin = ORACLE_MARGIN * ch.sigma + ORACLE_MARGIN * prior.std

    def integrand(y: float) -> float:
        evidence, _, var = posterior_moments(prior, ch, y)
        return float(evidence[0] * var[0])

    return integrate_1d(integrand, lo - margin, hi + margin, quad, _y_breakpoints(prior, ch))


def _mc_chunk(prior: ScalarPrior, ch: AwgnChannel, seq: np.random.SeedSequence, n: int):
    rng = np.random.default_rng(seq)
    x = prior.sample(rng, n)
    y = channel_sample(ch, x, rng)
    _, mean, _ = posterior_moments(prior, ch, y)
    sq = (x - mean) ** 2
    return float(np.sum(sq)), float(np.sum(sq * sq)), n


def mmse_monte_carlo(
    prior: ScalarPrior, ch: AwgnChannel, cfg: OracleConfig, threads: int = 1
) -> OracleEstimate:
    """
    Average of (X - E[X|Y])^2 over seeded draws.

    The budget is split into cfg.chunks seed streams combined in chunk order,
    so the estimate does not depend on the thread count.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.chunks)
    base, extra = divmod(cfg.samples, cfg.chunks)
    sizes = [base + (1 if i < extra else 0) for i in range(cfg.chunks)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        parts = list(executor.map(lambda a: _mc_chunk(prior, ch, *a), zip(children, sizes)))

    return summarize_squared_errors(
        math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts), sum(p[2] for p in parts)
    )


def summarize_squared_errors(total: float, total_sq: float, n: int) -> OracleEstimate:
    """Monte Carlo MMSE from sums of e^2 and e^4; flagged when the standard error is large."""
    value = total / n
    spread = max(total_sq / n - value * value, 0.0)
    std_error = math.sqrt(spread / n)
    flagged = std_error > MC_FLAG_RATIO * value
    if flagged:
        logger.warning(
            f"Monte Carlo MMSE {value:.6g} has standard error {std_error:.3g} "
            f"(> {MC_FLAG_RATIO:.0%})"
        )
    return OracleEstimate(value=value, std_error=std_error, flagged=flagged, method="monte_carlo")


def mmse(
    prior: ScalarPrior,
    ch: AwgnChannel,
    cfg: Optional[OracleConfig] = None,
    threads: int = 1,
) -> OracleEstimate:
    """MMSE of X from Y = X + N by posterior quadrature (default) or Monte Carlo."""
    cfg = cfg or OracleConfig()
    if cfg.method == "monte_carlo":
        return mmse_monte_carlo(prior, ch, cfg, threads)
    value = _mmse_quadrature(prior, ch, cfg.quad)
    logger.info(f"MMSE ({prior.type}, eta={ch.eta:g}) = {value:.12g}")
    return OracleEstimate(value=max(value, 0.0), method="posterior_quadrature")


def mmse_product(
    prior: Union[ScalarPrior, ProductPrior],
    ch: AwgnChannel,
    cfg: Optional[OracleConfig] = None,
    threads: int = 1,
) -> OracleEstimate:
    """Sum of per-component MMSEs; independent components decouple under AWGN."""
    if not isinstance(prior, ProductPrior):
        return mmse(prior, ch, cfg, threads)
    parts = [mmse(c, ch, cfg, threads) for c in prior.components]
    errors = [p.std_error for p in parts if p.std_error is not None]
    return OracleEstimate(
        value=math.fsum(p.value for p in parts),
        std_error=math.sqrt(math.fsum(e * e for e in errors)) if errors else None,
        flagged=any(p.flagged for p in parts),
        method=parts[0].method,
    )


# ========== Competing bounds ==========

def crb_high_noise(
    prior: Union[ScalarPrior, ProductPrior], cfg: Optional[QuadratureConfig] = None
) -> float:
    """Bayesian CRB without observations: d^2 / J(X)."""
    d = prior.dimension if isinstance(prior, ProductPrior) else 1
    return d * d / product_fisher_information(prior, cfg)


def crb_gaussian_channel(
    prior: Union[ScalarPrior, ProductPrior], eta: float, cfg: Optional[QuadratureConfig] = None
) -> float:
    """Bayesian CRB under AWGN: d^2 / (J(X) + d/eta)."""
    d = prior.dimension if isinstance(prior, ProductPrior) else 1
    return d * d / (product_fisher_information(prior, cfg) + d / eta)


def meb(prior: Union[ScalarPrior, ProductPrior], cfg: Optional[QuadratureConfig] = None) -> float:
    """Maximum-entropy bound (d / 2 pi e) exp(2 h(X) / d)."""
    d = prior.dimension if isinstance(prior, ProductPrior) else 1
    h = product_entropy(prior, cfg)
    return d / (2.0 * math.pi * math.e) * math.exp(2.0 * h / d)


def variance_bound(prior: Union[ScalarPrior, ProductPrior]) -> float:
    """Sum of component variances: the high-noise limit of the MMSE."""
    return variance(prior)
