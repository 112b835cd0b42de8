"""
Pydantic models for input distributions P_X.

Scalar priors form a discriminated union on ``type``. Continuous variants fall
into two families that share their math: Gaussian mixtures (``gaussian``,
``gaussian_mixture``) and box densities (``uniform``, ``piecewise_uniform``).
All models are frozen, hence hashable, so they can key caches.
"""

import math
from typing import Annotated, Any, ClassVar, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

TAIL_SIGMAS = 10.0
MASS_TOL = 1e-12
IQR_PER_STD = 1.3489795003921634


class PriorBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def spread(self) -> float:
        lo, hi = self.support()
        return hi - lo

    @property
    def std(self) -> float:
        return math.sqrt(self.mean_variance()[1])

    def support(self) -> tuple[float, float]:  # pragma: no cover - overridden
        raise NotImplementedError

    def mean_variance(self) -> tuple[float, float]:  # pragma: no cover - overridden
        raise NotImplementedError


# ========== Gaussian-mixture family ==========

class GaussianFamily(PriorBase):
    """Shared math for priors that are finite mixtures of normals."""

    is_bounded: ClassVar[bool] = False

    def components(self) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
        raise NotImplementedError  # pragma: no cover

    def pdf(self, x: float) -> float:
        total = 0.0
        for w, m, v in zip(*self.components()):
            z = (x - m) / math.sqrt(v)
            total += w * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * v)
        return total

    def log_pdf(self, x: float) -> float:
        terms = [
            math.log(w) - 0.5 * (x - m) ** 2 / v - 0.5 * math.log(2.0 * math.pi * v)
            for w, m, v in zip(*self.components())
            if w > 0
        ]
        top = max(terms)
        return top + math.log(math.fsum(math.exp(t - top) for t in terms))

    def pdf_derivative(self, x: float) -> float:
        total = 0.0
        for w, m, v in zip(*self.components()):
            z = (x - m) / math.sqrt(v)
            total += -w * (x - m) / v * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * v)
        return total

    def cdf(self, x: float) -> float:
        total = 0.0
        for w, m, v in zip(*self.components()):
            total += w * 0.5 * math.erfc(-(x - m) / math.sqrt(2.0 * v))
        return total

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.components()[1])))

    def support(self) -> tuple[float, float]:
        _, means, variances = self.components()
        lo = min(m - TAIL_SIGMAS * math.sqrt(v) for m, v in zip(means, variances))
        hi = max(m + TAIL_SIGMAS * math.sqrt(v) for m, v in zip(means, variances))
        return lo, hi

    def mean_variance(self) -> tuple[float, float]:
        weights, means, variances = self.components()
        mean = math.fsum(w * m for w, m in zip(weights, means))
        var = math.fsum(
            w * (v + (m - mean) ** 2) for w, m, v in zip(weights, means, variances)
        )
        return mean, var

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        weights, means, variances = (np.asarray(c, dtype=float) for c in self.components())
        idx = rng.choice(weights.size, size=n, p=weights / weights.sum())
        return means[idx] + np.sqrt(variances[idx]) * rng.standard_normal(n)


class GaussianPrior(GaussianFamily):
    """Normal prior N(mean, variance)."""

    type: Literal["gaussian"] = "gaussian"
    mean: float = 0.0
    variance: float = Field(1.0, gt=0)

    def components(self):
        return (1.0,), (self.mean,), (self.variance,)


class GaussianMixturePrior(GaussianFamily):
    """Finite mixture of normals."""

    type: Literal["gaussian_mixture"] = "gaussian_mixture"
    weights: tuple[float, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]

    @model_validator(mode="after")
    def check_mixture(self):
        if not (len(self.weights) == len(self.means) == len(self.variances) >= 1):
            raise ValueError("weights, means and variances must have the same nonzero length")
        if any(w < 0 for w in self.weights):
            raise ValueError("mixture weights must be nonnegative")
        if abs(math.fsum(self.weights) - 1.0) > MASS_TOL:
            raise ValueError(f"mixture weights sum to {math.fsum(self.weights)}, expected 1")
        if any(v <= 0 for v in self.variances):
            raise ValueError("mixture variances must be positive")
        return self

    def components(self):
        return self.weights, self.means, self.variances


# ========== Box family ==========

class BoxFamily(PriorBase):
    """Shared math for piecewise-constant densities."""

    is_bounded: ClassVar[bool] = True

    def pieces(self) -> tuple[tuple[float, float, float], ...]:
        raise NotImplementedError  # pragma: no cover

    def pdf(self, x: float) -> float:
        for a, b, h in self.pieces():
            if a <= x <= b:
                return h
        return 0.0

    def cdf(self, x: float) -> float:
        total = 0.0
        for a, b, h in self.pieces():
            if x >= b:
                total += h * (b - a)
            elif x > a:
                total += h * (x - a)
        return total

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({e for a, b, _ in self.pieces() for e in (a, b)}))

    def support(self) -> tuple[float, float]:
        pieces = self.pieces()
        return pieces[0][0], pieces[-1][1]

    def mean_variance(self) -> tuple[float, float]:
        pieces = self.pieces()
        masses = [h * (b - a) for a, b, h in pieces]
        mean = math.fsum(m * 0.5 * (a + b) for m, (a, b, _) in zip(masses, pieces))
        var = math.fsum(
            m * ((b - a) ** 2 / 12.0 + (0.5 * (a + b) - mean) ** 2)
            for m, (a, b, _) in zip(masses, pieces)
        )
        return mean, var

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pieces = np.asarray(self.pieces(), dtype=float)
        masses = pieces[:, 2] * (pieces[:, 1] - pieces[:, 0])
        idx = rng.choice(len(pieces), size=n, p=masses / masses.sum())
        return pieces[idx, 0] + (pieces[idx, 1] - pieces[idx, 0]) * rng.random(n)


class UniformPrior(BoxFamily):
    """Uniform prior on [a, b]."""

    type: Literal["uniform"] = "uniform"
    a: float = 0.0
    b: float = 1.0

    @model_validator(mode="after")
    def check_interval(self):
        if not self.b > self.a:
            raise ValueError(f"uniform prior needs b > a, got [{self.a}, {self.b}]")
        return self

    def pieces(self):
        return ((self.a, self.b, 1.0 / (self.b - self.a)),)


class PiecewiseUniformPrior(BoxFamily):
    """Density that is constant on each of a list of disjoint intervals."""

    type: Literal["piecewise_uniform"] = "piecewise_uniform"
    intervals: tuple[tuple[float, float], ...]
    heights: tuple[float, ...]

    @model_validator(mode="after")
    def check_pieces(self):
        if len(self.intervals) != len(self.heights) or not self.intervals:
            raise ValueError("intervals and heights must have the same nonzero length")
        ordered = sorted(self.intervals)
        for (a, b) in ordered:
            if not b > a:
                raise ValueError(f"interval [{a}, {b}] is empty")
        for (_, b0), (a1, _) in zip(ordered, ordered[1:]):
            if a1 < b0:
                raise ValueError("intervals must be pairwise disjoint")
        if any(h < 0 for h in self.heights):
            raise ValueError("heights must be nonnegative")
        mass = math.fsum(h * (b - a) for (a, b), h in zip(self.intervals, self.heights))
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"piecewise density integrates to {mass}, expected 1")
        return self

    def pieces(self):
        return tuple(
            (a, b, h) for (a, b), h in sorted(zip(self.intervals, self.heights)) if h > 0
        )


# ========== Discrete and mixed ==========

class FinitePMFPrior(PriorBase):
    """Finitely supported discrete prior."""

    type: Literal["pmf"] = "pmf"
    atoms: tuple[tuple[float, float], ...]

    is_bounded: ClassVar[bool] = True

    @field_validator("atoms")
    @classmethod
    def check_atoms(cls, v):
        if not v:
            raise ValueError("a pmf needs at least one atom")
        locations = [loc for loc, _ in v]
        if len(set(locations)) != len(locations):
            raise ValueError("atom locations must be distinct")
        if any(mass < 0 or mass > 1 for _, mass in v):
            raise ValueError("atom masses must lie in [0, 1]")
        total = math.fsum(mass for _, mass in v)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"atom masses sum to {total}, expected 1")
        return tuple(sorted((float(loc), float(mass)) for loc, mass in v))

    def support(self) -> tuple[float, float]:
        locations = [loc for loc, mass in self.atoms if mass > 0]
        return min(locations), max(locations)

    def mean_variance(self) -> tuple[float, float]:
        mean = math.fsum(loc * mass for loc, mass in self.atoms)
        var = math.fsum(mass * (loc - mean) ** 2 for loc, mass in self.atoms)
        return mean, var

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        locations = np.array([loc for loc, _ in self.atoms])
        masses = np.array([mass for _, mass in self.atoms])
        return rng.choice(locations, size=n, p=masses / masses.sum())


ContinuousPrior = Annotated[
    Union[UniformPrior, GaussianPrior, GaussianMixturePrior, PiecewiseUniformPrior],
    Field(discriminator="type"),
]


class MixedPrior(PriorBase):
    """alpha * continuous + (1 - alpha) * discrete."""

    type: Literal["mixed"] = "mixed"
    alpha: float = Field(..., ge=0, le=1)
    continuous: ContinuousPrior
    discrete: FinitePMFPrior

    @property
    def is_bounded(self) -> bool:
        # with alpha = 0 only the atoms carry mass
        return self.alpha == 0 or self.continuous.is_bounded

    def support(self) -> tuple[float, float]:
        parts = []
        if self.alpha > 0:
            parts.append(self.continuous.support())
        if self.alpha < 1:
            parts.append(self.discrete.support())
        return min(p[0] for p in parts), max(p[1] for p in parts)

    def mean_variance(self) -> tuple[float, float]:
        mc, vc = self.continuous.mean_variance()
        md, vd = self.discrete.mean_variance()
        a = self.alpha
        mean = a * mc + (1 - a) * md
        var = a * (vc + (mc - mean) ** 2) + (1 - a) * (vd + (md - mean) ** 2)
        return mean, var

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pick = rng.random(n) < self.alpha
        cont = self.continuous.sample(rng, n)
        disc = self.discrete.sample(rng, n)
        return np.where(pick, cont, disc)


ScalarPrior = Annotated[
    Union[
        UniformPrior,
        GaussianPrior,
        GaussianMixturePrior,
        PiecewiseUniformPrior,
        FinitePMFPrior,
        MixedPrior,
    ],
    Field(discriminator="type"),
]


class ProductPrior(BaseModel):
    """Independent components: P_X = prod_i P_{X_i}."""

    model_config = ConfigDict(frozen=True)

    type: Literal["product"] = "product"
    components: tuple[ScalarPrior, ...] = Field(..., min_length=1)

    @property
    def dimension(self) -> int:
        return len(self.components)


SCALAR_PRIOR_ADAPTER: TypeAdapter = TypeAdapter(ScalarPrior)


# ========== Named families ==========

def bernoulli_prior(p: float) -> FinitePMFPrior:
    return FinitePMFPrior(atoms=((0.0, 1.0 - p), (1.0, p)))


def weighted_gaussian_prior(omega: float, mu: float) -> GaussianMixturePrior:
    """omega * N(-mu, 1) + (1 - omega) * N(mu, 1)."""
    return GaussianMixturePrior(weights=(omega, 1.0 - omega), means=(-mu, mu), variances=(1.0, 1.0))


def two_box_prior() -> PiecewiseUniformPrior:
    """Unit density on [0, 1/2] and [1, 3/2]."""
    return PiecewiseUniformPrior(intervals=((0.0, 0.5), (1.0, 1.5)), heights=(1.0, 1.0))


def _expand_shorthand(data: dict[str, Any]) -> dict[str, Any]:
    kind = data.get("type")
    if kind == "bernoulli":
        p = float(data["p"])
        return {"type": "pmf", "atoms": [[0.0, 1.0 - p], [1.0, p]]}
    if kind == "weighted_gaussian":
        omega, mu = float(data["omega"]), float(data["mu"])
        return {
            "type": "gaussian_mixture",
            "weights": [omega, 1.0 - omega],
            "means": [-mu, mu],
            "variances": [1.0, 1.0],
        }
    if kind == "mixed":
        expanded = dict(data)
        expanded["continuous"] = _expand_shorthand(dict(data["continuous"]))
        expanded["discrete"] = _expand_shorthand(dict(data["discrete"]))
        return expanded
    if kind == "product":
        expanded = dict(data)
        expanded["components"] = [_expand_shorthand(dict(c)) for c in data["components"]]
        return expanded
    return data


def parse_prior(data: dict[str, Any]) -> Union[ScalarPrior, ProductPrior]:
    """Validate a prior record; ``bernoulli`` and ``weighted_gaussian`` shorthands expand first."""
    expanded = _expand_shorthand(dict(data))
    if expanded.get("type") == "product":
        return ProductPrior.model_validate(expanded)
    return SCALAR_PRIOR_ADAPTER.validate_python(expanded)
