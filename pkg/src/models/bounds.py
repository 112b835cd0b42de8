"""
Pydantic models for hypothesis tests, bound curves, bound reports and verdicts.
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.numerics import GridSpec, QuadratureConfig

CURVE_SLACK = 1e-9

BoundFamily = Literal["zz_valley", "zz_plain", "zz_single_point"]
OracleMethod = Literal["posterior_quadrature", "monte_carlo"]
TightnessCondition = Literal[
    "cor1_unimodal_symmetric", "prop6_argmax_intersection", "prop7_atom_count"
]


class HypothesisSpec(BaseModel):
    """M shifted hypotheses x + u_k, u_k = k*t, with prior probabilities p_k."""

    model_config = ConfigDict(frozen=True)

    anchor: float = 0.0
    offsets: tuple[float, ...]
    priors: tuple[float, ...]

    @model_validator(mode="after")
    def check_hypotheses(self):
        m = len(self.offsets)
        if m < 2:
            raise ValueError("at least two hypotheses are required")
        if len(self.priors) != m:
            raise ValueError("offsets and priors must have the same length")
        if any(p < 0 for p in self.priors):
            raise ValueError("hypothesis priors must be nonnegative")
        if abs(math.fsum(self.priors) - 1.0) > 1e-12:
            raise ValueError(f"hypothesis priors sum to {math.fsum(self.priors)}, expected 1")
        gaps = [b - a for a, b in zip(self.offsets, self.offsets[1:])]
        if any(g <= 0 for g in gaps):
            raise ValueError("offsets must be strictly increasing")
        if max(gaps) - min(gaps) > 1e-9 * max(1.0, max(gaps)):
            raise ValueError("offsets must be equi-spaced")
        return self

    @classmethod
    def equispaced(
        cls, t: float, priors: tuple[float, ...], anchor: float = 0.0
    ) -> "HypothesisSpec":
        return cls(anchor=anchor, offsets=tuple(k * t for k in range(len(priors))), priors=priors)

    @property
    def M(self) -> int:
        return len(self.offsets)

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(self.anchor + u for u in self.offsets)


class BoundCurve(BaseModel):
    """Sampled g(t) = h_M(t) / (M - 1) plus spikes at critical offsets."""

    model_config = ConfigDict(frozen=True)

    grid: GridSpec
    M: int = Field(..., ge=2)
    points: tuple[float, ...]
    values: tuple[float, ...]
    spike_atoms: tuple[tuple[float, float], ...] = ()

    @model_validator(mode="after")
    def check_curve(self):
        if len(self.points) != len(self.values):
            raise ValueError("points and values must have the same length")
        for v in self.values:
            if not -CURVE_SLACK <= v <= 1.0 + CURVE_SLACK:
                raise ValueError(f"curve value {v} outside [0, 1]")
        ts = [t for t, _ in self.spike_atoms]
        if ts != sorted(ts):
            raise ValueError("spike atoms must be sorted by t")
        return self


class BoundDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    tail_flag: bool = False
    grid_used: Optional[GridSpec] = None
    argmax_delta: Optional[float] = Field(None, gt=0)
    spike_count: int = 0


class BoundReport(BaseModel):
    """A bound value with its per-axis decomposition and diagnostics."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0)
    family: BoundFamily
    M: int = Field(..., ge=2)
    per_axis: tuple[float, ...]
    diagnostics: BoundDiagnostics = Field(default_factory=BoundDiagnostics)

    @model_validator(mode="after")
    def check_sum(self):
        if self.value != math.fsum(self.per_axis):
            raise ValueError("value must equal the sum of per_axis")
        return self


class HighNoiseCurve(BaseModel):
    """Sampled channel-free H_M(t) plus spikes at critical offsets."""

    model_config = ConfigDict(frozen=True)

    grid: GridSpec
    M: int = Field(..., ge=2)
    points: tuple[float, ...]
    H_values: tuple[float, ...]
    spike_atoms: tuple[tuple[float, float], ...] = ()

    @model_validator(mode="after")
    def check_range(self):
        if len(self.points) != len(self.H_values):
            raise ValueError("points and H_values must have the same length")
        for h in self.H_values:
            if not 1.0 - CURVE_SLACK <= h <= self.M + CURVE_SLACK:
                raise ValueError(f"H value {h} outside [1, {self.M}]")
        return self

    def g_values(self) -> tuple[float, ...]:
        return tuple(min(1.0, max(0.0, (self.M - h) / (self.M - 1))) for h in self.H_values)


class HighNoiseBounds(BaseModel):
    """Channel-free high-noise limits of the three bound families."""

    model_config = ConfigDict(frozen=True)

    v_bar: float = Field(..., ge=0)
    v: float = Field(..., ge=0)
    v_sp: float = Field(..., ge=0)
    M: int = Field(..., ge=2)
    diagnostics: BoundDiagnostics = Field(default_factory=BoundDiagnostics)


class LowNoiseSlope(BaseModel):
    """Bound-to-noise ratios at small eta and their linear extrapolation to eta = 0."""

    model_config = ConfigDict(frozen=True)

    family: BoundFamily
    M: int = Field(..., ge=2)
    etas: tuple[float, ...]
    ratios: tuple[float, ...]
    intercept: float
    target: Optional[float] = None


class OracleConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: OracleMethod = "posterior_quadrature"
    samples: int = Field(100_000, ge=10_000)
    seed: int = Field(20240917, ge=0, lt=2**64)
    chunks: int = Field(16, ge=1, description="Independent seed streams for Monte Carlo")
    quad: QuadratureConfig = Field(default_factory=QuadratureConfig)


class OracleEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0)
    std_error: Optional[float] = None
    flagged: bool = False
    method: OracleMethod


class TightnessVerdict(BaseModel):
    """Outcome of a sampled tightness check; a failed check carries witnesses."""

    model_config = ConfigDict(frozen=True)

    condition: TightnessCondition
    holds: bool
    witnesses: tuple[tuple[float, ...], ...] = ()
    tolerance: float = Field(..., gt=0)
    samples_checked: int = 0
    mmse_estimate: Optional[OracleEstimate] = Field(
        None, description="Monte Carlo MMSE from the same draws, for sampled checks"
    )

    @model_validator(mode="after")
    def check_witnesses(self):
        if self.holds == bool(self.witnesses):
            raise ValueError("holds must be false exactly when witnesses are present")
        return self
