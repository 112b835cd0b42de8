"""
Pydantic models for the numerical layer: grids, quadrature and search settings.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GridSpec(BaseModel):
    """Discretization of the outer integral over the separation t."""

    model_config = ConfigDict(frozen=True)

    t_max: float = Field(..., gt=0, description="Upper truncation of the t-integral")
    n_points: int = Field(512, ge=2, description="Number of structured grid points")
    spacing: Literal["linear", "log_linear"] = Field(
        "log_linear", description="Uniform grid or log-spaced head with a linear tail"
    )
    t_split: Optional[float] = Field(
        None, gt=0, description="Switch point between the log and linear parts"
    )
    t_min: Optional[float] = Field(None, gt=0, description="First point of the log part")
    extra_atoms: tuple[float, ...] = Field(
        default_factory=tuple, description="Critical offsets spliced into the grid"
    )

    @field_validator("extra_atoms")
    @classmethod
    def dedupe_atoms(cls, v):
        return tuple(sorted(set(float(a) for a in v)))

    @model_validator(mode="after")
    def check_atoms_in_range(self):
        for atom in self.extra_atoms:
            if not 0 < atom <= self.t_max:
                raise ValueError(f"extra atom {atom} outside (0, {self.t_max}]")
        if self.t_split is not None and self.t_split >= self.t_max:
            raise ValueError("t_split must be below t_max")
        if (
            self.t_min is not None
            and self.t_split is not None
            and self.t_min >= self.t_split
        ):
            raise ValueError("t_min must be below t_split")
        return self

    def with_atoms(self, atoms) -> "GridSpec":
        """Copy with the atoms inside (0, t_max] added to extra_atoms."""
        inside = [float(a) for a in atoms if 0 < a <= self.t_max]
        if set(inside) <= set(self.extra_atoms):
            return self
        return GridSpec.model_validate(
            {**self.model_dump(), "extra_atoms": (*self.extra_atoms, *inside)}
        )


class QuadratureConfig(BaseModel):
    """Tolerances and budgets of the adaptive Simpson integrator."""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(1e-9, gt=0)
    rel_tol: float = Field(1e-9, gt=0)
    max_subdivisions: int = Field(200_000, ge=1)
    domain_margin_sigmas: float = Field(10.0, gt=0)
    max_depth: int = Field(15, ge=1, description="Recursion cap per initial panel")
    initial_panels: int = Field(8, ge=1, description="Panels per breakpoint interval")


class SearchConfig(BaseModel):
    """Coarse scan plus golden-section refinement used by maximize_1d."""

    model_config = ConfigDict(frozen=True)

    coarse_points: int = Field(128, ge=8)
    refine_tol: float = Field(1e-8, gt=0)
    delta_max: Optional[float] = Field(
        None, gt=0, description="Upper end of the separation search; prior-derived when unset"
    )
