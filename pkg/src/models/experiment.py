"""
Pydantic models for experiment files and result rows.
"""

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.bounds import BoundFamily
from src.models.channel import AwgnChannel
from src.models.prior import ProductPrior, ScalarPrior, parse_prior

Family = Literal[
    "zz_valley",
    "zz_plain",
    "szzb",
    "highnoise_valley",
    "highnoise_plain",
    "highnoise_sp",
    "mmse",
    "crb",
    "crb_channel",
    "meb",
    "variance",
]

HIGH_NOISE_FAMILIES = frozenset({"highnoise_valley", "highnoise_plain", "highnoise_sp"})
CHANNEL_FAMILIES = frozenset({"zz_valley", "zz_plain", "szzb", "mmse", "crb_channel"})
ZZ_FAMILY_NAMES: dict[str, BoundFamily] = {
    "zz_valley": "zz_valley",
    "zz_plain": "zz_plain",
    "szzb": "zz_single_point",
}


class BoundSpec(BaseModel):
    family: Family
    M: int = Field(2, ge=2)


class GridOverrides(BaseModel):
    n_points: Optional[int] = Field(None, ge=2)
    spacing: Optional[Literal["linear", "log_linear"]] = None
    t_max: Optional[float] = Field(None, gt=0)


class SweepSpec(BaseModel):
    """Dotted path into the raw experiment record and the values it takes."""

    parameter: str = Field(..., min_length=1)
    values: list[float] = Field(..., min_length=1)

    @field_validator("parameter")
    @classmethod
    def check_path(cls, v):
        if v.split(".")[0] not in {"prior", "channel", "bound"}:
            raise ValueError(f"sweep parameter must start with prior, channel or bound: {v}")
        return v


class ExperimentConfig(BaseModel):
    """One experiment file: a prior, an optional channel and the bound to compute."""

    model_config = ConfigDict(extra="forbid")

    prior: dict[str, Any]
    channel: Optional[AwgnChannel] = None
    bound: BoundSpec
    grid: GridOverrides = Field(default_factory=GridOverrides)
    search: dict[str, Any] = Field(default_factory=dict)
    quad: dict[str, Any] = Field(default_factory=dict)
    oracle: dict[str, Any] = Field(default_factory=dict)
    sweep: Optional[SweepSpec] = None
    seed: Optional[int] = Field(None, ge=0)
    output: Optional[str] = None

    @model_validator(mode="after")
    def check_compatibility(self):
        prior = parse_prior(self.prior)
        family = self.bound.family
        if family in HIGH_NOISE_FAMILIES and self.channel is not None:
            raise ValueError(f"family '{family}' is channel-free; remove the channel block")
        if family in CHANNEL_FAMILIES and self.channel is None:
            raise ValueError(f"family '{family}' requires a channel block")
        if self.sweep is not None:
            models = {"prior": prior, "channel": self.channel, "bound": self.bound}
            locate(self._raw_record(), self.sweep.parameter, models)
        return self

    def prior_model(self) -> Union[ScalarPrior, ProductPrior]:
        return parse_prior(self.prior)

    def _raw_record(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude={"sweep"}, exclude_none=True)

    def at(self, value: float) -> "ExperimentConfig":
        """Copy with the sweep parameter set to value (sweep removed)."""
        if self.sweep is None:
            return self
        raw = self._raw_record()
        node, key = locate(raw, self.sweep.parameter)
        node[key] = int(value) if key == "M" else value
        return ExperimentConfig.model_validate(raw)


def _segment_key(node: Union[dict, list], segment: str, path: str) -> Union[str, int]:
    if isinstance(node, list):
        if not segment.isdigit() or int(segment) >= len(node):
            raise ValueError(
                f"sweep parameter {path}: '{segment}' is not an index into a list of {len(node)}"
            )
        return int(segment)
    return segment


def _child_model(model: Any, key: Union[str, int]) -> Any:
    if isinstance(model, dict):
        return model.get(key)
    if isinstance(model, (tuple, list)) and isinstance(key, int) and key < len(model):
        return model[key]
    if isinstance(model, BaseModel) and isinstance(key, str):
        return getattr(model, key, None)
    return None


def locate(
    record: dict[str, Any], path: str, models: Any = None
) -> tuple[Union[dict, list], Union[str, int]]:
    """Container and key a dotted sweep path addresses; numeric segments index lists.

    A leaf missing from a record is accepted only when the parsed model at that
    position declares it as a field, so defaults can be swept.
    """
    *parents, leaf = path.split(".")
    node: Any = record
    model = models
    for segment in parents:
        key = _segment_key(node, segment, path)
        if isinstance(node, dict) and key not in node:
            raise ValueError(f"sweep parameter {path}: unknown field '{segment}'")
        node = node[key]
        model = _child_model(model, key)
        if not isinstance(node, (dict, list)):
            raise ValueError(f"sweep parameter {path}: '{segment}' holds a number, not a record")
    key = _segment_key(node, leaf, path)
    if isinstance(node, dict) and key not in node:
        fields = type(model).model_fields if isinstance(model, BaseModel) else {}
        if models is not None and key not in fields:
            raise ValueError(f"sweep parameter {path}: unknown field '{leaf}'")
    elif isinstance(node[key], (dict, list, str)):
        raise ValueError(f"sweep parameter {path} must address a number")
    return node, key


class ResultRow(BaseModel):
    """One CSV row; per_axis has one entry per prior component."""

    model_config = ConfigDict(frozen=True)

    sweep_value: Optional[float] = None
    family: Family
    M: int
    value: float
    per_axis: tuple[float, ...]
    tail_flag: bool = False
    argmax_delta: Optional[float] = None
    wall_time_ms: Optional[float] = None
