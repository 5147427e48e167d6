# backend/satlab/schemas.py

import math
from enum import Enum
from typing import Any, Optional
from datetime import datetime

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class OutputFormat(str, Enum):
    text = "text"
    csv = "csv"
    json = "json"


class EnsembleMode(str, Enum):
    oracle = "oracle"
    formula_bucket = "formula_bucket"


class Decision(str, Enum):
    # Part of the results-file vocabulary; the sequential rule never emits it.
    same = "same"
    different = "different"
    inconclusive = "inconclusive"


class RunStatus(str, Enum):
    pending = "pending"
    running = "running"
    success = "success"
    failed = "failed"


# --------------------------------------------------------------------------- #
# Value types
# --------------------------------------------------------------------------- #


class BernoulliPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=0.0, le=1.0)


class Orientation(BaseModel):
    """Filter angle; restricted to [0, pi/2] where cos^2 is one-to-one."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(..., ge=0.0, le=math.pi / 2)


class KOnesIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=1)
    k: int = Field(..., ge=0)
    I: int = Field(..., ge=1)


class BoundReport(BaseModel):
    """
    A description-length bound in bits.
    The additive constant c is never quantified, so it is left out and flagged.
    """

    model_config = ConfigDict(frozen=True)

    bits_excluding_constant: float = Field(..., ge=0.0)
    constant_note: bool = True


class KEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    input_bits: int = Field(..., ge=1)
    k_hat_bits: int = Field(..., ge=0)
    compressor: str

    @computed_field
    @property
    def log2_p_hat(self) -> float:
        return -float(self.k_hat_bits)


# --------------------------------------------------------------------------- #
# Records
# --------------------------------------------------------------------------- #


class DistanceRecord(BaseModel):
    p1: float
    p2: float
    m: Optional[int] = None
    distance_rad: float
    min_trials: Optional[int] = None
    packing_count: Optional[int] = None
    normalized_count: Optional[float] = None


class TrialRecord(BaseModel):
    ensemble: str
    index: int = Field(..., ge=0)
    assignment: Optional[int] = None  # None for oracle draws
    output: int = Field(..., ge=0, le=1)


class ExperimentResult(BaseModel):
    decision: Decision
    trials_used: int = Field(..., ge=0)
    empirical_p: dict[str, float]
    seed: int
    config: dict[str, Any]

    @model_validator(mode="after")
    def _within_budget(self) -> "ExperimentResult":
        max_m = self.config.get("max_m")
        if max_m is not None and self.trials_used > max_m:
            raise ValueError(f"trials_used={self.trials_used} exceeds max_m={max_m}")
        return self


class ResultsHeader(BaseModel):
    format_version: int
    config: dict[str, Any]
    master_seed: int


class FirstSuccessStats(BaseModel):
    mean: float
    median: float
    reps: int
    censored: int = 0  # runs that reached max_m without a 1


class ScalingRow(BaseModel):
    n: int
    median_trials: float
    mean_trials: float
    reps: int


class BucketReport(BaseModel):
    k: int
    gamma: float
    members: int
    log2_p_hat: float
    median_trials: Optional[float] = None
    inconclusive: int = 0
    included: bool = True


class ComplexityReport(BaseModel):
    n: int
    seed: int
    reference: str
    buckets: list[BucketReport]
    aggregate: float
    config: dict[str, Any]


class RunConfig(BaseModel):
    """Everything needed to reproduce a CLI run; echoed into its output."""

    subcommand: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    master_seed: int = Field(0, ge=0, lt=2**64)
    output_format: OutputFormat = OutputFormat.text
    output_path: Optional[str] = None


class ExperimentRunOut(BaseModel):
    id: int
    subcommand: str
    master_seed: int
    status: RunStatus
    started_at: datetime
    ended_at: Optional[datetime] = None
    record_count: Optional[int] = None
    error_message: Optional[str] = None

    model_config = ConfigDict(from_attributes=True)

    @field_validator("status", mode="before")
    @classmethod
    def _status_value(cls, v: Any) -> Any:
        # ORM rows carry the db-side enum; match on its value.
        return getattr(v, "value", v)
