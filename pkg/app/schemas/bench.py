import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings
from app.schemas.enums import BenchMethod


def _half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


class ScenarioConfig(BaseModel):
    """Correlated-Gaussian paired scenario with a mean shift on the trailing features."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=30, ge=2)
    d: int = Field(default=10, ge=1)
    std: float = Field(default=1.0, gt=0.0)
    rho: float = Field(default=0.5, ge=-1.0, le=1.0)
    shift: float = 0.0
    shifted_fraction: float = Field(default=0.10, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @property
    def n_shifted(self) -> int:
        return _half_up(self.shifted_fraction * self.d)

    @property
    def scenario_id(self) -> str:
        return f"n{self.n}-d{self.d}-std{self.std:g}-rho{self.rho:g}"


class BenchConfig(BaseModel):
    """Contents of a benchmark configuration file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=30, ge=2)
    dims: List[int] = Field(default=[10, 20, 30, 60], min_length=1)
    stds: List[float] = Field(default=[1.0, 2.0], min_length=1)
    rho: float = Field(default=0.5, ge=-1.0, le=1.0)
    shifted_fraction: float = Field(default=0.10, ge=0.0, le=1.0)
    shifts: List[float] = Field(
        default_factory=lambda: [round(v, 10) for v in np.linspace(0.0, 1.0, 11)],
        min_length=1,
    )
    trials: int = Field(default_factory=lambda: settings.BENCH_TRIALS, ge=1)
    alpha: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA, gt=0.0, lt=1.0)
    methods: List[BenchMethod] = Field(
        default=[BenchMethod.mwsr, BenchMethod.mt_wsr, BenchMethod.mt_ttest, BenchMethod.ht2],
        min_length=1,
    )
    master_seed: int = Field(default_factory=lambda: settings.BENCH_MASTER_SEED, ge=0)
    workers: int = Field(default_factory=lambda: settings.BENCH_WORKERS, ge=1)
    record_runtime: bool = True
    importance: bool = True

    @field_validator("dims")
    @classmethod
    def positive_dims(cls, v):
        if any(d < 1 for d in v):
            raise ValueError("every dimension must be >= 1")
        return v

    @field_validator("stds")
    @classmethod
    def positive_stds(cls, v):
        if any(s <= 0 for s in v):
            raise ValueError("every std must be > 0")
        return v

    def scenarios(self) -> List[ScenarioConfig]:
        return [
            ScenarioConfig(
                n=self.n, d=d, std=std, rho=self.rho, shifted_fraction=self.shifted_fraction
            )
            for d in self.dims
            for std in self.stds
        ]


class BenchRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: BenchMethod
    n: int
    d: int
    std: float
    rho: float
    shift: float
    trials: int
    alpha: float
    detections: int
    errors: int
    detection_rate: float = Field(ge=0.0, le=1.0)
    mean_runtime_s: Optional[float] = None

    @model_validator(mode="after")
    def check_rate(self):
        if not math.isclose(self.detection_rate, self.detections / self.trials):
            raise ValueError("detection_rate must equal detections / trials")
        return self


class ImportanceRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario_id: str
    shift: float
    feature_index: int
    feature_name: str
    mwsr_mean_abs_importance: Optional[float] = None
    mt_significant_fraction: Optional[float] = None


class BenchReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: List[BenchRow]
    importance_summary: List[ImportanceRow] = []
    config_digest: str
