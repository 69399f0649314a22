from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.enums import MethodTag, Tail, UniTest, WsrMode


class WsrStatistic(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_plus: float = Field(ge=0.0)
    n_effective: int = Field(ge=1)
    had_ties: bool
    had_zeros: bool
    # sizes of groups of tied |z| values, used by the tie-corrected variance
    tie_sizes: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def check_range(self):
        upper = self.n_effective * (self.n_effective + 1) / 2
        if self.t_plus > upper:
            raise ValueError(f"t_plus={self.t_plus} exceeds n(n+1)/2={upper}")
        return self


class TestOutcome(BaseModel):
    __test__ = False

    model_config = ConfigDict(frozen=True)

    statistic: float
    p_value: float = Field(ge=0.0, le=1.0)
    effect_size: float
    alpha: float = Field(gt=0.0, lt=1.0)
    significant: bool
    method: MethodTag
    tail: Tail = Tail.two_sided
    n_effective: Optional[int] = None
    # exact or normal, for signed-rank based outcomes
    p_value_mode: Optional[WsrMode] = None
    warnings: List[str] = []

    @model_validator(mode="after")
    def check_decision(self):
        if self.significant != (self.p_value < self.alpha):
            raise ValueError("significant must equal p_value < alpha")
        return self


class HotellingDetail(BaseModel):
    model_config = ConfigDict(frozen=True)

    t2: float
    f_statistic: float
    df1: int
    df2: int
    outcome: TestOutcome


class MtResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    per_feature_p: List[float]
    corrected_alpha: float
    significant_features: List[int]
    overall_significant: bool
    uni_test: UniTest
    alpha: float
    feature_names: List[str] = []
    degenerate_features: List[int] = []
    per_feature_statistic: List[float] = []

    @model_validator(mode="after")
    def check_bonferroni(self):
        expected = [k for k, p in enumerate(self.per_feature_p) if p < self.corrected_alpha]
        if expected != list(self.significant_features):
            raise ValueError("significant_features must be the features with p < alpha/d")
        if self.overall_significant != bool(expected):
            raise ValueError("overall_significant must be true iff a feature is significant")
        return self
