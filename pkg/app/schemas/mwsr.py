from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.exceptions import DomainError
from app.schemas.outcome import TestOutcome


def _frozen_vector(value) -> np.ndarray:
    arr = np.array(value, dtype=float).ravel()
    arr.flags.writeable = False
    return arr


class Hyperplane(BaseModel):
    """Linear decision rule w.x + b = 0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: np.ndarray
    b: float

    @field_validator("w", mode="before")
    @classmethod
    def to_vector(cls, v):
        return _frozen_vector(v)

    @model_validator(mode="after")
    def check_finite(self):
        if self.w.size == 0:
            raise DomainError("Hyperplane needs at least one coefficient")
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.b)):
            raise DomainError("Hyperplane coefficients must be finite")
        return self

    @property
    def d(self) -> int:
        return self.w.size

    def decision_value(self, points) -> np.ndarray:
        return np.atleast_2d(np.asarray(points, dtype=float)) @ self.w + self.b

    def scaled(self, k: float) -> "Hyperplane":
        return Hyperplane(w=self.w * k, b=self.b * k)


class ScorePair(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s1: np.ndarray
    s2: np.ndarray

    @field_validator("s1", "s2", mode="before")
    @classmethod
    def to_vector(cls, v):
        return _frozen_vector(v)

    @model_validator(mode="after")
    def check_lengths(self):
        if self.s1.size != self.s2.size:
            raise DomainError(f"Score vectors differ in length: {self.s1.size} vs {self.s2.size}")
        if not (np.all(np.isfinite(self.s1)) and np.all(np.isfinite(self.s2))):
            raise DomainError("Scores must be finite")
        return self

    @property
    def differences(self) -> np.ndarray:
        return self.s2 - self.s1


class MwsrResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rule: Hyperplane
    scores: ScorePair
    outcome: TestOutcome
    importance: np.ndarray
    # theta* along the unit normal of the rule, expressed in feature units
    effect_vector: np.ndarray
    feature_names: List[str]
    subject_indices: List[int]
    dropped_pairs: List[int] = []
    normalized_bisectors: bool = True

    @field_validator("importance", "effect_vector", mode="before")
    @classmethod
    def to_vector(cls, v):
        return _frozen_vector(v)

    def importance_ranking(self) -> List[dict]:
        """Features sorted by |importance|, largest first."""
        order = np.argsort(-np.abs(self.importance), kind="mergesort")
        return [
            {
                "feature": self.feature_names[k],
                "index": int(k),
                "importance": float(self.importance[k]),
                "abs_importance": float(abs(self.importance[k])),
            }
            for k in order
        ]
