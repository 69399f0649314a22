from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.exceptions import DataValidationError


def _frozen_matrix(value) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise DataValidationError(f"Expected a rectangular numeric matrix: {e}")
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DataValidationError(f"Expected a 2-d matrix, got {arr.ndim} dimensions")
    arr.flags.writeable = False
    return arr


class PairedSample(BaseModel):
    """Two aligned N x d measurements of the same subjects, paired by row."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    y: np.ndarray
    feature_names: List[str]

    @field_validator("x", "y", mode="before")
    @classmethod
    def to_matrix(cls, v):
        return _frozen_matrix(v)

    @model_validator(mode="after")
    def check_pairing(self):
        if self.x.shape != self.y.shape:
            raise DataValidationError(
                f"x and y must have identical shapes, got {self.x.shape} and {self.y.shape}"
            )
        n, d = self.x.shape
        if n < 1 or d < 1:
            raise DataValidationError(f"Paired sample needs N >= 1 and d >= 1, got N={n}, d={d}")
        for name, matrix in (("x", self.x), ("y", self.y)):
            if not np.all(np.isfinite(matrix)):
                row, col = np.argwhere(~np.isfinite(matrix))[0]
                raise DataValidationError(
                    f"Non-finite value in {name} at row {row}, column {col}"
                )
        if len(self.feature_names) != d:
            raise DataValidationError(
                f"Expected {d} feature names, got {len(self.feature_names)}"
            )
        if any(not name for name in self.feature_names):
            raise DataValidationError("Feature names must be non-empty")
        if len(set(self.feature_names)) != d:
            raise DataValidationError("Feature names must be unique")
        return self

    @classmethod
    def from_arrays(cls, x, y, feature_names: List[str] = None) -> "PairedSample":
        x = _frozen_matrix(x)
        if feature_names is None:
            feature_names = [f"x{k + 1}" for k in range(x.shape[1])]
        return cls(x=x, y=y, feature_names=feature_names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def take_rows(self, rows) -> "PairedSample":
        return PairedSample(
            x=self.x[rows], y=self.y[rows], feature_names=list(self.feature_names)
        )


class DifferenceSample(BaseModel):
    """Paired differences y - x: a vector when d == 1, a matrix otherwise."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    z: np.ndarray
    feature_names: List[str]

    @field_validator("z", mode="before")
    @classmethod
    def freeze(cls, v):
        arr = np.array(v, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DataValidationError("Differences contain non-finite values")
        arr.flags.writeable = False
        return arr

    def column(self, k: int) -> np.ndarray:
        return self.z if self.z.ndim == 1 else self.z[:, k]
