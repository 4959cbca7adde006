# app/models/estimation.py
from typing import Iterable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.const.enum import SamplingVariant


class LabelPair(BaseModel):
    model_config = ConfigDict(frozen=True)
    clean: int = Field(..., ge=0)
    noisy: int = Field(..., ge=0)


class LabelPairSet(BaseModel):
    """Multiset S_NC of (clean, noisy) pairs, stored column-wise."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    k: int = Field(..., ge=1)
    clean: np.ndarray
    noisy: np.ndarray

    @field_validator("clean", "noisy", mode="before")
    @classmethod
    def _as_index_array(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=np.int64).reshape(-1)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_range(self) -> "LabelPairSet":
        if self.clean.shape != self.noisy.shape:
            raise ValueError("Clean and noisy columns differ in length.")
        for column in (self.clean, self.noisy):
            if column.size and (column.min() < 0 or column.max() >= self.k):
                raise ValueError(f"Label index out of range for k={self.k}.")
        return self

    @classmethod
    def from_pairs(cls, k: int, pairs: Iterable) -> "LabelPairSet":
        clean: List[int] = []
        noisy: List[int] = []
        for pair in pairs:
            y, y_hat = (pair.clean, pair.noisy) if isinstance(pair, LabelPair) else pair
            clean.append(y)
            noisy.append(y_hat)
        return cls(k=k, clean=clean, noisy=noisy)

    def __len__(self) -> int:
        return int(self.clean.size)


class SamplingScheme(BaseModel):
    """Fixed(per-class counts n_i) or Variable(total count n)."""
    model_config = ConfigDict(frozen=True)
    variant: SamplingVariant
    per_class: Optional[List[int]] = None
    total: Optional[int] = Field(default=None, ge=0)
    replace: bool = True

    @model_validator(mode="after")
    def _check_counts(self) -> "SamplingScheme":
        if self.variant == SamplingVariant.FIXED:
            if self.per_class is None:
                raise ValueError("Fixed Sampling needs per-class counts.")
            if any(n < 0 for n in self.per_class):
                raise ValueError("Per-class counts must be nonnegative.")
        elif self.total is None:
            raise ValueError("Variable Sampling needs a total count.")
        return self

    @classmethod
    def fixed(cls, per_class: List[int], replace: bool = True) -> "SamplingScheme":
        return cls(variant=SamplingVariant.FIXED, per_class=list(per_class), replace=replace)

    @classmethod
    def variable(cls, total: int, replace: bool = True) -> "SamplingScheme":
        return cls(variant=SamplingVariant.VARIABLE, total=total, replace=replace)

    @property
    def budget(self) -> int:
        return sum(self.per_class) if self.variant == SamplingVariant.FIXED else int(self.total)


class NoiseEstimate(BaseModel):
    """
    Estimate M~ of the noise matrix. Rows with n_i = 0 are all zero and listed
    in `empty_rows`, so the estimate is not necessarily row-stochastic.
    """
    model_config = ConfigDict(frozen=True)
    k: int
    rows: List[List[float]]
    empty_rows: List[int] = Field(default_factory=list)
    counts: List[List[int]] = Field(default_factory=list)
    n_per_class: List[int] = Field(default_factory=list)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)
