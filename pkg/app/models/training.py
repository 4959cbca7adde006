# app/models/training.py
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import DEFAULT_LOG_EPSILON, DEFAULT_NOISY_MULTIPLIER
from app.dto.rows import EpochTraceRow


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


class LinearSoftmaxModel(BaseModel):
    """Multinomial logistic regression: softmax(W x + b), W is k x d."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    weights: np.ndarray
    bias: np.ndarray

    @field_validator("weights", "bias", mode="before")
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        return _frozen(value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "LinearSoftmaxModel":
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError(f"Weights {self.weights.shape} and bias {self.bias.shape} do not fit together.")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("Model parameters must be finite.")
        return self

    @property
    def k(self) -> int:
        return int(self.weights.shape[0])

    @property
    def d(self) -> int:
        return int(self.weights.shape[1])

    @classmethod
    def zeros(cls, k: int, d: int) -> "LinearSoftmaxModel":
        return cls(weights=np.zeros((k, d)), bias=np.zeros(k))


class LabeledData(BaseModel):
    """Feature matrix (N x d) with one label per row."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    features: np.ndarray
    labels: np.ndarray

    @field_validator("features", mode="before")
    @classmethod
    def _as_features(cls, value) -> np.ndarray:
        array = np.array(value, dtype=float)
        if array.ndim != 2:
            raise ValueError(f"Features must be a 2-d array, got {array.ndim} dimension(s).")
        array.flags.writeable = False
        return array

    @field_validator("labels", mode="before")
    @classmethod
    def _as_labels(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.int64).reshape(-1)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_rows(self) -> "LabeledData":
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(f"{self.features.shape[0]} feature rows for {self.labels.shape[0]} labels.")
        return self

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)
    epochs: int = Field(default=20, ge=1)
    learning_rate: float = Field(default=0.1, gt=0.0)
    batch_size: int = Field(default=32, ge=1)
    noisy_multiplier: float = Field(default=DEFAULT_NOISY_MULTIPLIER, gt=0.0)
    log_epsilon: float = Field(default=DEFAULT_LOG_EPSILON, gt=0.0, le=1e-6)
    seed: int = Field(..., ge=0, lt=2**64)


class EvalResult(BaseModel):
    accuracy: float = Field(..., ge=0.0, le=1.0)
    micro_f1_excl: float = Field(..., ge=0.0, le=1.0)
    per_class_f1: List[float]
    non_entity_class: Optional[int] = None


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)
    model: LinearSoftmaxModel
    trace: List[EpochTraceRow]
    best_epoch: int
