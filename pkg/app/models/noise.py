# app/models/noise.py
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from app.const.enum import NoiseKind

SIMPLEX_TOLERANCE = 1e-9


class NoiseLevel(BaseModel):
    """Noise level epsilon in [0, 1]."""
    model_config = ConfigDict(frozen=True)
    epsilon: float = Field(..., ge=0.0, le=1.0)


class FlipSpec(BaseModel):
    """Single-flip pattern: (source, target) pairs, at most one target per source."""
    model_config = ConfigDict(frozen=True)
    mapping: List[Tuple[int, int]] = Field(default_factory=list)

    @field_validator("mapping")
    @classmethod
    def _check_mapping(cls, mapping: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        seen = set()
        for source, target in mapping:
            if source < 0 or target < 0:
                raise ValueError(f"Negative class index in flip {source}->{target}.")
            if source == target:
                raise ValueError(f"Flip {source}->{target} maps a class onto itself.")
            if source in seen:
                raise ValueError(f"Duplicate flip source {source}.")
            seen.add(source)
        return mapping

    def check_for(self, k: int) -> None:
        for source, target in self.mapping:
            if source >= k or target >= k:
                raise ValueError(f"Flip {source}->{target} out of range for k={k}.")


class ClassPrior(BaseModel):
    """Distribution P(y) over k classes."""
    model_config = ConfigDict(frozen=True)
    k: int = Field(..., ge=1)
    probs: List[float]

    @model_validator(mode="after")
    def _check_simplex(self) -> "ClassPrior":
        if len(self.probs) != self.k:
            raise ValueError(f"Prior has {len(self.probs)} entries, expected {self.k}.")
        _check_probabilities(self.probs)
        return self

    @classmethod
    def uniform(cls, k: int) -> "ClassPrior":
        return cls(k=k, probs=[1.0 / k] * k)


class ProbabilityVector(BaseModel):
    model_config = ConfigDict(frozen=True)
    probs: List[float]

    @field_validator("probs")
    @classmethod
    def _check_simplex(cls, probs: List[float]) -> List[float]:
        _check_probabilities(probs)
        return probs

    @property
    def k(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


class NoiseMatrix(BaseModel):
    """
    k x k transition matrix, rows[i][j] = p(noisy=j | clean=i).
    Only the shape is enforced here; row-stochasticity is checked by `validate`.
    """
    model_config = ConfigDict(frozen=True)
    k: int = Field(..., ge=2)
    rows: List[List[float]]

    _array: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def _check_shape(self) -> "NoiseMatrix":
        if len(self.rows) != self.k or any(len(row) != self.k for row in self.rows):
            raise ValueError(f"Noise matrix must be {self.k}x{self.k}.")
        return self

    def model_post_init(self, __context) -> None:
        array = np.array(self.rows, dtype=float)
        array.flags.writeable = False
        self._array = array

    @property
    def array(self) -> np.ndarray:
        """Read-only dense view."""
        return self._array

    @classmethod
    def from_array(cls, array: np.ndarray) -> "NoiseMatrix":
        array = np.asarray(array, dtype=float)
        return cls(k=array.shape[0], rows=array.tolist())


class ValidationReport(BaseModel):
    ok: bool
    row: Optional[int] = None
    defect: Optional[str] = None


class NoiseSpec(BaseModel):
    """Recipe for a synthetic noise matrix; can be rebuilt at any noise level."""
    model_config = ConfigDict(frozen=True)
    kind: NoiseKind
    k: int = Field(default=10, ge=2)
    epsilon: float = Field(..., ge=0.0, le=1.0)
    flips: Optional[FlipSpec] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "NoiseSpec":
        if self.kind == NoiseKind.MULTI_FLIP_MNIST and self.k != 10:
            raise ValueError("multi-flip-mnist noise is defined for k=10 only.")
        if self.flips is not None:
            self.flips.check_for(self.k)
        return self

    def with_epsilon(self, epsilon: float) -> "NoiseSpec":
        return NoiseSpec(kind=self.kind, k=self.k, epsilon=epsilon, flips=self.flips)


def _check_probabilities(probs: List[float]) -> None:
    values = np.asarray(probs, dtype=float)
    if values.size == 0:
        raise ValueError("Probability vector is empty.")
    if not np.all(np.isfinite(values)) or np.any(values < 0.0):
        raise ValueError("Probabilities must be finite and nonnegative.")
    if abs(float(np.sum(values)) - 1.0) > SIMPLEX_TOLERANCE:
        raise ValueError(f"Probabilities sum to {float(np.sum(values))}, expected 1.")
