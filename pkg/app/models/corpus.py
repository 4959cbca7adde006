# app/models/corpus.py
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.errors import InvalidParameterError

NER_LABELS: List[str] = ["O", "PER", "LOC", "ORG"]
DOCSTART = "-DOCSTART-"


class ParallelCorpus(BaseModel):
    """
    Instances with parallel clean and noisy labels, stored column-wise.

    `clean` has shape (N,), `noisy` has shape (N, L) with one column per loaded
    label set, `features` has shape (N, d) (d may be 0) and `sentences` holds the
    sentence index of every instance.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=0)
    label_names: List[str]
    label_set_names: List[str]
    tokens: List[str]
    clean: np.ndarray
    noisy: np.ndarray
    features: np.ndarray
    sentences: np.ndarray

    @field_validator("clean", "sentences", mode="before")
    @classmethod
    def _as_index_vector(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=np.int64).reshape(-1)
        array.flags.writeable = False
        return array

    @field_validator("noisy", mode="before")
    @classmethod
    def _as_index_matrix(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=np.int64)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        array.flags.writeable = False
        return array

    @field_validator("features", mode="before")
    @classmethod
    def _as_feature_matrix(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=float)
        if array.ndim == 1:
            array = array.reshape(0, 0) if array.size == 0 else array.reshape(-1, 1)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_columns(self) -> "ParallelCorpus":
        n = self.clean.shape[0]
        if len(self.label_names) != self.k:
            raise ValueError(f"Expected {self.k} label names, got {len(self.label_names)}.")
        if len(self.tokens) != n or self.sentences.shape[0] != n:
            raise ValueError("Token and sentence columns must match the instance count.")
        if self.noisy.shape != (n, len(self.label_set_names)):
            raise ValueError(
                f"Noisy labels have shape {self.noisy.shape}, expected ({n}, {len(self.label_set_names)})."
            )
        if self.features.shape[0] != n:
            raise ValueError("Every instance needs a feature vector of the same length.")
        if n and (self.clean.min() < 0 or self.clean.max() >= self.k):
            raise ValueError(f"Clean label index out of range for k={self.k}.")
        if self.noisy.size and (self.noisy.min() < 0 or self.noisy.max() >= self.k):
            raise ValueError(f"Noisy label index out of range for k={self.k}.")
        if self.features.size and not np.all(np.isfinite(self.features)):
            raise ValueError("Feature values must be finite.")
        return self

    @property
    def size(self) -> int:
        return int(self.clean.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def label_set_index(self, label_set: Optional[str]) -> int:
        """Column of a named noisy label set; None picks the first one."""
        if not self.label_set_names:
            raise InvalidParameterError("Corpus has no noisy label sets.")
        if label_set is None:
            return 0
        try:
            return self.label_set_names.index(label_set)
        except ValueError:
            raise InvalidParameterError(
                f"Unknown label set '{label_set}'. Available: {', '.join(self.label_set_names)}."
            )

    def noisy_labels(self, label_set: Optional[str] = None) -> np.ndarray:
        return self.noisy[:, self.label_set_index(label_set)]

    def label_index(self, name: str) -> int:
        try:
            return self.label_names.index(name)
        except ValueError:
            raise InvalidParameterError(f"Unknown label '{name}'. Available: {', '.join(self.label_names)}.")

    def subset(self, indices) -> "ParallelCorpus":
        idx = np.asarray(indices, dtype=np.int64)
        return ParallelCorpus(
            k=self.k,
            label_names=list(self.label_names),
            label_set_names=list(self.label_set_names),
            tokens=[self.tokens[i] for i in idx],
            clean=self.clean[idx],
            noisy=self.noisy[idx],
            features=self.features[idx].reshape(idx.size, self.d),
            sentences=self.sentences[idx],
        )


class TsvSchema(BaseModel):
    """
    Column layout of a token-per-line corpus: token, clean tag, `noisy_columns`
    noisy tags, then any number of float feature columns.
    """
    model_config = ConfigDict(frozen=True)
    noisy_columns: int = Field(default=1, ge=1)
    label_set_names: Optional[List[str]] = None
    feature_dim: Optional[int] = Field(default=None, ge=0)
    label_inventory: Optional[List[str]] = None  # closed inventory; None = first-appearance order

    @model_validator(mode="after")
    def _check_names(self) -> "TsvSchema":
        if self.label_set_names is not None and len(self.label_set_names) != self.noisy_columns:
            raise ValueError(
                f"{len(self.label_set_names)} label set names given for {self.noisy_columns} noisy columns."
            )
        if self.label_inventory is not None and len(set(self.label_inventory)) != len(self.label_inventory):
            raise ValueError("Label inventory contains duplicates.")
        return self

    @property
    def set_names(self) -> List[str]:
        return self.label_set_names or [f"noisy{i + 1}" for i in range(self.noisy_columns)]


class QualityReport(BaseModel):
    """Token-level micro metrics of a noisy label set against the clean labels."""
    label_set: str
    non_entity: Optional[str] = None
    precision: float = Field(..., ge=0.0, le=1.0)
    recall: float = Field(..., ge=0.0, le=1.0)
    f1: float = Field(..., ge=0.0, le=1.0)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    true_positives: int = 0
    predicted_positives: int = 0
    actual_positives: int = 0
    tokens: int = 0
