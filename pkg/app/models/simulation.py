# app/models/simulation.py
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import DEFAULT_REPETITIONS

from .corpus import ParallelCorpus
from .estimation import SamplingScheme
from .noise import ClassPrior, NoiseMatrix, NoiseSpec


class SyntheticSource(BaseModel):
    """Ground truth is known exactly: a noise matrix (or its recipe) plus a class prior."""
    model_config = ConfigDict(frozen=True)
    matrix: Optional[NoiseMatrix] = None
    spec: Optional[NoiseSpec] = None
    prior: Optional[ClassPrior] = None  # None = uniform

    @model_validator(mode="after")
    def _check_matrix(self) -> "SyntheticSource":
        if (self.matrix is None) == (self.spec is None):
            raise ValueError("Synthetic source needs exactly one of matrix or spec.")
        k = self.matrix.k if self.matrix is not None else self.spec.k
        if self.prior is not None and self.prior.k != k:
            raise ValueError(f"Prior has {self.prior.k} classes, noise matrix has {k}.")
        return self


class CorpusSource(BaseModel):
    """Ground truth is the whole-corpus matrix, an approximation by construction."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    corpus: ParallelCorpus
    label_set: Optional[str] = None


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)
    repetitions: int = Field(default=DEFAULT_REPETITIONS, ge=1)
    scheme: SamplingScheme
    source: Union[SyntheticSource, CorpusSource]
    master_seed: int = Field(..., ge=0, lt=2**64)
    retain_repetitions: bool = True
