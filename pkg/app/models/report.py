# app/models/report.py
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .estimation import SamplingScheme
from .noise import ClassPrior


class ExpectedErrorReport(BaseModel):
    """Closed-form E[SE]: per-entry estimator variances and their total."""
    model_config = ConfigDict(frozen=True)
    per_entry_variance: List[List[float]]
    total: float = Field(..., ge=0.0)
    scheme: SamplingScheme
    prior: Optional[ClassPrior] = None  # Variable Sampling saja
    empty_row_probability: Optional[List[float]] = None

    @property
    def variance(self) -> np.ndarray:
        return np.asarray(self.per_entry_variance, dtype=float)


class SimulationResult(BaseModel):
    """
    Aggregate of a Monte Carlo run. `std_se` is the spread of SE across
    repetitions, not the standard error of the mean.
    """
    mean_se: float = Field(..., ge=0.0)
    std_se: float = Field(..., ge=0.0)
    per_repetition_se: Optional[List[float]] = None
    theory_se: Optional[float] = None
    empty_row_rate: float = Field(..., ge=0.0, le=1.0)
    repetitions: int = Field(..., ge=1)
    ground_truth_is_approximation: bool = False
