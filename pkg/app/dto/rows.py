# app/dto/rows.py
from typing import ClassVar, List, Optional, Tuple

from pydantic import BaseModel


class CsvRow(BaseModel):
    """A record written as one CSV line; field order is column order."""
    columns: ClassVar[Tuple[str, ...]] = ()

    @classmethod
    def header(cls) -> List[str]:
        return list(cls.columns or cls.model_fields.keys())

    def values(self) -> list:
        return [getattr(self, name) for name in self.header()]


class CurveRow(CsvRow):
    grid_value: float
    expected_se: float


class SweepRow(CsvRow):
    grid_value: float
    theory_se: Optional[float] = None
    empirical_mean_se: float
    empirical_std_se: float
    empty_row_rate: float


class RepetitionRow(CsvRow):
    repetition: int
    se: float


class CorrelationRow(CsvRow):
    columns: ClassVar[Tuple[str, ...]] = ("grid", "expected_se", "mean_metric", "std_metric")
    grid: float
    expected_se: float
    mean_metric: float
    std_metric: float


class EpochTraceRow(CsvRow):
    epoch: int
    clean_loss: float
    noisy_loss: Optional[float] = None
    dev_accuracy: Optional[float] = None
