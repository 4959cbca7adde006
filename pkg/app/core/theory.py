# app/core/theory.py
import logging
import math
from typing import List, Sequence, Union

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from app.const.enum import GridAxis, SamplingVariant
from app.core.config import EMPTY_ROW_WARN_THRESHOLD
from app.core.errors import DimensionMismatchError, InvalidParameterError
from app.core.noise import build_noise_matrix, require_valid
from app.core.utils import compensated_sum
from app.dto.rows import CurveRow
from app.models.estimation import SamplingScheme
from app.models.noise import ClassPrior, NoiseMatrix, NoiseSpec
from app.models.report import ExpectedErrorReport

logger = logging.getLogger(__name__)


def _check_probability(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"Probability must be in [0, 1], got {p}.")
    return float(p)


def binomial_pmf(n: int, p: float, x: int) -> float:
    """C(n, x) p^x (1-p)^(n-x), evaluated in log space."""
    p = _check_probability(p)
    if n < 0 or not 0 <= x <= n:
        raise InvalidParameterError(f"Successes must satisfy 0 <= x <= n, got x={x}, n={n}.")
    log_choose = gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1)
    # xlogy/xlog1py give 0*log(0) = 0 at p in {0, 1}
    log_pmf = log_choose + xlogy(x, p) + xlog1py(n - x, -p)
    return float(np.exp(log_pmf))


def _binomial_pmf_vector(n: int, p: float) -> np.ndarray:
    x = np.arange(0, n + 1, dtype=float)
    log_pmf = gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1) + xlogy(x, p) + xlog1py(n - x, -p)
    return np.exp(log_pmf)


def truncated_reciprocal_expectation(n: int, p: float) -> float:
    """sum_{x=1..n} P(N = x) / x for N ~ Binomial(n, p); the N = 0 mass is excluded."""
    p = _check_probability(p)
    if n < 1:
        raise InvalidParameterError(f"Trial count must be at least 1, got {n}.")
    terms = _binomial_pmf_vector(n, p)[1:] / np.arange(1, n + 1, dtype=float)
    return compensated_sum(np.sort(terms))


def empty_row_probability(n: int, p: float) -> float:
    """P(N_i = 0) = (1 - p)^n under Variable Sampling."""
    p = _check_probability(p)
    return float(np.exp(xlog1py(n, -p)))


def _per_class(per_class: Union[int, Sequence[int]], k: int) -> List[int]:
    counts = [int(per_class)] * k if isinstance(per_class, (int, np.integer)) else [int(n) for n in per_class]
    if len(counts) != k:
        raise DimensionMismatchError(f"Got {len(counts)} per-class counts for k={k}.")
    for i, n_i in enumerate(counts):
        if n_i < 1:
            raise InvalidParameterError(f"Fixed Sampling needs n_i >= 1 for every class; class {i} has {n_i}.")
    return counts


def _bernoulli_variance(m: NoiseMatrix) -> np.ndarray:
    a = m.array
    return a * (1.0 - a)


def expected_error_fixed(m: NoiseMatrix, per_class: Union[int, Sequence[int]]) -> ExpectedErrorReport:
    """Var[M~_ij] = M_ij (1 - M_ij) / n_i; E[SE] is their sum."""
    require_valid(m)
    counts = _per_class(per_class, m.k)
    variance = _bernoulli_variance(m) / np.asarray(counts, dtype=float)[:, None]
    return ExpectedErrorReport(
        per_entry_variance=variance.tolist(),
        total=compensated_sum(variance.ravel()),
        scheme=SamplingScheme.fixed(counts),
    )


def expected_error_variable(m: NoiseMatrix, prior: ClassPrior, n: int) -> ExpectedErrorReport:
    """Var[M~_ij] = M_ij (1 - M_ij) E[1/N_i; N_i >= 1] with N_i ~ Binomial(n, prior_i)."""
    require_valid(m)
    if prior.k != m.k:
        raise DimensionMismatchError(f"Prior has {prior.k} classes, noise matrix has {m.k}.")
    if n < 1:
        raise InvalidParameterError(f"Variable Sampling needs n >= 1, got {n}.")
    factors = np.array([truncated_reciprocal_expectation(n, p) for p in prior.probs])
    empty = [empty_row_probability(n, p) for p in prior.probs]
    for i, p_empty in enumerate(empty):
        if p_empty > EMPTY_ROW_WARN_THRESHOLD:
            logger.warning(
                f"P(N_{i}=0) = {p_empty:.3g} exceeds {EMPTY_ROW_WARN_THRESHOLD:g} at n={n}; "
                "closed form will deviate from simulation."
            )
    variance = _bernoulli_variance(m) * factors[:, None]
    return ExpectedErrorReport(
        per_entry_variance=variance.tolist(),
        total=compensated_sum(variance.ravel()),
        scheme=SamplingScheme.variable(n),
        prior=prior,
        empty_row_probability=empty,
    )


def expected_error_from_scheme(m: NoiseMatrix, scheme: SamplingScheme, prior: ClassPrior = None) -> ExpectedErrorReport:
    if scheme.variant == SamplingVariant.FIXED:
        return expected_error_fixed(m, scheme.per_class)
    return expected_error_variable(m, prior or ClassPrior.uniform(m.k), scheme.total)


def _scheme_at_size(template: SamplingScheme, size: int, k: int) -> SamplingScheme:
    # Grid value is n_i for Fixed and the total n for Variable
    if template.variant == SamplingVariant.FIXED:
        return SamplingScheme.fixed([int(size)] * k, replace=template.replace)
    return SamplingScheme.variable(int(size), replace=template.replace)


def scheme_at(template: SamplingScheme, axis: GridAxis, value: float, k: int) -> SamplingScheme:
    if axis == GridAxis.SAMPLE_SIZE:
        if float(value) != int(value) or value < 0:
            raise InvalidParameterError(f"Sample-size grid values must be nonnegative integers, got {value}.")
        return _scheme_at_size(template, int(value), k)
    return template


def matrix_at(source: Union[NoiseMatrix, NoiseSpec], axis: GridAxis, value: float) -> NoiseMatrix:
    if axis == GridAxis.NOISE_LEVEL:
        if not isinstance(source, NoiseSpec):
            raise InvalidParameterError("A noise-level grid needs a synthetic noise spec, not a fixed matrix.")
        return build_noise_matrix(source.with_epsilon(float(value)))
    return source if isinstance(source, NoiseMatrix) else build_noise_matrix(source)


def error_curve(
    m: Union[NoiseMatrix, NoiseSpec],
    template: SamplingScheme,
    grid: Sequence[float],
    axis: GridAxis = GridAxis.SAMPLE_SIZE,
    prior: ClassPrior = None,
) -> List[CurveRow]:
    """E[SE] at every grid point; noise-level grids rebuild the matrix at each epsilon."""
    if not grid:
        raise InvalidParameterError("Grid must not be empty.")
    points = []
    for value in grid:
        matrix = matrix_at(m, axis, value)
        scheme = scheme_at(template, axis, value, matrix.k)
        report = expected_error_from_scheme(matrix, scheme, prior)
        points.append(CurveRow(grid_value=float(value), expected_se=report.total))
    logger.debug(f"Evaluated error curve over {len(points)} {axis.value} points")
    return points


def fixed_budget_for(prior: ClassPrior, n: int) -> List[int]:
    """n_i = round(n * prior_i), the Fixed counterpart of a Variable budget n."""
    return [int(math.floor(n * p + 0.5)) for p in prior.probs]
