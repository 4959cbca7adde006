# app/core/noise.py
import logging
from typing import Sequence

import numpy as np
from pydantic import ValidationError

from app.const.enum import NoiseKind
from app.core.config import ROW_SUM_TOLERANCE
from app.core.errors import DimensionMismatchError, InvalidParameterError
from app.models.noise import FlipSpec, NoiseLevel, NoiseMatrix, NoiseSpec, ProbabilityVector, ValidationReport

logger = logging.getLogger(__name__)


def _noise_level(epsilon: float) -> float:
    try:
        return NoiseLevel(epsilon=epsilon).epsilon
    except ValidationError as e:
        raise InvalidParameterError(f"Noise level must be in [0, 1], got {epsilon}.") from e


def _check_k(k: int) -> int:
    if int(k) < 2:
        raise InvalidParameterError(f"Class count must be at least 2, got {k}.")
    return int(k)


def _normalized(array: np.ndarray) -> NoiseMatrix:
    # Normalisasi baris untuk menyerap pembulatan
    array = array / array.sum(axis=1, keepdims=True)
    return NoiseMatrix.from_array(array)


def uniform_noise(k: int, epsilon: float) -> NoiseMatrix:
    """1 - eps on the diagonal, eps / (k - 1) everywhere else."""
    k = _check_k(k)
    epsilon = _noise_level(epsilon)
    array = np.full((k, k), epsilon / (k - 1))
    np.fill_diagonal(array, 1.0 - epsilon)
    return _normalized(array)


def single_flip_noise(k: int, epsilon: float, spec: FlipSpec) -> NoiseMatrix:
    """Each flipped source keeps 1 - eps and sends eps to its target; other rows are noise-free."""
    k = _check_k(k)
    epsilon = _noise_level(epsilon)
    try:
        spec.check_for(k)
    except ValueError as e:
        raise InvalidParameterError(str(e)) from e
    array = np.eye(k)
    for source, target in spec.mapping:
        array[source, source] = 1.0 - epsilon
        array[source, target] = epsilon
    return _normalized(array)


def cyclic_flips(k: int) -> FlipSpec:
    """Every class flips to the next one (i -> i+1 mod k)."""
    k = _check_k(k)
    return FlipSpec(mapping=[(i, (i + 1) % k) for i in range(k)])


def multi_flip_mnist(epsilon: float) -> NoiseMatrix:
    """Fixed 10-class multi-flip pattern modelled on confusable handwritten digits."""
    e = _noise_level(epsilon)
    d = 1.0 - e
    array = np.array([
        [d,         0,         0,         0,         0,     0,     0,     0,     e / 2,     e / 2],
        [0,         d,         0,         0,         0,     0,     0,     e,     0,         0],
        [e / 3,     0,         d,         2 * e / 3, 0,     0,     0,     0,     0,         0],
        [0,         0,         e / 2,     d,         0,     0,     0,     0,     e / 2,     0],
        [e / 5,     e / 5,     0,         0,         d,     e / 5, e / 5, 0,     e / 5,     0],
        [0,         0,         0,         0,         0,     d,     e / 2, 0,     e / 2,     0],
        [0,         0,         0,         0,         0,     e / 2, d,     0,     e / 2,     0],
        [0,         2 * e / 6, 0,         0,         e / 6, 0,     0,     d,     0,         3 * e / 6],
        [0,         0,         3 * e / 4, 0,         0,     0,     0,     0,     d,         e / 4],
        [e / 3,     0,         0,         0,         e / 3, 0,     0,     0,     e / 3,     d],
    ], dtype=float)
    return _normalized(array)


def build_noise_matrix(spec: NoiseSpec) -> NoiseMatrix:
    if spec.kind == NoiseKind.UNIFORM:
        return uniform_noise(spec.k, spec.epsilon)
    if spec.kind == NoiseKind.SINGLE_FLIP:
        return single_flip_noise(spec.k, spec.epsilon, spec.flips or cyclic_flips(spec.k))
    return multi_flip_mnist(spec.epsilon)


def validate(m: NoiseMatrix) -> ValidationReport:
    """Checks entry range and row sums; reports the first offending row."""
    array = m.array
    for i, row in enumerate(array):
        if not np.all(np.isfinite(row)):
            return ValidationReport(ok=False, row=i, defect="non-finite entry")
        if np.any(row < 0.0):
            return ValidationReport(ok=False, row=i, defect=f"negative entry {float(row.min())!r}")
        if np.any(row > 1.0):
            return ValidationReport(ok=False, row=i, defect=f"entry above 1: {float(row.max())!r}")
        total = float(np.sum(row))
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            return ValidationReport(ok=False, row=i, defect=f"row sums to {total!r}")
    return ValidationReport(ok=True)


def require_valid(m: NoiseMatrix) -> NoiseMatrix:
    report = validate(m)
    if not report.ok:
        raise InvalidParameterError(f"Invalid noise matrix: row {report.row}: {report.defect}.")
    return m


def corrupt_labels(labels: Sequence[int], m: NoiseMatrix, rng: np.random.Generator) -> np.ndarray:
    """Draws each noisy label independently from row labels[t] of m."""
    require_valid(m)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return labels.copy()
    if labels.min() < 0 or labels.max() >= m.k:
        raise InvalidParameterError(f"Labels must be in [0, {m.k}).")
    cdf = np.cumsum(m.array, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(labels.size)
    noisy = (u[:, None] >= cdf[labels]).sum(axis=1)
    return np.minimum(noisy, m.k - 1)


def compose_noisy_posterior(clean: ProbabilityVector, m: NoiseMatrix) -> ProbabilityVector:
    """out[j] = sum_i m[i][j] * clean[i]."""
    if clean.k != m.k:
        raise DimensionMismatchError(f"Posterior has {clean.k} classes, noise matrix has {m.k}.")
    return ProbabilityVector(probs=(clean.as_array() @ m.array).tolist())
