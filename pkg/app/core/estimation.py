# app/core/estimation.py
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.const.enum import SamplingVariant
from app.core.errors import DimensionMismatchError, InvalidParameterError, SamplingError
from app.models.corpus import ParallelCorpus
from app.models.estimation import LabelPairSet, NoiseEstimate, SamplingScheme
from app.models.noise import NoiseMatrix

logger = logging.getLogger(__name__)

MatrixLike = Union[NoiseMatrix, NoiseEstimate, np.ndarray]


def _as_array(m: MatrixLike) -> np.ndarray:
    if isinstance(m, (NoiseMatrix, NoiseEstimate)):
        return m.array
    return np.asarray(m, dtype=float)


def count_matrix(s: LabelPairSet) -> Tuple[np.ndarray, np.ndarray]:
    """Transition counts m_ij and per-class totals n_i."""
    flat = s.clean * s.k + s.noisy
    counts = np.bincount(flat, minlength=s.k * s.k).reshape(s.k, s.k)
    return counts, counts.sum(axis=1)


def estimate_noise_matrix(s: LabelPairSet) -> NoiseEstimate:
    """
    M~_ij = m_ij / n_i. Rows with n_i = 0 stay all zero and are flagged in
    `empty_rows`; they are never renormalised.
    """
    counts, n = count_matrix(s)
    rows = np.zeros((s.k, s.k), dtype=float)
    seen = n > 0
    rows[seen] = counts[seen] / n[seen, None]
    empty = [int(i) for i in np.flatnonzero(~seen)]
    if empty:
        logger.debug(f"Estimate has empty rows {empty} (n_i = 0)")
    return NoiseEstimate(
        k=s.k,
        rows=rows.tolist(),
        empty_rows=empty,
        counts=counts.tolist(),
        n_per_class=n.tolist(),
    )


def squared_error(m: MatrixLike, est: MatrixLike) -> float:
    """Squared Frobenius norm of m - est."""
    a, b = _as_array(m), _as_array(est)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Cannot compare {a.shape} matrix with {b.shape} estimate.")
    return float(np.sum((a - b) ** 2))


# --- Index sampling (shared by simulation and training) ---

def fixed_sample_indices(
    clean: np.ndarray, per_class: Sequence[int], rng: np.random.Generator, replace: bool = True
) -> np.ndarray:
    """Instance indices: per_class[i] draws among instances whose clean label is i."""
    clean = np.asarray(clean, dtype=np.int64)
    picked = []
    for i, n_i in enumerate(per_class):
        if n_i < 0:
            raise InvalidParameterError(f"Per-class count for class {i} is negative.")
        if n_i == 0:
            continue
        pool = np.flatnonzero(clean == i)
        if pool.size == 0 or (not replace and n_i > pool.size):
            raise SamplingError(
                f"Class {i} has {pool.size} instances, cannot draw {n_i} "
                f"{'with' if replace else 'without'} replacement."
            )
        picked.append(rng.choice(pool, size=int(n_i), replace=replace))
    if not picked:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(picked).astype(np.int64)


def variable_sample_indices(size: int, n: int, rng: np.random.Generator, replace: bool = True) -> np.ndarray:
    """n instance indices drawn uniformly from the whole corpus."""
    if n < 0:
        raise InvalidParameterError(f"Sample size must be nonnegative, got {n}.")
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if size == 0 or (not replace and n > size):
        raise SamplingError(f"Corpus has {size} instances, cannot draw {n} {'with' if replace else 'without'} replacement.")
    return rng.choice(size, size=int(n), replace=replace).astype(np.int64)


def pairs_at(corpus: ParallelCorpus, idx: np.ndarray, label_set: Optional[str] = None) -> LabelPairSet:
    """(clean, noisy) pairs of the instances at `idx`."""
    noisy = corpus.noisy_labels(label_set)
    return LabelPairSet(k=corpus.k, clean=corpus.clean[idx], noisy=noisy[idx])


def fixed_sample(
    corpus: ParallelCorpus,
    per_class: Sequence[int],
    rng: np.random.Generator,
    replace: bool = True,
    label_set: Optional[str] = None,
) -> LabelPairSet:
    if len(per_class) != corpus.k:
        raise DimensionMismatchError(f"Got {len(per_class)} per-class counts for k={corpus.k}.")
    idx = fixed_sample_indices(corpus.clean, per_class, rng, replace=replace)
    return pairs_at(corpus, idx, label_set)


def variable_sample(
    corpus: ParallelCorpus,
    n: int,
    rng: np.random.Generator,
    replace: bool = True,
    label_set: Optional[str] = None,
) -> LabelPairSet:
    idx = variable_sample_indices(corpus.size, n, rng, replace=replace)
    return pairs_at(corpus, idx, label_set)


def sample_indices(corpus: ParallelCorpus, scheme: SamplingScheme, rng: np.random.Generator) -> np.ndarray:
    if scheme.variant == SamplingVariant.FIXED:
        if len(scheme.per_class) != corpus.k:
            raise DimensionMismatchError(f"Got {len(scheme.per_class)} per-class counts for k={corpus.k}.")
        return fixed_sample_indices(corpus.clean, scheme.per_class, rng, replace=scheme.replace)
    return variable_sample_indices(corpus.size, scheme.total, rng, replace=scheme.replace)


def sample_pairs(
    corpus: ParallelCorpus, scheme: SamplingScheme, rng: np.random.Generator, label_set: Optional[str] = None
) -> LabelPairSet:
    return pairs_at(corpus, sample_indices(corpus, scheme, rng), label_set)
