# app/core/benchmark.py
import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.core.errors import InvalidParameterError
from app.core.noise import corrupt_labels, uniform_noise
from app.core.utils import child_rng
from app.models.corpus import ParallelCorpus
from app.models.noise import ClassPrior, NoiseMatrix

logger = logging.getLogger(__name__)

BLOBS_RADIUS = 1.5
BLOBS_SIGMA = 1.0


def blob_centers(k: int, d: int, radius: float = BLOBS_RADIUS) -> np.ndarray:
    """k centres evenly spaced on a circle in the first two coordinates."""
    if d < 2:
        raise InvalidParameterError(f"Blobs need at least 2 feature dimensions, got {d}.")
    angles = 2.0 * math.pi * np.arange(k) / k
    centers = np.zeros((k, d))
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    return centers


def make_blobs_corpus(
    n: int,
    m: NoiseMatrix,
    rng: np.random.Generator,
    prior: Optional[ClassPrior] = None,
    d: int = 2,
    radius: float = BLOBS_RADIUS,
    sigma: float = BLOBS_SIGMA,
) -> ParallelCorpus:
    """Isotropic Gaussian blobs; clean labels from the prior, noisy labels drawn through m."""
    k = m.k
    prior = prior or ClassPrior.uniform(k)
    if prior.k != k:
        raise InvalidParameterError(f"Prior has {prior.k} classes, noise matrix has {k}.")
    clean = rng.choice(k, size=n, p=np.asarray(prior.probs))
    features = blob_centers(k, d, radius)[clean] + sigma * rng.standard_normal((n, d))
    noisy = corrupt_labels(clean, m, rng)
    return ParallelCorpus(
        k=k,
        label_names=[f"c{i}" for i in range(k)],
        label_set_names=["noisy"],
        tokens=[f"x{t}" for t in range(n)],
        clean=clean,
        noisy=noisy.reshape(n, 1),
        features=features,
        sentences=np.zeros(n, dtype=np.int64),
    )


class BlobsBenchmark(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    train: ParallelCorpus
    test: ParallelCorpus
    truth: NoiseMatrix
    prior: ClassPrior


def make_blobs_benchmark(
    seed: int,
    k: int = 3,
    d: int = 2,
    n_train: int = 3000,
    n_test: int = 1000,
    epsilon: float = 0.6,
    prior: Optional[ClassPrior] = None,
    noise: Optional[NoiseMatrix] = None,
) -> BlobsBenchmark:
    """Noisy training pool and clean held-out test set; uniform noise at `epsilon` unless `noise` is given."""
    truth = noise if noise is not None else uniform_noise(k, epsilon)
    if truth.k != k:
        raise InvalidParameterError(f"Noise matrix has {truth.k} classes, benchmark has {k}.")
    prior = prior or ClassPrior.uniform(k)
    train = make_blobs_corpus(n_train, truth, child_rng(seed, 0), prior, d)
    test = make_blobs_corpus(n_test, truth, child_rng(seed, 1), prior, d)
    logger.info(f"Blobs benchmark: k={k} d={d} train={n_train} test={n_test} custom_noise={noise is not None}")
    return BlobsBenchmark(train=train, test=test, truth=truth, prior=prior)
