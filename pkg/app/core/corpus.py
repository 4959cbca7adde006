# app/core/corpus.py
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.errors import InvalidParameterError
from app.core.estimation import estimate_noise_matrix
from app.core.metrics import accuracy, micro_counts
from app.models.corpus import ParallelCorpus, QualityReport
from app.models.estimation import LabelPairSet
from app.models.noise import ClassPrior, NoiseMatrix

logger = logging.getLogger(__name__)


def corpus_pairs(corpus: ParallelCorpus, label_set: Optional[str] = None) -> LabelPairSet:
    return LabelPairSet(k=corpus.k, clean=corpus.clean, noisy=corpus.noisy_labels(label_set))


def empirical_noise_matrix(corpus: ParallelCorpus, label_set: Optional[str] = None) -> NoiseMatrix:
    """Whole-data matrix over every (clean, noisy) pair; every class must occur as a clean label."""
    if corpus.k < 2:
        raise InvalidParameterError(f"A noise matrix needs at least 2 classes, corpus has {corpus.k}.")
    estimate = estimate_noise_matrix(corpus_pairs(corpus, label_set))
    if estimate.empty_rows:
        missing = ", ".join(f"'{corpus.label_names[i]}' ({i})" for i in estimate.empty_rows)
        raise InvalidParameterError(f"Class {missing} never occurs as a clean label; whole-data matrix is incomplete.")
    return NoiseMatrix.from_array(estimate.array)


def class_prior(corpus: ParallelCorpus) -> ClassPrior:
    """Clean-label frequencies."""
    if corpus.size == 0:
        raise InvalidParameterError("Cannot compute a class prior from an empty corpus.")
    counts = np.bincount(corpus.clean, minlength=corpus.k)
    return ClassPrior(k=corpus.k, probs=(counts / corpus.size).tolist())


def quality_report(
    corpus: ParallelCorpus, label_set: Optional[str] = None, non_entity: Optional[str] = None
) -> QualityReport:
    """Noisy labels scored as predictions against the clean labels."""
    column = corpus.label_set_index(label_set)
    non_entity_index = corpus.label_index(non_entity) if non_entity is not None else None
    noisy = corpus.noisy[:, column]
    counts = micro_counts(corpus.clean, noisy, non_entity_index)
    return QualityReport(
        label_set=corpus.label_set_names[column],
        non_entity=non_entity,
        precision=counts.precision,
        recall=counts.recall,
        f1=counts.f1,
        accuracy=accuracy(corpus.clean, noisy),
        true_positives=counts.true_positives,
        predicted_positives=counts.predicted_positives,
        actual_positives=counts.actual_positives,
        tokens=corpus.size,
    )


def split_corpus(
    corpus: ParallelCorpus, rng: np.random.Generator, fractions: Sequence[float] = (0.8, 0.1, 0.1)
) -> Tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Seeded train/dev/test split at instance level."""
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidParameterError(f"Split fractions must be three nonnegative values summing to 1, got {fractions}.")
    order = rng.permutation(corpus.size)
    n_train = int(round(fractions[0] * corpus.size))
    n_dev = int(round(fractions[1] * corpus.size))
    parts = (order[:n_train], order[n_train:n_train + n_dev], order[n_train + n_dev:])
    logger.debug(f"Split {corpus.size} instances into {[p.size for p in parts]}")
    return tuple(corpus.subset(np.sort(p)) for p in parts)
