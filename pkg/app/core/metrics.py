# app/core/metrics.py
from typing import List, NamedTuple, Optional

import numpy as np

from app.core.errors import DimensionMismatchError


class MicroCounts(NamedTuple):
    true_positives: int
    predicted_positives: int
    actual_positives: int
    precision: float
    recall: float
    f1: float


def f1_from_precision_recall(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when P + R = 0."""
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def _check_pair(gold: np.ndarray, predicted: np.ndarray) -> None:
    if gold.shape != predicted.shape:
        raise DimensionMismatchError(f"Gold has {gold.shape[0]} labels, predictions have {predicted.shape[0]}.")


def micro_counts(gold, predicted, non_entity: Optional[int] = None) -> MicroCounts:
    """
    Token-level micro P/R/F1 over every class except `non_entity`.
    Without a non-entity class every token counts, so P = R = accuracy.
    """
    gold = np.asarray(gold, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    _check_pair(gold, predicted)
    if non_entity is None:
        gold_pos = np.ones(gold.shape, dtype=bool)
        pred_pos = np.ones(predicted.shape, dtype=bool)
    else:
        gold_pos = gold != non_entity
        pred_pos = predicted != non_entity
    tp = int(np.sum((predicted == gold) & gold_pos))
    n_pred, n_actual = int(pred_pos.sum()), int(gold_pos.sum())
    precision, recall = _ratio(tp, n_pred), _ratio(tp, n_actual)
    return MicroCounts(tp, n_pred, n_actual, precision, recall, f1_from_precision_recall(precision, recall))


def accuracy(gold, predicted) -> float:
    gold = np.asarray(gold, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    _check_pair(gold, predicted)
    return _ratio(int(np.sum(gold == predicted)), int(gold.size))


def per_class_f1(gold, predicted, k: int) -> List[float]:
    gold = np.asarray(gold, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    _check_pair(gold, predicted)
    scores = []
    for c in range(k):
        tp = int(np.sum((gold == c) & (predicted == c)))
        p = _ratio(tp, int(np.sum(predicted == c)))
        r = _ratio(tp, int(np.sum(gold == c)))
        scores.append(f1_from_precision_recall(p, r))
    return scores
