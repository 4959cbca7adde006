# app/core/training.py
import logging
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import softmax
from scipy.stats import pearsonr

from app.const.enum import Metric, SamplingVariant, TrainingArm
from app.core.config import DEFAULT_LOG_EPSILON
from app.core.corpus import class_prior, empirical_noise_matrix
from app.core.errors import DimensionMismatchError, InvalidParameterError
from app.core.estimation import estimate_noise_matrix, fixed_sample_indices, pairs_at, sample_indices
from app.core.metrics import accuracy, micro_counts, per_class_f1
from app.core.noise import compose_noisy_posterior, require_valid
from app.core.theory import expected_error_fixed, expected_error_variable
from app.core.utils import child_rng, compensated_sum, derive_seed
from app.dto.rows import CorrelationRow, EpochTraceRow
from app.models.corpus import ParallelCorpus
from app.models.estimation import NoiseEstimate, SamplingScheme
from app.models.noise import ClassPrior, NoiseMatrix, ProbabilityVector
from app.models.training import EvalResult, LabeledData, LinearSoftmaxModel, TrainConfig, TrainResult
from app.scheduler.workers import run_ordered

logger = logging.getLogger(__name__)

NoiseLayer = Union[NoiseMatrix, NoiseEstimate]


# --- Forward pass ---

def _check_features(model: LinearSoftmaxModel, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != model.d:
        raise DimensionMismatchError(f"Model expects {model.d} features, got {x.shape[-1]}.")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("Features must be finite.")
    return x


def predict_proba(model: LinearSoftmaxModel, features: np.ndarray) -> np.ndarray:
    """Clean posteriors for a batch, shape (N, k)."""
    x = _check_features(model, np.atleast_2d(features))
    return softmax(x @ model.weights.T + model.bias, axis=1)


def forward_clean(model: LinearSoftmaxModel, features: Sequence[float]) -> ProbabilityVector:
    x = _check_features(model, features)
    if x.ndim != 1:
        raise DimensionMismatchError("forward_clean takes a single feature vector; use predict_proba for batches.")
    return ProbabilityVector(probs=predict_proba(model, x)[0].tolist())


def forward_noisy(model: LinearSoftmaxModel, m: NoiseMatrix, features: Sequence[float]) -> ProbabilityVector:
    """Clean posterior passed through the fixed noise layer."""
    return compose_noisy_posterior(forward_clean(model, features), m)


# --- Loss and gradient ---

class _Step(NamedTuple):
    loss: float
    grad_weights: np.ndarray
    grad_bias: np.ndarray


def _loss_grad(
    weights: np.ndarray, bias: np.ndarray, transition: np.ndarray, x: np.ndarray, y: np.ndarray, log_epsilon: float
) -> _Step:
    p = softmax(x @ weights.T + bias, axis=1)
    rows = np.arange(y.size)
    q = p @ transition
    q_t = q[rows, y]
    clamped = q_t < log_epsilon
    safe = np.where(clamped, log_epsilon, q_t)
    loss = float(np.mean(-np.log(safe)))
    # d(-log q_t)/dp_i = -M[i, t] / q_t; zero below the clamp
    g = -transition[:, y].T / safe[:, None]
    g[clamped] = 0.0
    dz = p * (g - np.sum(g * p, axis=1, keepdims=True))
    n = float(y.size)
    return _Step(loss, dz.T @ x / n, dz.sum(axis=0) / n)


def _check_batch(model: LinearSoftmaxModel, batch: LabeledData) -> None:
    if batch.size == 0:
        raise InvalidParameterError("Batch must not be empty.")
    _check_features(model, batch.features)
    if batch.labels.min() < 0 or batch.labels.max() >= model.k:
        raise InvalidParameterError(f"Labels must be in [0, {model.k}).")


def _transition(m: Optional[NoiseMatrix], k: int) -> np.ndarray:
    if m is None:
        return np.eye(k)
    if m.k != k:
        raise DimensionMismatchError(f"Noise matrix has {m.k} classes, model has {k}.")
    return m.array


def loss_and_gradient(
    model: LinearSoftmaxModel,
    m: Optional[NoiseMatrix],
    batch: LabeledData,
    log_epsilon: float = DEFAULT_LOG_EPSILON,
) -> Tuple[float, LinearSoftmaxModel]:
    """
    Mean -log p(target) where p is the noisy posterior when `m` is given and
    the clean posterior otherwise. The gradient (same shape as the model)
    covers the model parameters only; `m` stays fixed.
    """
    _check_batch(model, batch)
    step = _loss_grad(model.weights, model.bias, _transition(m, model.k), batch.features, batch.labels, log_epsilon)
    return step.loss, LinearSoftmaxModel(weights=step.grad_weights, bias=step.grad_bias)


# --- Training ---

def noise_layer(m: Optional[NoiseLayer]) -> Optional[NoiseMatrix]:
    """Training-time noise layer. Empty estimate rows become uniform rows."""
    if m is None or isinstance(m, NoiseMatrix):
        return m
    array = m.array.copy()
    if m.empty_rows:
        array[m.empty_rows] = 1.0 / m.k
        logger.info(f"Estimate rows {m.empty_rows} are empty; using uniform rows for training")
    return require_valid(NoiseMatrix.from_array(array))


def _run_pass(
    weights: np.ndarray,
    bias: np.ndarray,
    transition: np.ndarray,
    data: LabeledData,
    order: np.ndarray,
    config: TrainConfig,
) -> float:
    """One pass of mini-batch gradient descent in `order`; updates in place, returns the mean loss."""
    losses, sizes = [], []
    for start in range(0, order.size, config.batch_size):
        idx = order[start:start + config.batch_size]
        step = _loss_grad(weights, bias, transition, data.features[idx], data.labels[idx], config.log_epsilon)
        weights -= config.learning_rate * step.grad_weights
        bias -= config.learning_rate * step.grad_bias
        losses.append(step.loss * idx.size)
        sizes.append(idx.size)
    return compensated_sum(losses) / sum(sizes)


def _dev_accuracy(weights: np.ndarray, bias: np.ndarray, dev: LabeledData) -> float:
    predicted = np.argmax(dev.features @ weights.T + bias, axis=1)
    return accuracy(dev.labels, predicted)


def train(
    init: LinearSoftmaxModel,
    clean: LabeledData,
    noisy: Optional[LabeledData],
    m: Optional[NoiseLayer],
    config: TrainConfig,
    dev: Optional[LabeledData] = None,
) -> TrainResult:
    """
    Each epoch: one pass over the clean set, then one pass over a freshly drawn
    noisy subset of noisy_multiplier * |clean| instances (capped at |noisy|),
    through the noise layer when `m` is given. Without a dev set the last
    epoch wins; otherwise the epoch with the best dev accuracy (earliest on ties).
    """
    if clean.size == 0:
        raise InvalidParameterError("Clean training set is empty.")
    _check_batch(init, clean)
    if noisy is not None and noisy.size:
        _check_batch(init, noisy)
    layer = noise_layer(m)
    transition_clean = np.eye(init.k)
    transition_noisy = _transition(layer, init.k)

    rng = child_rng(config.seed)
    weights, bias = init.weights.copy(), init.bias.copy()
    noisy_size = 0
    if noisy is not None and noisy.size:
        noisy_size = min(int(round(config.noisy_multiplier * clean.size)), noisy.size)

    trace: List[EpochTraceRow] = []
    best = (None, -1.0, weights.copy(), bias.copy())
    for epoch in range(1, config.epochs + 1):
        clean_loss = _run_pass(weights, bias, transition_clean, clean, rng.permutation(clean.size), config)
        noisy_loss = None
        if noisy_size:
            subset = rng.choice(noisy.size, size=noisy_size, replace=False)
            noisy_loss = _run_pass(weights, bias, transition_noisy, noisy, subset, config)
        dev_acc = _dev_accuracy(weights, bias, dev) if dev is not None and dev.size else None
        trace.append(EpochTraceRow(epoch=epoch, clean_loss=clean_loss, noisy_loss=noisy_loss, dev_accuracy=dev_acc))
        if dev_acc is None or dev_acc > best[1]:
            best = (epoch, -1.0 if dev_acc is None else dev_acc, weights.copy(), bias.copy())
        logger.debug(f"Epoch {epoch}: clean_loss={clean_loss:.5f} noisy_loss={noisy_loss} dev_accuracy={dev_acc}")

    if not (np.all(np.isfinite(best[2])) and np.all(np.isfinite(best[3]))):
        raise InvalidParameterError("Training diverged to non-finite weights; lower the learning rate.")
    best_epoch = best[0]
    logger.info(f"Training finished after {config.epochs} epochs; using epoch {best_epoch}")
    return TrainResult(model=LinearSoftmaxModel(weights=best[2], bias=best[3]), trace=trace, best_epoch=best_epoch)


# --- Evaluation ---

def evaluate(model: LinearSoftmaxModel, test: LabeledData, non_entity: Optional[int] = None) -> EvalResult:
    if test.size == 0:
        raise InvalidParameterError("Test set is empty.")
    predicted = np.argmax(predict_proba(model, test.features), axis=1)
    return EvalResult(
        accuracy=accuracy(test.labels, predicted),
        micro_f1_excl=micro_counts(test.labels, predicted, non_entity).f1,
        per_class_f1=per_class_f1(test.labels, predicted, model.k),
        non_entity_class=non_entity,
    )


def metric_value(result: EvalResult, metric: Metric) -> float:
    return result.accuracy if metric == Metric.ACCURACY else result.micro_f1_excl


# --- Corpus adapters ---

def clean_data(corpus: ParallelCorpus, indices=None) -> LabeledData:
    if indices is None:
        return LabeledData(features=corpus.features, labels=corpus.clean)
    idx = np.asarray(indices, dtype=np.int64)
    return LabeledData(features=corpus.features[idx].reshape(idx.size, corpus.d), labels=corpus.clean[idx])


def noisy_data(corpus: ParallelCorpus, label_set: Optional[str] = None) -> LabeledData:
    return LabeledData(features=corpus.features, labels=corpus.noisy_labels(label_set))


def _require_features(corpus: ParallelCorpus) -> None:
    if corpus.d == 0:
        raise InvalidParameterError("Training needs feature columns in the corpus.")


def clean_sample(train_corpus: ParallelCorpus, clean_per_class: Sequence[int], seed: int) -> np.ndarray:
    """Indices of the clean training sample, drawn per class without replacement."""
    if len(clean_per_class) != train_corpus.k:
        raise DimensionMismatchError(f"Got {len(clean_per_class)} per-class counts for k={train_corpus.k}.")
    return fixed_sample_indices(train_corpus.clean, clean_per_class, child_rng(seed, 1), replace=False)


class ArmSetup(NamedTuple):
    clean: LabeledData
    noisy: Optional[LabeledData]
    layer: Optional[NoiseLayer]


def arm_setup(
    train_corpus: ParallelCorpus,
    clean_idx: np.ndarray,
    arm: TrainingArm,
    label_set: Optional[str] = None,
    matrix: Optional[NoiseLayer] = None,
) -> ArmSetup:
    """
    Training data of one arm. The noise-handled arm uses `matrix` when given,
    otherwise the estimate from the clean sample's own (clean, noisy) pairs.
    """
    _require_features(train_corpus)
    clean = clean_data(train_corpus, clean_idx)
    if arm == TrainingArm.CLEAN_ONLY:
        return ArmSetup(clean, None, None)
    noisy = noisy_data(train_corpus, label_set)
    if arm == TrainingArm.NAIVE:
        return ArmSetup(clean, noisy, None)
    layer = matrix if matrix is not None else estimate_noise_matrix(pairs_at(train_corpus, clean_idx, label_set))
    return ArmSetup(clean, noisy, layer)


def compare_arms(
    train_corpus: ParallelCorpus,
    test_corpus: ParallelCorpus,
    clean_per_class: Sequence[int],
    config: TrainConfig,
    label_set: Optional[str] = None,
    non_entity: Optional[int] = None,
    arms: Sequence[TrainingArm] = tuple(TrainingArm),
) -> Dict[TrainingArm, EvalResult]:
    """
    Clean-only, naive and noise-handled training on the same clean sample
    (drawn without replacement) and the same held-out test set.
    """
    _require_features(train_corpus)
    idx = clean_sample(train_corpus, clean_per_class, config.seed)
    test = clean_data(test_corpus)
    init = LinearSoftmaxModel.zeros(train_corpus.k, train_corpus.d)
    results = {}
    for arm in arms:
        setup = arm_setup(train_corpus, idx, arm, label_set)
        trained = train(init, setup.clean, setup.noisy, setup.layer, config)
        results[arm] = evaluate(trained.model, test, non_entity)
        logger.info(f"Arm {arm.value}: accuracy={results[arm].accuracy:.4f}")
    return results


# --- Estimation error vs downstream performance ---

class CorrelationReport(BaseModel):
    model_config = ConfigDict(frozen=True)
    metric: Metric
    scheme: SamplingVariant
    rows: List[CorrelationRow]
    pearson: Optional[float] = None
    fix_base_clean: Optional[int] = None


def _theory_at(truth: NoiseMatrix, prior: ClassPrior, variant: SamplingVariant, n_i: int) -> float:
    if variant == SamplingVariant.FIXED:
        return expected_error_fixed(truth, n_i).total
    return expected_error_variable(truth, prior, n_i * truth.k).total


def _scheme_for(variant: SamplingVariant, n_i: int, k: int) -> SamplingScheme:
    # Equal budgets: Variable draws n = k * n_i instances
    if variant == SamplingVariant.FIXED:
        return SamplingScheme.fixed([n_i] * k, replace=False)
    return SamplingScheme.variable(n_i * k, replace=False)


def pearson_or_none(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if len(x) < 2 or np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        logger.warning("Pearson correlation undefined: an input is constant")
        return None
    r, _ = pearsonr(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(r)


def correlation_experiment(
    train_corpus: ParallelCorpus,
    test_corpus: ParallelCorpus,
    variant: SamplingVariant,
    grid: Sequence[int],
    repetitions: int,
    config: TrainConfig,
    truth: Optional[NoiseMatrix] = None,
    fix_base_clean: Optional[int] = None,
    metric: Metric = Metric.ACCURACY,
    non_entity: Optional[int] = None,
    label_set: Optional[str] = None,
    threads: int = None,
) -> CorrelationReport:
    """
    For every grid value n_i and repetition: draw the estimation sample, estimate
    the noise matrix, train with the noise layer and score on the test set.
    With `fix_base_clean`, the base model always trains on a separate fixed
    clean sample of that many instances per class, and only the estimation
    sample follows the grid.
    """
    if not grid:
        raise InvalidParameterError("Grid must not be empty.")
    if repetitions < 2:
        raise InvalidParameterError("The correlation experiment needs at least 2 repetitions.")
    _require_features(train_corpus)
    truth = truth or empirical_noise_matrix(train_corpus, label_set)
    prior = class_prior(train_corpus)
    noisy = noisy_data(train_corpus, label_set)
    test = clean_data(test_corpus)
    init = LinearSoftmaxModel.zeros(train_corpus.k, train_corpus.d)
    k = train_corpus.k

    def one(job: Tuple[int, int]) -> float:
        g, r = job
        n_i = int(grid[g])
        idx = sample_indices(train_corpus, _scheme_for(variant, n_i, k), child_rng(config.seed, 1, g, r))
        estimate = estimate_noise_matrix(pairs_at(train_corpus, idx, label_set))
        if fix_base_clean is not None:
            idx = fixed_sample_indices(train_corpus.clean, [fix_base_clean] * k, child_rng(config.seed, 2, r), replace=False)
        if idx.size == 0:
            raise InvalidParameterError(f"Grid value {n_i} gives an empty clean sample.")
        run_config = config.model_copy(update={"seed": derive_seed(config.seed, 3, g, r)})
        trained = train(init, clean_data(train_corpus, idx), noisy, estimate, run_config)
        return metric_value(evaluate(trained.model, test, non_entity), metric)

    jobs = [(g, r) for g in range(len(grid)) for r in range(repetitions)]
    scores = run_ordered(one, jobs, threads)

    rows = []
    for g, n_i in enumerate(grid):
        values = scores[g * repetitions:(g + 1) * repetitions]
        mean = compensated_sum(values) / repetitions
        std = math.sqrt(compensated_sum((v - mean) ** 2 for v in values) / (repetitions - 1))
        rows.append(CorrelationRow(
            grid=float(n_i), expected_se=_theory_at(truth, prior, variant, int(n_i)), mean_metric=mean, std_metric=std,
        ))
    pearson = pearson_or_none([row.expected_se for row in rows], [row.mean_metric for row in rows])
    logger.info(f"Correlation experiment ({variant.value}, {metric.value}): pearson={pearson}")
    return CorrelationReport(metric=metric, scheme=variant, rows=rows, pearson=pearson, fix_base_clean=fix_base_clean)
