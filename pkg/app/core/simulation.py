# app/core/simulation.py
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from app.const.enum import GridAxis, SamplingVariant
from app.core.corpus import class_prior, empirical_noise_matrix
from app.core.errors import DimensionMismatchError, InvalidParameterError, SamplingError
from app.core.estimation import estimate_noise_matrix, sample_pairs, squared_error
from app.core.noise import build_noise_matrix, corrupt_labels, require_valid
from app.core.theory import expected_error_from_scheme, matrix_at, scheme_at
from app.core.utils import child_rng, compensated_sum, derive_seed
from app.dto.rows import SweepRow
from app.models.estimation import LabelPairSet, SamplingScheme
from app.models.noise import ClassPrior, NoiseMatrix
from app.models.report import SimulationResult
from app.models.simulation import CorpusSource, SimulationConfig, SyntheticSource
from app.scheduler.workers import run_ordered

logger = logging.getLogger(__name__)


class GroundTruth(NamedTuple):
    matrix: NoiseMatrix
    prior: ClassPrior
    approximate: bool


class _Repetition(NamedTuple):
    se: float
    any_empty: bool


def resolve_ground_truth(source) -> GroundTruth:
    if isinstance(source, CorpusSource):
        matrix = empirical_noise_matrix(source.corpus, source.label_set)
        return GroundTruth(matrix, class_prior(source.corpus), True)
    matrix = source.matrix if source.matrix is not None else build_noise_matrix(source.spec)
    require_valid(matrix)
    return GroundTruth(matrix, source.prior or ClassPrior.uniform(matrix.k), False)


def _check_scheme(scheme: SamplingScheme, k: int) -> None:
    if scheme.variant == SamplingVariant.FIXED and len(scheme.per_class) != k:
        raise DimensionMismatchError(f"Got {len(scheme.per_class)} per-class counts for k={k}.")


def _check_capacity(source: CorpusSource, scheme: SamplingScheme) -> None:
    # Without replacement a corpus can run out of instances; fail before any repetition runs
    if scheme.replace:
        return
    corpus = source.corpus
    if scheme.variant == SamplingVariant.VARIABLE:
        if scheme.total > corpus.size:
            raise SamplingError(f"Corpus has {corpus.size} instances, {scheme.total} requested without replacement.")
        return
    available = np.bincount(corpus.clean, minlength=corpus.k)
    for i, (n_i, have) in enumerate(zip(scheme.per_class, available)):
        if n_i > have:
            raise SamplingError(f"Class {i} has {have} instances, {n_i} requested without replacement.")


def draw_synthetic_pairs(
    m: NoiseMatrix, prior: ClassPrior, scheme: SamplingScheme, rng: np.random.Generator
) -> LabelPairSet:
    """Clean labels per scheme (deterministic counts or multinomial from the prior), noisy labels through m."""
    if scheme.variant == SamplingVariant.FIXED:
        clean = np.repeat(np.arange(m.k), scheme.per_class)
    else:
        clean = rng.choice(m.k, size=scheme.total, p=np.asarray(prior.probs))
    return LabelPairSet(k=m.k, clean=clean, noisy=corrupt_labels(clean, m, rng))


def _theory_se(truth: GroundTruth, scheme: SamplingScheme) -> Optional[float]:
    if scheme.variant == SamplingVariant.FIXED and min(scheme.per_class, default=0) < 1:
        return None
    if scheme.variant == SamplingVariant.VARIABLE and scheme.total < 1:
        return None
    return expected_error_from_scheme(truth.matrix, scheme, truth.prior).total


def _spread(values: Sequence[float], mean: float) -> float:
    # Sample standard deviation; one repetition has no spread
    if len(values) < 2:
        return 0.0
    return math.sqrt(compensated_sum((v - mean) ** 2 for v in values) / (len(values) - 1))


def run_simulation(config: SimulationConfig, threads: int = None) -> SimulationResult:
    """
    Monte Carlo estimate of E[SE]. Repetition r draws from a child stream of
    (master_seed, r), so results do not depend on the worker count.
    """
    truth = resolve_ground_truth(config.source)
    scheme = config.scheme
    _check_scheme(scheme, truth.matrix.k)
    if isinstance(config.source, CorpusSource):
        _check_capacity(config.source, scheme)

    def one(repetition: int) -> _Repetition:
        rng = child_rng(config.master_seed, repetition)
        if isinstance(config.source, SyntheticSource):
            pairs = draw_synthetic_pairs(truth.matrix, truth.prior, scheme, rng)
        else:
            pairs = sample_pairs(config.source.corpus, scheme, rng, config.source.label_set)
        estimate = estimate_noise_matrix(pairs)
        return _Repetition(squared_error(truth.matrix, estimate), bool(estimate.empty_rows))

    outcomes = run_ordered(one, range(config.repetitions), threads)
    errors = [o.se for o in outcomes]
    mean = compensated_sum(errors) / len(errors)
    result = SimulationResult(
        mean_se=mean,
        std_se=_spread(errors, mean),
        per_repetition_se=errors if config.retain_repetitions else None,
        theory_se=_theory_se(truth, scheme),
        empty_row_rate=sum(o.any_empty for o in outcomes) / len(outcomes),
        repetitions=config.repetitions,
        ground_truth_is_approximation=truth.approximate,
    )
    logger.info(
        f"Simulation {scheme.variant.value} x{config.repetitions}: mean_se={result.mean_se:.6g} "
        f"std_se={result.std_se:.6g} theory_se={result.theory_se}"
    )
    return result


def _config_at(template: SimulationConfig, axis: GridAxis, value: float, seed: int) -> SimulationConfig:
    source = template.source
    if isinstance(source, CorpusSource):
        if axis == GridAxis.NOISE_LEVEL:
            raise InvalidParameterError("Noise-level sweeps need a synthetic source.")
        k = source.corpus.k
    else:
        matrix = matrix_at(source.spec if source.spec is not None else source.matrix, axis, value)
        source = SyntheticSource(matrix=matrix, prior=source.prior)
        k = matrix.k
    return template.model_copy(update={
        "scheme": scheme_at(template.scheme, axis, value, k),
        "source": source,
        "master_seed": seed,
    })


def sweep(
    template: SimulationConfig, axis: GridAxis, grid: Sequence[float], threads: int = None
) -> List[Tuple[SweepRow, SimulationResult]]:
    """One simulation per grid point; grid point g runs under seed derive_seed(master_seed, g)."""
    if not grid:
        raise InvalidParameterError("Grid must not be empty.")
    table = []
    for index, value in enumerate(grid):
        config = _config_at(template, axis, value, derive_seed(template.master_seed, index))
        result = run_simulation(config, threads)
        row = SweepRow(
            grid_value=float(value),
            theory_se=result.theory_se,
            empirical_mean_se=result.mean_se,
            empirical_std_se=result.std_se,
            empty_row_rate=result.empty_row_rate,
        )
        table.append((row, result))
    logger.info(f"Sweep over {len(grid)} {axis.value} points finished")
    return table
