# tests/test_estimation.py
import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import DimensionMismatchError, SamplingError
from app.core.estimation import (
    count_matrix, estimate_noise_matrix, fixed_sample, sample_pairs, squared_error, variable_sample,
)
from app.core.noise import corrupt_labels, uniform_noise
from app.core.theory import expected_error_fixed
from app.models.estimation import LabelPairSet, SamplingScheme
from app.models.noise import NoiseMatrix
from tests.fixtures import make_corpus

FOUR_PAIRS = [(0, 0), (0, 1), (0, 1), (1, 1)]


def test_count_matrix_empty():
    counts, n = count_matrix(LabelPairSet(k=2, clean=[], noisy=[]))
    np.testing.assert_array_equal(counts, np.zeros((2, 2)))
    np.testing.assert_array_equal(n, [0, 0])


def test_count_matrix_four_pairs():
    counts, n = count_matrix(LabelPairSet.from_pairs(2, FOUR_PAIRS))
    np.testing.assert_array_equal(counts, [[1, 2], [0, 1]])
    np.testing.assert_array_equal(n, [3, 1])


def test_count_matrix_single_cell():
    counts, n = count_matrix(LabelPairSet.from_pairs(3, [(2, 2)] * 100))
    assert counts[2, 2] == 100 and n[2] == 100
    assert counts.sum() == 100


def test_label_pair_set_rejects_out_of_range():
    with pytest.raises(ValidationError):
        LabelPairSet(k=2, clean=[0, 2], noisy=[0, 1])


def test_estimate_four_pairs():
    estimate = estimate_noise_matrix(LabelPairSet.from_pairs(2, FOUR_PAIRS))
    np.testing.assert_allclose(estimate.array, [[1 / 3, 2 / 3], [0.0, 1.0]], atol=1e-15)
    assert estimate.empty_rows == []
    assert estimate.n_per_class == [3, 1]


def test_estimate_identity_when_noiseless():
    estimate = estimate_noise_matrix(LabelPairSet.from_pairs(3, [(0, 0), (1, 1), (2, 2), (1, 1)]))
    np.testing.assert_array_equal(estimate.array, np.eye(3))


def test_estimate_flags_empty_row_without_renormalising():
    estimate = estimate_noise_matrix(LabelPairSet.from_pairs(2, [(0, 0), (0, 1)]))
    assert estimate.empty_rows == [1]
    np.testing.assert_array_equal(estimate.array[1], [0.0, 0.0])


def test_estimate_rows_sum_to_one(rng_factory):
    rng = rng_factory(2)
    clean = rng.integers(0, 5, size=300)
    pairs = LabelPairSet(k=5, clean=clean, noisy=corrupt_labels(clean, uniform_noise(5, 0.4), rng))
    estimate = estimate_noise_matrix(pairs)
    for i in set(range(5)) - set(estimate.empty_rows):
        assert estimate.array[i].sum() == pytest.approx(1.0, abs=1e-12)


def test_squared_error_examples():
    eye = np.eye(2)
    assert squared_error(eye, eye) == 0.0
    assert squared_error(eye, [[0.5, 0.5], [0.0, 1.0]]) == pytest.approx(0.5)
    assert squared_error(uniform_noise(2, 0.4), eye) == pytest.approx(0.64)


def test_squared_error_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        squared_error(np.eye(2), np.eye(3))


def test_squared_error_vanishes_with_large_sample(rng_factory):
    m = uniform_noise(4, 0.3)
    clean = np.repeat(np.arange(4), 100_000)
    pairs = LabelPairSet(k=4, clean=clean, noisy=corrupt_labels(clean, m, rng_factory(9)))
    se = squared_error(m, estimate_noise_matrix(pairs))
    assert se < 10 * expected_error_fixed(m, 100_000).total


# --- Sampling ---

@pytest.fixture
def skewed_corpus():
    # 800 instances of class 0, 200 of class 1, noisy labels equal to clean
    clean = np.array([0] * 800 + [1] * 200)
    return make_corpus(clean, clean)


def test_fixed_sample_all_zero_is_empty(skewed_corpus, rng_factory):
    assert len(fixed_sample(skewed_corpus, [0, 0], rng_factory())) == 0


def test_fixed_sample_recovers_per_class(skewed_corpus, rng_factory):
    pairs = fixed_sample(skewed_corpus, [5, 7], rng_factory(1))
    _, n = count_matrix(pairs)
    np.testing.assert_array_equal(n, [5, 7])


def test_fixed_sample_noiseless_corpus_estimates_identity(skewed_corpus, rng_factory):
    estimate = estimate_noise_matrix(fixed_sample(skewed_corpus, [10, 10], rng_factory(4)))
    np.testing.assert_array_equal(estimate.array, np.eye(2))


def test_fixed_sample_without_replacement_capacity(skewed_corpus, rng_factory):
    pairs = fixed_sample(skewed_corpus, [800, 200], rng_factory(), replace=False)
    assert len(pairs) == 1000
    with pytest.raises(SamplingError):
        fixed_sample(skewed_corpus, [10, 201], rng_factory(), replace=False)


def test_fixed_sample_wrong_length(skewed_corpus, rng_factory):
    with pytest.raises(DimensionMismatchError):
        fixed_sample(skewed_corpus, [1, 1, 1], rng_factory())


def test_variable_sample_size_and_empty(skewed_corpus, rng_factory):
    assert len(variable_sample(skewed_corpus, 0, rng_factory())) == 0
    assert len(variable_sample(skewed_corpus, 37, rng_factory())) == 37


def test_variable_sample_class_share(skewed_corpus):
    for seed in range(5):
        pairs = variable_sample(skewed_corpus, 1000, np.random.default_rng(seed))
        share = float(np.mean(pairs.clean == 0))
        assert share == pytest.approx(0.8, abs=0.04), f"seed {seed}: share {share}"


def test_variable_sample_without_replacement_rejects_oversize(skewed_corpus, rng_factory):
    with pytest.raises(SamplingError):
        variable_sample(skewed_corpus, 1001, rng_factory(), replace=False)


def test_sampling_is_seeded(skewed_corpus):
    scheme = SamplingScheme.variable(50)
    first = sample_pairs(skewed_corpus, scheme, np.random.default_rng(21))
    second = sample_pairs(skewed_corpus, scheme, np.random.default_rng(21))
    np.testing.assert_array_equal(first.clean, second.clean)


def test_sampling_scheme_validation():
    with pytest.raises(ValidationError):
        SamplingScheme.fixed([3, -1])
    assert SamplingScheme.fixed([3, 4]).budget == 7
    assert SamplingScheme.variable(12).budget == 12


@pytest.mark.slow
@pytest.mark.parametrize("epsilon", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("n_i", [5, 20])
def test_fixed_sampling_estimate_is_unbiased(epsilon, n_i):
    k, repetitions = 10, 10_000
    m = uniform_noise(k, epsilon)
    rng = np.random.default_rng(1000 + n_i)
    clean = np.repeat(np.arange(k), n_i)
    total = np.zeros((k, k))
    for _ in range(repetitions):
        pairs = LabelPairSet(k=k, clean=clean, noisy=corrupt_labels(clean, m, rng))
        total += count_matrix(pairs)[0]
    mean = total / (repetitions * n_i)
    mc_se = np.sqrt(m.array * (1 - m.array) / (n_i * repetitions))
    assert np.all(np.abs(mean - m.array) < 4 * mc_se + 1e-15)


def test_noise_matrix_estimate_matches_matrix_type():
    estimate = estimate_noise_matrix(LabelPairSet.from_pairs(2, FOUR_PAIRS))
    assert squared_error(NoiseMatrix(k=2, rows=[[1 / 3, 2 / 3], [0.0, 1.0]]), estimate) == pytest.approx(0.0)
