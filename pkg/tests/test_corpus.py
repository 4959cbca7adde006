# tests/test_corpus.py
import numpy as np
import pytest

from app.core.corpus import class_prior, empirical_noise_matrix, quality_report, split_corpus
from app.core.errors import CorpusFormatError, InputFileError, InvalidParameterError
from app.core.metrics import accuracy, f1_from_precision_recall, micro_counts, per_class_f1
from app.core.noise import uniform_noise
from app.models.corpus import NER_LABELS, TsvSchema
from app.models.estimation import LabelPairSet
from app.models.training import LinearSoftmaxModel
from app.storage.corpus_files import load_pair_corpus, load_tsv_corpus, write_tsv_corpus
from app.storage.formats import (
    load_model, load_model_labels, load_noise_matrix, read_labels, read_pairs, save_model, save_noise_matrix,
    write_pairs,
)
from tests.fixtures import make_corpus

# Rounded (precision, recall, F1) percentages for seven noisy NER label sets
NER_LABEL_SET_QUALITY = [
    (67, 18, 28), (73, 27, 39), (37, 31, 34), (75, 27, 40), (48, 41, 44), (53, 41, 46), (59, 49, 54),
]


# --- TSV loading ---

def test_load_ner_fixture(ner_tsv):
    corpus = load_tsv_corpus(ner_tsv)
    assert corpus.size == 4
    assert corpus.k == 4
    assert corpus.label_names == ["PER", "O", "LOC", "ORG"]
    assert corpus.tokens == ["Alice", "met", "Paris", "Acme"]
    np.testing.assert_array_equal(corpus.sentences, [0, 0, 1, 1])
    assert corpus.d == 0
    assert corpus.label_set_names == ["noisy1"]


def test_load_with_closed_inventory_keeps_order(ner_tsv):
    corpus = load_tsv_corpus(ner_tsv, TsvSchema(label_inventory=NER_LABELS))
    assert corpus.label_names == NER_LABELS
    np.testing.assert_array_equal(corpus.clean, [1, 0, 2, 3])
    np.testing.assert_array_equal(corpus.noisy_labels(), [1, 1, 0, 3])


def test_load_multiple_label_sets_with_features(feature_tsv):
    corpus = load_tsv_corpus(feature_tsv, TsvSchema(noisy_columns=2, label_set_names=["rules", "lexicon"]))
    assert corpus.size == 4 and corpus.d == 2
    assert corpus.label_set_names == ["rules", "lexicon"]
    np.testing.assert_array_equal(corpus.noisy_labels("lexicon"), [1, 1, 2, 0])
    np.testing.assert_allclose(corpus.features[0], [0.5, -1.0])
    np.testing.assert_array_equal(corpus.sentences, [0, 0, 1, 1])
    with pytest.raises(InvalidParameterError):
        corpus.noisy_labels("gazetteer")


def test_unknown_tag_in_closed_inventory(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("Alice\tPER\tPER\nBerlin\tMISC\tLOC\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as exc:
        load_tsv_corpus(path, TsvSchema(label_inventory=NER_LABELS))
    assert exc.value.line_number == 2
    assert "MISC" in str(exc.value)


def test_wrong_column_count_reports_line(tmp_path):
    path = tmp_path / "ragged.tsv"
    path.write_text("a\tO\tO\n\nb\tO\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as exc:
        load_tsv_corpus(path)
    assert exc.value.line_number == 3


def test_bad_feature_value(tmp_path):
    path = tmp_path / "features.tsv"
    path.write_text("a\tO\tO\t0.1\nb\tO\tO\tabc\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as exc:
        load_tsv_corpus(path)
    assert exc.value.line_number == 2


def test_empty_file(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("", encoding="utf-8")
    corpus = load_tsv_corpus(path, TsvSchema(label_inventory=NER_LABELS))
    assert corpus.size == 0 and corpus.k == 4


def test_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        load_tsv_corpus(tmp_path / "nope.tsv")


def test_schema_rejects_mismatched_names():
    with pytest.raises(ValueError):
        TsvSchema(noisy_columns=2, label_set_names=["only-one"])


def test_write_tsv_normalises(ner_tsv, tmp_path):
    corpus = load_tsv_corpus(ner_tsv)
    out = write_tsv_corpus(corpus, tmp_path / "out" / "ner.tsv")
    assert out.read_text(encoding="utf-8") == "Alice\tPER\tPER\nmet\tO\tPER\n\nParis\tLOC\tO\nAcme\tORG\tORG\n"
    again = load_tsv_corpus(out)
    np.testing.assert_array_equal(again.clean, corpus.clean)
    np.testing.assert_array_equal(again.sentences, corpus.sentences)


# --- Whole-data statistics ---

def test_empirical_noise_matrix():
    corpus = make_corpus([0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 1, 1, 1, 1, 1, 1])
    np.testing.assert_allclose(empirical_noise_matrix(corpus).array, [[0.5, 0.5], [0.0, 1.0]], atol=1e-15)


def test_empirical_noise_matrix_needs_every_class():
    corpus = make_corpus([0, 1, 1], [0, 1, 0], label_names=["O", "PER", "LOC"])
    with pytest.raises(InvalidParameterError, match="LOC"):
        empirical_noise_matrix(corpus)


def test_class_prior():
    prior = class_prior(make_corpus([0, 0, 0, 1], [0, 0, 0, 1]))
    assert prior.probs == pytest.approx([0.75, 0.25])
    with pytest.raises(InvalidParameterError):
        class_prior(make_corpus([], [], label_names=["a", "b"]))


def test_split_corpus_partitions_instances(rng_factory):
    corpus = make_corpus(np.arange(10) % 2, np.arange(10) % 2)
    train, dev, test = split_corpus(corpus, rng_factory(6))
    assert (train.size, dev.size, test.size) == (8, 1, 1)
    assert sorted(train.tokens + dev.tokens + test.tokens) == sorted(corpus.tokens)
    with pytest.raises(InvalidParameterError):
        split_corpus(corpus, rng_factory(), (0.5, 0.5))


def test_split_corpus_is_seeded(rng_factory):
    corpus = make_corpus(np.arange(50) % 3, np.arange(50) % 3)
    first = split_corpus(corpus, rng_factory(8))
    again = split_corpus(corpus, rng_factory(8))
    assert [part.tokens for part in first] == [part.tokens for part in again]
    assert [part.size for part in first] == [40, 5, 5]
    assert [part.tokens for part in first] != [part.tokens for part in split_corpus(corpus, rng_factory(9))]


def test_skewed_ner_prior_counts(tmp_path):
    # 217 O, 8 PER, 6 LOC, 6 ORG over 237 tokens
    counts = {"O": 217, "PER": 8, "LOC": 6, "ORG": 6}
    lines = [f"w{t}\t{tag}\t{tag}\n" for tag, n in counts.items() for t in range(n)]
    path = tmp_path / "skewed.tsv"
    path.write_text("".join(lines), encoding="utf-8")
    corpus = load_tsv_corpus(path, TsvSchema(label_inventory=NER_LABELS))
    assert corpus.size == 237
    assert np.bincount(corpus.clean, minlength=4).tolist() == [217, 8, 6, 6]
    assert np.rint(np.asarray(class_prior(corpus).probs) * 237).astype(int).tolist() == [217, 8, 6, 6]


def test_trace_weighted_accuracy_matches_noisy_accuracy():
    # class sizes 40/30/20/10 with 16/12/7/3 noisy labels correct: 38 of 100
    clean, noisy = [], []
    for c, (size, correct) in enumerate([(40, 16), (30, 12), (20, 7), (10, 3)]):
        clean += [c] * size
        noisy += [c] * correct + [(c + 1) % 4] * (size - correct)
    corpus = make_corpus(clean, noisy)
    m = empirical_noise_matrix(corpus)
    trace_weighted = float(np.asarray(class_prior(corpus).probs) @ np.diag(m.array))
    assert trace_weighted == pytest.approx(0.38, abs=1e-12)
    assert quality_report(corpus).accuracy == pytest.approx(0.38)


# --- Quality metrics ---

def test_quality_report_hand_enumerated(ner_tsv):
    report = quality_report(load_tsv_corpus(ner_tsv), non_entity="O")
    assert report.precision == pytest.approx(2 / 3)
    assert report.recall == pytest.approx(2 / 3)
    assert report.f1 == pytest.approx(2 / 3)
    assert report.accuracy == pytest.approx(0.5)
    assert (report.true_positives, report.predicted_positives, report.actual_positives) == (2, 3, 3)
    assert report.label_set == "noisy1"


def test_quality_report_perfect_labels():
    corpus = make_corpus([0, 1, 2, 0], [0, 1, 2, 0], label_names=["O", "PER", "LOC"])
    report = quality_report(corpus, non_entity="O")
    assert report.precision == report.recall == report.f1 == 1.0


def test_quality_report_unknown_non_entity(ner_tsv):
    with pytest.raises(InvalidParameterError):
        quality_report(load_tsv_corpus(ner_tsv), non_entity="MISC")


def test_micro_counts_all_non_entity_is_zero():
    counts = micro_counts([0, 0, 0], [0, 0, 0], non_entity=0)
    assert counts.precision == counts.recall == counts.f1 == 0.0


def test_micro_without_non_entity_equals_accuracy():
    gold, predicted = [0, 1, 2, 1], [0, 2, 2, 1]
    counts = micro_counts(gold, predicted)
    assert counts.precision == counts.recall == counts.f1 == accuracy(gold, predicted) == 0.75


def test_per_class_f1():
    np.testing.assert_allclose(per_class_f1([0, 0, 1], [0, 1, 1], 3), [2 / 3, 2 / 3, 0.0])


@pytest.mark.parametrize("precision, recall, rounded", NER_LABEL_SET_QUALITY)
def test_f1_identity_matches_rounded_quality(precision, recall, rounded):
    f1 = f1_from_precision_recall(precision / 100, recall / 100)
    assert abs(100 * f1 - rounded) <= 1


def test_f1_harmonic_mean_identity(rng_factory):
    rng = rng_factory(8)
    for _ in range(50):
        p, r = rng.random(2)
        assert f1_from_precision_recall(p, r) == pytest.approx(2 * p * r / (p + r), abs=1e-12)
    assert f1_from_precision_recall(0.0, 0.0) == 0.0


# --- Pair, label and model files ---

def test_read_pairs_with_header_and_commas(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("clean,noisy\n0,0\n0,1\n\n0,1\n1,1\n", encoding="utf-8")
    pairs = read_pairs(path)
    assert pairs.k == 2 and len(pairs) == 4


def test_read_pairs_rejects_label_out_of_range(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("0\t1\n2\t0\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError) as exc:
        read_pairs(path, k=2)
    assert exc.value.line_number == 2


def test_read_pairs_rejects_garbage_after_data(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("0\t1\nx\ty\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        read_pairs(path)


def test_write_then_read_pairs(tmp_path):
    pairs = LabelPairSet.from_pairs(3, [(0, 2), (1, 1), (2, 0)])
    back = read_pairs(write_pairs(pairs, tmp_path / "pairs.tsv"), k=3)
    np.testing.assert_array_equal(back.clean, pairs.clean)
    np.testing.assert_array_equal(back.noisy, pairs.noisy)


def test_load_pair_corpus(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("0\t1\n1\t1\n", encoding="utf-8")
    corpus = load_pair_corpus(path, k=3)
    assert corpus.k == 3 and corpus.size == 2 and corpus.d == 0


def test_read_labels(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("0\n2\n\n1\n", encoding="utf-8")
    np.testing.assert_array_equal(read_labels(path, k=3), [0, 2, 1])
    with pytest.raises(CorpusFormatError):
        read_labels(path, k=2)


def test_noise_matrix_file(tmp_path):
    m = uniform_noise(3, 0.25)
    np.testing.assert_array_equal(load_noise_matrix(save_noise_matrix(m, tmp_path / "m.json")).array, m.array)
    bad = tmp_path / "bad.json"
    bad.write_text('{"k": 2, "rows": [[0.5, 0.4], [0.0, 1.0]]}', encoding="utf-8")
    with pytest.raises(InvalidParameterError):
        load_noise_matrix(bad)


def test_model_file_keeps_labels(tmp_path):
    model = LinearSoftmaxModel(weights=[[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]], bias=[0.0, 0.1, -0.1])
    path = save_model(model, tmp_path / "model.json", labels=["O", "PER", "LOC"])
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.weights, model.weights)
    assert load_model_labels(path) == ["O", "PER", "LOC"]
    with pytest.raises(InvalidParameterError):
        save_model(model, tmp_path / "other.json", labels=["O"])


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{\n  "k": 2,\n  oops\n}', encoding="utf-8")
    with pytest.raises(CorpusFormatError) as exc:
        load_model(path)
    assert exc.value.line_number == 3
