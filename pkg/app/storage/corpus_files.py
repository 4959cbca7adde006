# app/storage/corpus_files.py
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from app.core.errors import CorpusFormatError
from app.core.utils import format_float
from app.models.corpus import DOCSTART, ParallelCorpus, TsvSchema

from .formats import read_pairs, read_text

logger = logging.getLogger(__name__)


class _TagIndex:
    """Tag -> index, either closed (fixed inventory) or grown in first-appearance order."""

    def __init__(self, inventory: Optional[List[str]]):
        self.closed = inventory is not None
        self.names: List[str] = list(inventory or [])
        self._index: Dict[str, int] = {name: i for i, name in enumerate(self.names)}

    def lookup(self, tag: str, line_number: int) -> int:
        index = self._index.get(tag)
        if index is not None:
            return index
        if self.closed:
            raise CorpusFormatError(f"unknown tag '{tag}' (inventory: {', '.join(self.names)})", line_number=line_number)
        index = len(self.names)
        self.names.append(tag)
        self._index[tag] = index
        logger.debug(f"New tag '{tag}' assigned index {index} at line {line_number}")
        return index


def load_tsv_corpus(path: Path, schema: TsvSchema = None) -> ParallelCorpus:
    """
    Token-per-line corpus: token, clean tag, noisy tag column(s), then optional
    float features. Blank lines end sentences; -DOCSTART- lines are skipped.
    """
    schema = schema or TsvSchema()
    tags = _TagIndex(schema.label_inventory)
    n_noisy = schema.noisy_columns
    feature_dim = schema.feature_dim

    tokens: List[str] = []
    clean: List[int] = []
    noisy: List[List[int]] = []
    features: List[List[float]] = []
    sentences: List[int] = []
    sentence, in_sentence = 0, False

    for number, raw in enumerate(read_text(path).splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if in_sentence:
                sentence += 1
                in_sentence = False
            continue
        if line.startswith(DOCSTART):
            continue
        fields = line.split("\t")
        if feature_dim is None:
            feature_dim = max(0, len(fields) - 2 - n_noisy)
        expected = 2 + n_noisy + feature_dim
        if len(fields) != expected:
            raise CorpusFormatError(f"expected {expected} columns, found {len(fields)}", line_number=number)
        try:
            vector = [float(v) for v in fields[2 + n_noisy:]]
        except ValueError as e:
            raise CorpusFormatError(f"bad feature value: {e}", line_number=number) from e
        tokens.append(fields[0])
        clean.append(tags.lookup(fields[1], number))
        noisy.append([tags.lookup(tag, number) for tag in fields[2:2 + n_noisy]])
        features.append(vector)
        sentences.append(sentence)
        in_sentence = True

    n = len(tokens)
    corpus = ParallelCorpus(
        k=len(tags.names),
        label_names=tags.names,
        label_set_names=schema.set_names,
        tokens=tokens,
        clean=np.asarray(clean, dtype=np.int64),
        noisy=np.asarray(noisy, dtype=np.int64).reshape(n, n_noisy),
        features=np.asarray(features, dtype=float).reshape(n, feature_dim or 0),
        sentences=np.asarray(sentences, dtype=np.int64),
    )
    logger.info(f"Loaded corpus {path}: {n} instances, k={corpus.k}, {n_noisy} noisy label set(s), d={corpus.d}")
    return corpus


def write_tsv_corpus(corpus: ParallelCorpus, path: Path) -> Path:
    """Normalised form: one blank line between sentences, newline after the last token."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = corpus.label_names
    lines: List[str] = []
    for t in range(corpus.size):
        if t > 0 and corpus.sentences[t] != corpus.sentences[t - 1]:
            lines.append("")
        fields = [corpus.tokens[t], names[corpus.clean[t]]]
        fields += [names[v] for v in corpus.noisy[t]]
        fields += [format_float(v) for v in corpus.features[t]]
        lines.append("\t".join(fields))
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return path


def load_pair_corpus(path: Path, k: Optional[int] = None, label_set: str = "noisy") -> ParallelCorpus:
    """Generic clean,noisy pair file as a feature-less corpus (one sentence)."""
    pairs = read_pairs(path, k)
    n = len(pairs)
    return ParallelCorpus(
        k=pairs.k,
        label_names=[str(i) for i in range(pairs.k)],
        label_set_names=[label_set],
        tokens=[str(t + 1) for t in range(n)],
        clean=pairs.clean,
        noisy=pairs.noisy.reshape(n, 1),
        features=np.zeros((n, 0)),
        sentences=np.zeros(n, dtype=np.int64),
    )
