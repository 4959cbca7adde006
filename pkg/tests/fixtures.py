# tests/fixtures.py
import numpy as np

from app.models.corpus import ParallelCorpus

# token, clean, noisy; gold [PER, O, LOC, ORG] vs noisy [PER, PER, O, ORG]
NER_FIXTURE = (
    "-DOCSTART-\tO\tO\n"
    "\n"
    "Alice\tPER\tPER\n"
    "met\tO\tPER\n"
    "\n"
    "Paris\tLOC\tO\n"
    "Acme\tORG\tORG\n"
)

# token, clean, noisy1, noisy2, then two feature columns
FEATURE_FIXTURE = (
    "a\tO\tO\tPER\t0.5\t-1.0\n"
    "b\tPER\tPER\tPER\t1.5\t2.0\n"
    "\n"
    "c\tLOC\tO\tLOC\t-0.25\t0.0\n"
    "d\tORG\tORG\tO\t3.0\t1.0\n"
)


def make_corpus(clean, noisy, features=None, label_names=None) -> ParallelCorpus:
    """In-memory corpus with one noisy label set; k taken from the label names."""
    clean = np.asarray(clean, dtype=np.int64)
    noisy = np.asarray(noisy, dtype=np.int64)
    k = len(label_names) if label_names else int(max(clean.max(initial=0), noisy.max(initial=0)) + 1)
    n = clean.size
    return ParallelCorpus(
        k=k,
        label_names=list(label_names) if label_names else [str(i) for i in range(k)],
        label_set_names=["noisy"],
        tokens=[f"t{i}" for i in range(n)],
        clean=clean,
        noisy=noisy.reshape(n, 1),
        features=np.zeros((n, 0)) if features is None else np.asarray(features, dtype=float),
        sentences=np.zeros(n, dtype=np.int64),
    )
