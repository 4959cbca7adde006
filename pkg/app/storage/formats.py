# app/storage/formats.py
import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from app.core.errors import CorpusFormatError, InputFileError, InvalidParameterError
from app.core.noise import validate
from app.core.utils import write_csv
from app.dto.rows import CsvRow
from app.models.estimation import LabelPairSet, NoiseEstimate
from app.models.noise import NoiseMatrix
from app.models.training import LinearSoftmaxModel

logger = logging.getLogger(__name__)


# --- Generic helpers ---

def read_text(path: Path) -> str:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"Input file not found: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputFileError(f"Cannot read {path}: {e}") from e


def read_json(path: Path) -> Any:
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise CorpusFormatError(f"invalid JSON in {path}: {e.msg}", line_number=e.lineno) from e


def write_json(path: Path, payload: Any) -> Path:
    """Stable JSON: fixed key order, shortest round-trip floats, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    logger.debug(f"Wrote JSON {path}")
    return path


def write_rows(path: Path, rows: Sequence[CsvRow], row_type: type) -> Path:
    return write_csv(path, row_type.header(), (row.values() for row in rows))


# --- Noise matrices ---

def save_noise_matrix(m: NoiseMatrix, path: Path) -> Path:
    return write_json(path, {"k": m.k, "rows": m.array.tolist()})


def load_noise_matrix(path: Path) -> NoiseMatrix:
    payload = read_json(path)
    try:
        matrix = NoiseMatrix(k=payload["k"], rows=payload["rows"])
    except (KeyError, TypeError, ValidationError) as e:
        raise InvalidParameterError(f"{path} is not a noise matrix file: {e}") from e
    report = validate(matrix)
    if not report.ok:
        raise InvalidParameterError(f"{path}: row {report.row}: {report.defect}.")
    return matrix


def save_estimate(estimate: NoiseEstimate, path: Path) -> Path:
    return write_json(path, {
        "k": estimate.k,
        "rows": estimate.rows,
        "empty_rows": estimate.empty_rows,
        "counts": estimate.counts,
    })


def load_estimate(path: Path) -> NoiseEstimate:
    payload = read_json(path)
    try:
        counts = payload.get("counts") or []
        return NoiseEstimate(
            k=payload["k"],
            rows=payload["rows"],
            empty_rows=payload.get("empty_rows", []),
            counts=counts,
            n_per_class=[int(sum(row)) for row in counts],
        )
    except (KeyError, TypeError, AttributeError, ValidationError) as e:
        raise InvalidParameterError(f"{path} is not an estimate file: {e}") from e


# --- Label pairs and label lists ---

def _split_fields(line: str) -> List[str]:
    delimiter = "\t" if "\t" in line else ","
    return [field.strip() for field in line.split(delimiter)]


def _is_int(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


def read_pairs(path: Path, k: Optional[int] = None) -> LabelPairSet:
    """
    Two integer columns clean,noisy (tab or comma separated), one pair per line.
    A non-numeric first line is a header. Without k, k = max label + 1.
    """
    clean: List[int] = []
    noisy: List[int] = []
    for number, line in enumerate(read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        fields = _split_fields(line)
        if len(fields) != 2:
            raise CorpusFormatError(f"expected 2 columns (clean, noisy), found {len(fields)}", line_number=number)
        if not all(_is_int(f) for f in fields):
            if not clean and number == 1:
                continue  # header
            raise CorpusFormatError(f"non-integer label in {line!r}", line_number=number)
        y, y_hat = int(fields[0]), int(fields[1])
        if y < 0 or y_hat < 0 or (k is not None and (y >= k or y_hat >= k)):
            raise CorpusFormatError(f"label out of range [0, {k}) in {line!r}", line_number=number)
        clean.append(y)
        noisy.append(y_hat)
    if k is None:
        k = max(2, max(clean + noisy, default=0) + 1)
    logger.debug(f"Read {len(clean)} label pairs from {path}")
    return LabelPairSet(k=k, clean=clean, noisy=noisy)


def write_pairs(pairs: LabelPairSet, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{y}\t{y_hat}" for y, y_hat in zip(pairs.clean.tolist(), pairs.noisy.tolist())]
    path.write_text("clean\tnoisy\n" + "".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def read_labels(path: Path, k: Optional[int] = None) -> np.ndarray:
    """One class index per line; blank lines ignored."""
    labels = []
    for number, line in enumerate(read_text(path).splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if not _is_int(text):
            raise CorpusFormatError(f"non-integer label {text!r}", line_number=number)
        value = int(text)
        if value < 0 or (k is not None and value >= k):
            raise CorpusFormatError(f"label {value} out of range [0, {k})", line_number=number)
        labels.append(value)
    return np.asarray(labels, dtype=np.int64)


# --- Trained models ---

def save_model(model: LinearSoftmaxModel, path: Path, labels: Optional[List[str]] = None) -> Path:
    """Weights and bias as nested lists; `labels` records the class names used in training."""
    payload = {
        "d": model.d,
        "k": model.k,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
    }
    if labels is not None:
        if len(labels) != model.k:
            raise InvalidParameterError(f"{len(labels)} label names for a {model.k}-class model.")
        payload["labels"] = list(labels)
    return write_json(path, payload)


def load_model(path: Path) -> LinearSoftmaxModel:
    payload = read_json(path)
    try:
        model = LinearSoftmaxModel(weights=payload["weights"], bias=payload["bias"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidParameterError(f"{path} is not a model file: {e}") from e
    if (model.k, model.d) != (payload.get("k"), payload.get("d")):
        raise InvalidParameterError(f"{path}: declared shape ({payload.get('k')}, {payload.get('d')}) does not match weights.")
    return model


def load_model_labels(path: Path) -> Optional[List[str]]:
    labels = read_json(path).get("labels")
    return [str(name) for name in labels] if labels is not None else None
