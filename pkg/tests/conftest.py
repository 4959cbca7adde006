# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest
from loguru import logger
from typer.testing import CliRunner

from tests.fixtures import FEATURE_FIXTURE, NER_FIXTURE


@pytest.fixture(autouse=True)
def _reset_loguru():
    yield
    # CliRunner closes the stream the CLI's sink wrote to
    logger.remove()


@pytest.fixture
def rng_factory():
    def make(seed: int = 0) -> np.random.Generator:
        return np.random.default_rng(seed)
    return make


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def ner_tsv(tmp_path: Path) -> Path:
    path = tmp_path / "ner.tsv"
    path.write_text(NER_FIXTURE, encoding="utf-8")
    return path


@pytest.fixture
def feature_tsv(tmp_path: Path) -> Path:
    path = tmp_path / "features.tsv"
    path.write_text(FEATURE_FIXTURE, encoding="utf-8")
    return path
