# tests/test_utils.py
import threading
import time

import numpy as np
import pytest

from app.const.enum import CommandName
from app.core.errors import InvalidParameterError, MissingSeedError
from app.core.utils import child_rng, compensated_sum, derive_seed, format_float, split_budget, write_csv
from app.middleware.seed_guard import check_seed, requires_seed
from app.models.manifest import ExperimentManifest
from app.scheduler.workers import resolve_threads, run_ordered


def test_child_streams_depend_only_on_counter():
    a = child_rng(42, 3).random(5)
    child_rng(42, 1).random(100)
    b = child_rng(42, 3).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(child_rng(42, 3).random(5), child_rng(42, 4).random(5))
    assert not np.array_equal(child_rng(42, 3).random(5), child_rng(43, 3).random(5))


def test_nested_counters_differ():
    assert not np.array_equal(child_rng(1, 0, 1).random(3), child_rng(1, 1, 0).random(3))


def test_derive_seed_is_stable_and_64_bit():
    seed = derive_seed(7, 2)
    assert seed == derive_seed(7, 2)
    assert 0 <= seed < 2**64
    assert seed != derive_seed(7, 3)


def test_seed_range_is_checked():
    with pytest.raises(InvalidParameterError):
        child_rng(-1)
    with pytest.raises(InvalidParameterError):
        derive_seed(2**64)
    child_rng(2**64 - 1)


def test_split_budget():
    assert split_budget(200, 3) == [67, 67, 66]
    assert split_budget(9, 3) == [3, 3, 3]
    assert split_budget(0, 2) == [0, 0]
    with pytest.raises(InvalidParameterError):
        split_budget(5, 0)


def test_compensated_sum_keeps_small_terms():
    assert compensated_sum([1e16, 1.0, -1e16]) == 1.0


def test_format_float_round_trips():
    for value in (0.1, 1 / 3, 13 / 18, 1e-300, 0.0):
        assert float(format_float(value)) == value


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "sub" / "table.csv", ["a", "b", "c"], [[1, 0.5, None], [2, 1 / 3, "x"]])
    assert path.read_text() == f"a,b,c\n1,0.5,\n2,{1 / 3!r},x\n"


def test_run_ordered_keeps_input_order():
    def slow_square(x):
        # later items finish first
        time.sleep(0.002 * (10 - x))
        return x * x

    assert run_ordered(slow_square, range(10), threads=4) == [x * x for x in range(10)]
    assert run_ordered(slow_square, [], threads=4) == []


def test_run_ordered_uses_workers():
    names = set()

    def record(_):
        names.add(threading.current_thread().name)
        time.sleep(0.01)

    run_ordered(record, range(8), threads=4)
    assert any(name.startswith("noise-oracle") for name in names)


def test_resolve_threads():
    assert resolve_threads(0) == 1
    assert resolve_threads(3) == 3
    assert resolve_threads(None) >= 1


def test_seed_guard():
    assert requires_seed(CommandName.SIMULATE)
    assert not requires_seed(CommandName.ESTIMATE)
    with pytest.raises(MissingSeedError):
        check_seed(ExperimentManifest(subcommand=CommandName.TRAIN))
    manifest = ExperimentManifest(subcommand=CommandName.QUALITY)
    assert check_seed(manifest) is manifest
