# app/const/enum.py
from enum import Enum, IntEnum


class NoiseKind(str, Enum):
    UNIFORM = "uniform"
    SINGLE_FLIP = "single-flip"
    MULTI_FLIP_MNIST = "multi-flip-mnist"


class SamplingVariant(str, Enum):
    FIXED = "fixed"       # n_i per clean class
    VARIABLE = "variable" # total n, n_i random


class GridAxis(str, Enum):
    SAMPLE_SIZE = "sample-size"
    NOISE_LEVEL = "noise-level"


class TrainingArm(str, Enum):
    CLEAN_ONLY = "clean-only"
    NAIVE = "naive"                   # noisy labels trained as if clean
    NOISE_HANDLED = "noise-handled"   # noisy labels through the fixed noise layer


class Metric(str, Enum):
    ACCURACY = "accuracy"
    MICRO_F1 = "micro-f1"


class ExitCode(IntEnum):
    SUCCESS = 0
    INTERNAL_FAILURE = 1
    USAGE_ERROR = 2


class CommandName(str, Enum):
    GEN_NOISE = "gen-noise"
    CORRUPT = "corrupt"
    ESTIMATE = "estimate"
    EXPECTED_ERROR = "expected-error"
    SIMULATE = "simulate"
    SWEEP = "sweep"
    QUALITY = "quality"
    TRAIN = "train"
    EVAL = "eval"
    CORRELATE = "correlate"
