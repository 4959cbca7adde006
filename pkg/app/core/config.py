# app/core/config.py
import os
import sys
import logging
from pathlib import Path
from dotenv import load_dotenv
from loguru import logger

try:
    project_root = Path(__file__).resolve().parent.parent.parent
    dotenv_path = project_root / '.env'
except Exception as e:
    logger.error(f"Error calculating project root/dotenv path: {e}")
    dotenv_path = Path(".env") # Asumsi .env ada di direktori kerja

# --- Muat file .env JIKA ADA ---
if dotenv_path.is_file():
    logger.debug(f"Loading environment variables from: {dotenv_path}")
    load_dotenv(dotenv_path=dotenv_path, override=False)


class InterceptHandler(logging.Handler):
    """Routes standard `logging` records (used by the numeric core) into Loguru."""
    def emit(self, record: logging.LogRecord) -> None:
        try: level = logger.level(record.levelname).name
        except ValueError: level = record.levelno
        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def setup_logging() -> None:
    """Configure Loguru sinks and intercept standard logging."""
    log_level_name = os.getenv("LOG_LEVEL", "INFO").upper()
    log_format = (
        "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
        "<level>{level: <8}</level> | "
        "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
    )
    log_file_path_str = os.getenv("LOG_FILE_PATH", "")
    log_rotation = os.getenv("LOG_ROTATION", "1 day")
    log_retention = os.getenv("LOG_RETENTION", "7 days")
    log_serialize = os.getenv("LOG_SERIALIZE", "False").lower() == 'true'

    logger.remove() # Hapus handler default

    # Handler Console
    logger.add(sys.stderr, level=log_level_name, format=log_format, colorize=True)

    # Handler File (opsional, kosong = console saja)
    if log_file_path_str:
        log_file_path = Path(log_file_path_str)
        try:
            log_file_path.parent.mkdir(parents=True, exist_ok=True)
            logger.add(
                log_file_path,
                level=log_level_name,
                format=log_format,
                rotation=log_rotation,
                retention=log_retention,
                serialize=log_serialize,
                enqueue=True,
                backtrace=True,
                diagnose=False,
                encoding="utf-8"
            )
            logger.debug(f"File logging enabled at: {log_file_path}")
        except Exception as e:
            logger.error(f"Failed to setup file logging at {log_file_path}: {e}")

    # --- Intercept Log Standar ---
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logger.debug(f"Logging level set to: {log_level_name}")


def _int_env(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        logger.warning(f"Invalid {name}. Using default: {default}.")
        return default


def _float_env(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, repr(default)))
    except ValueError:
        logger.warning(f"Invalid {name}. Using default: {default}.")
        return default


# --- Worker Configuration ---
DEFAULT_THREADS: int = max(1, _int_env("NOISE_ORACLE_THREADS", 1))

# --- Simulation Configuration ---
DEFAULT_REPETITIONS: int = max(1, _int_env("NOISE_ORACLE_REPETITIONS", 500))

# --- Numerical Tolerances ---
ROW_SUM_TOLERANCE: float = _float_env("NOISE_ORACLE_ROW_TOLERANCE", 1e-9)
EMPTY_ROW_WARN_THRESHOLD: float = _float_env("NOISE_ORACLE_EMPTY_ROW_WARN", 1e-3)

# --- Training Defaults ---
DEFAULT_NOISY_MULTIPLIER: float = _float_env("NOISE_ORACLE_NOISY_MULTIPLIER", 15.0)
DEFAULT_LOG_EPSILON: float = _float_env("NOISE_ORACLE_LOG_EPSILON", 1e-12)
if not 0.0 < DEFAULT_LOG_EPSILON <= 1e-6:
    logger.warning(f"NOISE_ORACLE_LOG_EPSILON={DEFAULT_LOG_EPSILON} outside (0, 1e-6]. Using default: 1e-12.")
    DEFAULT_LOG_EPSILON = 1e-12
