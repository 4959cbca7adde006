# app/middleware/logging.py
import functools
import time
import uuid
from typing import Callable, TypeVar

import click
import typer
from loguru import logger
from pydantic import ValidationError

from app.const.enum import ExitCode
from app.core.errors import NoiseOracleError

F = TypeVar("F", bound=Callable)


def _format_validation(exc: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or 'value'}: {err['msg']}" for err in exc.errors()
    )


def command_logging(name: str) -> Callable[[F], F]:
    """
    Wraps a CLI command: run id, START/END/FAILED log lines with duration, and
    the mapping of errors to exit codes (2 for user errors, 1 for anything else).
    """
    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            run_id = uuid.uuid4().hex[:12]  # ID unik per command
            start_time = time.perf_counter()
            logger.info(f"RID:{run_id} START Command: {name}")
            try:
                result = func(*args, **kwargs)
            except (typer.Exit, click.exceptions.Exit, click.ClickException):
                raise
            except NoiseOracleError as e:
                duration = (time.perf_counter() - start_time) * 1000
                logger.error(f"RID:{run_id} END Command: {name} Error:{e.detail} Duration:{duration:.2f}ms")
                typer.echo(f"Error: {e.detail}", err=True)
                raise typer.Exit(code=int(e.exit_code))
            except ValidationError as e:
                duration = (time.perf_counter() - start_time) * 1000
                detail = _format_validation(e)
                logger.error(f"RID:{run_id} END Command: {name} Invalid input:{detail} Duration:{duration:.2f}ms")
                typer.echo(f"Error: invalid input: {detail}", err=True)
                raise typer.Exit(code=int(ExitCode.USAGE_ERROR))
            except Exception as e:
                duration = (time.perf_counter() - start_time) * 1000
                logger.opt(exception=e).error(
                    f"RID:{run_id} FAILED Command: {name} Error:{e} Duration:{duration:.2f}ms"
                )
                typer.echo(f"Internal error: {e}", err=True)
                raise typer.Exit(code=int(ExitCode.INTERNAL_FAILURE))
            duration = (time.perf_counter() - start_time) * 1000
            logger.info(f"RID:{run_id} END Command: {name} Status:ok Duration:{duration:.2f}ms")
            return result
        return wrapper
    return decorator
