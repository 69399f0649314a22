import logging
import sys
from functools import wraps

import click
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from app.core.exceptions import (
    EXIT_INPUT_ERROR,
    InputError,
    MethodError,
    PairedTestError,
)

logger = logging.getLogger(__name__)

EXIT_UNEXPECTED = 1


def _exit_code_for(e: Exception) -> int:
    if isinstance(e, InputError):
        logger.warning(f"{type(e).__name__}: {e}")
        return e.exit_code

    elif isinstance(e, MethodError):
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    elif isinstance(e, ValidationError):
        logger.warning(f"Pydantic ValidationError: {e}")
        return EXIT_INPUT_ERROR

    elif isinstance(e, FileNotFoundError):
        logger.error(f"FileNotFoundError: {e}")
        return EXIT_INPUT_ERROR

    elif isinstance(e, PermissionError):
        logger.error(f"PermissionError: {e}")
        return EXIT_INPUT_ERROR

    else:
        logger.critical(f"Unhandled Exception: {e}", exc_info=True)
        return EXIT_UNEXPECTED


def cli_exception_handler(func):
    """Map toolkit errors raised by a click command onto process exit codes."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except Exception as e:
            code = _exit_code_for(e)
            click.echo(f"error: {e}", err=True)
            sys.exit(code)

    return wrapper


def register_exception_handlers(app: FastAPI) -> None:
    @app.exception_handler(PairedTestError)
    async def paired_test_exception_handler(request: Request, exc: PairedTestError):
        if isinstance(exc, InputError):
            logger.warning(f"{type(exc).__name__}: {exc}")
        else:
            logger.error(f"{type(exc).__name__}: {exc}")
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.message, "type": type(exc).__name__},
        )

    @app.exception_handler(ValidationError)
    async def validation_exception_handler(request: Request, exc: ValidationError):
        logger.warning(f"Validation error: {exc.errors()}")
        return JSONResponse(
            status_code=422,
            content={
                "error": "Validation error",
                "details": exc.errors(include_url=False, include_context=False),
            },
        )
