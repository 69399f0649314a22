import logging
import sys
import tomllib
from datetime import datetime
from pathlib import Path

import click
import uvicorn
from fastapi import FastAPI
from pydantic import ValidationError

from app.core.config import settings
from app.core.exception_handler import cli_exception_handler, register_exception_handlers
from app.core.exceptions import ConfigError, OutputError
from app.routes.all import routes
from app.schemas.bench import BenchConfig
from app.schemas.enums import CliMethod, DegeneratePolicy, OutputFormat, Tail, UniTest, WsrMode
from app.schemas.run import TestRunConfig
from app.services.bench import PowerBenchmark
from app.services.paired_sample import PairedSampleService
from app.services.report import ReportService
from app.utils.json_encoder import json_dumps


# ============================================================================
# Logging Configuration
# ============================================================================
def setup_logging():
    """Configure logging for the application."""
    log_level = logging.DEBUG if settings.DEBUG else logging.INFO
    log_format = "%(asctime)s - %(levelname)s - [%(name)s:%(lineno)d] %(message)s"

    # stdout carries reports, logs go to stderr
    handlers = [logging.StreamHandler(sys.stderr)]

    if settings.LOG_TO_FILE:
        settings.LOGS_DIR.mkdir(parents=True, exist_ok=True)
        handlers.append(
            logging.FileHandler(
                settings.LOGS_DIR / "paired_test.log",
                mode="a",
                encoding="utf-8",
            )
        )

    logging.basicConfig(
        level=log_level,
        format=log_format,
        handlers=handlers,
        force=True,  # Override any existing configuration
    )

    # Suppress verbose third-party logs
    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)

    return logging.getLogger(__name__)


logger = setup_logging()


# ============================================================================
# FastAPI Application
# ============================================================================
if settings.ENVIRONMENT == "production":
    app = FastAPI(
        title=settings.APP_NAME,
        description=settings.APP_DESCRIPTION,
        version=settings.APP_VERSION,
        docs_url=None,
        redoc_url=None,
        openapi_url=None,
    )
else:
    app = FastAPI(
        title=settings.APP_NAME,
        description=settings.APP_DESCRIPTION,
        version=settings.APP_VERSION,
    )

register_exception_handlers(app)

for route in routes:
    app.include_router(route)


@app.get("/health", include_in_schema=False)
async def health():
    return {
        "status": "healthy",
        "timestamp": datetime.now(),
        "version": settings.APP_VERSION,
        "environment": settings.ENVIRONMENT,
    }


# ============================================================================
# CLI Commands
# ============================================================================
def _load_bench_config(path: Path) -> BenchConfig:
    try:
        with path.open("rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: malformed TOML: {e}")

    try:
        return BenchConfig(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"{path}: invalid value for '{key}': {first['msg']}", key=key)


@click.group()
def cli():
    """paired-test - paired-sample hypothesis testing toolkit."""
    pass


@cli.command()
@click.argument("method", type=click.Choice([m.value for m in CliMethod]))
@click.option("--x", "x_path", required=True, type=click.Path(path_type=Path), help="CSV of first measurements")
@click.option("--y", "y_path", required=True, type=click.Path(path_type=Path), help="CSV of second measurements")
@click.option("--alpha", default=settings.DEFAULT_ALPHA, show_default=True, type=float, help="Significance level in (0, 1)")
@click.option("--standardize", is_flag=True, help="Standardize each feature over the pooled 2N values")
@click.option("--mode", default=WsrMode.auto.value, type=click.Choice([m.value for m in WsrMode]), show_default=True)
@click.option("--tail", default=Tail.two_sided.value, type=click.Choice([t.value for t in Tail]), show_default=True)
@click.option("--uni-test", default="wsr", type=click.Choice(["wsr", "ttest"]), show_default=True, help="Univariate test for mt")
@click.option("--degenerate-policy", default=DegeneratePolicy.drop.value, type=click.Choice([p.value for p in DegeneratePolicy]), show_default=True)
@click.option("--raw-hyperplanes", is_flag=True, help="Do not unit-normalize the pairwise bisectors (mwsr)")
@click.option("--format", "output_format", default=OutputFormat.json.value, type=click.Choice([f.value for f in OutputFormat]), show_default=True)
@click.option("--out", type=click.Path(path_type=Path), help="Write the report to this file instead of stdout")
@cli_exception_handler
def test(method, x_path, y_path, alpha, standardize, mode, tail, uni_test, degenerate_policy, raw_hyperplanes, output_format, out):
    """Run METHOD (mwsr, ht2, mt or wsr) on a pair of CSV files."""
    config = TestRunConfig(
        method=method,
        x_path=x_path,
        y_path=y_path,
        alpha=alpha,
        standardize=standardize,
        mode=mode,
        tail=tail,
        uni_test=UniTest.ttest if uni_test == "ttest" else UniTest.wsr,
        degenerate_policy=degenerate_policy,
        normalize=not raw_hyperplanes,
        out=out,
        output_format=output_format,
    )

    sample = PairedSampleService.load_paired_csv(config.x_path, config.y_path)
    report = ReportService.run(config.method, sample, config)

    if config.output_format == OutputFormat.json:
        text = json_dumps(report)
    else:
        text = ReportService.render_text(report)

    if config.out:
        try:
            config.out.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write report to {config.out}: {e}", path=str(config.out))
        logger.info(f"Report written to {config.out}")
    else:
        click.echo(text)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="TOML benchmark configuration")
@click.option("--out-dir", required=True, type=click.Path(path_type=Path), help="Directory for power.csv and importance.csv")
@click.option("--workers", type=int, default=None, help="Worker processes (overrides the config)")
@click.option("--seed", type=int, default=None, help="Master seed (overrides the config)")
@cli_exception_handler
def bench(config_path, out_dir, workers, seed):
    """Run the Monte-Carlo power benchmark described by a config file."""
    config = _load_bench_config(config_path)
    if workers is not None and workers < 1:
        raise ConfigError("--workers must be >= 1", key="workers")
    if seed is not None and seed < 0:
        raise ConfigError("--seed must be >= 0", key="master_seed")

    logger.info("=" * 80)
    logger.info(f"Benchmark: dims={config.dims}, stds={config.stds}, n={config.n}")
    logger.info(f"  - shifts: {config.shifts}")
    logger.info(f"  - trials: {config.trials}, methods: {[m.value for m in config.methods]}")
    logger.info("=" * 80)

    report = PowerBenchmark.run_config(config, master_seed=seed, workers=workers)

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {out_dir}: {e}", path=str(out_dir))

    PowerBenchmark.emit_csv(report, out_dir / "power.csv")
    if config.importance:
        PowerBenchmark.emit_importance_csv(report, out_dir / "importance.csv")
    (out_dir / "config_digest.txt").write_text(report.config_digest + "\n", encoding="utf-8")
    click.echo(f"config_digest: {report.config_digest}")


@cli.command()
@click.option("--host", default="127.0.0.1", help="Host to bind the server to")
@click.option("--port", default=8000, help="Port to run the server on")
@click.option("--reload", is_flag=True, help="Enable auto-reload (development only)")
def serve(host: str, port: int, reload: bool):
    """Run the HTTP API with Uvicorn."""
    logger.info("=" * 80)
    logger.info("Starting HTTP server...")
    logger.info(f"  - Host: {host}")
    logger.info(f"  - Port: {port}")
    logger.info(f"  - Reload: {reload}")
    logger.info("=" * 80)

    uvicorn.run(
        "main:app",
        host=host,
        port=port,
        reload=reload,
        log_level="debug" if settings.DEBUG else "info",
    )


@cli.command()
def info():
    """Display application information."""
    click.echo("=" * 80)
    click.echo(f"Application: {settings.APP_NAME}")
    click.echo(f"Version: {settings.APP_VERSION}")
    click.echo(f"Environment: {settings.ENVIRONMENT}")
    click.echo(f"Debug Mode: {settings.DEBUG}")
    click.echo(f"Default alpha: {settings.DEFAULT_ALPHA}")
    click.echo(f"Exact signed-rank cap: n <= {settings.EXACT_MODE_CAP}")
    click.echo(f"Benchmark trials / workers: {settings.BENCH_TRIALS} / {settings.BENCH_WORKERS}")
    click.echo("=" * 80)


if __name__ == "__main__":
    cli()
