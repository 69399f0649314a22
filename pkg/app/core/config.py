from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "paired-test"
    APP_DESCRIPTION: str = (
        "Paired-sample hypothesis testing: multivariate Wilcoxon signed-rank, "
        "Hotelling T2 and Bonferroni multiple testing"
    )
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: Literal["development", "staging", "production"] = "development"
    DEBUG: bool = False

    # Logging
    LOG_TO_FILE: bool = Field(
        default=False, description="Also write logs to LOGS_DIR/paired_test.log"
    )
    LOGS_DIR: Path = Field(default=Path("logs"), description="Log file directory")

    # Testing defaults
    DEFAULT_ALPHA: float = Field(default=0.05, gt=0.0, lt=1.0)
    EXACT_MODE_CAP: int = Field(
        default=25, ge=1, description="Largest n for exact signed-rank p-values"
    )
    SINGULARITY_EPS: float = Field(
        default=1e-12,
        gt=0.0,
        description="Cholesky pivot threshold relative to the mean diagonal",
    )
    DEGENERATE_PAIR_RTOL: float = Field(
        default=1e-12,
        ge=0.0,
        description="Relative tolerance under which a pair counts as coincident",
    )

    # Benchmark defaults
    BENCH_TRIALS: int = Field(default=200, ge=1)
    BENCH_WORKERS: int = Field(default=1, ge=1)
    BENCH_MASTER_SEED: int = Field(default=20240101, ge=0)

    # Validate that debug is False in production
    @field_validator("DEBUG", mode="before")
    @classmethod
    def validate_debug_in_production(cls, v):
        # Convert string 'false' to boolean False
        if isinstance(v, str):
            if v.lower() == "false":
                return False
            elif v.lower() == "true":
                return True

        return v

    @field_validator("DEBUG", mode="after")
    @classmethod
    def check_debug_in_production(cls, v, info):
        if info.data.get("ENVIRONMENT") == "production" and v:
            raise ValueError("DEBUG should be False in production")
        return v

    class Config:
        env_file = ".env"
        case_sensitive = True
        env_file_encoding = "utf-8"
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
