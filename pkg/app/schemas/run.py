from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.schemas.enums import (
    CliMethod,
    DegeneratePolicy,
    OutputFormat,
    Tail,
    UniTest,
    WsrMode,
)


class TestOptions(BaseModel):
    __test__ = False

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA, gt=0.0, lt=1.0)
    standardize: bool = False
    mode: WsrMode = WsrMode.auto
    tail: Tail = Tail.two_sided
    uni_test: UniTest = UniTest.wsr
    degenerate_policy: DegeneratePolicy = DegeneratePolicy.drop
    normalize: bool = Field(
        default=True, description="Unit-normalize the pairwise bisectors before aggregation"
    )


class TestRunConfig(TestOptions):
    """Validated arguments of `paired-test test`."""

    method: CliMethod
    x_path: Path
    y_path: Path
    out: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.json


class TestRequest(TestOptions):
    """Body of POST /tests/{method}."""

    x: List[List[float]] = Field(min_length=1)
    y: List[List[float]] = Field(min_length=1)
    feature_names: Optional[List[str]] = None

    @model_validator(mode="after")
    def check_shapes(self):
        if len(self.x) != len(self.y):
            raise ValueError(f"x has {len(self.x)} rows but y has {len(self.y)}")
        widths = {len(row) for row in self.x} | {len(row) for row in self.y}
        if len(widths) != 1:
            raise ValueError(f"Every row of x and y must have the same length, got lengths {sorted(widths)}")
        return self
