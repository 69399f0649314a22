import csv
from pathlib import Path

import numpy as np
import pytest

from app.schemas.sample import PairedSample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_csv(tmp_path):
    """Write a header plus rows to tmp_path/<name> and return the path."""

    def _write(name, header, rows):
        path = Path(tmp_path) / name
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
        return path

    return _write


@pytest.fixture
def shifted_sample(rng):
    """N=30, d=5 sample whose last two features are shifted by 1.5."""
    x = rng.normal(size=(30, 5))
    y = 0.5 * x + np.sqrt(0.75) * rng.normal(size=(30, 5))
    y[:, 3:] += 1.5
    return PairedSample.from_arrays(x, y)
