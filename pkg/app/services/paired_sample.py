import csv
import logging
import math
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from app.core.exceptions import (
    DataValidationError,
    DegenerateFeatureError,
    PairingError,
    ParseError,
    SchemaError,
)
from app.schemas.sample import DifferenceSample, PairedSample

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class PairedSampleService:
    """Loading, writing and preprocessing of paired samples."""

    @staticmethod
    def _read_csv(path: PathLike) -> Tuple[List[str], np.ndarray]:
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = [name.strip() for name in next(reader)]
            except StopIteration:
                raise SchemaError(f"{path}: file is empty, expected a header row")

            rows = []
            for row_number, row in enumerate(reader, start=1):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"{path}: row {row_number} has {len(row)} cells, expected {len(header)}",
                        row=row_number,
                        column=min(len(row), len(header)),
                    )
                values = []
                for col_number, cell in enumerate(row, start=1):
                    try:
                        value = float(cell)
                    except ValueError:
                        raise ParseError(
                            f"{path}: non-numeric cell {cell!r} at row {row_number}, "
                            f"column {col_number} ({header[col_number - 1]})",
                            row=row_number,
                            column=col_number,
                        )
                    if not math.isfinite(value):
                        raise DataValidationError(
                            f"{path}: non-finite value {cell!r} at row {row_number}, "
                            f"column {col_number} ({header[col_number - 1]})"
                        )
                    values.append(value)
                rows.append(values)

        matrix = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return header, matrix

    @staticmethod
    def load_paired_csv(path_a: PathLike, path_b: PathLike) -> PairedSample:
        """Read the first (x) and second (y) measurement files, paired by row."""
        header_a, x = PairedSampleService._read_csv(path_a)
        header_b, y = PairedSampleService._read_csv(path_b)

        if header_a != header_b:
            for position, (col_a, col_b) in enumerate(zip(header_a, header_b), start=1):
                if col_a != col_b:
                    raise SchemaError(
                        f"Header mismatch at position {position}: {col_a!r} in {path_a} "
                        f"vs {col_b!r} in {path_b}",
                        column=col_a,
                        position=position,
                    )
            position = min(len(header_a), len(header_b)) + 1
            raise SchemaError(
                f"Header length mismatch: {len(header_a)} columns in {path_a} "
                f"vs {len(header_b)} in {path_b}",
                position=position,
            )

        if x.shape[0] != y.shape[0]:
            raise PairingError(
                f"Row count mismatch: {x.shape[0]} rows in {path_a} vs {y.shape[0]} in {path_b}",
                rows_a=x.shape[0],
                rows_b=y.shape[0],
            )

        logger.debug(f"Loaded paired sample N={x.shape[0]}, d={x.shape[1]}")
        return PairedSample(x=x, y=y, feature_names=header_a)

    @staticmethod
    def write_paired_csv(sample: PairedSample, path_a: PathLike, path_b: PathLike) -> None:
        for path, matrix in ((path_a, sample.x), (path_b, sample.y)):
            with Path(path).open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(sample.feature_names)
                for row in matrix:
                    writer.writerow([repr(float(v)) for v in row])

    @staticmethod
    def standardize(sample: PairedSample) -> PairedSample:
        """Scale each feature by the mean and population std of its 2N pooled values."""
        pooled = np.vstack([sample.x, sample.y])
        mean = pooled.mean(axis=0)
        std = pooled.std(axis=0)
        # constant columns: the rounded std of e.g. 0.1 repeated is ~1e-17, not 0
        spread = np.ptp(pooled, axis=0)

        for k, value in enumerate(spread):
            if value == 0.0:
                raise DegenerateFeatureError(
                    f"Feature {k} ({sample.feature_names[k]}) has zero pooled standard deviation",
                    feature=k,
                )

        return PairedSample(
            x=(sample.x - mean) / std,
            y=(sample.y - mean) / std,
            feature_names=list(sample.feature_names),
        )

    @staticmethod
    def differences(sample: PairedSample) -> DifferenceSample:
        z = sample.y - sample.x
        if sample.d == 1:
            z = z[:, 0]
        return DifferenceSample(z=z, feature_names=list(sample.feature_names))
