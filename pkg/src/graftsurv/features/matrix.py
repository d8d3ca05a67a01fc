"""Dense feature matrices with named columns.

Column order is part of the contract: models validate that prediction-time
columns match fit-time columns by name and position.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from graftsurv.exceptions import DataError
from graftsurv.ioutil import atomic_write_text

__all__ = ["FeatureMatrix"]


class FeatureMatrix:
    """A float64 matrix plus its column names.

    Parameters
    ----------
    column_names : sequence of str
        Unique, non-empty names, one per column.
    values : array-like, shape (n_rows, n_cols)
        Finite feature values.
    """

    def __init__(self, column_names, values) -> None:
        names = tuple(str(c) for c in column_names)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"feature values must be 2-d, got shape {values.shape}")
        if len(names) != values.shape[1]:
            raise DataError(
                f"{len(names)} column names for {values.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise DataError("feature column names must be unique")
        if any(not n for n in names):
            raise DataError("feature column names must be non-empty")
        if not np.all(np.isfinite(values)):
            raise DataError("feature values must be finite")
        self.column_names = names
        self.values = values

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def take_rows(self, idx) -> "FeatureMatrix":
        return FeatureMatrix(self.column_names, self.values[np.asarray(idx)])

    def to_csv(self, path) -> None:
        """Write a header row of column names, then one row per record.

        Floats are written with shortest-round-trip repr, so a read-back
        reproduces the exact values.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.column_names)
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        atomic_write_text(path, buf.getvalue())

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        try:
            fh = open(path, "r", encoding="utf-8", newline="")
        except OSError as exc:
            raise DataError(f"cannot read features {path}: {exc}") from exc
        with fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty feature CSV") from None
            rows = [[float(v) for v in row] for row in reader if row]
        values = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(header)))
        return cls(header, values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return self.column_names == other.column_names and np.array_equal(
            self.values, other.values
        )

    def __repr__(self) -> str:
        return f"FeatureMatrix({self.n_rows} rows, {self.n_cols} cols)"
