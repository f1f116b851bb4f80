"""Tabular datasets: CSV ingestion, schema inference and [0, 1] normalization.

Cells are held in a float matrix.  Numeric columns store their values,
categorical columns store the index of the category within the column's
schema.  Missing cells are ``NaN`` and categories that were not part of the
schema (only possible when re-encoding a file against a stored schema) are
stored as ``UNSEEN``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

CATEGORICAL = "categorical"
NUMERIC = "numeric"
MISSING_TOKENS = frozenset({"", "?"})
UNSEEN = -1.0


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL and not self.categories:
            raise DataError(f"categorical column {self.name!r} has no categories")

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC


@dataclass(frozen=True)
class Dataset:
    """Feature grid with per-column schema and (optional) class labels.

    ``labels`` holds indices into ``classes``; it is ``None`` for unlabelled
    data such as a prediction input file.
    """

    schema: tuple[ColumnSchema, ...]
    rows: np.ndarray
    labels: np.ndarray | None
    classes: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.schema):
            raise DataError(
                f"row grid shape {rows.shape} does not match {len(self.schema)} columns"
            )
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (rows.shape[0],):
                raise DataError("label count does not match row count")
            if labels.size and (labels.min() < 0 or labels.max() >= len(self.classes)):
                raise DataError("label outside the class set")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def m(self) -> int:
        return self.rows.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.schema, self.rows[index], labels, self.classes)

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DataError("dataset has no class labels")
        return self.labels


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _parses_as_real(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            table = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    table = [r for r in table if any(c.strip() for c in r)]
    if not table:
        raise DataError(f"{path}: no header row")
    header = [h.strip() for h in table[0]]
    body = table[1:]
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(
                f"{path}: ragged rows (row {lineno} has {len(r)} cells, header has {len(header)})"
            )
    if not body:
        raise DataError(f"{path}: empty dataset")
    return header, body


def infer_schema(
    names: Sequence[str],
    columns: Sequence[Sequence[str]],
    schema_hints: Mapping[str, str] | None = None,
) -> tuple[ColumnSchema, ...]:
    hints = dict(schema_hints or {})
    schema = []
    for name, cells in zip(names, columns):
        present = [c.strip() for c in cells if not _is_missing(c)]
        kind = hints.get(name)
        if kind is None:
            kind = NUMERIC if present and all(_parses_as_real(c) for c in present) else CATEGORICAL
        if kind == NUMERIC:
            schema.append(ColumnSchema(name, NUMERIC))
        else:
            schema.append(ColumnSchema(name, CATEGORICAL, tuple(sorted(set(present)))))
    return tuple(schema)


def encode_cells(schema: Sequence[ColumnSchema], columns: Sequence[Sequence[str]]) -> np.ndarray:
    """Encode raw string columns against ``schema`` into the float grid."""
    n = len(columns[0]) if columns else 0
    grid = np.empty((n, len(schema)))
    for j, (col, cells) in enumerate(zip(schema, columns)):
        if col.is_numeric:
            for i, c in enumerate(cells):
                if _is_missing(c):
                    grid[i, j] = math.nan
                    continue
                try:
                    grid[i, j] = float(c)
                except ValueError as exc:
                    raise DataError(f"column {col.name!r}: {c!r} is not numeric") from exc
        else:
            lookup = {cat: float(k) for k, cat in enumerate(col.categories)}
            for i, c in enumerate(cells):
                grid[i, j] = math.nan if _is_missing(c) else lookup.get(c.strip(), UNSEEN)
    return grid


def load_csv(
    path,
    class_column: str | None = None,
    schema_hints: Mapping[str, str] | None = None,
    *,
    schema: Sequence[ColumnSchema] | None = None,
    classes: Sequence[str] | None = None,
) -> Dataset:
    """Read a header-first CSV file into a :class:`Dataset`.

    ``class_column`` defaults to the last column.  Passing a stored ``schema``
    (and ``classes``) re-encodes the file against it instead of inferring a
    new one; the class column is then optional.
    """
    header, body = _read_table(path)
    if schema is not None and class_column is None:
        class_column = next((h for h in header if h not in {c.name for c in schema}), None)
    elif class_column is None:
        class_column = header[-1]
    if class_column is not None and class_column not in header:
        if schema is None:
            raise DataError(f"{path}: unknown class column {class_column!r}")
        class_column = None

    feature_names = [h for h in header if h != class_column]
    columns = [[r[header.index(h)] for r in body] for h in feature_names]

    if schema is None:
        schema = infer_schema(feature_names, columns, schema_hints)
    else:
        schema = tuple(schema)
        if feature_names != [c.name for c in schema]:
            raise DataError(
                f"{path}: columns {feature_names} do not match the stored schema "
                f"{[c.name for c in schema]}"
            )

    labels = None
    if class_column is not None:
        raw = [r[header.index(class_column)].strip() for r in body]
        if any(_is_missing(v) for v in raw):
            raise DataError(f"{path}: missing class label")
        if classes is None:
            classes = tuple(sorted(set(raw)))
        lookup = {c: k for k, c in enumerate(classes)}
        unknown = sorted(set(raw) - set(lookup))
        if unknown:
            raise DataError(f"{path}: unknown class labels {unknown}")
        labels = np.array([lookup[v] for v in raw], dtype=np.int64)
    return Dataset(schema, encode_cells(schema, columns), labels, tuple(classes or ()))


@dataclass(frozen=True)
class NormalizationModel:
    """Per-column min/max scaling plus one-of-K expansion of categorical columns."""

    schema: tuple[ColumnSchema, ...]
    minimum: np.ndarray
    maximum: np.ndarray
    output_names: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        names = []
        for col in self.schema:
            if col.is_numeric:
                names.append(col.name)
            else:
                names.extend(f"{col.name}={cat}" for cat in col.categories)
        object.__setattr__(self, "output_names", tuple(names))

    @property
    def degenerate(self) -> np.ndarray:
        return self.maximum == self.minimum

    @property
    def width(self) -> int:
        return len(self.output_names)


def fit_normalizer(d: Dataset) -> NormalizationModel:
    if d.n == 0:
        raise DataError("cannot fit a normalizer on an empty dataset")
    lo = np.full(d.m, np.nan)
    hi = np.full(d.m, np.nan)
    for j, col in enumerate(d.schema):
        if not col.is_numeric:
            continue
        v = d.rows[:, j]
        v = v[~np.isnan(v)]
        # an all-missing column behaves like a constant one
        lo[j], hi[j] = (v.min(), v.max()) if v.size else (0.0, 0.0)
    return NormalizationModel(d.schema, lo, hi)


def apply_normalizer(model: NormalizationModel, d: Dataset) -> Dataset:
    """Map ``d`` into the auto-encoder's real space, every cell in [0, 1].

    Numeric values are min/max scaled and clamped; degenerate columns and
    missing numeric cells become 0.5.  Categorical columns expand to one
    indicator per category; a missing category fills its indicators with 0.5
    and an unseen category leaves them all at 0.
    """
    if tuple(d.schema) != tuple(model.schema):
        raise DataError("dataset schema does not match the normalizer")
    blocks = []
    for j, col in enumerate(model.schema):
        v = d.rows[:, j]
        if col.is_numeric:
            lo, hi = model.minimum[j], model.maximum[j]
            if hi > lo:
                out = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
            else:
                out = np.full_like(v, 0.5)
            blocks.append(np.where(np.isnan(v), 0.5, out)[:, None])
        else:
            k = len(col.categories)
            onehot = (v[:, None] == np.arange(k)[None, :]).astype(float)
            onehot[np.isnan(v)] = 0.5
            blocks.append(onehot)
    grid = np.hstack(blocks) if blocks else np.empty((d.n, 0))
    schema = tuple(ColumnSchema(name, NUMERIC) for name in model.output_names)
    return Dataset(schema, grid, d.labels, d.classes)

