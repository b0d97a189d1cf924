"""Tabular datasets with mixed numeric/nominal attributes and a binary class.

The on-disk format is a plain comma-separated file with a header row plus a
YAML schema sidecar declaring attribute kinds, nominal categories, the class
column and which label is the positive (minority) one.  In memory a dataset
is a dense float matrix: numeric cells hold their value, nominal cells hold
the category index from the schema.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

NUMERIC = "numeric"
NOMINAL = "nominal"


class DataError(ValueError):
    """Raised for malformed schema or data files."""


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str  # NUMERIC or NOMINAL
    categories: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, NOMINAL):
            raise DataError(f"attribute '{self.name}': unknown kind '{self.kind}'")
        if self.kind == NOMINAL and len(self.categories) < 1:
            raise DataError(f"attribute '{self.name}': nominal attribute needs categories")
        if self.kind == NOMINAL and len(set(self.categories)) != len(self.categories):
            raise DataError(f"attribute '{self.name}': duplicate categories")
        if self.kind == NUMERIC and self.categories:
            raise DataError(f"attribute '{self.name}': numeric attribute takes no categories")


@dataclass(frozen=True)
class DatasetSchema:
    attributes: tuple[AttributeSpec, ...]
    class_name: str
    negative_label: str
    positive_label: str

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes] + [self.class_name]
        if len(set(names)) != len(names):
            raise DataError("duplicate attribute names in schema")
        if self.negative_label == self.positive_label:
            raise DataError("class labels must be distinct")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Instance:
    """One row: attribute values (numeric value or category index) plus label."""

    values: tuple[float, ...]
    class_label: str
    synthetic: bool = False


@dataclass
class Dataset:
    """Immutable matrix-backed dataset; label 1 is the positive class."""

    schema: DatasetSchema
    values: np.ndarray      # (n, d) float64; nominal cells are category indices
    labels: np.ndarray      # (n,) int8; 1 = positive, 0 = negative
    synthetic: np.ndarray = field(default=None)  # type: ignore[assignment]
    row_ids: np.ndarray = field(default=None)    # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        n = self.labels.shape[0]
        if self.values.shape != (n, self.schema.n_attributes):
            raise DataError(
                f"value matrix shape {self.values.shape} does not match "
                f"{n} rows x {self.schema.n_attributes} attributes"
            )
        if self.synthetic is None:
            self.synthetic = np.zeros(n, dtype=bool)
        else:
            self.synthetic = np.asarray(self.synthetic, dtype=bool)
        if self.row_ids is None:
            self.row_ids = np.arange(n, dtype=np.int64)
        else:
            self.row_ids = np.asarray(self.row_ids, dtype=np.int64)
        for arr in (self.values, self.labels, self.synthetic, self.row_ids):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.labels == 0))

    def instance(self, i: int) -> Instance:
        label = self.schema.positive_label if self.labels[i] == 1 else self.schema.negative_label
        return Instance(tuple(self.values[i]), label, bool(self.synthetic[i]))

    def subset(self, indices: np.ndarray | list[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.schema,
            self.values[idx],
            self.labels[idx],
            self.synthetic[idx],
            self.row_ids[idx],
        )

    def numeric_mask(self) -> np.ndarray:
        return np.array([a.kind == NUMERIC for a in self.schema.attributes], dtype=bool)


def load_schema(path: str | Path) -> DatasetSchema:
    """Read a YAML schema sidecar.

    Keys: ``class_attribute`` (column name), ``class_labels`` (two labels,
    negative first), ``positive_label`` (one of the two), ``attributes``
    (list of ``{name, kind, categories?}`` entries in column order).
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"schema file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise DataError(f"schema file {path} is not valid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise DataError(f"schema file {path}: expected a mapping at top level")
    for key in ("class_attribute", "class_labels", "positive_label", "attributes"):
        if key not in raw:
            raise DataError(f"schema file {path}: missing key '{key}'")
    labels = [str(v) for v in raw["class_labels"]]
    if len(labels) != 2:
        raise DataError(f"schema file {path}: class_labels must list exactly two labels")
    positive = str(raw["positive_label"])
    if positive not in labels:
        raise DataError(f"schema file {path}: positive_label '{positive}' not in class_labels")
    negative = labels[0] if labels[1] == positive else labels[1]
    attrs = []
    for entry in raw["attributes"]:
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise DataError(f"schema file {path}: each attribute needs 'name' and 'kind'")
        cats = tuple(str(c) for c in entry.get("categories", ()) or ())
        attrs.append(AttributeSpec(str(entry["name"]), str(entry["kind"]), cats))
    return DatasetSchema(tuple(attrs), str(raw["class_attribute"]), negative, positive)


def save_schema(schema: DatasetSchema, path: str | Path) -> None:
    doc = {
        "class_attribute": schema.class_name,
        "class_labels": [schema.negative_label, schema.positive_label],
        "positive_label": schema.positive_label,
        "attributes": [
            {"name": a.name, "kind": a.kind, **({"categories": list(a.categories)} if a.kind == NOMINAL else {})}
            for a in schema.attributes
        ],
    }
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")


def _parse_cell(cell: str, attr: AttributeSpec, row_no: int) -> float:
    if cell == "":
        raise DataError(f"row {row_no}: missing value for attribute '{attr.name}'")
    if "," in cell:
        raise DataError(f"row {row_no}: cell for '{attr.name}' contains a comma")
    if attr.kind == NUMERIC:
        try:
            return float(cell)
        except ValueError:
            raise DataError(
                f"row {row_no}: '{cell}' is not numeric for attribute '{attr.name}'"
            ) from None
    try:
        return float(attr.categories.index(cell))
    except ValueError:
        raise DataError(
            f"row {row_no}: unknown category '{cell}' for attribute '{attr.name}'"
        ) from None


def load_csv(data_path: str | Path, schema: DatasetSchema | str | Path) -> Dataset:
    """Load a CSV file against a schema (or a schema file path)."""
    if not isinstance(schema, DatasetSchema):
        schema = load_schema(schema)
    data_path = Path(data_path)
    try:
        text = data_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"data file not found: {data_path}") from None
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{data_path}: empty file, expected a header row") from None
    expected = [a.name for a in schema.attributes] + [schema.class_name]
    if header != expected:
        raise DataError(
            f"{data_path}: header {header!r} does not match schema columns {expected!r}"
        )
    rows: list[list[float]] = []
    labels: list[int] = []
    for row_no, row in enumerate(reader, start=2):
        if len(row) != len(expected):
            raise DataError(
                f"row {row_no}: expected {len(expected)} cells, found {len(row)}"
            )
        rows.append([_parse_cell(cell, attr, row_no) for cell, attr in zip(row, schema.attributes)])
        cls = row[-1]
        if cls == schema.positive_label:
            labels.append(1)
        elif cls == schema.negative_label:
            labels.append(0)
        else:
            raise DataError(f"row {row_no}: unknown class label '{cls}'")
    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, schema.n_attributes))
    return Dataset(schema, values, np.array(labels, dtype=np.int8))


def _format_value(v: float, attr: AttributeSpec) -> str:
    if attr.kind == NOMINAL:
        return attr.categories[int(v)]
    return repr(float(v))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV (synthetic flags are not persisted)."""
    lines = [",".join([a.name for a in d.schema.attributes] + [d.schema.class_name])]
    for i in range(len(d)):
        cells = [_format_value(v, a) for v, a in zip(d.values[i], d.schema.attributes)]
        cells.append(d.schema.positive_label if d.labels[i] == 1 else d.schema.negative_label)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def imbalance_ratio(d: Dataset) -> float:
    """Majority/minority count ratio, with label 1 declared the minority.

    Raises on zero positive instances.  If positives actually outnumber
    negatives the declared minority is not the true minority; the ratio is
    still negatives/positives and a UserWarning is emitted.
    """
    pos = d.n_positive
    neg = d.n_negative
    if pos == 0:
        raise DataError("imbalance ratio undefined: no positive (minority) instances")
    if pos > neg:
        import warnings

        warnings.warn(
            "declared minority class outnumbers the majority; ratio is below 1",
            UserWarning,
            stacklevel=2,
        )
    return neg / pos


@dataclass(frozen=True)
class FoldSplit:
    """Assignment of every instance to one of k cross-validation folds."""

    k: int
    fold_of: np.ndarray  # (n,) int64 fold index per instance
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def stratified_kfold(d: Dataset, k: int, seed: int) -> FoldSplit:
    """Stratified k-fold assignment.

    Within each class the indices are shuffled by `seed` and dealt
    round-robin to folds; the dealing position carries over between classes
    so total fold sizes differ by at most one.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    counts = (d.n_negative, d.n_positive)
    if k > min(counts):
        raise ValueError(
            f"k={k} exceeds the smallest class count ({min(counts)}); "
            "every fold needs at least one instance of each class"
        )
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(d), dtype=np.int64)
    cursor = 0
    for cls in (0, 1):
        idx = np.flatnonzero(d.labels == cls)
        idx = rng.permutation(idx)
        for j, i in enumerate(idx):
            fold_of[i] = (cursor + j) % k
        cursor = (cursor + len(idx)) % k
    return FoldSplit(k, fold_of, seed)
