"""Distance and k-means clustering over mixed numeric/nominal attributes.

Numeric attributes are min-max normalized to [0, 1] using statistics from
the fitted (training) data; nominal attributes contribute 0/1 mismatch.
Centroids live in the normalized space: per numeric attribute the mean of
normalized member values, per nominal attribute the mode (lowest category
index on ties).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, DatasetSchema, NOMINAL, NUMERIC


@dataclass(frozen=True)
class FeatureScaler:
    """Per-attribute min/max over the data the scaler was built from."""

    numeric: np.ndarray  # (d,) bool
    mins: np.ndarray     # (d,) float64, 0 for nominal columns
    maxs: np.ndarray     # (d,) float64, 0 for nominal columns

    @classmethod
    def fit(cls, d: Dataset) -> "FeatureScaler":
        numeric = d.numeric_mask()
        mins = np.zeros(d.schema.n_attributes)
        maxs = np.zeros(d.schema.n_attributes)
        if len(d) == 0:
            raise ValueError("cannot fit a scaler on an empty dataset")
        mins[numeric] = d.values[:, numeric].min(axis=0)
        maxs[numeric] = d.values[:, numeric].max(axis=0)
        return cls(numeric, mins, maxs)

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Normalize numeric columns to [0, 1] (clamped); nominal pass through.

        Constant numeric attributes (max == min) map to 0 and therefore
        contribute nothing to distances.
        """
        v = np.atleast_2d(np.asarray(values, dtype=np.float64)).copy()
        span = self.maxs - self.mins
        for j in np.flatnonzero(self.numeric):
            if span[j] > 0:
                v[:, j] = np.clip((v[:, j] - self.mins[j]) / span[j], 0.0, 1.0)
            else:
                v[:, j] = 0.0
        return v if np.asarray(values).ndim == 2 else v[0]


def mixed_distance(a: np.ndarray, b: np.ndarray, scaler: FeatureScaler) -> float:
    """Euclidean-style distance between two attribute-value rows.

    Per numeric attribute the difference of normalized values, per nominal
    attribute 0/1 mismatch; the result is sqrt of the sum of squares.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = scaler.numeric.shape[0]
    if a.shape != (d,) or b.shape != (d,):
        raise ValueError(f"rows must both have {d} attributes, got {a.shape} and {b.shape}")
    num = scaler.numeric
    na = scaler.transform(a)
    nb = scaler.transform(b)
    diff_num = na[num] - nb[num]
    mismatch = (a[~num] != b[~num]).astype(np.float64)
    return float(np.sqrt(np.sum(diff_num * diff_num) + np.sum(mismatch)))


def _distance_matrix(norm_values: np.ndarray, centroids: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """Squared distances from every normalized row to every centroid."""
    n, k = norm_values.shape[0], centroids.shape[0]
    out = np.zeros((n, k))
    num = np.flatnonzero(numeric)
    nom = np.flatnonzero(~numeric)
    for c in range(k):
        if num.size:
            diff = norm_values[:, num] - centroids[c, num]
            out[:, c] += np.sum(diff * diff, axis=1)
        if nom.size:
            out[:, c] += np.sum(norm_values[:, nom] != centroids[c, nom], axis=1)
    return out


@dataclass(frozen=True)
class ClusterModel:
    """Fitted k-means partition: centroids in normalized space plus scaler."""

    schema: DatasetSchema
    k: int
    centroids: np.ndarray  # (k, d) in normalized space
    scaler: FeatureScaler
    seed: int
    n_iter: int = 0
    repairs: int = 0
    objective: float = 0.0

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Nearest-centroid index per row (lowest index on ties)."""
        v = np.atleast_2d(np.asarray(values, dtype=np.float64))
        norm = self.scaler.transform(v)
        d2 = _distance_matrix(norm, self.centroids, self.scaler.numeric)
        return np.argmin(d2, axis=1)


def assign_cluster(values: np.ndarray, model: ClusterModel) -> int:
    """Cluster index of one attribute-value row."""
    return int(model.assign(np.atleast_2d(values))[0])


def _update_centroids(
    norm_values: np.ndarray, assign: np.ndarray, k: int, numeric: np.ndarray
) -> np.ndarray:
    d = norm_values.shape[1]
    centroids = np.zeros((k, d))
    for c in range(k):
        members = norm_values[assign == c]
        for j in range(d):
            col = members[:, j]
            if numeric[j]:
                centroids[c, j] = col.mean()
            else:
                # mode; ties broken by lowest category index
                cats, counts = np.unique(col, return_counts=True)
                centroids[c, j] = cats[np.argmax(counts)]
    return centroids


def kmeans_fit(
    d: Dataset, k: int, seed: int, max_iter: int = 100, n_restarts: int = 1
) -> ClusterModel:
    """Lloyd-style k-means under the mixed distance.

    Initial centroids are k distinct instances chosen uniformly by `seed`.
    If a cluster empties, its centroid is reseeded to the point farthest
    from it (lowest index on ties).  Converges when no assignment changes.
    With n_restarts > 1 the fit is repeated with seeds seed, seed+1, ...
    and the run with the lowest objective wins (earliest on ties).
    """
    if n_restarts < 1:
        raise ValueError(f"n_restarts must be at least 1, got {n_restarts}")
    best: ClusterModel | None = None
    for r in range(n_restarts):
        model = _kmeans_single(d, k, seed + r, max_iter)
        if best is None or model.objective < best.objective:
            best = model
    return best


def _kmeans_single(d: Dataset, k: int, seed: int, max_iter: int) -> ClusterModel:
    n = len(d)
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and the number of instances ({n}), got {k}")
    scaler = FeatureScaler.fit(d)
    norm = scaler.transform(d.values)
    numeric = scaler.numeric
    rng = np.random.default_rng(seed)
    centroids = norm[np.sort(rng.choice(n, size=k, replace=False))].copy()
    assign = np.full(n, -1, dtype=np.int64)
    repairs = 0
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _distance_matrix(norm, centroids, numeric)
        new_assign = np.argmin(d2, axis=1)
        for c in range(k):
            if not np.any(new_assign == c):
                far = int(np.argmax(d2[:, c]))
                centroids[c] = norm[far]
                repairs += 1
                d2 = _distance_matrix(norm, centroids, numeric)
                new_assign = np.argmin(d2, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centroids = _update_centroids(norm, assign, k, numeric)
    d2 = _distance_matrix(norm, centroids, numeric)
    objective = float(d2[np.arange(n), np.argmin(d2, axis=1)].sum())
    return ClusterModel(d.schema, k, centroids, scaler, seed, n_iter, repairs, objective)


def kmeans_objective(model: ClusterModel, d: Dataset) -> float:
    """Sum of squared mixed distances from each instance to its centroid."""
    norm = model.scaler.transform(d.values)
    d2 = _distance_matrix(norm, model.centroids, model.scaler.numeric)
    return float(d2[np.arange(len(d)), np.argmin(d2, axis=1)].sum())


def cluster_model_to_text(model: ClusterModel) -> str:
    """Serialize a fitted partition to a JSON text document."""
    doc = {
        "kind": "cluster_model",
        "k": model.k,
        "seed": model.seed,
        "n_iter": model.n_iter,
        "repairs": model.repairs,
        "objective": model.objective,
        "numeric": [bool(b) for b in model.scaler.numeric],
        "mins": model.scaler.mins.tolist(),
        "maxs": model.scaler.maxs.tolist(),
        "centroids": model.centroids.tolist(),
        "schema": _schema_to_doc(model.schema),
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def cluster_model_from_text(text: str) -> ClusterModel:
    doc = json.loads(text)
    if doc.get("kind") != "cluster_model":
        raise ValueError(f"not a cluster model document (kind={doc.get('kind')!r})")
    schema = _schema_from_doc(doc["schema"])
    scaler = FeatureScaler(
        np.array(doc["numeric"], dtype=bool),
        np.array(doc["mins"], dtype=np.float64),
        np.array(doc["maxs"], dtype=np.float64),
    )
    return ClusterModel(
        schema,
        int(doc["k"]),
        np.array(doc["centroids"], dtype=np.float64),
        scaler,
        int(doc["seed"]),
        int(doc["n_iter"]),
        int(doc["repairs"]),
        float(doc["objective"]),
    )


def save_cluster_model(model: ClusterModel, path: str | Path) -> None:
    Path(path).write_text(cluster_model_to_text(model), encoding="utf-8")


def load_cluster_model(path: str | Path) -> ClusterModel:
    return cluster_model_from_text(Path(path).read_text(encoding="utf-8"))


def _schema_to_doc(schema: DatasetSchema) -> dict:
    return {
        "class_attribute": schema.class_name,
        "negative_label": schema.negative_label,
        "positive_label": schema.positive_label,
        "attributes": [
            {"name": a.name, "kind": a.kind, "categories": list(a.categories)}
            for a in schema.attributes
        ],
    }


def _schema_from_doc(doc: dict) -> DatasetSchema:
    from .dataset import AttributeSpec

    attrs = tuple(
        AttributeSpec(e["name"], e["kind"], tuple(e.get("categories", ())))
        for e in doc["attributes"]
    )
    return DatasetSchema(attrs, doc["class_attribute"], doc["negative_label"], doc["positive_label"])
