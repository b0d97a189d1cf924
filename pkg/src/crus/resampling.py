"""Resampling for imbalanced training sets.

Three strategies: plain random undersampling of the majority class down to
a spread (majority:minority ratio) target, SMOTE-style synthetic minority
oversampling, and cluster-aware undersampling that first partitions the
feature space with k-means and then undersamples only the clusters whose
local imbalance ratio exceeds a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import ClusterModel, FeatureScaler, kmeans_fit
from .dataset import Dataset, DataError, imbalance_ratio

LOW_GROUP = "low_IR_group"
HIGH_GROUP = "high_IR_group"


def _rus_keep_indices(labels: np.ndarray, spread: float, rng: np.random.Generator) -> np.ndarray:
    """Indices to retain, in original order."""
    minority = np.flatnonzero(labels == 1)
    majority = np.flatnonzero(labels == 0)
    target = math.floor(spread * minority.size)
    if majority.size <= target:
        return np.arange(labels.size)
    kept_majority = rng.choice(majority, size=target, replace=False)
    return np.sort(np.concatenate([minority, kept_majority]))


def rus_undersample(d: Dataset, spread: float = 4.0, seed: int = 0) -> Dataset:
    """Randomly drop majority instances down to spread * |minority|.

    A dataset already at or below the spread is returned unchanged.  The
    surviving instances keep their original order.
    """
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    if d.n_positive == 0:
        raise DataError("undersampling needs at least one minority instance")
    if d.n_negative <= spread * d.n_positive:
        return d
    keep = _rus_keep_indices(np.asarray(d.labels), spread, np.random.default_rng(seed))
    return d.subset(keep)


def _minority_distances(d: Dataset, scaler: FeatureScaler) -> np.ndarray:
    """Pairwise squared mixed distances among the minority instances."""
    idx = np.flatnonzero(d.labels == 1)
    norm = scaler.transform(d.values[idx])
    raw = d.values[idx]
    numeric = scaler.numeric
    m = idx.size
    out = np.zeros((m, m))
    num = np.flatnonzero(numeric)
    nom = np.flatnonzero(~numeric)
    for j in num:
        diff = norm[:, j][:, None] - norm[:, j][None, :]
        out += diff * diff
    for j in nom:
        out += (raw[:, j][:, None] != raw[:, j][None, :]).astype(np.float64)
    return out


def smote_oversample(
    d: Dataset, percentage: float, k_neighbors: int = 5, seed: int = 0
) -> Dataset:
    """Append floor(percentage/100 * |minority|) synthetic minority instances.

    Bases cycle through one seeded shuffle of the minority; for each
    synthetic a neighbor is drawn uniformly from the base's k nearest
    minority neighbors (mixed distance, ties by index), then numeric
    attributes interpolate base + delta * (neighbor - base) with a single
    delta ~ U[0,1] per synthetic; nominal attributes copy the base.
    Synthetic rows are appended after the originals and flagged.
    """
    if percentage < 0:
        raise ValueError(f"percentage must be nonnegative, got {percentage}")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    minority = np.flatnonzero(d.labels == 1)
    if minority.size <= k_neighbors:
        raise DataError(
            f"SMOTE needs more than k_neighbors={k_neighbors} minority instances, "
            f"found {minority.size}"
        )
    n_new = math.floor(percentage / 100.0 * minority.size)
    if n_new == 0:
        return d
    rng = np.random.default_rng(seed)
    scaler = FeatureScaler.fit(d)
    d2 = _minority_distances(d, scaler)
    np.fill_diagonal(d2, np.inf)
    # k nearest per row; stable sort keeps lowest-index ordering on ties
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k_neighbors]
    order = rng.permutation(minority.size)
    numeric = d.numeric_mask()
    new_rows = np.empty((n_new, d.schema.n_attributes))
    for s in range(n_new):
        base_local = order[s % minority.size]
        neighbor_local = nn[base_local, rng.integers(k_neighbors)]
        delta = rng.uniform()
        base = d.values[minority[base_local]]
        neighbor = d.values[minority[neighbor_local]]
        row = base.copy()
        row[numeric] = base[numeric] + delta * (neighbor[numeric] - base[numeric])
        new_rows[s] = row
    values = np.vstack([d.values, new_rows])
    labels = np.concatenate([d.labels, np.ones(n_new, dtype=np.int8)])
    synthetic = np.concatenate([d.synthetic, np.ones(n_new, dtype=bool)])
    row_ids = np.concatenate([d.row_ids, -1 - np.arange(n_new, dtype=np.int64)])
    return Dataset(d.schema, values, labels, synthetic, row_ids)


def suggest_threshold(global_ir: float, reduction_fraction: float) -> float:
    """The global imbalance ratio scaled down by the requested reduction."""
    if global_ir <= 0:
        raise ValueError(f"global imbalance ratio must be positive, got {global_ir}")
    if not 0.0 <= reduction_fraction <= 1.0:
        raise ValueError(f"reduction fraction must be within [0, 1], got {reduction_fraction}")
    return global_ir * (1.0 - reduction_fraction)


@dataclass(frozen=True)
class ClusterPartition:
    """A fitted k-means model with per-cluster imbalance bookkeeping."""

    model: ClusterModel
    cluster_pos: tuple[int, ...]
    cluster_neg: tuple[int, ...]
    cluster_ir: tuple[float, ...]   # inf marks a cluster with no minority
    flagged: tuple[bool, ...]       # True = undersample this cluster
    threshold: float
    policy: str
    warnings: tuple[str, ...] = ()

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(HIGH_GROUP if f else LOW_GROUP for f in self.flagged)

    def group_of_cluster(self, cluster: int) -> str:
        return HIGH_GROUP if self.flagged[cluster] else LOW_GROUP


def plan_cluster_partition(
    d: Dataset,
    k: int,
    threshold: float,
    seed: int = 0,
    policy: str = "above",
    n_restarts: int = 10,
) -> ClusterPartition:
    """Cluster the training set and decide which clusters to undersample.

    Default policy flags clusters whose imbalance ratio exceeds the
    threshold.  The "invert" policy flags the complement instead (clusters
    at or below the threshold), for experiments with the opposite reading.
    Raises when no cluster falls at or below the threshold; that situation
    calls for a larger k.  The partition is the best of n_restarts seeded
    k-means runs, which makes the plan far less sensitive to a poor draw
    of initial centroids.
    """
    if policy not in ("above", "invert"):
        raise ValueError(f"unknown policy '{policy}' (expected 'above' or 'invert')")
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    model = kmeans_fit(d, k, seed, n_restarts=n_restarts)
    assign = model.assign(d.values)
    warnings: list[str] = []
    pos, neg, irs = [], [], []
    for c in range(k):
        mask = assign == c
        n_pos = int(np.sum(d.labels[mask] == 1))
        n_neg = int(np.sum(d.labels[mask] == 0))
        pos.append(n_pos)
        neg.append(n_neg)
        if n_pos == 0:
            irs.append(math.inf)
            warnings.append(f"cluster {c} has no minority instances; ratio treated as infinite")
        else:
            irs.append(n_neg / n_pos)
    ir_arr = np.array(irs)
    if not np.any(ir_arr <= threshold):
        raise DataError(
            f"every cluster's imbalance ratio exceeds the threshold {threshold}; "
            f"increase k (tried k={k}, ratios={[round(v, 2) for v in irs]})"
        )
    if policy == "above":
        flagged = tuple(bool(v > threshold) for v in irs)
    else:
        flagged = tuple(bool(v <= threshold) for v in irs)
    return ClusterPartition(
        model, tuple(pos), tuple(neg), tuple(irs), flagged, threshold, policy, tuple(warnings)
    )


@dataclass(frozen=True)
class GroupedTrainSets:
    """Training material for the two per-group models."""

    low_group: Dataset   # unflagged clusters, untouched
    high_group: Dataset  # flagged clusters after undersampling
    warnings: tuple[str, ...] = ()


def apply_clustering_rus(
    d: Dataset, partition: ClusterPartition, spread: float = 4.0, seed: int = 0
) -> GroupedTrainSets:
    """Split the training set by cluster flags and undersample the flagged part.

    The unflagged union passes through untouched (original order); the
    flagged union is undersampled as one pool at the given spread.  A
    flagged union without minority instances undersamples to empty, which
    is reported as a warning and leaves that group without a model.
    """
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    assign = partition.model.assign(d.values)
    flagged_mask = np.array(partition.flagged, dtype=bool)[assign]
    low_idx = np.flatnonzero(~flagged_mask)
    high_idx = np.flatnonzero(flagged_mask)
    warnings: list[str] = []
    if high_idx.size:
        labels = np.asarray(d.labels)[high_idx]
        if not np.any(labels == 1):
            warnings.append(
                "flagged clusters contain no minority instances; "
                "undersampling keeps nothing and the group is dropped"
            )
            high_idx = high_idx[:0]
        else:
            keep_local = _rus_keep_indices(labels, spread, np.random.default_rng(seed))
            high_idx = high_idx[keep_local]
    return GroupedTrainSets(d.subset(low_idx), d.subset(high_idx), tuple(warnings))
