"""Cross-validated evaluation of sampler/classifier pipelines.

Folds are always created before any resampling, and resampling is applied
to each training split alone, so synthetic or dropped instances never
touch a test fold.  The clustered variant re-fits the cluster partition
inside every fold on the training split only, trains one model per cluster
group, routes test instances by nearest centroid, and reports the
test-count weighted average of the group performances.

Seed discipline: from one master seed, the fold split uses
derive_seed(seed, "folds") and fold f uses derive_seed(seed, "sampler", f),
derive_seed(seed, "cluster", f) and derive_seed(seed, "classifier", f).
Group models inside a fold share the fold's classifier seed, so a
partition that flags nothing reproduces the unclustered run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import (
    AttributeSpec,
    Dataset,
    DatasetSchema,
    NOMINAL,
    NUMERIC,
    imbalance_ratio,
    stratified_kfold,
)
from .ensembles import (
    EnsembleConfig,
    EnsembleModel,
    fit_adaboost,
    fit_bagging,
    fit_random_committee,
    fit_random_forest,
)
from .metrics import MetricsReport, combine_reports, compute_report
from .resampling import (
    HIGH_GROUP,
    LOW_GROUP,
    apply_clustering_rus,
    plan_cluster_partition,
    rus_undersample,
    smote_oversample,
    suggest_threshold,
)
from .seeds import derive_seed
from .trees import DecisionTree, TreeConfig, fit_random_tree, fit_tree

CLASSIFIER_METHODS = (
    "tree",
    "random_tree",
    "bagging",
    "adaboost",
    "random_forest",
    "random_committee",
)
SAMPLER_METHODS = ("none", "rus", "smote", "clustering_rus")


@dataclass(frozen=True)
class ClassifierSpec:
    method: str = "tree"
    n_members: int | None = None
    min_leaf_weight: float = 2.0
    use_pruning: bool = True
    confidence_factor: float = 0.25
    subspace_size: int | None = None

    def __post_init__(self) -> None:
        if self.method not in CLASSIFIER_METHODS:
            raise ValueError(
                f"unknown classifier method '{self.method}' (expected one of {CLASSIFIER_METHODS})"
            )


@dataclass(frozen=True)
class SamplerSpec:
    method: str = "none"
    spread: float = 4.0
    percentage: float = 100.0
    k_neighbors: int = 5
    cluster_k: int = 2
    threshold: float | None = None
    reduction_fraction: float | None = None
    policy: str = "above"

    def __post_init__(self) -> None:
        if self.method not in SAMPLER_METHODS:
            raise ValueError(
                f"unknown sampler method '{self.method}' (expected one of {SAMPLER_METHODS})"
            )
        if self.method == "clustering_rus":
            if self.threshold is None and self.reduction_fraction is None:
                raise ValueError("clustering_rus needs either threshold or reduction_fraction")
            if self.threshold is not None and self.reduction_fraction is not None:
                raise ValueError("give either threshold or reduction_fraction, not both")


def _tree_config(spec: ClassifierSpec, seed: int) -> TreeConfig:
    return TreeConfig(
        min_leaf_weight=spec.min_leaf_weight,
        use_pruning=spec.use_pruning,
        confidence_factor=spec.confidence_factor,
        random_subspace_size=spec.subspace_size,
        seed=seed,
    )


def fit_classifier(train: Dataset, spec: ClassifierSpec, seed: int) -> DecisionTree | EnsembleModel:
    base = _tree_config(spec, seed)
    if spec.method == "tree":
        return fit_tree(train, replace(base, random_subspace_size=None))
    if spec.method == "random_tree":
        return fit_random_tree(train, seed, base)
    cfg = EnsembleConfig(n_members=spec.n_members, base=base, seed=seed)
    if spec.method == "bagging":
        return fit_bagging(train, cfg)
    if spec.method == "adaboost":
        return fit_adaboost(train, cfg)
    if spec.method == "random_forest":
        return fit_random_forest(train, cfg)
    return fit_random_committee(train, cfg)


def apply_sampler(train: Dataset, spec: SamplerSpec, seed: int) -> Dataset:
    """Resample one training split (not valid for clustering_rus)."""
    if spec.method == "none":
        return train
    if spec.method == "rus":
        return rus_undersample(train, spec.spread, seed)
    if spec.method == "smote":
        return smote_oversample(train, spec.percentage, spec.k_neighbors, seed)
    raise ValueError("clustering_rus trains per-group models; use run_cv_clustered")


@dataclass(frozen=True)
class FoldResult:
    fold: int
    group: str  # low_IR_group / high_IR_group / n/a
    truth: np.ndarray
    predicted: np.ndarray
    scores: np.ndarray
    test_indices: np.ndarray
    train_indices: np.ndarray  # original rows the model trained on
    n_synthetic_train: int
    report: MetricsReport


@dataclass(frozen=True)
class CvResult:
    folds: tuple[FoldResult, ...]
    fold_reports: tuple[MetricsReport, ...]  # one per fold (groups combined)
    pooled: MetricsReport
    mean: MetricsReport
    clustered: bool = False
    warnings: tuple[str, ...] = ()

    def pooled_records(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        truth = np.concatenate([f.truth for f in self.folds])
        pred = np.concatenate([f.predicted for f in self.folds])
        scores = np.concatenate([f.scores for f in self.folds])
        return truth, pred, scores


def _pooled_report(folds: list[FoldResult], beta: float) -> MetricsReport:
    truth = np.concatenate([f.truth for f in folds])
    pred = np.concatenate([f.predicted for f in folds])
    scores = np.concatenate([f.scores for f in folds])
    return compute_report(truth, pred, scores, beta)


def run_cv(
    d: Dataset,
    classifier: ClassifierSpec,
    sampler: SamplerSpec = SamplerSpec(),
    k: int = 10,
    seed: int = 0,
    beta: float = 1.0,
) -> CvResult:
    """Stratified k-fold evaluation with a single model per fold."""
    if sampler.method == "clustering_rus":
        raise ValueError("use run_cv_clustered (or run_experiment) for clustering_rus")
    split = stratified_kfold(d, k, derive_seed(seed, "folds"))
    folds: list[FoldResult] = []
    for f in range(k):
        train_idx = split.train_indices(f)
        test_idx = split.test_indices(f)
        train = apply_sampler(d.subset(train_idx), sampler, derive_seed(seed, "sampler", f))
        model = fit_classifier(train, classifier, derive_seed(seed, "classifier", f))
        predicted, scores = model.predict_batch(d.values[test_idx])
        truth = np.asarray(d.labels[test_idx])
        folds.append(
            FoldResult(
                fold=f,
                group="n/a",
                truth=truth,
                predicted=predicted,
                scores=scores,
                test_indices=test_idx,
                train_indices=train.row_ids[train.row_ids >= 0],
                n_synthetic_train=int(train.synthetic.sum()),
                report=compute_report(truth, predicted, scores, beta),
            )
        )
    fold_reports = tuple(fr.report for fr in folds)
    return CvResult(
        folds=tuple(folds),
        fold_reports=fold_reports,
        pooled=_pooled_report(folds, beta),
        mean=combine_reports(list(fold_reports)),
    )


def run_cv_clustered(
    d: Dataset,
    classifier: ClassifierSpec,
    sampler: SamplerSpec,
    k: int = 10,
    seed: int = 0,
    beta: float = 1.0,
) -> CvResult:
    """Cluster-aware undersampling evaluation.

    Per fold: fit the cluster partition on the training split, undersample
    the flagged group, train one model per nonempty group, route each test
    instance to its nearest cluster's group, and combine the group reports
    weighted by their test counts.
    """
    if sampler.method != "clustering_rus":
        raise ValueError(f"run_cv_clustered needs a clustering_rus sampler, got '{sampler.method}'")
    split = stratified_kfold(d, k, derive_seed(seed, "folds"))
    folds: list[FoldResult] = []
    fold_reports: list[MetricsReport] = []
    warnings: list[str] = []
    for f in range(k):
        train_idx = split.train_indices(f)
        test_idx = split.test_indices(f)
        train = d.subset(train_idx)
        if sampler.threshold is not None:
            threshold = sampler.threshold
        else:
            threshold = suggest_threshold(imbalance_ratio(train), sampler.reduction_fraction)
        partition = plan_cluster_partition(
            train, sampler.cluster_k, threshold, derive_seed(seed, "cluster", f), sampler.policy
        )
        groups = apply_clustering_rus(
            train, partition, sampler.spread, derive_seed(seed, "sampler", f)
        )
        for w in partition.warnings + groups.warnings:
            warnings.append(f"fold {f}: {w}")
        clf_seed = derive_seed(seed, "classifier", f)
        models: dict[str, DecisionTree | EnsembleModel] = {}
        train_ids: dict[str, np.ndarray] = {}
        for name, group_train in ((LOW_GROUP, groups.low_group), (HIGH_GROUP, groups.high_group)):
            if len(group_train) > 0:
                models[name] = fit_classifier(group_train, classifier, clf_seed)
                train_ids[name] = group_train.row_ids[group_train.row_ids >= 0]
        test_clusters = partition.model.assign(d.values[test_idx])
        flagged = np.array(partition.flagged, dtype=bool)[test_clusters]
        group_reports: list[MetricsReport] = []
        group_counts: list[int] = []
        for name, mask in ((LOW_GROUP, ~flagged), (HIGH_GROUP, flagged)):
            g_test = test_idx[mask]
            if g_test.size == 0:
                continue
            model_name = name
            if name not in models:
                model_name = LOW_GROUP if name == HIGH_GROUP else HIGH_GROUP
                warnings.append(
                    f"fold {f}: no training data for {name}; "
                    f"its {g_test.size} test instances use the {model_name} model"
                )
            model = models[model_name]
            predicted, scores = model.predict_batch(d.values[g_test])
            truth = np.asarray(d.labels[g_test])
            report = compute_report(truth, predicted, scores, beta)
            folds.append(
                FoldResult(
                    fold=f,
                    group=name,
                    truth=truth,
                    predicted=predicted,
                    scores=scores,
                    test_indices=g_test,
                    train_indices=train_ids.get(model_name, np.empty(0, dtype=np.int64)),
                    n_synthetic_train=0,
                    report=report,
                )
            )
            group_reports.append(report)
            group_counts.append(int(g_test.size))
        fold_reports.append(combine_reports(group_reports, weights=[float(c) for c in group_counts]))
    return CvResult(
        folds=tuple(folds),
        fold_reports=tuple(fold_reports),
        pooled=_pooled_report(folds, beta),
        mean=combine_reports(fold_reports),
        clustered=True,
        warnings=tuple(warnings),
    )


def run_experiment(
    d: Dataset,
    classifier: ClassifierSpec,
    sampler: SamplerSpec = SamplerSpec(),
    k: int = 10,
    seed: int = 0,
    beta: float = 1.0,
) -> CvResult:
    """Dispatch to the plain or clustered harness based on the sampler."""
    if sampler.method == "clustering_rus":
        return run_cv_clustered(d, classifier, sampler, k, seed, beta)
    return run_cv(d, classifier, sampler, k, seed, beta)


@dataclass(frozen=True)
class SyntheticConfig:
    """Gaussian blobs with per-blob class imbalance and class-biased
    nominal attributes; the class signal lives in the nominal attributes,
    the region structure in the numeric ones."""

    blob_sizes: tuple[int, ...] = (1000, 1000)
    blob_irs: tuple[float, ...] = (2.0, 20.0)
    n_numeric: int = 2
    n_nominal: int = 2
    n_categories: int = 3
    noise: float = 1.0
    category_bias: float = 0.8
    blob_spacing: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.blob_sizes) != len(self.blob_irs) or not self.blob_sizes:
            raise ValueError("need matching, non-empty blob_sizes and blob_irs")
        if any(s < 2 for s in self.blob_sizes):
            raise ValueError("each blob needs at least 2 instances")
        if any(ir < 1 for ir in self.blob_irs):
            raise ValueError("blob imbalance ratios must be at least 1")
        if self.n_numeric < 0 or self.n_nominal < 0 or self.n_numeric + self.n_nominal < 1:
            raise ValueError("need at least one attribute")
        if self.n_nominal > 0 and self.n_categories < 2:
            raise ValueError("nominal attributes need at least 2 categories")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if not 0.0 <= self.category_bias <= 1.0:
            raise ValueError("category_bias must lie in [0, 1]")


@dataclass(frozen=True)
class SyntheticData:
    dataset: Dataset
    blob_of: np.ndarray          # ground-truth blob index per instance
    realized_irs: tuple[float, ...]


def _category_probs(preferred: int, n_categories: int, bias: float) -> np.ndarray:
    p = np.full(n_categories, (1.0 - bias) / (n_categories - 1))
    p[preferred] = bias
    return p


def gen_synthetic(cfg: SyntheticConfig = SyntheticConfig()) -> SyntheticData:
    """Deterministic synthetic imbalanced dataset.

    Blob b centers at (b * spacing, ...) in numeric space with Gaussian
    noise; the positive share of blob b is round(size / (1 + ir)).  Nominal
    attribute j prefers category j mod c for negatives and (j+1) mod c for
    positives, with `category_bias` probability on the preferred category.
    Rows are globally shuffled; the blob index of every row is returned.
    """
    rng = np.random.default_rng(cfg.seed)
    total = sum(cfg.blob_sizes)
    n_attrs = cfg.n_numeric + cfg.n_nominal
    values = np.zeros((total, n_attrs))
    labels = np.zeros(total, dtype=np.int8)
    blob_of = np.zeros(total, dtype=np.int64)
    row = 0
    realized = []
    for b, (size, ir) in enumerate(zip(cfg.blob_sizes, cfg.blob_irs)):
        n_pos = max(1, round(size / (1.0 + ir)))
        n_neg = size - n_pos
        if n_neg < 1:
            raise ValueError(f"blob {b}: imbalance ratio {ir} leaves no negatives")
        realized.append(n_neg / n_pos)
        sl = slice(row, row + size)
        blob_of[sl] = b
        labels[row : row + n_pos] = 1
        center = float(b * cfg.blob_spacing)
        for j in range(cfg.n_numeric):
            col = np.full(size, center)
            if cfg.noise > 0:
                col += rng.normal(0.0, cfg.noise, size)
            values[sl, j] = col
        for j in range(cfg.n_nominal):
            col = cfg.n_numeric + j
            pref_neg = j % cfg.n_categories
            pref_pos = (j + 1) % cfg.n_categories
            pos_rows = np.arange(row, row + n_pos)
            neg_rows = np.arange(row + n_pos, row + size)
            values[pos_rows, col] = rng.choice(
                cfg.n_categories, size=n_pos, p=_category_probs(pref_pos, cfg.n_categories, cfg.category_bias)
            )
            values[neg_rows, col] = rng.choice(
                cfg.n_categories, size=n_neg, p=_category_probs(pref_neg, cfg.n_categories, cfg.category_bias)
            )
        row += size
    perm = rng.permutation(total)
    attrs = [AttributeSpec(f"x{j}", NUMERIC) for j in range(cfg.n_numeric)]
    categories = tuple(f"k{c}" for c in range(cfg.n_categories))
    attrs += [AttributeSpec(f"c{j}", NOMINAL, categories) for j in range(cfg.n_nominal)]
    schema = DatasetSchema(tuple(attrs), "class", "neg", "pos")
    dataset = Dataset(schema, values[perm], labels[perm])
    return SyntheticData(dataset, blob_of[perm], tuple(realized))
