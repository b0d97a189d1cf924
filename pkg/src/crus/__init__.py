"""Imbalance-aware classification toolkit.

Decision trees and tree ensembles built from scratch, resampling methods
for imbalanced data (random undersampling, synthetic minority
oversampling, and cluster-aware undersampling that rebalances only the
regions that need it), imbalance-honest evaluation metrics, a stratified
cross-validation harness with leak-free resampling, and rank-based
statistical comparison of competing pipelines.
"""

from __future__ import annotations

from .clustering import (
    ClusterModel,
    FeatureScaler,
    assign_cluster,
    kmeans_fit,
    kmeans_objective,
    load_cluster_model,
    mixed_distance,
    save_cluster_model,
)
from .dataset import (
    NOMINAL,
    NUMERIC,
    AttributeSpec,
    DataError,
    Dataset,
    DatasetSchema,
    FoldSplit,
    Instance,
    imbalance_ratio,
    load_csv,
    load_schema,
    save_schema,
    stratified_kfold,
    write_csv,
)
from .ensembles import (
    EnsembleConfig,
    EnsembleModel,
    fit_adaboost,
    fit_bagging,
    fit_random_committee,
    fit_random_forest,
    load_ensemble,
    majority_vote,
    predict_ensemble,
    save_ensemble,
    theoretical_ensemble_accuracy,
)
from .evaluation import (
    ClassifierSpec,
    CvResult,
    FoldResult,
    SamplerSpec,
    SyntheticConfig,
    SyntheticData,
    apply_sampler,
    fit_classifier,
    gen_synthetic,
    run_cv,
    run_cv_clustered,
    run_experiment,
)
from .feature_selection import (
    AttributeRank,
    CfsResult,
    cfs_best_first,
    cfs_merit,
    discretize,
    gain_ratio_rank,
    symmetrical_uncertainty,
)
from .metrics import (
    METRIC_COLUMNS,
    BinaryRates,
    ConfusionMatrix,
    MetricsReport,
    auc_roc,
    binary_rates,
    combine_reports,
    compute_report,
    confusion_matrix,
    g_mean,
    optimized_precision,
    weighted_class_average,
)
from .resampling import (
    HIGH_GROUP,
    LOW_GROUP,
    ClusterPartition,
    GroupedTrainSets,
    apply_clustering_rus,
    plan_cluster_partition,
    rus_undersample,
    smote_oversample,
    suggest_threshold,
)
from .seeds import derive_seed, rng_for
from .stats import (
    CdDiagram,
    ComparisonReport,
    FriedmanResult,
    ScoreMatrix,
    WilcoxonResult,
    average_combined_loss,
    cd_diagram,
    chi2_sf,
    compare_treatments,
    friedman_test,
    holm_adjust,
    loss_vs_best,
    regularized_gamma_q,
    wilcoxon_signed_rank,
)
from .trees import (
    DecisionTree,
    TreeConfig,
    TreeNode,
    default_subspace_size,
    export_rules,
    fit_random_tree,
    fit_tree,
    gain_ratio,
    load_tree,
    save_tree,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeRank",
    "AttributeSpec",
    "BinaryRates",
    "CdDiagram",
    "CfsResult",
    "ClassifierSpec",
    "ClusterModel",
    "ClusterPartition",
    "ComparisonReport",
    "ConfusionMatrix",
    "CvResult",
    "DataError",
    "Dataset",
    "DatasetSchema",
    "EnsembleConfig",
    "EnsembleModel",
    "FeatureScaler",
    "FoldResult",
    "FoldSplit",
    "FriedmanResult",
    "GroupedTrainSets",
    "HIGH_GROUP",
    "Instance",
    "LOW_GROUP",
    "METRIC_COLUMNS",
    "MetricsReport",
    "NOMINAL",
    "NUMERIC",
    "SamplerSpec",
    "ScoreMatrix",
    "SyntheticConfig",
    "SyntheticData",
    "TreeConfig",
    "TreeNode",
    "DecisionTree",
    "WilcoxonResult",
    "apply_clustering_rus",
    "apply_sampler",
    "assign_cluster",
    "auc_roc",
    "average_combined_loss",
    "binary_rates",
    "cd_diagram",
    "cfs_best_first",
    "cfs_merit",
    "chi2_sf",
    "combine_reports",
    "compare_treatments",
    "compute_report",
    "confusion_matrix",
    "default_subspace_size",
    "derive_seed",
    "discretize",
    "export_rules",
    "fit_adaboost",
    "fit_bagging",
    "fit_classifier",
    "fit_random_committee",
    "fit_random_forest",
    "fit_random_tree",
    "fit_tree",
    "friedman_test",
    "g_mean",
    "gain_ratio",
    "gain_ratio_rank",
    "gen_synthetic",
    "holm_adjust",
    "imbalance_ratio",
    "kmeans_fit",
    "kmeans_objective",
    "load_cluster_model",
    "load_csv",
    "load_ensemble",
    "load_schema",
    "load_tree",
    "loss_vs_best",
    "majority_vote",
    "mixed_distance",
    "optimized_precision",
    "plan_cluster_partition",
    "predict_ensemble",
    "regularized_gamma_q",
    "rng_for",
    "run_cv",
    "run_cv_clustered",
    "run_experiment",
    "rus_undersample",
    "save_cluster_model",
    "save_ensemble",
    "save_schema",
    "save_tree",
    "smote_oversample",
    "stratified_kfold",
    "suggest_threshold",
    "symmetrical_uncertainty",
    "theoretical_ensemble_accuracy",
    "weighted_class_average",
    "wilcoxon_signed_rank",
    "write_csv",
]
