"""Ensemble learners built on the weighted decision tree grower.

All ensembles are deterministic given their seed: per-member randomness is
derived from (seed, member index) so members can be fit in any order or in
parallel without changing the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .seeds import derive_seed
from .trees import (
    DecisionTree,
    TreeConfig,
    default_subspace_size,
    fit_tree,
    tree_from_doc,
    tree_to_doc,
)

# weight given to a member that classifies its training set perfectly
PERFECT_MEMBER_WEIGHT = math.log(1e10)


def majority_vote(votes: list[int] | np.ndarray, weights: list[float] | np.ndarray | None = None) -> int:
    """Weighted plurality over 0/1 votes; an exact tie elects the negative class."""
    v = np.asarray(votes)
    if v.size == 0:
        raise ValueError("no votes to combine")
    if not np.all((v == 0) | (v == 1)):
        raise ValueError("votes must be 0/1 class labels")
    w = np.ones(v.size) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != v.shape:
        raise ValueError("weights must match votes")
    if np.any(w < 0):
        raise ValueError("vote weights must be nonnegative")
    pos = float(w[v == 1].sum())
    neg = float(w[v == 0].sum())
    return 1 if pos > neg else 0


def theoretical_ensemble_accuracy(p: float, n_members: int) -> float:
    """Probability that a majority of n_members independent voters, each
    correct with probability p, is correct.  Requires an odd member count."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be within [0, 1], got {p}")
    if n_members < 1 or n_members % 2 == 0:
        raise ValueError(f"member count must be odd and positive, got {n_members}")
    total = 0.0
    for m in range(n_members // 2 + 1, n_members + 1):
        total += math.comb(n_members, m) * p**m * (1 - p) ** (n_members - m)
    return total


@dataclass(frozen=True)
class EnsembleConfig:
    # None resolves to the method default (10, or 100 for random forests)
    n_members: int | None = None
    base: TreeConfig = field(default_factory=TreeConfig)
    seed: int = 0

    def resolve_members(self, default: int) -> int:
        n = default if self.n_members is None else self.n_members
        if n < 1:
            raise ValueError(f"ensemble needs at least one member, got {n}")
        return n


@dataclass
class EnsembleModel:
    method: str                      # bagging | random_forest | adaboost | random_committee
    members: list[DecisionTree]
    member_weights: np.ndarray
    combine: str                     # "vote" or "average"
    seed: int
    oob_error: float | None = None
    oob_coverage: float | None = None
    epsilons: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()
    # boosting weight distributions per round (diagnostic, not serialized)
    weight_history: list[np.ndarray] = field(default_factory=list)

    def predict(self, x: np.ndarray) -> tuple[int, float]:
        labels, score = self.predict_batch(np.atleast_2d(x))
        return int(labels[0]), float(score[0])

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(classes, scores); score is the weighted positive vote share for
        voting ensembles and the mean positive probability for averaging
        ones.  Class follows score > 0.5 with ties electing negative."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        w = self.member_weights
        if self.combine == "vote" and float(w.sum()) == 0.0:
            w = np.ones_like(w)  # degenerate boosting run: fall back to unit votes
        total = float(w.sum())
        acc = np.zeros(X.shape[0])
        for weight, member in zip(w, self.members):
            labels, probs = member.predict_batch(X)
            if self.combine == "vote":
                acc += weight * (labels == 1)
            else:
                acc += weight * probs
        score = acc / total
        pos_weight = acc
        neg_weight = total - acc
        classes = (pos_weight > neg_weight).astype(np.int8)
        return classes, score


def _bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, n, size=n)


def fit_bagging(d: Dataset, cfg: EnsembleConfig = EnsembleConfig()) -> EnsembleModel:
    """Bootstrap aggregation of the configured base tree (vote combiner)."""
    n_members = cfg.resolve_members(default=10)
    members = []
    for i in range(n_members):
        rng = np.random.default_rng(derive_seed(cfg.seed, "bootstrap", i))
        idx = _bootstrap_indices(len(d), rng)
        base = replace(cfg.base, seed=derive_seed(cfg.seed, "tree", i))
        members.append(fit_tree(d.subset(idx), base))
    return EnsembleModel("bagging", members, np.ones(n_members), "vote", cfg.seed)


def fit_random_forest(d: Dataset, cfg: EnsembleConfig = EnsembleConfig()) -> EnsembleModel:
    """Bagged unpruned random trees with out-of-bag error tracking."""
    n_members = cfg.resolve_members(default=100)
    subspace = cfg.base.random_subspace_size
    if subspace is None:
        subspace = default_subspace_size(d.schema.n_attributes)
    members = []
    n = len(d)
    oob_pos = np.zeros(n)
    oob_all = np.zeros(n)
    for i in range(n_members):
        rng = np.random.default_rng(derive_seed(cfg.seed, "bootstrap", i))
        idx = _bootstrap_indices(n, rng)
        base = replace(
            cfg.base,
            use_pruning=False,
            random_subspace_size=subspace,
            seed=derive_seed(cfg.seed, "tree", i),
        )
        tree = fit_tree(d.subset(idx), base)
        members.append(tree)
        out_mask = np.ones(n, dtype=bool)
        out_mask[idx] = False
        if np.any(out_mask):
            labels, _ = tree.predict_batch(d.values[out_mask])
            oob_pos[out_mask] += labels == 1
            oob_all[out_mask] += 1
    covered = oob_all > 0
    if np.any(covered):
        oob_vote = (2 * oob_pos[covered]) > oob_all[covered]  # tie -> negative
        oob_error = float(np.mean(oob_vote != (d.labels[covered] == 1)))
    else:
        oob_error = None
    coverage = float(np.mean(covered))
    return EnsembleModel(
        "random_forest", members, np.ones(n_members), "vote", cfg.seed,
        oob_error=oob_error, oob_coverage=coverage,
    )


def fit_adaboost(d: Dataset, cfg: EnsembleConfig = EnsembleConfig()) -> EnsembleModel:
    """AdaBoost.M1 by reweighting.

    The weight distribution starts uniform; after each round the weights of
    correctly classified instances are multiplied by beta = eps/(1-eps) and
    the distribution renormalized.  Training stops early when a member's
    weighted error reaches 0.5 (member discarded) or 0 (member kept with a
    capped weight).  Base trees see weights scaled to sum to n so leaf
    weight minimums keep their usual meaning.
    """
    n_members = cfg.resolve_members(default=10)
    n = len(d)
    y = np.asarray(d.labels)
    dist = np.full(n, 1.0 / n)
    members: list[DecisionTree] = []
    alphas: list[float] = []
    epsilons: list[float] = []
    betas: list[float] = []
    warnings: list[str] = []
    history = [dist.copy()]
    for t in range(n_members):
        base = replace(cfg.base, seed=derive_seed(cfg.seed, "tree", t))
        tree = fit_tree(d, base, weights=dist * n)
        pred, _ = tree.predict_batch(d.values)
        eps = float(dist[pred != y].sum())
        epsilons.append(eps)
        if eps >= 0.5:
            if not members:
                members.append(tree)
                alphas.append(0.0)
                warnings.append(
                    f"first member's weighted error {eps:.3f} >= 0.5; "
                    "kept with zero weight, voting falls back to unweighted"
                )
            break
        if eps == 0.0:
            members.append(tree)
            alphas.append(PERFECT_MEMBER_WEIGHT)
            betas.append(0.0)
            break
        beta = eps / (1.0 - eps)
        betas.append(beta)
        members.append(tree)
        alphas.append(math.log(1.0 / beta))
        dist = dist.copy()
        dist[pred == y] *= beta
        dist /= dist.sum()
        history.append(dist.copy())
    return EnsembleModel(
        "adaboost", members, np.array(alphas), "vote", cfg.seed,
        epsilons=tuple(epsilons), betas=tuple(betas), warnings=tuple(warnings),
        weight_history=history,
    )


def fit_random_committee(d: Dataset, cfg: EnsembleConfig = EnsembleConfig()) -> EnsembleModel:
    """Random trees on the full training set with seeds seed+i; the committee
    averages the members' class probability estimates."""
    n_members = cfg.resolve_members(default=10)
    subspace = cfg.base.random_subspace_size
    if subspace is None:
        subspace = default_subspace_size(d.schema.n_attributes)
    members = []
    for i in range(n_members):
        base = replace(
            cfg.base, use_pruning=False, random_subspace_size=subspace, seed=cfg.seed + i
        )
        members.append(fit_tree(d, base))
    return EnsembleModel("random_committee", members, np.ones(n_members), "average", cfg.seed)


def predict_ensemble(model: EnsembleModel, x: np.ndarray) -> tuple[int, float]:
    return model.predict(x)


def ensemble_to_doc(model: EnsembleModel) -> dict:
    return {
        "kind": "ensemble",
        "method": model.method,
        "combine": model.combine,
        "seed": model.seed,
        "member_weights": model.member_weights.tolist(),
        "oob_error": model.oob_error,
        "oob_coverage": model.oob_coverage,
        "epsilons": list(model.epsilons),
        "betas": list(model.betas),
        "warnings": list(model.warnings),
        "members": [tree_to_doc(t) for t in model.members],
    }


def ensemble_from_doc(doc: dict) -> EnsembleModel:
    if doc.get("kind") != "ensemble":
        raise ValueError(f"not an ensemble document (kind={doc.get('kind')!r})")
    return EnsembleModel(
        method=doc["method"],
        members=[tree_from_doc(m) for m in doc["members"]],
        member_weights=np.array(doc["member_weights"], dtype=np.float64),
        combine=doc["combine"],
        seed=int(doc["seed"]),
        oob_error=doc.get("oob_error"),
        oob_coverage=doc.get("oob_coverage"),
        epsilons=tuple(doc.get("epsilons", ())),
        betas=tuple(doc.get("betas", ())),
        warnings=tuple(doc.get("warnings", ())),
    )


def save_ensemble(model: EnsembleModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ensemble_to_doc(model), indent=1, sort_keys=True), encoding="utf-8")


def load_ensemble(path: str | Path) -> EnsembleModel:
    return ensemble_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))
