"""Decision trees over mixed attributes with first-class instance weights.

Splits maximize gain ratio (information gain over split information, both
in bits).  Nominal attributes split multiway on the categories observed at
the node; numeric attributes split binary at the best midpoint between
adjacent distinct sorted values.  Ties in gain ratio are broken by lowest
attribute index, then lowest threshold.  Instance weights flow through
entropies, leaf distributions and the error estimates used by pruning, so
the same grower serves boosting and bootstrap replicates.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import Dataset, DatasetSchema, NOMINAL, NUMERIC


@dataclass(frozen=True)
class TreeConfig:
    min_leaf_weight: float = 2.0
    use_pruning: bool = True
    confidence_factor: float = 0.25
    # None considers every attribute at every node; an int draws a fresh
    # random subset of that size per node (the random-tree behaviour)
    random_subspace_size: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.min_leaf_weight <= 0:
            raise ValueError("min_leaf_weight must be positive")
        if not 0 < self.confidence_factor < 0.5:
            raise ValueError("confidence factor must be in (0, 0.5)")
        if self.random_subspace_size is not None and self.random_subspace_size < 1:
            raise ValueError("random_subspace_size must be at least 1")


def default_subspace_size(n_attributes: int) -> int:
    """floor(log2(n)) + 1, clamped to [1, n]."""
    if n_attributes < 1:
        raise ValueError("need at least one attribute")
    return max(1, min(n_attributes, int(math.floor(math.log2(n_attributes))) + 1))


@dataclass
class TreeNode:
    class_weights: np.ndarray  # (2,) [negative, positive] training weight
    attribute: int | None = None
    threshold: float | None = None          # set for numeric splits
    left: "TreeNode | None" = None          # numeric: value <= threshold
    right: "TreeNode | None" = None
    children: "dict[int, TreeNode] | None" = None  # nominal: category -> child
    fallback: int | None = None             # nominal: largest-weight category

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None

    def child_nodes(self) -> list["TreeNode"]:
        if self.is_leaf:
            return []
        if self.threshold is not None:
            return [self.left, self.right]
        return [self.children[c] for c in sorted(self.children)]

    def n_nodes(self) -> int:
        return 1 + sum(c.n_nodes() for c in self.child_nodes())

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return sum(c.n_leaves() for c in self.child_nodes())

    def leaf_label(self) -> int:
        # strict majority; exact tie goes to the negative class
        return 1 if self.class_weights[1] > self.class_weights[0] else 0

    def leaf_probability(self) -> float:
        total = float(self.class_weights.sum())
        return float(self.class_weights[1]) / total if total > 0 else 0.0


@dataclass
class DecisionTree:
    schema: DatasetSchema
    root: TreeNode
    config: TreeConfig

    def n_nodes(self) -> int:
        return self.root.n_nodes()

    def n_leaves(self) -> int:
        return self.root.n_leaves()

    def predict(self, x: np.ndarray) -> tuple[int, float]:
        """(class, probability of positive) for one attribute-value row."""
        node = self.root
        x = np.asarray(x, dtype=np.float64)
        while not node.is_leaf:
            if node.threshold is not None:
                node = node.left if x[node.attribute] <= node.threshold else node.right
            else:
                cat = int(x[node.attribute])
                node = node.children.get(cat) or node.children[node.fallback]
        return node.leaf_label(), node.leaf_probability()

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(classes, positive probabilities) for a matrix of rows."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        labels = np.zeros(X.shape[0], dtype=np.int8)
        probs = np.zeros(X.shape[0], dtype=np.float64)
        self._route(self.root, X, np.arange(X.shape[0]), labels, probs)
        return labels, probs

    def _route(self, node: TreeNode, X, idx, labels, probs) -> None:
        if idx.size == 0:
            return
        if node.is_leaf:
            labels[idx] = node.leaf_label()
            probs[idx] = node.leaf_probability()
            return
        col = X[idx, node.attribute]
        if node.threshold is not None:
            mask = col <= node.threshold
            self._route(node.left, X, idx[mask], labels, probs)
            self._route(node.right, X, idx[~mask], labels, probs)
        else:
            for cat in np.unique(col):
                child = node.children.get(int(cat)) or node.children[node.fallback]
                self._route(child, X, idx[col == cat], labels, probs)


def _entropy(weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        return 0.0
    p = weights[weights > 0] / total
    return float(-(p * np.log2(p)).sum())


def _binary_entropy(w_pos: np.ndarray, w_tot: np.ndarray) -> np.ndarray:
    """Vectorized two-class entropy in bits for weight totals w_tot."""
    out = np.zeros_like(np.asarray(w_tot, dtype=np.float64))
    for part in (np.asarray(w_pos, dtype=np.float64), w_tot - w_pos):
        frac = np.divide(part, w_tot, out=np.zeros_like(out), where=w_tot > 0)
        mask = frac > 0
        out[mask] -= frac[mask] * np.log2(frac[mask])
    return out


def _numeric_candidates(
    vals: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Admissible midpoint thresholds with their gains and split infos."""
    order = np.argsort(vals, kind="stable")
    v, yy, ww = vals[order], y[order], w[order]
    total = ww.sum()
    total_pos = (ww * (yy == 1)).sum()
    cum_w = np.cumsum(ww)
    cum_pos = np.cumsum(ww * (yy == 1))
    cut = np.flatnonzero(v[1:] > v[:-1])
    if cut.size == 0:
        return np.empty(0), np.empty(0), np.empty(0)
    left_w, left_pos = cum_w[cut], cum_pos[cut]
    right_w, right_pos = total - left_w, total_pos - left_pos
    ok = (left_w >= min_leaf) & (right_w >= min_leaf) & (left_w > 0) & (right_w > 0)
    if not np.any(ok):
        return np.empty(0), np.empty(0), np.empty(0)
    left_w, left_pos = left_w[ok], left_pos[ok]
    right_w, right_pos = right_w[ok], right_pos[ok]
    thresholds = (v[cut[ok]] + v[cut[ok] + 1]) / 2.0
    h_class = _binary_entropy(np.array([total_pos]), np.array([total]))[0]
    h_cond = (
        left_w * _binary_entropy(left_pos, left_w)
        + right_w * _binary_entropy(right_pos, right_w)
    ) / total
    frac_l, frac_r = left_w / total, right_w / total
    split_info = -(frac_l * np.log2(frac_l) + frac_r * np.log2(frac_r))
    gains = h_class - h_cond
    return thresholds, gains, split_info


def _nominal_stats(
    vals: np.ndarray, y: np.ndarray, w: np.ndarray, n_categories: int, min_leaf: float
) -> tuple[float, float, np.ndarray] | None:
    """(gain, split_info, per-category weight) of the multiway split, or None.

    None when fewer than two categories carry weight or fewer than two
    children reach min_leaf.
    """
    cats = vals.astype(np.int64)
    w_tot = np.bincount(cats, weights=w, minlength=n_categories)
    w_pos = np.bincount(cats, weights=w * (y == 1), minlength=n_categories)
    observed = w_tot > 0
    if observed.sum() < 2 or (w_tot >= min_leaf).sum() < 2:
        return None
    total = w_tot.sum()
    h_class = _binary_entropy(np.array([w_pos.sum()]), np.array([total]))[0]
    h_cond = float((w_tot * _binary_entropy(w_pos, w_tot)).sum() / total)
    split_info = _entropy(w_tot[observed])
    return h_class - h_cond, split_info, w_tot


def gain_ratio(
    d: Dataset,
    attribute: int,
    threshold: float | None = None,
    weights: np.ndarray | None = None,
) -> float | None:
    """Gain ratio of one candidate split, or None when it is unusable.

    Nominal attributes evaluate the multiway split on their observed
    categories; numeric attributes require a threshold.  Unusable means the
    split information is zero (the split does not actually partition).
    """
    w = np.ones(len(d)) if weights is None else np.asarray(weights, dtype=np.float64)
    vals = d.values[:, attribute]
    y = d.labels
    spec = d.schema.attributes[attribute]
    if spec.kind == NUMERIC:
        if threshold is None:
            raise ValueError(f"numeric attribute '{spec.name}' needs a threshold")
        left = vals <= threshold
        left_w, right_w = w[left].sum(), w[~left].sum()
        total = left_w + right_w
        if left_w <= 0 or right_w <= 0:
            return None
        h_class = _binary_entropy(np.array([(w * (y == 1)).sum()]), np.array([total]))[0]
        h_left = _binary_entropy(np.array([(w[left] * (y[left] == 1)).sum()]), np.array([left_w]))[0]
        h_right = _binary_entropy(np.array([(w[~left] * (y[~left] == 1)).sum()]), np.array([right_w]))[0]
        h_cond = (left_w * h_left + right_w * h_right) / total
        fl, fr = left_w / total, right_w / total
        split_info = float(-(fl * np.log2(fl) + fr * np.log2(fr)))
        return float((h_class - h_cond) / split_info)
    if threshold is not None:
        raise ValueError(f"nominal attribute '{spec.name}' takes no threshold")
    stats = _nominal_stats(vals, y, w, len(spec.categories), min_leaf=0.0)
    if stats is None:
        return None
    gain, split_info, _ = stats
    if split_info <= 0:
        return None
    return float(gain / split_info)


@dataclass
class _Grower:
    d: Dataset
    cfg: TreeConfig
    rng: np.random.Generator | None

    def grow(self, idx: np.ndarray, w: np.ndarray) -> TreeNode:
        y = self.d.labels[idx]
        cw = np.array([w[y == 0].sum(), w[y == 1].sum()])
        node = TreeNode(class_weights=cw)
        if cw[0] == 0 or cw[1] == 0:
            return node
        best = self._best_split(idx, w)
        if best is None:
            return node
        attr, threshold = best
        vals = self.d.values[idx, attr]
        if threshold is not None:
            node.attribute, node.threshold = attr, threshold
            mask = vals <= threshold
            node.left = self.grow(idx[mask], w[mask])
            node.right = self.grow(idx[~mask], w[~mask])
        else:
            node.attribute = attr
            node.children = {}
            cats = vals.astype(np.int64)
            w_tot = np.bincount(cats, weights=w)
            for cat in np.flatnonzero(w_tot > 0):
                mask = cats == cat
                node.children[int(cat)] = self.grow(idx[mask], w[mask])
            node.fallback = int(np.argmax(w_tot))
        return node

    def _candidate_attributes(self, n_attrs: int) -> np.ndarray:
        size = self.cfg.random_subspace_size
        if size is None or self.rng is None:
            return np.arange(n_attrs)
        size = max(1, min(size, n_attrs))
        return np.sort(self.rng.choice(n_attrs, size=size, replace=False))

    def _best_split(self, idx: np.ndarray, w: np.ndarray) -> tuple[int, float | None] | None:
        y = self.d.labels[idx]
        min_leaf = self.cfg.min_leaf_weight
        best_ratio = -np.inf
        best: tuple[int, float | None] | None = None
        for attr in self._candidate_attributes(self.d.schema.n_attributes):
            spec = self.d.schema.attributes[attr]
            vals = self.d.values[idx, attr]
            if spec.kind == NUMERIC:
                thresholds, gains, infos = _numeric_candidates(vals, y, w, min_leaf)
                usable = infos > 0
                if not np.any(usable):
                    continue
                ratios = np.where(usable, gains / np.where(usable, infos, 1.0), -np.inf)
                j = int(np.argmax(ratios))  # first max: lowest threshold on ties
                if ratios[j] > best_ratio:
                    best_ratio = float(ratios[j])
                    best = (int(attr), float(thresholds[j]))
            else:
                stats = _nominal_stats(vals, y, w, len(spec.categories), min_leaf)
                if stats is None:
                    continue
                gain, split_info, _ = stats
                if split_info <= 0:
                    continue
                ratio = gain / split_info
                if ratio > best_ratio:
                    best_ratio = float(ratio)
                    best = (int(attr), None)
        return best


def fit_tree(
    d: Dataset, cfg: TreeConfig = TreeConfig(), weights: np.ndarray | None = None
) -> DecisionTree:
    """Grow (and optionally prune) a tree on a weighted training set."""
    if len(d) == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if weights is None:
        w = np.ones(len(d), dtype=np.float64)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(d),):
            raise ValueError(f"weights shape {w.shape} does not match {len(d)} instances")
        if np.any(w < 0):
            raise ValueError("instance weights must be nonnegative")
    rng = None
    if cfg.random_subspace_size is not None:
        rng = np.random.default_rng(cfg.seed)
    grower = _Grower(d, cfg, rng)
    root = grower.grow(np.arange(len(d)), w)
    if cfg.use_pruning:
        _prune(root, _pruning_z(cfg.confidence_factor))
    return DecisionTree(d.schema, root, cfg)


def fit_random_tree(d: Dataset, seed: int, cfg: TreeConfig | None = None) -> DecisionTree:
    """Unpruned tree using a fresh random attribute subset at every node."""
    base = cfg or TreeConfig()
    size = base.random_subspace_size
    if size is None:
        size = default_subspace_size(d.schema.n_attributes)
    return fit_tree(d, replace(base, use_pruning=False, random_subspace_size=size, seed=seed))


def _pruning_z(confidence_factor: float) -> float:
    if not 0 < confidence_factor < 0.5:
        raise ValueError("confidence factor must be in (0, 0.5)")
    return statistics.NormalDist().inv_cdf(1.0 - confidence_factor)


def _estimated_errors(node: TreeNode, z: float) -> float:
    """Upper-confidence estimate of the error count if this were a leaf."""
    n = float(node.class_weights.sum())
    if n <= 0:
        return 0.0
    f = float(n - node.class_weights.max()) / n
    zz = z * z
    upper = (f + zz / (2 * n) + z * math.sqrt(f / n - f * f / n + zz / (4 * n * n))) / (1 + zz / n)
    return upper * n


def _prune(node: TreeNode, z: float) -> float:
    """Bottom-up subtree replacement; returns the subtree's error estimate."""
    if node.is_leaf:
        return _estimated_errors(node, z)
    subtree = sum(_prune(c, z) for c in node.child_nodes())
    as_leaf = _estimated_errors(node, z)
    if as_leaf <= subtree:
        node.attribute = None
        node.threshold = None
        node.left = node.right = None
        node.children = None
        node.fallback = None
        return as_leaf
    return subtree


def export_rules(tree: DecisionTree) -> list[str]:
    """One conjunctive IF/THEN rule per leaf, in left-to-right leaf order."""
    schema = tree.schema
    rules: list[str] = []

    def describe(label: int) -> str:
        name = schema.positive_label if label == 1 else schema.negative_label
        return f"{schema.class_name} = {name}"

    def walk(node: TreeNode, conds: list[str]) -> None:
        if node.is_leaf:
            body = " AND ".join(conds) if conds else "TRUE"
            rules.append(f"IF {body} THEN {describe(node.leaf_label())}")
            return
        attr = schema.attributes[node.attribute]
        if node.threshold is not None:
            walk(node.left, conds + [f"{attr.name} <= {node.threshold:g}"])
            walk(node.right, conds + [f"{attr.name} > {node.threshold:g}"])
        else:
            for cat in sorted(node.children):
                walk(node.children[cat], conds + [f"{attr.name} = {attr.categories[cat]}"])

    walk(tree.root, [])
    return rules


def _node_to_doc(node: TreeNode) -> dict:
    doc: dict = {"weights": [float(node.class_weights[0]), float(node.class_weights[1])]}
    if node.is_leaf:
        return doc
    doc["attribute"] = node.attribute
    if node.threshold is not None:
        doc["threshold"] = node.threshold
        doc["left"] = _node_to_doc(node.left)
        doc["right"] = _node_to_doc(node.right)
    else:
        doc["children"] = {str(c): _node_to_doc(n) for c, n in sorted(node.children.items())}
        doc["fallback"] = node.fallback
    return doc


def _node_from_doc(doc: dict) -> TreeNode:
    node = TreeNode(class_weights=np.array(doc["weights"], dtype=np.float64))
    if "attribute" not in doc:
        return node
    node.attribute = int(doc["attribute"])
    if "threshold" in doc:
        node.threshold = float(doc["threshold"])
        node.left = _node_from_doc(doc["left"])
        node.right = _node_from_doc(doc["right"])
    else:
        node.children = {int(c): _node_from_doc(n) for c, n in doc["children"].items()}
        node.fallback = int(doc["fallback"])
    return node


def tree_to_doc(tree: DecisionTree) -> dict:
    from .clustering import _schema_to_doc

    return {
        "kind": "tree",
        "schema": _schema_to_doc(tree.schema),
        "config": {
            "min_leaf_weight": tree.config.min_leaf_weight,
            "use_pruning": tree.config.use_pruning,
            "confidence_factor": tree.config.confidence_factor,
            "random_subspace_size": tree.config.random_subspace_size,
            "seed": tree.config.seed,
        },
        "root": _node_to_doc(tree.root),
    }


def tree_from_doc(doc: dict) -> DecisionTree:
    from .clustering import _schema_from_doc

    if doc.get("kind") != "tree":
        raise ValueError(f"not a tree document (kind={doc.get('kind')!r})")
    cfg = TreeConfig(**doc["config"])
    return DecisionTree(_schema_from_doc(doc["schema"]), _node_from_doc(doc["root"]), cfg)


def save_tree(tree: DecisionTree, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tree_to_doc(tree), indent=1, sort_keys=True), encoding="utf-8")


def load_tree(path: str | Path) -> DecisionTree:
    return tree_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))
