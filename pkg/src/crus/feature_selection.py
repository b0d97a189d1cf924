"""Attribute ranking and correlation-based subset selection.

Gain-ratio ranking scores each attribute alone against the class (numeric
attributes at their best binary split).  Subset selection uses the
correlation-based merit k*rcf / sqrt(k + k(k-1)*rff) where both the
attribute-class correlation rcf and the attribute-attribute correlation
rff are symmetrical uncertainties over discretized attributes, explored
with a best-first forward search.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, NUMERIC
from .trees import _entropy, _nominal_stats, _numeric_candidates


@dataclass(frozen=True)
class AttributeRank:
    index: int
    name: str
    score: float


def _best_numeric_ratio(vals: np.ndarray, y: np.ndarray) -> float:
    w = np.ones(vals.size)
    thresholds, gains, infos = _numeric_candidates(vals, y, w, min_leaf=0.0)
    usable = infos > 0
    if not np.any(usable):
        return 0.0
    ratios = gains[usable] / infos[usable]
    return float(ratios.max())


def gain_ratio_rank(d: Dataset) -> list[AttributeRank]:
    """Attributes sorted by standalone gain ratio, best first.

    Unusable attributes (constant, or zero split information) score 0.
    Ties keep ascending attribute index order.
    """
    if len(d) == 0:
        raise ValueError("cannot rank attributes of an empty dataset")
    y = np.asarray(d.labels)
    if y.min() == y.max():
        raise ValueError("attribute ranking needs both classes present")
    ranks = []
    for i, spec in enumerate(d.schema.attributes):
        vals = d.values[:, i]
        if spec.kind == NUMERIC:
            score = _best_numeric_ratio(vals, y)
        else:
            stats = _nominal_stats(vals, y, np.ones(len(d)), len(spec.categories), min_leaf=0.0)
            if stats is None or stats[1] <= 0:
                score = 0.0
            else:
                score = float(stats[0] / stats[1])
        ranks.append(AttributeRank(i, spec.name, score))
    return sorted(ranks, key=lambda r: (-r.score, r.index))


def _best_gain_threshold(vals: np.ndarray, y: np.ndarray) -> float | None:
    """Threshold minimizing class entropy (maximizing gain), or None."""
    thresholds, gains, _ = _numeric_candidates(vals, y, np.ones(vals.size), min_leaf=0.0)
    if thresholds.size == 0:
        return None
    return float(thresholds[int(np.argmax(gains))])


def discretize(d: Dataset) -> np.ndarray:
    """Integer codes per attribute: nominal keep their category index,
    numeric become 0/1 at their entropy-minimizing binary split against the
    class (constant attributes code to all zeros)."""
    y = np.asarray(d.labels)
    codes = np.zeros((len(d), d.schema.n_attributes), dtype=np.int64)
    for i, spec in enumerate(d.schema.attributes):
        vals = d.values[:, i]
        if spec.kind == NUMERIC:
            t = _best_gain_threshold(vals, y)
            codes[:, i] = 0 if t is None else (vals > t).astype(np.int64)
        else:
            codes[:, i] = vals.astype(np.int64)
    return codes


def _entropy_of_codes(x: np.ndarray) -> float:
    return _entropy(np.bincount(x).astype(np.float64))


def symmetrical_uncertainty(x: np.ndarray, y: np.ndarray) -> float:
    """SU(X, Y) = 2 I(X;Y) / (H(X) + H(Y)) over integer-coded variables.

    0 when either variable is constant (by convention), 1 for identical
    non-constant variables; symmetric and invariant to relabeling.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError("variables must be equal-length non-empty 1-d arrays")
    hx = _entropy_of_codes(x)
    hy = _entropy_of_codes(y)
    if hx == 0.0 or hy == 0.0:
        return 0.0
    joint = x * (int(y.max()) + 1) + y
    mi = hx + hy - _entropy_of_codes(joint)
    return max(0.0, 2.0 * mi / (hx + hy))


class _SuCache:
    def __init__(self, codes: np.ndarray, y: np.ndarray) -> None:
        self.codes = codes
        self.y = y.astype(np.int64)
        self._class_su: dict[int, float] = {}
        self._pair_su: dict[tuple[int, int], float] = {}
        self.n_attrs = codes.shape[1]

    def class_su(self, i: int) -> float:
        if i not in self._class_su:
            self._class_su[i] = symmetrical_uncertainty(self.codes[:, i], self.y)
        return self._class_su[i]

    def pair_su(self, i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in self._pair_su:
            self._pair_su[key] = symmetrical_uncertainty(self.codes[:, key[0]], self.codes[:, key[1]])
        return self._pair_su[key]

    def merit(self, subset: tuple[int, ...]) -> float:
        k = len(subset)
        if k == 0:
            raise ValueError("merit of an empty subset is undefined")
        r_cf = float(np.mean([self.class_su(i) for i in subset]))
        if k == 1:
            return r_cf
        pairs = [self.pair_su(a, b) for t, a in enumerate(subset) for b in subset[t + 1 :]]
        r_ff = float(np.mean(pairs))
        return k * r_cf / np.sqrt(k + k * (k - 1) * r_ff)


def cfs_merit(d: Dataset, subset: list[int] | tuple[int, ...]) -> float:
    """Correlation-based merit of an attribute subset."""
    subset = tuple(sorted(set(int(i) for i in subset)))
    if not subset:
        raise ValueError("subset must contain at least one attribute")
    for i in subset:
        if not 0 <= i < d.schema.n_attributes:
            raise ValueError(f"attribute index {i} out of range")
    cache = _SuCache(discretize(d), np.asarray(d.labels))
    return cache.merit(subset)


@dataclass(frozen=True)
class CfsResult:
    selected: tuple[int, ...]
    names: tuple[str, ...]
    merit: float
    n_evaluated: int


def cfs_best_first(d: Dataset, max_stale: int = 5) -> CfsResult:
    """Best-first forward search over attribute subsets by merit.

    Starts from all singleton subsets, repeatedly expands the best open
    subset with one extra attribute, and stops after `max_stale`
    consecutive expansions that fail to improve the best merit seen (or
    when the frontier is exhausted).  Deterministic: merit ties expand the
    lexicographically smallest subset.
    """
    if max_stale < 1:
        raise ValueError("max_stale must be at least 1")
    n_attrs = d.schema.n_attributes
    if n_attrs == 0 or len(d) == 0:
        raise ValueError("need a non-empty dataset with attributes")
    cache = _SuCache(discretize(d), np.asarray(d.labels))
    evaluated: dict[tuple[int, ...], float] = {}

    def evaluate(subset: tuple[int, ...]) -> float:
        if subset not in evaluated:
            evaluated[subset] = cache.merit(subset)
        return evaluated[subset]

    heap: list[tuple[float, tuple[int, ...]]] = []
    best_subset = (0,)
    best_merit = -np.inf
    for i in range(n_attrs):
        subset = (i,)
        merit = evaluate(subset)
        heapq.heappush(heap, (-merit, subset))
        if merit > best_merit:
            best_merit, best_subset = merit, subset
    stale = 0
    while heap and stale < max_stale:
        _, subset = heapq.heappop(heap)
        improved = False
        for i in range(n_attrs):
            if i in subset:
                continue
            child = tuple(sorted(subset + (i,)))
            if child in evaluated:
                continue
            merit = evaluate(child)
            heapq.heappush(heap, (-merit, child))
            if merit > best_merit:
                best_merit, best_subset = merit, child
                improved = True
        stale = 0 if improved else stale + 1
    names = tuple(d.schema.attributes[i].name for i in best_subset)
    return CfsResult(best_subset, names, float(best_merit), len(evaluated))
