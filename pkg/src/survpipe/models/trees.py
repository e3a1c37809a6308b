"""Weighted binary decision trees and the bagged forest built on them.

Trees are stored as flat parallel arrays (feature, threshold, children,
leaf vote, gain share) so they serialize directly and predict with a
breadth-first index sweep instead of per-row recursion. Split search is
exact: every boundary between distinct sorted values of each candidate
feature is scored by weighted impurity decrease, with ties broken toward
the lowest feature index and then the lowest threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .config import FOREST, TrainConfig


def _impurity(w_pos: np.ndarray, w_tot: np.ndarray, criterion: str) -> np.ndarray:
    """Weighted two-class impurity; safe at w_tot == 0 (returns 0)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(w_tot > 0, w_pos / np.where(w_tot > 0, w_tot, 1.0), 0.0)
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    pq = np.clip(p, 1e-300, 1.0)
    qq = np.clip(1.0 - p, 1e-300, 1.0)
    return -(p * np.log2(pq) + (1.0 - p) * np.log2(qq))


@dataclass
class Tree:
    feature: np.ndarray    # int32, -1 at leaves
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32
    right: np.ndarray      # int32
    vote: np.ndarray       # float64, class voted by each leaf
    gain: np.ndarray       # float64, weighted impurity decrease share per node

    def predict_votes(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] < self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active[rows] = self.feature[node[rows]] >= 0
        return self.vote[node]

    def feature_gains(self, n_columns: int) -> np.ndarray:
        gains = np.zeros(n_columns)
        split = self.feature >= 0
        np.add.at(gains, self.feature[split], self.gain[split])
        return gains


class _TreeBuilder:
    def __init__(self, X, y, sample_weight, cfg: TrainConfig, rng, n_features: int):
        self.X = X
        self.y = y.astype(np.float64)
        self.w = sample_weight
        self.cfg = cfg
        self.rng = rng
        self.n_features = n_features
        self.total_weight = sample_weight.sum()
        self.nodes: list[list] = []  # [feature, threshold, left, right, vote, gain]

    def build(self) -> Tree:
        self._grow(np.arange(len(self.y)), depth=0)
        return Tree(
            feature=np.array([nd[0] for nd in self.nodes], dtype=np.int32),
            threshold=np.array([nd[1] for nd in self.nodes]),
            left=np.array([nd[2] for nd in self.nodes], dtype=np.int32),
            right=np.array([nd[3] for nd in self.nodes], dtype=np.int32),
            vote=np.array([nd[4] for nd in self.nodes]),
            gain=np.array([nd[5] for nd in self.nodes]),
        )

    def _leaf(self, idx) -> int:
        w_pos = self.w[idx][self.y[idx] == 1].sum()
        w_neg = self.w[idx].sum() - w_pos
        vote = 1.0 if w_pos > w_neg else 0.0
        self.nodes.append([-1, 0.0, -1, -1, vote, 0.0])
        return len(self.nodes) - 1

    def _grow(self, idx, depth) -> int:
        cfg = self.cfg
        y_node = self.y[idx]
        if (cfg.max_depth is not None and depth >= cfg.max_depth) \
                or len(idx) < 2 * cfg.min_leaf \
                or (y_node == y_node[0]).all():
            return self._leaf(idx)
        k = self.n_features
        candidates = np.sort(self.rng.choice(self.X.shape[1], size=k, replace=False))
        found = self._best_split(idx, candidates)
        if found is None:
            return self._leaf(idx)
        f, thr, decrease, w_node = found
        node_id = len(self.nodes)
        self.nodes.append([f, thr, -1, -1, 0.0, decrease * w_node / self.total_weight])
        go_left = self.X[idx, f] < thr
        left_id = self._grow(idx[go_left], depth + 1)
        right_id = self._grow(idx[~go_left], depth + 1)
        self.nodes[node_id][2] = left_id
        self.nodes[node_id][3] = right_id
        return node_id

    def _best_split(self, idx, candidates):
        y = self.y[idx]
        w = self.w[idx]
        W = w.sum()
        WY = (w * y).sum()
        parent = _impurity(np.array([WY]), np.array([W]), self.cfg.criterion)[0]
        best = None  # (decrease, feature, threshold)
        for f in candidates:
            x = self.X[idx, f]
            order = np.argsort(x)
            xs = x[order]
            boundaries = np.flatnonzero(xs[:-1] != xs[1:])
            if len(boundaries) == 0:
                continue
            cw = np.cumsum(w[order])
            cwy = np.cumsum((w * y)[order])
            n_left = boundaries + 1
            ok = (n_left >= self.cfg.min_leaf) & (len(idx) - n_left >= self.cfg.min_leaf)
            if not ok.any():
                continue
            b = boundaries[ok]
            w_l, wy_l = cw[b], cwy[b]
            w_r, wy_r = W - w_l, WY - wy_l
            child = (w_l * _impurity(wy_l, w_l, self.cfg.criterion)
                     + w_r * _impurity(wy_r, w_r, self.cfg.criterion)) / W
            decrease = parent - child
            j = int(np.argmax(decrease))
            if decrease[j] <= 1e-15:
                continue
            thr = 0.5 * (xs[b[j]] + xs[b[j] + 1])
            if best is None or decrease[j] > best[0] + 1e-15:
                best = (float(decrease[j]), int(f), float(thr))
        if best is None:
            return None
        return best[1], best[2], best[0], W


def build_tree(X, y, sample_weight, cfg: TrainConfig, rng, n_features: int) -> Tree:
    return _TreeBuilder(X, y, sample_weight, cfg, rng, n_features).build()


def resolve_features_per_split(spec, n_columns: int) -> int:
    if spec is None or spec == "sqrt":
        return max(1, int(np.sqrt(n_columns)))
    if spec == "all":
        return n_columns
    k = int(spec)
    if k < 1:
        raise ValidationError("features_per_split must be >= 1")
    return min(k, n_columns)


@dataclass
class ForestModel:
    trees: list[Tree]
    n_columns: int
    fingerprint: int
    criterion: str = "gini"

    kind = FOREST

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting positive."""
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict_votes(X)
        return votes / len(self.trees)

    def feature_gains(self) -> np.ndarray:
        """Per-column impurity decrease averaged over trees."""
        gains = np.zeros(self.n_columns)
        for tree in self.trees:
            gains += tree.feature_gains(self.n_columns)
        return gains / len(self.trees)


def train_forest(X, y, sample_weight, cfg: TrainConfig, fingerprint: int) -> ForestModel:
    """Bag cfg.n_trees trees; each bootstrap is drawn proportional to the
    instance weights, so cost-sensitive weighting reaches the trees through
    the resampling distribution. Tree randomness derives from (seed, tree
    index), making parallel and sequential training identical."""
    n, d = X.shape
    k = resolve_features_per_split(cfg.features_per_split, d)
    trees = []
    p = sample_weight / sample_weight.sum()
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        if cfg.bootstrap:
            rows = np.sort(rng.choice(n, size=n, replace=True, p=p))
            trees.append(build_tree(X[rows], y[rows], np.ones(n), cfg, rng, k))
        else:
            trees.append(build_tree(X, y, sample_weight, cfg, rng, k))
    return ForestModel(trees, d, fingerprint, cfg.criterion)
