"""Random forest of Gini-criterion trees over sparse count features.

Each tree is grown on a bootstrap sample (kept as per-row weights) and each
split looks at sqrt(V) features drawn from all V columns.  Most columns are
all-zero inside any node, so instead of drawing column ids one at a time the
number of non-constant columns among the sqrt(V) draws is drawn from the
matching hypergeometric distribution and that many non-constant columns are
picked.  As with the usual implementation, the search keeps drawing until at
least one non-constant column has been seen.

Split rule is ``count <= threshold`` with integer thresholds (floored midpoint
of adjacent observed counts).  Ties between equally good splits go to the
lowest column, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._common import as_csr, check_labels, check_width

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray      # column per node, LEAF for leaves
    threshold: np.ndarray    # go left when value <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray        # (n_nodes, 2) weighted class counts
    impurity: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def weighted_n(self) -> np.ndarray:
        return self.value.sum(axis=1)

    def apply(self, X: sp.csr_matrix) -> np.ndarray:
        """Leaf id reached by every row."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            f = self.feature[node[active]]
            vals = np.asarray(X[active, f]).ravel()
            go_left = vals <= self.threshold[node[active]]
            node[active] = np.where(go_left, self.left[node[active]], self.right[node[active]])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, X: sp.csr_matrix) -> np.ndarray:
        leaf_values = self.value[self.apply(X)]
        return (leaf_values[:, 1] > leaf_values[:, 0]).astype(np.int64)

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
            "left": self.left.tolist(), "right": self.right.tolist(),
            "value": self.value.tolist(), "impurity": self.impurity.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        return cls(
            np.asarray(obj["feature"], dtype=np.int64), np.asarray(obj["threshold"], dtype=np.int64),
            np.asarray(obj["left"], dtype=np.int64), np.asarray(obj["right"], dtype=np.int64),
            np.asarray(obj["value"], dtype=np.float64).reshape(-1, 2), np.asarray(obj["impurity"], dtype=np.float64),
        )


@dataclass
class ForestModel:
    n_estimators: int
    max_depth: int | None
    min_samples_split: int
    seed: int
    n_features: int
    bootstrap: bool = True
    max_features: str | int | None = "sqrt"
    trees: list[Tree] = field(default_factory=list, repr=False)
    kind = "rf"

    @property
    def hyperparameters(self) -> dict:
        return {"max_depth": self.max_depth, "min_samples_split": self.min_samples_split,
                "n_estimators": self.n_estimators}

    def votes(self, X) -> np.ndarray:
        X = as_csr(X)
        check_width(X, self.n_features)
        X.sort_indices()
        ones = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            ones += tree.predict(X)
        return ones

    def predict_scores(self, X) -> np.ndarray:
        p = self.votes(X) / len(self.trees)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        ones = self.votes(X)
        return (2 * ones > len(self.trees)).astype(np.int64)


def _n_try(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    return max(1, min(int(max_features), n_features))


def _child_cost(w0: np.ndarray, w1: np.ndarray) -> np.ndarray:
    """N * gini for class weights (w0, w1): 2 * w0 * w1 / (w0 + w1)."""
    tot = w0 + w1
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot > 0, 2.0 * w0 * w1 / tot, 0.0)


class _TreeBuilder:
    def __init__(self, Xr: sp.csr_matrix, y: np.ndarray, weights: np.ndarray,
                 n_try: int, max_depth: int | None, min_samples_split: int, rng: np.random.Generator):
        self.Xr, self.y, self.w = Xr, y, weights
        self.w0 = weights * (y == 0)
        self.w1 = weights * (y == 1)
        self.n_try, self.max_depth, self.min_samples_split = n_try, max_depth, min_samples_split
        self.rng = rng
        self.slot = np.full(Xr.shape[1], -1, dtype=np.int64)

    def _class_weights(self, rows: np.ndarray) -> np.ndarray:
        return np.array([self.w0[rows].sum(), self.w1[rows].sum()])

    @staticmethod
    def _non_constant(sub: sp.csr_matrix) -> np.ndarray:
        n = sub.shape[0]
        present, nz = np.unique(sub.indices, return_counts=True)
        full = present[nz == n]
        varying = present[nz < n]
        if full.size:
            # columns nonzero on every row are constant only if all values match
            sub_c = sub[:, full].tocsc()
            lo = np.minimum.reduceat(sub_c.data, sub_c.indptr[:-1])
            hi = np.maximum.reduceat(sub_c.data, sub_c.indptr[:-1])
            varying = np.union1d(varying, full[lo != hi])
        return varying

    def _choose(self, candidates: np.ndarray) -> np.ndarray:
        V = self.Xr.shape[1]
        k = min(self.n_try, V)
        m = self.rng.hypergeometric(len(candidates), V - len(candidates), k) if len(candidates) < V else k
        m = max(int(m), 1)
        return np.sort(self.rng.permutation(candidates)[:m])

    def _best_split(self, sub: sp.csr_matrix, rows: np.ndarray, cols: np.ndarray, totals: np.ndarray):
        """Best (cost, column, threshold) over ``cols``, all columns scored at once.

        Entries are grouped by (column slot, value); each column also gets a
        zero group for the node rows where it is absent.  Weights are integer
        bootstrap counts, so the running sums are exact.
        """
        n = len(rows)
        m = len(cols)
        self.slot[cols] = np.arange(m)
        slot = self.slot[sub.indices]
        self.slot[cols] = -1
        keep = slot >= 0
        row_of = np.repeat(np.arange(n), np.diff(sub.indptr))[keep]
        slot, vals = slot[keep], sub.data[keep].astype(np.int64)
        r = rows[row_of]
        w0, w1 = self.w0[r], self.w1[r]

        nnz_rows = np.bincount(slot, minlength=m)
        z0 = totals[0] - np.bincount(slot, weights=w0, minlength=m)
        z1 = totals[1] - np.bincount(slot, weights=w1, minlength=m)
        has_zero = np.flatnonzero(nnz_rows < n)

        span = int(vals.max()) + 1 if vals.size else 1
        keys = np.concatenate([slot * span + vals, has_zero * span])
        k0 = np.concatenate([w0, z0[has_zero]])
        k1 = np.concatenate([w1, z1[has_zero]])
        uniq, inv = np.unique(keys, return_inverse=True)
        per0 = np.bincount(inv, weights=k0, minlength=len(uniq))
        per1 = np.bincount(inv, weights=k1, minlength=len(uniq))
        col, val = uniq // span, uniq % span

        last = np.ones(len(uniq), dtype=bool)
        last[:-1] = col[1:] != col[:-1]
        first = np.ones(len(uniq), dtype=bool)
        first[1:] = last[:-1]
        c0, c1 = np.cumsum(per0), np.cumsum(per1)
        start = np.flatnonzero(first)
        seg = np.cumsum(first) - 1
        base0 = (c0 - per0)[start][seg]
        base1 = (c1 - per1)[start][seg]
        left0, left1 = c0 - base0, c1 - base1
        cand = np.flatnonzero(~last)
        if cand.size == 0:
            return None
        left0, left1 = left0[cand], left1[cand]
        cost = _child_cost(left0, left1) + _child_cost(totals[0] - left0, totals[1] - left1)
        i = int(np.argmin(cost))  # first minimum: lowest column, then lowest threshold
        at = cand[i]
        threshold = int((val[at] + val[at + 1]) // 2)
        return float(cost[i]), int(cols[col[at]]), threshold

    def build(self, rows: np.ndarray) -> Tree:
        feature, threshold, left, right, value, impurity = [], [], [], [], [], []

        def new_node(cw):
            feature.append(LEAF)
            threshold.append(0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(cw)
            tot = cw.sum()
            impurity.append(1.0 - float((cw ** 2).sum()) / tot ** 2 if tot > 0 else 0.0)
            return len(feature) - 1

        root = new_node(self._class_weights(rows))
        stack = [(root, rows, 0)]
        while stack:
            node, rows, depth = stack.pop()
            cw = value[node]
            if (cw == 0).any() or len(rows) < self.min_samples_split or (
                    self.max_depth is not None and depth >= self.max_depth):
                continue
            sub = self.Xr[rows]
            candidates = self._non_constant(sub)
            if candidates.size == 0:
                continue
            best = self._best_split(sub, rows, self._choose(candidates), cw)
            if best is None:
                continue
            _, j, t = best
            at = np.flatnonzero(sub.indices == j)
            vals = np.zeros(len(rows))
            vals[np.searchsorted(sub.indptr, at, side="right") - 1] = sub.data[at]
            go_left = vals <= t
            lrows, rrows = rows[go_left], rows[~go_left]
            feature[node], threshold[node] = j, t
            left[node] = new_node(self._class_weights(lrows))
            right[node] = new_node(self._class_weights(rrows))
            stack.append((right[node], rrows, depth + 1))
            stack.append((left[node], lrows, depth + 1))
        return Tree(
            np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.int64),
            np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=np.float64).reshape(-1, 2), np.asarray(impurity, dtype=np.float64),
        )


def tree_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def train_rf(X, y, n_estimators: int = 100, max_depth: int | None = None, min_samples_split: int = 2,
             seed: int = 0, bootstrap: bool = True, max_features: str | int | None = "sqrt") -> ForestModel:
    if n_estimators < 1:
        raise ValueError("n_estimators must be at least 1")
    if min_samples_split < 2:
        raise ValueError("min_samples_split must be at least 2")
    Xr = as_csr(X)
    Xr.sort_indices()
    y = check_labels(y, Xr.shape[0])
    n = Xr.shape[0]
    n_try = _n_try(max_features, Xr.shape[1])
    model = ForestModel(n_estimators, max_depth, min_samples_split, seed, Xr.shape[1], bootstrap, max_features)
    for ss in tree_seeds(seed, n_estimators):
        rng = np.random.default_rng(ss)
        if bootstrap:
            weights = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
        else:
            weights = np.ones(n)
        rows = np.flatnonzero(weights > 0)
        builder = _TreeBuilder(Xr, y, weights, n_try, max_depth, min_samples_split, rng)
        model.trees.append(builder.build(rows))
    return model
