"""Confusion-derived metrics, percentile bootstrap intervals and feature importances."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

METRIC_NAMES = ("accuracy", "precision_pos", "recall_pos", "f1_pos", "precision_macro", "recall_macro", "f1_macro")


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision_pos: float
    recall_pos: float
    f1_pos: float
    precision_macro: float
    recall_macro: float
    f1_macro: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _binary(y, name: str) -> np.ndarray:
    a = np.asarray(y).ravel()
    if not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 labels")
    return a.astype(np.int64)


def confusion(y_true, y_pred) -> Confusion:
    t, p = _binary(y_true, "y_true"), _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape[0]} true labels vs {p.shape[0]} predictions")
    if t.size == 0:
        raise ValueError("need at least one label")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return Confusion(tp, fp, t.size - tp - fp - fn, fn)


def _ratio(a, b):
    return a / b if b else 0.0


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r else 0.0


def metrics(c: Confusion) -> MetricSet:
    """0/0 precision, recall and F1 are taken as 0."""
    if c.n <= 0:
        raise ValueError("empty confusion matrix")
    p1, r1 = _ratio(c.tp, c.tp + c.fp), _ratio(c.tp, c.tp + c.fn)
    p0, r0 = _ratio(c.tn, c.tn + c.fn), _ratio(c.tn, c.tn + c.fp)
    f1, f0 = _f1(p1, r1), _f1(p0, r0)
    return MetricSet(
        accuracy=(c.tp + c.tn) / c.n,
        precision_pos=p1, recall_pos=r1, f1_pos=f1,
        precision_macro=(p0 + p1) / 2, recall_macro=(r0 + r1) / 2, f1_macro=(f0 + f1) / 2,
    )


def macro_f1(y_true, y_pred) -> float:
    return metrics(confusion(y_true, y_pred)).f1_macro


def _vector_metrics(tp, fp, tn, fn) -> dict[str, np.ndarray]:
    """``metrics`` over arrays of confusion counts (same 0/0 conventions)."""
    def ratio(a, b):
        return np.divide(a, b, out=np.zeros(a.shape, dtype=np.float64), where=b != 0)

    def f1(p, r):
        return ratio(2 * p * r, p + r)

    n = tp + fp + tn + fn
    p1, r1 = ratio(tp, tp + fp), ratio(tp, tp + fn)
    p0, r0 = ratio(tn, tn + fn), ratio(tn, tn + fp)
    f1p, f1n = f1(p1, r1), f1(p0, r0)
    return {
        "accuracy": (tp + tn) / n, "precision_pos": p1, "recall_pos": r1, "f1_pos": f1p,
        "precision_macro": (p0 + p1) / 2, "recall_macro": (r0 + r1) / 2, "f1_macro": (f1n + f1p) / 2,
    }


@dataclass
class MetricCI:
    point: MetricSet
    intervals: dict[str, tuple[float, float]]
    n_resamples: int
    level: float
    seed: int
    method: str = "percentile bootstrap, resampling with replacement"

    def bounds(self, name: str) -> tuple[float, float, float]:
        lo, hi = self.intervals[name]
        return getattr(self.point, name), lo, hi

    def to_dict(self) -> dict:
        return {
            "n_resamples": self.n_resamples, "level": self.level, "seed": self.seed, "method": self.method,
            "metrics": {m: dict(zip(("point", "lo", "hi"), self.bounds(m))) for m in METRIC_NAMES},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MetricCI":
        m = obj["metrics"]
        point = MetricSet(**{name: m[name]["point"] for name in METRIC_NAMES})
        intervals = {name: (m[name]["lo"], m[name]["hi"]) for name in METRIC_NAMES}
        return cls(point, intervals, obj["n_resamples"], obj["level"], obj["seed"], obj["method"])


def bootstrap_ci(y_true, y_pred, n_resamples: int = 1000, level: float = 0.95, seed: int = 0) -> MetricCI:
    """Resample (y_true, y_pred) pairs with replacement and take percentile bounds."""
    t, p = _binary(y_true, "y_true"), _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ValueError("length mismatch between labels and predictions")
    n = t.size
    if n < 2:
        raise ValueError("bootstrap needs at least two labelled items")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n_resamples, n))
    tt, pp = t[idx], p[idx]
    tp = np.sum((tt == 1) & (pp == 1), axis=1)
    fp = np.sum((tt == 0) & (pp == 1), axis=1)
    fn = np.sum((tt == 1) & (pp == 0), axis=1)
    tn = n - tp - fp - fn
    samples = _vector_metrics(tp, fp, tn, fn)
    alpha = (1.0 - level) / 2.0
    intervals = {}
    for name in METRIC_NAMES:
        lo, hi = np.percentile(samples[name], [100 * alpha, 100 * (1 - alpha)])
        intervals[name] = (float(lo), float(hi))
    return MetricCI(metrics(confusion(t, p)), intervals, n_resamples, level, seed)


# -- importances ----------------------------------------------------------------

@dataclass
class ImportanceReport:
    method: str
    rows: list[tuple[str, float]]
    top_n: int
    values: np.ndarray | None = field(default=None, repr=False)
    positive: list[tuple[str, float]] = field(default_factory=list)
    negative: list[tuple[str, float]] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = ["rank\tngram\tvalue\tmethod"]
        lines += [f"{i}\t{g}\t{v:.10g}\t{self.method}" for i, (g, v) in enumerate(self.rows, 1)]
        return "\n".join(lines) + "\n"


def _ranked(terms: list[str], values: np.ndarray, top_n: int) -> list[tuple[str, float]]:
    order = sorted(range(len(terms)), key=lambda i: (-abs(values[i]), terms[i]))
    return [(terms[i], float(values[i])) for i in order[:top_n]]


def tree_importance(tree) -> np.ndarray:
    """Raw per-feature sum of (node weight fraction x Gini decrease) for one tree."""
    out = np.zeros(0)
    w = tree.weighted_n
    root = w[0] if len(w) else 0.0
    contrib: dict[int, float] = {}
    for node in range(tree.n_nodes):
        f = int(tree.feature[node])
        if f < 0:
            continue
        l, r = tree.left[node], tree.right[node]
        dec = w[node] * tree.impurity[node] - w[l] * tree.impurity[l] - w[r] * tree.impurity[r]
        contrib[f] = contrib.get(f, 0.0) + dec / root
    if contrib:
        out = np.zeros(max(contrib) + 1)
        for f, v in contrib.items():
            out[f] = v
    return out


def gini_importance(forest, vocab_terms: list[str], top_n: int = 30) -> ImportanceReport:
    V = forest.n_features
    total = np.zeros(V)
    for tree in forest.trees:
        raw = tree_importance(tree)
        total[:len(raw)] += raw
    total /= max(len(forest.trees), 1)
    s = total.sum()
    if s > 0:
        total = total / s
    else:
        warnings.warn("forest has no splits; all importances are zero", stacklevel=2)
    nonzero = [i for i in range(V) if total[i] > 0]
    rows = _ranked([vocab_terms[i] for i in nonzero], total[nonzero], top_n)
    return ImportanceReport("gini_mdi", rows, top_n, values=total)


def logreg_contributions(model, vocab_terms: list[str], top_n: int = 30) -> ImportanceReport:
    """Signed coefficients, ranked by magnitude; zero weights are left out."""
    w = model.weights
    nz = [i for i in range(len(w)) if w[i] != 0]
    rows = _ranked([vocab_terms[i] for i in nz], w[nz], top_n)
    pos = sorted(((vocab_terms[i], float(w[i])) for i in nz if w[i] > 0), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    neg = sorted(((vocab_terms[i], float(w[i])) for i in nz if w[i] < 0), key=lambda kv: (kv[1], kv[0]))[:top_n]
    return ImportanceReport("logreg_coefficients", rows, top_n, values=w.copy(), positive=pos, negative=neg)
