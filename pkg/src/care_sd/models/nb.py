"""Multinomial naive Bayes with additive smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import as_csr, check_labels, check_width


@dataclass
class NBModel:
    alpha: float
    log_priors: np.ndarray        # (2,)
    log_likelihoods: np.ndarray   # (2, V)
    kind = "nb"

    @property
    def n_features(self) -> int:
        return self.log_likelihoods.shape[1]

    @property
    def hyperparameters(self) -> dict:
        return {"alpha": self.alpha}

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = as_csr(X)
        check_width(X, self.n_features)
        return np.asarray(X @ self.log_likelihoods.T) + self.log_priors

    def predict_scores(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return (jll[:, 1] > jll[:, 0]).astype(np.int64)


def train_nb(X, y, alpha: float = 1.0) -> NBModel:
    """log P(t|c) = log((count(t, c) + alpha) / (total(c) + alpha * V))."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    X = as_csr(X)
    y = check_labels(y, X.shape[0])
    class_n = np.bincount(y, minlength=2)
    if (class_n == 0).any():
        raise ValueError("naive Bayes needs both classes in the training labels")
    counts = np.vstack([np.asarray(X[y == c].sum(axis=0)).ravel() for c in (0, 1)])
    smoothed = counts + alpha
    log_lik = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    log_prior = np.log(class_n / class_n.sum())
    return NBModel(float(alpha), log_prior, log_lik)
