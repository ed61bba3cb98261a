"""L2-penalized binary logistic regression.

Objective: mean log-loss + ||w||^2 / (2 C n); the bias is not penalized.
This is the same optimum as minimizing C * sum(log-loss) + ||w||^2 / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from ._common import as_csr, check_labels, check_width


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    C: float
    tol: float = 1e-4
    max_iter: int = 1000
    converged: bool = True
    n_iter: int = 0
    grad_norm: float = 0.0
    trace: list[float] = field(default_factory=list, repr=False)
    kind = "logreg"

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    @property
    def hyperparameters(self) -> dict:
        return {"C": self.C}

    def decision_function(self, X) -> np.ndarray:
        X = as_csr(X)
        check_width(X, self.n_features)
        return X @ self.weights + self.bias

    def predict_scores(self, X) -> np.ndarray:
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (expit(self.decision_function(X)) > 0.5).astype(np.int64)


def objective(params: np.ndarray, X, y: np.ndarray, C: float) -> tuple[float, np.ndarray]:
    """Objective value and analytic gradient at ``params = [w..., b]``."""
    n = X.shape[0]
    w, b = params[:-1], params[-1]
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + float(w @ w) / (2.0 * C * n)
    r = (expit(z) - y) / n
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + w / (C * n)
    grad[-1] = r.sum()
    return loss, grad


def train_logreg(X, y, C: float = 1.0, tol: float = 1e-4, max_iter: int = 1000) -> LogRegModel:
    """Fit with L-BFGS from a zero start.

    Stops when the Euclidean gradient norm is at most ``tol``; otherwise the
    model is returned with ``converged=False`` after ``max_iter`` iterations.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    X = as_csr(X)
    y = check_labels(y, X.shape[0]).astype(np.float64)
    dim = X.shape[1] + 1
    trace: list[float] = []

    def fun(p):
        return objective(p, X, y, C)

    x0 = np.zeros(dim)
    trace.append(fun(x0)[0])
    res = minimize(
        fun, x0, jac=True, method="L-BFGS-B",
        callback=lambda xk: trace.append(fun(xk)[0]),
        # infinity-norm bound that implies the Euclidean bound
        options={"maxiter": max_iter, "gtol": tol / np.sqrt(dim), "ftol": 0.0, "maxcor": 20},
    )
    _, grad = fun(res.x)
    gnorm = float(np.linalg.norm(grad))
    return LogRegModel(
        weights=res.x[:-1].copy(), bias=float(res.x[-1]), C=float(C), tol=tol, max_iter=max_iter,
        converged=gnorm <= tol, n_iter=int(res.nit), grad_norm=gnorm, trace=trace,
    )
