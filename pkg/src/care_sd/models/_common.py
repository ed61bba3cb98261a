from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    pass


def as_csr(X) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64, copy=True)
    X.eliminate_zeros()
    if X.nnz and not np.all(np.isfinite(X.data)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64).ravel()
    if y.shape[0] != n_rows:
        raise ValueError(f"{n_rows} rows but {y.shape[0]} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return y


def check_width(X, n_features: int):
    if X.shape[1] != n_features:
        raise DimensionError(f"model expects {n_features} columns, got {X.shape[1]}")
