"""Bag-of-words classifiers, grid search and model files."""

from .forest import ForestModel, train_rf
from .grid import GridSpec, default_grid, grid_search
from .logreg import LogRegModel, train_logreg
from .nb import NBModel, train_nb
from .persist import load_model, save_model


def predict(model, X):
    return model.predict(X)


def predict_scores(model, X):
    return model.predict_scores(X)


__all__ = [
    "NBModel", "LogRegModel", "ForestModel", "GridSpec",
    "train_nb", "train_logreg", "train_rf", "grid_search", "default_grid",
    "predict", "predict_scores", "save_model", "load_model",
]
