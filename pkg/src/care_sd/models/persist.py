"""Versioned JSON model files."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .forest import ForestModel, Tree
from .logreg import LogRegModel
from .nb import NBModel

FORMAT = "care-sd-model"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def vocabulary_checksum(terms: list[str]) -> str:
    h = hashlib.sha256()
    for t in terms:
        h.update(t.encode("utf-8") + b"\n")
    return h.hexdigest()


def _params(model) -> dict:
    if isinstance(model, NBModel):
        return {"log_priors": model.log_priors.tolist(), "log_likelihoods": model.log_likelihoods.tolist()}
    if isinstance(model, LogRegModel):
        return {"weights": model.weights.tolist(), "bias": model.bias, "tol": model.tol, "max_iter": model.max_iter,
                "converged": model.converged, "n_iter": model.n_iter, "grad_norm": model.grad_norm}
    if isinstance(model, ForestModel):
        return {"seed": model.seed, "n_features": model.n_features, "bootstrap": model.bootstrap,
                "max_features": model.max_features, "trees": [t.to_json() for t in model.trees]}
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_to_dict(model, vocab_checksum: str | None = None, extra: dict | None = None) -> dict:
    return {
        "format": FORMAT, "version": VERSION, "kind": model.kind,
        "hyperparameters": model.hyperparameters, "vocabulary_sha256": vocab_checksum,
        "metadata": extra or {}, "parameters": _params(model),
    }


def save_model(model, path: str | Path, vocab_checksum: str | None = None, extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model, vocab_checksum, extra), fh, sort_keys=True)
        fh.write("\n")


def model_from_dict(obj: dict, expected_kind: str | None = None):
    if obj.get("format") != FORMAT:
        raise ModelFormatError("not a care-sd model file")
    if obj.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model file version {obj.get('version')!r}")
    kind, hp, p = obj["kind"], obj["hyperparameters"], obj["parameters"]
    if expected_kind is not None and kind != expected_kind:
        raise ModelFormatError(f"expected a {expected_kind} model, file holds {kind}")
    if kind == "nb":
        return NBModel(hp["alpha"], np.asarray(p["log_priors"]), np.asarray(p["log_likelihoods"]))
    if kind == "logreg":
        return LogRegModel(np.asarray(p["weights"], dtype=np.float64), p["bias"], hp["C"], p["tol"], p["max_iter"],
                           p["converged"], p["n_iter"], p["grad_norm"])
    if kind == "rf":
        return ForestModel(hp["n_estimators"], hp["max_depth"], hp["min_samples_split"], p["seed"], p["n_features"],
                           p["bootstrap"], p["max_features"], [Tree.from_json(t) for t in p["trees"]])
    raise ModelFormatError(f"unknown model kind {kind!r}")


def load_model(path: str | Path, expected_kind: str | None = None, vocab_checksum: str | None = None):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: unreadable model file ({exc})") from None
    if not isinstance(obj, dict):
        raise ModelFormatError(f"{path}: unreadable model file")
    if vocab_checksum is not None and obj.get("vocabulary_sha256") not in (None, vocab_checksum):
        raise ModelFormatError(f"{path}: model was trained against a different vocabulary")
    try:
        return model_from_dict(obj, expected_kind)
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path}: missing or malformed field {exc}") from None
