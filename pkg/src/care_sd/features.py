"""Bag-of-words features: tokenizer, 1-2 gram vocabulary, count vectors, stratified splits."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

# Letters/digits, with hyphen, apostrophe or slash allowed between them.
TOKEN_RE = re.compile(r"[^\W_]+(?:[-'/][^\W_]+)*")


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text.lower())


def ngrams(tokens: Sequence[str], ngram_min: int = 1, ngram_max: int = 2) -> list[str]:
    out = []
    for n in range(ngram_min, ngram_max + 1):
        out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


@dataclass
class Vocabulary:
    entries: dict[str, int]
    ngram_min: int = 1
    ngram_max: int = 2
    min_df: int = 1
    binary: bool = False  # presence (0/1) instead of counts

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def terms(self) -> list[str]:
        inv = [""] * len(self.entries)
        for term, idx in self.entries.items():
            inv[idx] = term
        return inv

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# ngram_min={self.ngram_min} ngram_max={self.ngram_max} min_df={self.min_df}"
                     f" binary={int(self.binary)}\n")
            for term in self.terms:
                fh.write(f"{term}\t{self.entries[term]}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        params = {"ngram_min": 1, "ngram_max": 2, "min_df": 1, "binary": 0}
        entries: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("#"):
                    for kv in line[1:].split():
                        k, _, v = kv.partition("=")
                        if k in params:
                            params[k] = int(v)
                    continue
                if not line:
                    continue
                term, _, idx = line.rpartition("\t")
                entries[term] = int(idx)
        if sorted(entries.values()) != list(range(len(entries))):
            raise ValueError(f"{path}: vocabulary indices are not a bijection onto 0..V-1")
        params["binary"] = bool(params["binary"])
        return cls(entries, **params)


def build_vocabulary(texts: Iterable[str], min_df: int = 1,
                     ngram_min: int = 1, ngram_max: int = 2, binary: bool = False) -> Vocabulary:
    """Every n-gram whose document frequency reaches ``min_df``, indexed lexicographically.

    Must be called on training texts only.
    """
    df: Counter[str] = Counter()
    n_docs = 0
    for text in texts:
        n_docs += 1
        df.update(set(ngrams(tokenize(text), ngram_min, ngram_max)))
    if n_docs == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted(g for g, c in df.items() if c >= min_df)
    return Vocabulary({g: i for i, g in enumerate(kept)}, ngram_min, ngram_max, min_df, binary)


def vectorize(texts: Iterable[str], vocab: Vocabulary) -> sp.csr_matrix:
    """Sparse count matrix (0/1 if ``vocab.binary``), one row per text; unknown n-grams are ignored."""
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    lookup = vocab.entries
    for text in texts:
        counts = Counter(
            lookup[g] for g in ngrams(tokenize(text), vocab.ngram_min, vocab.ngram_max) if g in lookup
        )
        for col in sorted(counts):
            indices.append(col)
            data.append(1 if vocab.binary else counts[col])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, len(vocab)),
    )


@dataclass
class SplitPlan:
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int
    folds: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "train_idx": self.train_idx.tolist(),
            "test_idx": self.test_idx.tolist(),
            "folds": [{"train": tr.tolist(), "test": te.tolist()} for tr, te in self.folds],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SplitPlan":
        return cls(
            np.asarray(obj["train_idx"], dtype=np.int64),
            np.asarray(obj["test_idx"], dtype=np.int64),
            obj["seed"],
            [(np.asarray(f["train"], dtype=np.int64), np.asarray(f["test"], dtype=np.int64)) for f in obj["folds"]],
        )


def _class_members(y: np.ndarray) -> dict[int, np.ndarray]:
    return {int(c): np.flatnonzero(y == c) for c in np.unique(y)}


def stratified_split(y: Sequence[int], test_fraction: float = 0.2, seed: int = 0) -> SplitPlan:
    """Per-class shuffled 80/20 split.

    The test size is ``round(n * test_fraction)``; it is shared between classes by
    largest remainder so every class lands within one item of its exact share.
    """
    y = np.asarray(y)
    members = _class_members(y)
    if len(members) < 2:
        raise ValueError("stratified split needs both classes present")
    for c, idx in members.items():
        if len(idx) < 2:
            raise ValueError(f"class {c} has {len(idx)} item(s); at least 2 are required")
    n_test = int(round(len(y) * test_fraction))
    exact = {c: len(idx) * test_fraction for c, idx in members.items()}
    alloc = {c: int(np.floor(v)) for c, v in exact.items()}
    remainder = n_test - sum(alloc.values())
    for c in sorted(exact, key=lambda c: (-(exact[c] - alloc[c]), c))[:max(remainder, 0)]:
        alloc[c] += 1

    rng = np.random.default_rng(seed)
    test_parts, train_parts = [], []
    for c in sorted(members):
        idx = rng.permutation(members[c])
        test_parts.append(idx[:alloc[c]])
        train_parts.append(idx[alloc[c]:])
    return SplitPlan(np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts)), seed)


def stratified_kfold(y: Sequence[int], k: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified folds as (train positions, test positions) into ``y``.

    Each class is shuffled and dealt round-robin; the dealing position carries
    over between classes so fold sizes also stay within one of each other.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    y = np.asarray(y)
    members = _class_members(y)
    for c, idx in members.items():
        if len(idx) < k:
            raise ValueError(f"class {c} has {len(idx)} item(s), fewer than k={k}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in sorted(members):
        idx = rng.permutation(members[c])
        assignment[idx] = (np.arange(len(idx)) + offset) % k
        offset = (offset + len(idx)) % k
    everything = np.arange(len(y))
    return [(everything[assignment != f], everything[assignment == f]) for f in range(k)]
