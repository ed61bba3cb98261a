"""Term lists with provenance: load/save, embedding expansion, candidate import, pruning."""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .matcher import CompiledMatcher

FEATURES = ("doubt_markers", "stigmatizing_labels")
ORIGINS = ("stem", "embedding", "generated", "manual")
STATUSES = ("active", "pruned", "noise_removed")

# Terms removed after reviewing high-frequency matches.
NOISE_TERMS = {
    "stigmatizing_labels": ("difficult", "suspicious", "aggressive", "unstable", "dramatic",
                            "unreliable", "entitled", "invalid", "violent", "dangerous"),
    "doubt_markers": ("suspicion", "suspicious", "questionable", "questioning", "uncertain",
                      "hesitancy", "hesitant", "unsure"),
}
STEMS = {
    "stigmatizing_labels": ("abuser", "junkie", "alcoholic", "drunk", "drug-seeking", "nonadherent",
                            "agitated", "angry", "combative", "noncompliant", "confront", "noncooperative",
                            "defensive", "hysterical", "unpleasant", "refuse", "frequent-flyer", "reluctant"),
    "doubt_markers": ("adamant", "claimed", "insists", "allegedly", "disbelieves", "dubious"),
}


class LexiconError(ValueError):
    pass


def normalize_term(raw: str) -> str:
    return " ".join(raw.split()).lower()


@dataclass(frozen=True)
class LexiconEntry:
    term: str
    origin: str = "manual"
    status: str = "active"
    source_stem: str | None = None

    def __post_init__(self):
        if not self.term or self.term != normalize_term(self.term):
            raise LexiconError(f"term {self.term!r} must be non-empty, lowercase and whitespace-normalized")
        if self.origin not in ORIGINS:
            raise LexiconError(f"unknown origin {self.origin!r} for term {self.term!r}")
        if self.status not in STATUSES:
            raise LexiconError(f"unknown status {self.status!r} for term {self.term!r}")


@dataclass(frozen=True)
class Lexicon:
    feature: str
    entries: tuple[LexiconEntry, ...] = ()
    header: tuple[str, ...] = ()

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.term in seen:
                raise LexiconError(f"duplicate term {e.term!r} in {self.feature} lexicon")
            seen.add(e.term)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return any(e.term == term for e in self.entries)

    def get(self, term: str) -> LexiconEntry | None:
        return next((e for e in self.entries if e.term == term), None)

    def with_status(self, status: str) -> list[str]:
        return [e.term for e in self.entries if e.status == status]

    @property
    def active_terms(self) -> list[str]:
        return self.with_status("active")

    def counts(self) -> dict[str, int]:
        return {s: len(self.with_status(s)) for s in STATUSES}

    def extended(self, entries: Iterable[LexiconEntry]) -> "Lexicon":
        return dataclasses.replace(self, entries=self.entries + tuple(entries))


def load_lexicon(path: str | Path, feature: str | None = None) -> Lexicon:
    """Read ``term<TAB>origin<TAB>status<TAB>source_stem`` lines.

    ``# feature: NAME`` in the header sets the feature when not given.
    """
    entries, header = [], []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                header.append(line[1:].strip())
                if feature is None and line[1:].strip().startswith("feature:"):
                    feature = line.split(":", 1)[1].strip()
                continue
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) < 3:
                raise LexiconError(f"{path}:{lineno}: expected term, origin, status columns")
            term, origin, status = cols[0], cols[1], cols[2]
            stem = cols[3] if len(cols) > 3 and cols[3] else None
            if term in seen:
                raise LexiconError(f"{path}:{lineno}: duplicate term {term!r}")
            seen.add(term)
            try:
                entries.append(LexiconEntry(term, origin, status, stem))
            except LexiconError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from None
    return Lexicon(feature or "unknown", tuple(entries), tuple(header))


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = list(lexicon.header)
        if not any(h.startswith("feature:") for h in header):
            header.insert(0, f"feature: {lexicon.feature}")
        for h in header:
            fh.write(f"# {h}\n")
        for e in lexicon.entries:
            fh.write(f"{e.term}\t{e.origin}\t{e.status}\t{e.source_stem or ''}\n")


def shipped_lexicon(feature: str) -> Lexicon:
    if feature not in FEATURES:
        raise LexiconError(f"no shipped lexicon for {feature!r}; choose from {FEATURES}")
    with resources.as_file(resources.files("care_sd") / "data" / f"{feature}.lex") as p:
        return load_lexicon(p, feature)


def shipped_lexicon_path(feature: str) -> Path:
    return Path(str(resources.files("care_sd") / "data" / f"{feature}.lex"))


# -- embedding expansion ----------------------------------------------------

@dataclass
class EmbeddingModel:
    words: list[str]
    vectors: np.ndarray  # (V, d)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise LexiconError("embedding matrix shape does not match vocabulary")
        if np.isnan(self.vectors).any():
            raise LexiconError("embedding contains NaN components")
        self.index = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def load_embeddings(path: str | Path, limit: int | None = None) -> EmbeddingModel:
    """word2vec text format: ``vocab_size dim`` then ``term v1 ... vd`` per line."""
    words, rows = [], []
    with open(path, encoding="utf-8", errors="replace") as fh:
        first = fh.readline().split()
        if len(first) != 2:
            raise LexiconError(f"{path}: first line must be 'vocab_size dim'")
        dim = int(first[1])
        for lineno, line in enumerate(fh, 2):
            if limit is not None and len(words) >= limit:
                break
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            if len(parts) != dim + 1:
                raise LexiconError(f"{path}:{lineno}: expected {dim} components, got {len(parts) - 1}")
            words.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    return EmbeddingModel(words, np.asarray(rows, dtype=np.float64).reshape(len(words), dim))


@dataclass(frozen=True)
class ExpansionEdge:
    stem: str
    candidate: str
    cosine: float


TIE_EPS = 1e-12


def _rank_with_ties(pool: list[int], cos: np.ndarray, words: list[str]) -> list[int]:
    """Descending cosine; values within TIE_EPS of their neighbour count as tied and go by term."""
    by_cos = sorted(pool, key=lambda j: -cos[j])
    out, group = [], []
    for j in by_cos:
        if group and cos[group[-1]] - cos[j] > TIE_EPS:
            out.extend(sorted(group, key=lambda g: words[g]))
            group = []
        group.append(j)
    out.extend(sorted(group, key=lambda g: words[g]))
    return out


def expand_with_embeddings(stems: Iterable[str], model: EmbeddingModel, k: int = 10) -> list[ExpansionEdge]:
    """Top-k cosine neighbours per stem, ordered by (-cosine, term)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return []
    norms = np.linalg.norm(model.vectors, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = model.vectors / safe[:, None]
    edges = []
    for stem in stems:
        i = model.index.get(stem)
        if i is None:
            warnings.warn(f"stem {stem!r} not in embedding vocabulary; no expansion", stacklevel=2)
            continue
        cos = unit @ unit[i]
        cos[i] = -np.inf
        kk = min(k, len(model.words) - 1)
        if kk <= 0:
            continue
        # anything tied with the k-th best stays in the pool so ties can be broken by term
        cutoff = np.partition(cos, len(cos) - kk)[len(cos) - kk]
        pool = np.flatnonzero(cos >= cutoff - TIE_EPS)
        order = _rank_with_ties(pool.tolist(), cos, model.words)
        for j in order[:k]:
            edges.append(ExpansionEdge(stem, model.words[j], float(min(1.0, max(-1.0, cos[j])))))
    return edges


def write_edges(edges: Iterable[ExpansionEdge], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("stem\tcandidate\tcosine\n")
        for e in edges:
            fh.write(f"{e.stem}\t{e.candidate}\t{e.cosine:.6f}\n")


def edges_to_entries(edges: Iterable[ExpansionEdge], lexicon: Lexicon | None = None) -> list[LexiconEntry]:
    known = {e.term for e in lexicon.entries} if lexicon else set()
    out = []
    for edge in edges:
        term = normalize_term(edge.candidate)
        if term and term not in known:
            known.add(term)
            out.append(LexiconEntry(term, "embedding", "active", edge.stem))
    return out


# -- candidate import, pruning, noise removal --------------------------------

def import_candidates(path: str | Path, origin: str, lexicon: Lexicon | None = None) -> tuple[list[LexiconEntry], int]:
    """One term per line; returns new entries and the number of duplicates skipped."""
    if origin not in ("generated", "manual"):
        raise LexiconError(f"imported candidates must be 'generated' or 'manual', not {origin!r}")
    known = {e.term for e in lexicon.entries} if lexicon else set()
    entries, duplicates = [], 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = normalize_term(line)
            if not term or term.startswith("#"):
                continue
            if term in known:
                duplicates += 1
                continue
            known.add(term)
            entries.append(LexiconEntry(term, origin, "active"))
    return entries, duplicates


@dataclass(frozen=True)
class PruneDecision:
    """Keep/remove calls by two annotators plus an adjudicated call for disagreements."""
    first: str
    second: str
    final: str | None = None

    def __post_init__(self):
        for v in (self.first, self.second, self.final):
            if v is not None and v not in ("keep", "remove"):
                raise LexiconError(f"decision must be 'keep' or 'remove', got {v!r}")

    @property
    def agreed(self) -> bool:
        return self.first == self.second

    def outcome(self, term: str) -> str:
        if self.agreed:
            return self.final or self.first
        if self.final is None:
            raise LexiconError(f"annotators disagree on {term!r} and no adjudicated decision was given")
        return self.final


def apply_prune_decisions(lexicon: Lexicon, decisions: Mapping[str, PruneDecision]) -> tuple[Lexicon, float]:
    """Mark removed terms ``pruned``; returns the new lexicon and raw annotator agreement."""
    unknown = [t for t in decisions if t not in lexicon]
    if unknown:
        raise LexiconError(f"decisions refer to unknown term(s): {', '.join(sorted(unknown))}")
    entries = []
    for e in lexicon.entries:
        d = decisions.get(e.term)
        if d is not None and d.outcome(e.term) == "remove":
            e = dataclasses.replace(e, status="pruned")
        entries.append(e)
    agreement = sum(d.agreed for d in decisions.values()) / len(decisions) if decisions else 1.0
    return dataclasses.replace(lexicon, entries=tuple(entries)), agreement


def read_prune_decisions(path: str | Path) -> dict[str, PruneDecision]:
    """TSV ``term<TAB>first<TAB>second[<TAB>final]``; a header line starting with 'term' is skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            cols = line.rstrip("\n").split("\t")
            if not cols[0] or cols[0].startswith("#") or (lineno == 1 and cols[0] == "term"):
                continue
            if len(cols) < 3:
                raise LexiconError(f"{path}:{lineno}: expected term, first, second[, final]")
            final = cols[3] if len(cols) > 3 and cols[3] else None
            out[normalize_term(cols[0])] = PruneDecision(cols[1], cols[2], final)
    return out


def remove_noise_terms(lexicon: Lexicon, terms: Iterable[str]) -> Lexicon:
    targets = {normalize_term(t) for t in terms}
    present = {e.term for e in lexicon.entries}
    for missing in sorted(targets - present):
        warnings.warn(f"noise term {missing!r} not in {lexicon.feature} lexicon", stacklevel=2)
    entries = tuple(
        dataclasses.replace(e, status="noise_removed") if e.term in targets else e
        for e in lexicon.entries
    )
    return dataclasses.replace(lexicon, entries=entries)


def compile_lexicon(lexicon: Lexicon) -> CompiledMatcher:
    terms = lexicon.active_terms
    if not terms:
        raise LexiconError(f"{lexicon.feature} lexicon has no active entries to compile")
    return CompiledMatcher(terms)

