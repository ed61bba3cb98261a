"""Scan sentences for the three bias features and build frequency reports."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Sentence
from .features import ngrams, tokenize
from .matcher import CompiledMatcher

SCARE_QUOTES = "scare_quotes"
ALL_FEATURES = ("doubt_markers", "stigmatizing_labels", SCARE_QUOTES)
DEFAULT_PATIENT_TOKENS = ("pt", "patient", "pateint", "he", "she", "they")

_TYPOGRAPHIC = str.maketrans({"“": '"', "”": '"', "„": '"', "‟": '"'})


@dataclass
class MatchRecord:
    sentence_id: str
    feature: str
    text: str
    matched_terms: list[tuple[str, tuple[int, int]]] = field(default_factory=list)
    quoted_spans: list[tuple[int, int]] = field(default_factory=list)
    patient_ref: str | None = None

    @property
    def quotes(self) -> list[str]:
        return [self.text[a:b] for a, b in self.quoted_spans]


@dataclass
class ScanDiagnostics:
    sentences: int = 0
    unbalanced_quotes: int = 0
    all_spans_filtered: int = 0
    no_patient_token: int = 0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def scan_lexicon(sentences: Iterable[Sentence], matcher: CompiledMatcher, feature: str) -> list[MatchRecord]:
    records = []
    contains = matcher.contains
    for s in sentences:
        if not contains(s.text):
            continue
        hits = matcher.finditer(s.text)
        records.append(MatchRecord(s.sentence_id, feature, s.text, [(h.term, (h.start, h.end)) for h in hits]))
    return records


def load_placeholders(path: str | Path | None = None) -> list[str]:
    if path is None:
        text = (resources.files("care_sd") / "data" / "placeholders.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(" ".join(line.split()).lower())
    return out


class ScareQuoteDetector:
    """Sentences with a closed double-quote pair and a patient reference.

    Quote characters are paired left to right; an odd count leaves the
    sentence unpaired and it is skipped.  A quoted span is dropped when its
    content equals or contains a placeholder phrase (case-insensitive, at word
    boundaries), and a sentence qualifies only if some span survives.
    """

    def __init__(self, patient_tokens: Sequence[str] = DEFAULT_PATIENT_TOKENS,
                 placeholders: Sequence[str] | None = None, *,
                 normalize_typographic: bool = True, patient_before_quote: bool = False):
        self.patient_tokens = tuple(t.lower() for t in patient_tokens)
        self.placeholders = tuple(load_placeholders() if placeholders is None else placeholders)
        self.normalize_typographic = normalize_typographic
        self.patient_before_quote = patient_before_quote
        self._patient = CompiledMatcher(self.patient_tokens)
        self._placeholder = CompiledMatcher(self.placeholders) if self.placeholders else None
        self.diagnostics = ScanDiagnostics()

    def _pairs(self, text: str) -> list[tuple[int, int]] | None:
        positions = [i for i, ch in enumerate(text) if ch == '"']
        if len(positions) % 2:
            return None
        return [(positions[i] + 1, positions[i + 1]) for i in range(0, len(positions), 2)]

    def _filtered(self, content: str) -> bool:
        return self._placeholder is not None and self._placeholder.search(content) is not None

    def detect_one(self, sentence: Sentence) -> MatchRecord | None:
        text = sentence.text
        if self.normalize_typographic and not text.isascii():
            text = text.translate(_TYPOGRAPHIC)
        if '"' not in text:
            return None
        pairs = self._pairs(text)
        if pairs is None:
            self.diagnostics.unbalanced_quotes += 1
            return None
        spans = [(a, b) for a, b in pairs if text[a:b].strip()]
        if not spans:
            return None
        patient = self._patient.search(text)
        if patient is None or (self.patient_before_quote and patient.start() > spans[0][0]):
            self.diagnostics.no_patient_token += 1
            return None
        kept = [(a, b) for a, b in spans if not self._filtered(text[a:b])]
        if not kept:
            self.diagnostics.all_spans_filtered += 1
            return None
        return MatchRecord(sentence.sentence_id, SCARE_QUOTES, text, quoted_spans=kept,
                           patient_ref=patient.group().lower())

    def scan(self, sentences: Iterable[Sentence]) -> list[MatchRecord]:
        out = []
        for s in sentences:
            self.diagnostics.sentences += 1
            rec = self.detect_one(s)
            if rec is not None:
                out.append(rec)
        return out


def detect_scare_quote_candidates(sentences: Iterable[Sentence],
                                  patient_tokens: Sequence[str] = DEFAULT_PATIENT_TOKENS,
                                  placeholder_filters: Sequence[str] | None = None,
                                  **options) -> tuple[list[MatchRecord], ScanDiagnostics]:
    detector = ScareQuoteDetector(patient_tokens, placeholder_filters, **options)
    records = detector.scan(sentences)
    return records, detector.diagnostics


# -- reports ------------------------------------------------------------------

@dataclass
class TermFrequencyReport:
    feature: str
    rows: list[tuple[str, int]]
    n: int
    label: str = "term"

    def to_tsv(self) -> str:
        lines = [f"rank\t{self.label}\tcount"]
        lines += [f"{i}\t{item}\t{count}" for i, (item, count) in enumerate(self.rows, 1)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"feature": self.feature, "kind": self.label, "n": self.n,
                "rows": [{"item": item, "count": c} for item, c in self.rows]}


def _ranked(counts: Counter, n: int) -> list[tuple[str, int]]:
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max(n, 0)]


def top_terms(records: Iterable[MatchRecord], n: int = 20) -> TermFrequencyReport:
    """Per-match counts of lexicon terms."""
    counts: Counter[str] = Counter()
    feature = None
    for r in records:
        if feature is None:
            feature = r.feature
        elif r.feature != feature:
            raise ValueError(f"mixed features in records: {feature} and {r.feature}")
        counts.update(term for term, _ in r.matched_terms)
    return TermFrequencyReport(feature or "", _ranked(counts, n), n)


def quoted_ngrams(records: Iterable[MatchRecord], max_n: int = 3, top: int = 20) -> dict[int, TermFrequencyReport]:
    if not 1 <= max_n <= 3:
        raise ValueError("max_n must be 1, 2 or 3")
    counts = {n: Counter() for n in range(1, max_n + 1)}
    for r in records:
        for quote in r.quotes:
            toks = tokenize(quote)
            for n in counts:
                counts[n].update(ngrams(toks, n, n))
    return {n: TermFrequencyReport(SCARE_QUOTES, _ranked(c, top), top, label=f"{n}-gram") for n, c in counts.items()}


# -- match files ----------------------------------------------------------------

def write_matches(records: Iterable[MatchRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sentence_id\tfeature\tterms\tspans\n")
        for r in records:
            if r.feature == SCARE_QUOTES:
                terms, spans = r.patient_ref or "", r.quoted_spans
            else:
                terms = ";".join(t for t, _ in r.matched_terms)
                spans = [sp for _, sp in r.matched_terms]
            fh.write(f"{r.sentence_id}\t{r.feature}\t{terms}\t{';'.join(f'{a}-{b}' for a, b in spans)}\n")


def read_matches(path: str | Path, texts: Mapping[str, str]) -> list[MatchRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["sentence_id", "feature", "terms", "spans"]:
            raise ValueError(f"{path}: not a match table (header {header})")
        for lineno, line in enumerate(fh, 2):
            sid, feature, terms, spans = line.rstrip("\n").split("\t")
            if sid not in texts:
                raise ValueError(f"{path}:{lineno}: sentence {sid!r} not in the sentence table")
            parsed = [tuple(int(x) for x in sp.split("-")) for sp in spans.split(";") if sp]
            if feature == SCARE_QUOTES:
                out.append(MatchRecord(sid, feature, texts[sid], quoted_spans=parsed, patient_ref=terms or None))
            else:
                out.append(MatchRecord(sid, feature, texts[sid], list(zip(terms.split(";"), parsed))))
    return out

