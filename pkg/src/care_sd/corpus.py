"""Note ingestion, category filtering, sentence segmentation and corpus statistics."""

from __future__ import annotations

import csv
import json
import logging
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .features import tokenize

log = logging.getLogger(__name__)

DEFAULT_COLUMNS = {
    "note_id": "ROW_ID",
    "subject_id": "SUBJECT_ID",
    "hadm_id": "HADM_ID",
    "category": "CATEGORY",
    "description": "DESCRIPTION",
    "provider_id": "CGID",
    "text": "TEXT",
}
REQUIRED_FIELDS = ("note_id", "subject_id", "category", "text")
DEFAULT_EXCLUDED = frozenset({"EEG", "Radiology"})

# Notes routinely exceed the csv module's 128 KiB default field limit.
csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


class SchemaError(ValueError):
    """A mapped column is absent from the CSV header."""


@dataclass(frozen=True)
class ClinicalNote:
    note_id: str
    subject_id: str
    category: str
    text: str
    hadm_id: str | None = None
    description: str | None = None
    provider_id: str | None = None


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    note_id: str
    index: int
    text: str
    token_count: int


@dataclass
class CorpusStats:
    n_notes: int
    avg_note_words: float
    n_sentences: int
    avg_sentence_words: float
    n_patients: int
    n_providers: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass
class IngestTally:
    rows: int = 0
    skipped_empty: int = 0
    errors: list[str] = field(default_factory=list)


def load_column_config(path: str | Path) -> dict[str, str]:
    """Read ``field=COLUMN`` lines; unknown logical fields are rejected."""
    mapping = dict(DEFAULT_COLUMNS)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in DEFAULT_COLUMNS:
                raise SchemaError(f"{path}:{lineno}: expected one of {sorted(DEFAULT_COLUMNS)} as key=COLUMN")
            mapping[key] = value.strip()
    return mapping


def parse_notes(source: IO[str], columns: dict[str, str] | None = None,
                tally: IngestTally | None = None) -> Iterator[ClinicalNote]:
    """Yield one note per CSV row.

    Rows with blank text are skipped and counted in ``tally``; rows whose field
    count disagrees with the header are recorded as errors and skipped.
    """
    columns = {**DEFAULT_COLUMNS, **(columns or {})}
    tally = tally if tally is not None else IngestTally()
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        return
    position = {name: i for i, name in enumerate(header)}
    for fld in REQUIRED_FIELDS:
        if columns[fld] not in position:
            raise SchemaError(f"column {columns[fld]!r} (for {fld}) not found in header")
    where = {fld: position.get(col) for fld, col in columns.items()}

    rowno = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            rowno += 1
            tally.errors.append(f"row {rowno}: {exc}")
            continue
        rowno += 1
        if not row:
            continue
        tally.rows += 1
        if len(row) != len(header):
            tally.errors.append(f"row {rowno}: expected {len(header)} fields, got {len(row)}")
            continue
        text = row[where["text"]]
        if not text.strip():
            tally.skipped_empty += 1
            continue

        def opt(fld: str) -> str | None:
            i = where.get(fld)
            return row[i] if i is not None and row[i] != "" else None

        yield ClinicalNote(
            note_id=row[where["note_id"]],
            subject_id=row[where["subject_id"]],
            category=row[where["category"]],
            text=text,
            hadm_id=opt("hadm_id"),
            description=opt("description"),
            provider_id=opt("provider_id"),
        )
    if tally.errors:
        log.warning("%d malformed row(s) skipped", len(tally.errors))


def filter_categories(notes: Iterable[ClinicalNote], excluded: Iterable[str] = DEFAULT_EXCLUDED) -> list[ClinicalNote]:
    drop = {c.strip().casefold() for c in excluded}
    return [n for n in notes if n.category.strip().casefold() not in drop]


# Never sentence-final: titles and short forms that precede more text.
ABBREVIATIONS = frozenset({"dr", "mr", "mrs", "ms", "pt", "vs", "approx", "prof", "st", "jr", "sr", "e.g", "i.e"})
# Dotted time markers only end a sentence before a capitalized word.
TIME_MARKERS = frozenset({"a.m", "p.m"})

_BOUNDARY = re.compile(r"""[.!?]+["')\]]*(?=\s+["'(\[]?[A-Z0-9])""")
_BLANK_LINE = re.compile(r"\n[ \t\r\f\v]*\n\s*")
_WORD_BEFORE = re.compile(r"([A-Za-z]+(?:\.[A-Za-z]+)*)\.$")
_WS = re.compile(r"\s+")


def _is_boundary(block: str, match: re.Match) -> bool:
    if block[match.start()] != ".":
        return True
    before = _WORD_BEFORE.search(block, 0, match.start() + 1)
    if before is None:
        return True
    word = before.group(1).lower()
    if word in ABBREVIATIONS:
        return False
    if word in TIME_MARKERS:
        nxt = block[match.end():].lstrip()
        return nxt[:1].isupper()
    return True


def _split_block(block: str) -> list[str]:
    pieces, start = [], 0
    for m in _BOUNDARY.finditer(block):
        if _is_boundary(block, m):
            pieces.append(block[start:m.end()])
            start = m.end()
    pieces.append(block[start:])
    return pieces


def split_sentences(note: ClinicalNote) -> list[Sentence]:
    """Rule-based segmentation; sentence text has whitespace runs collapsed."""
    texts = []
    for block in _BLANK_LINE.split(note.text):
        for piece in _split_block(block):
            piece = _WS.sub(" ", piece).strip()
            if piece:
                texts.append(piece)
    return [
        Sentence(f"{note.note_id}:{i}", note.note_id, i, t, len(tokenize(t)))
        for i, t in enumerate(texts)
    ]


def dedup_sentences(sentences: Iterable[Sentence]) -> list[Sentence]:
    """Keep the first sentence for each whitespace-normalized, case-sensitive text."""
    seen: set[str] = set()
    out = []
    for s in sentences:
        key = _WS.sub(" ", s.text).strip()
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def corpus_stats(notes: Iterable[ClinicalNote], sentences: Iterable[Sentence]) -> CorpusStats:
    notes = list(notes)
    sentences = list(sentences)
    note_words = sum(len(tokenize(n.text)) for n in notes)
    sent_words = sum(s.token_count for s in sentences)
    return CorpusStats(
        n_notes=len(notes),
        avg_note_words=note_words / len(notes) if notes else 0.0,
        n_sentences=len(sentences),
        avg_sentence_words=sent_words / len(sentences) if sentences else 0.0,
        n_patients=len({n.subject_id for n in notes if n.subject_id}),
        n_providers=len({n.provider_id for n in notes if n.provider_id}),
    )


def segment_corpus(notes: Iterable[ClinicalNote]) -> list[Sentence]:
    """Split every note (in note order) and deduplicate."""
    sentences = [s for n in notes for s in split_sentences(n)]
    return dedup_sentences(sentences)


def write_sentences(sentences: Iterable[Sentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sentence_id\tnote_id\tindex\ttext\n")
        for s in sentences:
            fh.write(f"{s.sentence_id}\t{s.note_id}\t{s.index}\t{s.text}\n")


def read_sentences(path: str | Path) -> list[Sentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[:4] != ["sentence_id", "note_id", "index", "text"]:
            raise SchemaError(f"{path}: not a sentence table (header {header})")
        for line in fh:
            sid, nid, idx, text = line.rstrip("\n").split("\t", 3)
            out.append(Sentence(sid, nid, int(idx), text, len(tokenize(text))))
    return out
