"""Annotation batches, annotation CSV round trips, Cohen's kappa and adjudication."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

BATCH_KINDS = ("reliability_100", "solo_400", "solo_500")
DEFAULT_SIZES = (100, 400, 500)
CSV_HEADER = ["sentence_id", "text", "label", "close_call", "exemplary", "note"]
_TRUE = {"1", "true", "yes", "y", "x"}
_FALSE = {"", "0", "false", "no", "n"}


class AnnotationError(ValueError):
    """Raised with one message line per problem found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


@dataclass
class AnnotationBatch:
    feature: str
    batch_kind: str
    sentence_ids: list[str]
    seed: int

    def to_dict(self) -> dict:
        return {"feature": self.feature, "batch_kind": self.batch_kind, "seed": self.seed,
                "sentence_ids": list(self.sentence_ids)}

    @classmethod
    def from_dict(cls, obj: dict) -> "AnnotationBatch":
        return cls(obj["feature"], obj["batch_kind"], list(obj["sentence_ids"]), int(obj["seed"]))


@dataclass
class AnnotationLabel:
    sentence_id: str
    annotator_id: str
    label: int
    close_call: bool = False
    exemplary: bool = False
    note: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class AgreementReport:
    n: int
    percent_agreement: float
    kappa: float
    po: float
    pe: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


@dataclass
class LabeledDataset:
    feature: str
    items: list[tuple[str, str, int]]
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.items:
            raise ValueError("a labelled dataset needs at least one item")

    @property
    def positive_fraction(self) -> float:
        return sum(lab for _, _, lab in self.items) / len(self.items)

    @property
    def labels(self) -> np.ndarray:
        return np.array([lab for _, _, lab in self.items], dtype=np.int64)

    @property
    def texts(self) -> list[str]:
        return [t for _, t, _ in self.items]

    def to_tsv(self) -> str:
        lines = ["sentence_id\tlabel\ttext"]
        lines += [f"{sid}\t{lab}\t{text}" for sid, text, lab in self.items]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, feature: str = "") -> "LabeledDataset":
        items = []
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header != ["sentence_id", "label", "text"]:
                raise ValueError(f"{path}: expected header sentence_id/label/text, got {header}")
            for lineno, line in enumerate(fh, 2):
                parts = line.rstrip("\n").split("\t", 2)
                if len(parts) != 3 or parts[1] not in ("0", "1"):
                    raise ValueError(f"{path}:{lineno}: malformed dataset row")
                items.append((parts[0], parts[2], int(parts[1])))
        return cls(feature, items)


# -- sampling -----------------------------------------------------------------

def _kind_for(position: int, size: int) -> str:
    if position < len(BATCH_KINDS) and BATCH_KINDS[position].endswith(f"_{size}"):
        return BATCH_KINDS[position]
    return f"batch_{position}_{size}"


def sample_batches(sentence_ids: Sequence[str], sizes: Sequence[int] = DEFAULT_SIZES, seed: int = 0,
                   feature: str = "") -> list[AnnotationBatch]:
    """Draw disjoint batches uniformly without replacement.

    One permutation of the pool is sliced in order, so every batch is a
    uniform sample and the batches never overlap.
    """
    ids = list(dict.fromkeys(sentence_ids))
    if len(ids) != len(sentence_ids):
        raise ValueError("duplicate sentence ids in the sampling pool")
    if any(s < 0 for s in sizes):
        raise ValueError("batch sizes must be non-negative")
    need = sum(sizes)
    if need > len(ids):
        raise ValueError(f"need {need} sentences for batches {list(sizes)} but only {len(ids)} are available")
    order = np.random.default_rng(seed).permutation(len(ids))
    batches, pos = [], 0
    for i, size in enumerate(sizes):
        chosen = [ids[j] for j in order[pos:pos + size]]
        batches.append(AnnotationBatch(feature, _kind_for(i, size), chosen, seed))
        pos += size
    return batches


def save_batches(batches: Sequence[AnnotationBatch], path: str | Path) -> None:
    Path(path).write_text(json.dumps([b.to_dict() for b in batches], indent=2) + "\n", encoding="utf-8")


def load_batches(path: str | Path) -> list[AnnotationBatch]:
    return [AnnotationBatch.from_dict(o) for o in json.loads(Path(path).read_text(encoding="utf-8"))]


# -- CSV round trip -------------------------------------------------------------

def _flag(v: bool) -> str:
    return "1" if v else ""


def export_annotation_csv(sentence_ids: Sequence[str], texts: Mapping[str, str], path: str | Path,
                          labels: Iterable[AnnotationLabel] = ()) -> None:
    """Write an annotation sheet; label columns are blank unless ``labels`` fills them."""
    missing = [sid for sid in sentence_ids if sid not in texts]
    if missing:
        raise AnnotationError([f"unknown sentence_id {sid!r}" for sid in missing])
    by_id = {lab.sentence_id: lab for lab in labels}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for sid in sentence_ids:
            lab = by_id.get(sid)
            if lab is None:
                w.writerow([sid, texts[sid], "", "", "", ""])
            else:
                w.writerow([sid, texts[sid], lab.label, _flag(lab.close_call), _flag(lab.exemplary), lab.note])


def _parse_flag(raw: str) -> bool | None:
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    return None


def import_annotation_csv(path: str | Path, annotator_id: str,
                          known_ids: Iterable[str] | None = None) -> list[AnnotationLabel]:
    """Read a filled sheet.  All problems are collected and raised together."""
    known = set(known_ids) if known_ids is not None else None
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise AnnotationError([f"{path}: header must be {','.join(CSV_HEADER)}, got {header}"])
    problems, out, seen = [], [], set()
    for row in reader:
        where = f"{path}:{reader.line_num}"
        if len(row) != len(CSV_HEADER):
            problems.append(f"{where}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            continue
        sid, _text, label, close_call, exemplary, note = row
        if known is not None and sid not in known:
            problems.append(f"{where}: unknown sentence_id {sid!r}")
        if (sid, annotator_id) in seen:
            problems.append(f"{where}: duplicate label for {sid!r} by {annotator_id!r}")
        seen.add((sid, annotator_id))
        if label.strip() not in ("0", "1"):
            problems.append(f"{where}: label must be 0 or 1, got {label!r}")
            continue
        cc, ex = _parse_flag(close_call), _parse_flag(exemplary)
        if cc is None or ex is None:
            problems.append(f"{where}: close_call/exemplary must be blank, 0 or 1")
            continue
        out.append(AnnotationLabel(sid, annotator_id, int(label), cc, ex, note))
    if problems:
        raise AnnotationError(problems)
    return out


# -- agreement ----------------------------------------------------------------

def _as_map(labels) -> dict[str, int]:
    if isinstance(labels, Mapping):
        return dict(labels)
    labels = list(labels)
    if all(isinstance(v, (int, np.integer)) for v in labels):
        return {str(i): int(v) for i, v in enumerate(labels)}
    return {lab.sentence_id: lab.label for lab in labels}


def _check_same_ids(a: dict, b: dict) -> list[str]:
    if a.keys() != b.keys():
        diff = sorted(a.keys() ^ b.keys())
        raise ValueError(f"annotators labelled different sentences; symmetric difference: {diff}")
    return sorted(a)


def agreement(labels_a, labels_b) -> AgreementReport:
    """Percent agreement and Cohen's kappa for two annotators over the same ids.

    Accepts AnnotationLabel lists, ``{sentence_id: label}`` maps, or plain
    0/1 vectors paired by position.  When chance
    agreement is 1 (both annotators constant and identical) kappa is 1.0.
    """
    a, b = _as_map(labels_a), _as_map(labels_b)
    ids = _check_same_ids(a, b)
    n = len(ids)
    if n == 0:
        raise ValueError("agreement needs at least one paired label")
    va = np.array([a[i] for i in ids])
    vb = np.array([b[i] for i in ids])
    po = float(np.mean(va == vb))
    pa1, pb1 = float(va.mean()), float(vb.mean())
    pe = pa1 * pb1 + (1 - pa1) * (1 - pb1)
    if pe == 1.0:
        warnings.warn("both annotators used a single identical label; kappa set to 1.0", stacklevel=2)
        kappa = 1.0
    else:
        kappa = (po - pe) / (1 - pe)
    return AgreementReport(n, po, kappa, po, pe)


def adjudicate(labels_a, labels_b, resolutions: Mapping[str, int]) -> dict[str, int]:
    a, b = _as_map(labels_a), _as_map(labels_b)
    ids = _check_same_ids(a, b)
    disagreements = {i for i in ids if a[i] != b[i]}
    missing = sorted(disagreements - resolutions.keys())
    extra = sorted(resolutions.keys() - disagreements)
    problems = [f"no resolution for disagreement {i!r}" for i in missing]
    problems += [f"resolution given for {i!r}, which is not a disagreement" for i in extra]
    problems += [f"resolution for {i!r} must be 0 or 1" for i, v in sorted(resolutions.items()) if v not in (0, 1)]
    if problems:
        raise AnnotationError(problems)
    return {i: (resolutions[i] if i in disagreements else a[i]) for i in ids}


def read_resolutions(path: str | Path) -> dict[str, int]:
    """TSV ``sentence_id<TAB>label``; a header line is optional."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or (lineno == 1 and line.startswith("sentence_id")):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1].strip() not in ("0", "1"):
            raise AnnotationError([f"{path}:{lineno}: expected sentence_id<TAB>0|1"])
        out[parts[0]] = int(parts[1])
    return out


def assemble_dataset(feature: str, label_sets: Sequence[Mapping[str, int]], texts: Mapping[str, str],
                     names: Sequence[str] | None = None) -> LabeledDataset:
    """Concatenate final label sets in order; an id may appear in only one set."""
    names = list(names) if names is not None else [f"set{i}" for i in range(len(label_sets))]
    items, provenance, problems = [], {}, []
    for name, labels in zip(names, label_sets):
        for sid, lab in labels.items():
            if sid in provenance:
                problems.append(f"sentence {sid!r} appears in both {provenance[sid]} and {name}")
                continue
            if sid not in texts:
                problems.append(f"sentence {sid!r} has no text")
                continue
            if lab not in (0, 1):
                problems.append(f"sentence {sid!r} has label {lab!r}")
                continue
            provenance[sid] = name
            items.append((sid, texts[sid], int(lab)))
    if problems:
        raise AnnotationError(problems)
    return LabeledDataset(feature, items, provenance)
