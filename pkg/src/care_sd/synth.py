"""Synthetic note corpora with planted lexicon terms and a known labelling rule.

Every planted sentence carries a lexicon term (or a quoted patient phrase);
a fraction of them additionally carry the feature's marker token, and the
labelling rule says: positive iff the marker is present (kept with
probability ``p_signal``).  That gives the pipeline a ground truth the
private annotations cannot.
"""

from __future__ import annotations

import csv
import json
import random
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Sentence
from .features import tokenize
from .lexicon import shipped_lexicon

FEATURE_KEYS = ("stigmatizing_labels", "doubt_markers", "scare_quotes")

SUBJECTS = ["Pt", "Patient", "He", "She", "Pt remains", "Patient is"]
OPENERS = ["Neuro:", "Resp:", "CV:", "GI:", "Social:", "Plan:", "Assessment:", "Overnight,"]
FILLER = (
    "alert oriented resting comfortably vitals stable afebrile tolerating diet ambulating with assist "
    "lungs clear bilaterally abdomen soft nontender bowel sounds present skin intact pain controlled "
    "family at bedside plan to continue current regimen monitor closely will follow up labs pending "
    "heart rate regular blood pressure within normal limits oxygen saturation adequate on room air "
    "urine output adequate foley in place iv site clean dry intact dressing changed wound healing well "
    "sleeping intermittently overnight denies nausea tolerating po fluids cough productive of sputum "
    "physical therapy consulted social work aware discharge planning ongoing morning labs drawn"
).split()
QUOTE_PHRASES = [
    "you have already asked me this 100 times", "pain pill", "fears", "worst pain ever", "allergic",
    "i need something stronger", "chest pain worse", "nobody listens", "ten out of ten", "i feel fine",
    "just leave me alone", "sick of this place", "bad nerves", "cannot breathe right",
]
NEGATIVE_SCARE = ["Patient Name", "Hospital", "Year", "yes", "no"]
CATEGORIES = [("Nursing", 0.45), ("Physician ", 0.2), ("Discharge summary", 0.1), ("Nursing/other", 0.1),
              ("Radiology", 0.08), ("ECG", 0.04), ("EEG", 0.03)]


@dataclass
class SyntheticCorpusSpec:
    n_notes: int = 500
    sentences_per_note: tuple[int, int] = (5, 15)
    planted_rates: dict[str, float] = field(default_factory=lambda: {
        "stigmatizing_labels": 0.10, "doubt_markers": 0.05, "scare_quotes": 0.05})
    positive_rates: dict[str, float] = field(default_factory=lambda: {
        "stigmatizing_labels": 0.439, "doubt_markers": 0.310, "scare_quotes": 0.207})
    marker_tokens: dict[str, str] = field(default_factory=lambda: {
        "stigmatizing_labels": "repeatedly", "doubt_markers": "reportedly", "scare_quotes": "sarcastically"})
    # planted negatives get a neutral context token; it never affects the label
    context_tokens: dict[str, str] = field(default_factory=lambda: {
        "stigmatizing_labels": "documented", "doubt_markers": "per", "scare_quotes": "verbatim"})
    p_signal: float = 1.0
    n_patients: int = 120
    n_providers: int = 40
    seed: int = 0

    def __post_init__(self):
        self.sentences_per_note = tuple(self.sentences_per_note)
        for name, rates in (("planted_rates", self.planted_rates), ("positive_rates", self.positive_rates)):
            for k, v in rates.items():
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"{name}[{k}] = {v} is outside [0, 1]")
        if not 0.0 <= self.p_signal <= 1.0:
            raise ValueError("p_signal must be in [0, 1]")
        if sum(self.planted_rates.values()) > 1.0:
            raise ValueError("planted rates must sum to at most 1")

    @classmethod
    def load(cls, path: str | Path) -> "SyntheticCorpusSpec":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


class SentenceFactory:
    def __init__(self, spec: SyntheticCorpusSpec, rng: random.Random):
        self.spec, self.rng = spec, rng
        self.terms = {f: shipped_lexicon(f).active_terms for f in ("stigmatizing_labels", "doubt_markers")}

    def _filler(self, lo: int = 4, hi: int = 10) -> str:
        return " ".join(self.rng.choices(FILLER, k=self.rng.randint(lo, hi)))

    def _plain(self) -> str:
        r = self.rng
        body = f"{r.choice(SUBJECTS)} {self._filler()}"
        if r.random() < 0.5:
            body += f" HR {r.randint(55, 130)}"
        if r.random() < 0.3:
            body = f"{r.choice(OPENERS)} {body[0].lower()}{body[1:]}"
        return body + "."

    def planted(self, feature: str, positive: bool) -> str:
        r = self.rng
        tokens = self.spec.marker_tokens if positive else self.spec.context_tokens
        marker = tokens.get(feature)
        if feature == "scare_quotes":
            phrase = r.choice(QUOTE_PHRASES)
            parts = [r.choice(["Pt", "Patient", "He", "She"]), "states", f'"{phrase}"', self._filler(2, 6)]
        else:
            term = r.choice(self.terms[feature])
            parts = [r.choice(SUBJECTS), self._filler(1, 4), term, self._filler(2, 6)]
        if marker:
            parts.insert(r.randint(1, len(parts)), marker)
        if r.random() < 0.5:
            parts.append(f"at {r.randint(1, 12)}{r.choice(['am', 'pm'])}")
        return " ".join(parts) + "."

    def decoy_quote(self) -> str:
        return f'Pt oriented, states "{self.rng.choice(NEGATIVE_SCARE)}" correctly {self._filler(2, 4)}.'

    def sentence(self) -> str:
        r = self.rng
        u = r.random()
        acc = 0.0
        for feature in FEATURE_KEYS:
            acc += self.spec.planted_rates.get(feature, 0.0)
            if u < acc:
                return self.planted(feature, r.random() < self.spec.positive_rates.get(feature, 0.0))
        if r.random() < 0.01:
            return self.decoy_quote()
        return self._plain()


def generate_notes(spec: SyntheticCorpusSpec) -> list[dict[str, str]]:
    rng = random.Random(spec.seed)
    factory = SentenceFactory(spec, rng)
    cats, weights = zip(*CATEGORIES)
    rows = []
    for i in range(spec.n_notes):
        lo, hi = spec.sentences_per_note
        sents = [factory.sentence() for _ in range(rng.randint(lo, hi))]
        text = ""
        for j, s in enumerate(sents):
            sep = "" if j == 0 else ("\n\n" if rng.random() < 0.1 else " ")
            text += sep + s
        rows.append({
            "ROW_ID": str(100000 + i),
            "SUBJECT_ID": str(rng.randrange(spec.n_patients)),
            "HADM_ID": str(200000 + rng.randrange(spec.n_patients * 2)),
            "CATEGORY": rng.choices(cats, weights)[0],
            "DESCRIPTION": "Report",
            "CGID": str(15000 + rng.randrange(spec.n_providers)),
            "TEXT": text,
        })
    return rows


def write_notes_csv(rows: list[dict[str, str]], path: str | Path) -> None:
    fields = ["ROW_ID", "SUBJECT_ID", "HADM_ID", "CATEGORY", "DESCRIPTION", "CGID", "TEXT"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def generate_sentences(n: int, spec: SyntheticCorpusSpec | None = None, seed: int = 0) -> list[Sentence]:
    """Bare sentences (no notes) for throughput work."""
    spec = spec or SyntheticCorpusSpec(seed=seed)
    rng = random.Random(seed)
    factory = SentenceFactory(spec, rng)
    out = []
    for i in range(n):
        text = factory.sentence()
        out.append(Sentence(f"s{i}:0", f"s{i}", 0, text, 0))
    return out


def planted_label(sentence_id: str, text: str, feature: str, spec: SyntheticCorpusSpec) -> int:
    """Positive iff the feature's marker token is present, kept with probability p_signal."""
    if spec.marker_tokens[feature] not in tokenize(text):
        return 0
    if spec.p_signal >= 1.0:
        return 1
    u = random.Random(zlib.crc32(f"{spec.seed}:{feature}:{sentence_id}".encode())).random()
    return int(u < spec.p_signal)


def autolabel(items: Iterable[tuple[str, str]], feature: str, spec: SyntheticCorpusSpec) -> dict[str, int]:
    return {sid: planted_label(sid, text, feature, spec) for sid, text in items}
