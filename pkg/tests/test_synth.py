import pytest

from care_sd import corpus, synth
from care_sd.features import tokenize


def test_generation_is_deterministic_and_mimic_shaped(tmp_path):
    spec = synth.SyntheticCorpusSpec(n_notes=40, seed=3)
    synth.write_notes_csv(synth.generate_notes(spec), tmp_path / "a.csv")
    synth.write_notes_csv(synth.generate_notes(spec), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    with open(tmp_path / "a.csv", encoding="utf-8", newline="") as fh:
        notes = list(corpus.parse_notes(fh))
    assert len(notes) == 40


def test_planted_rate_and_label_rule():
    spec = synth.SyntheticCorpusSpec(planted_rates={"stigmatizing_labels": 1.0, "doubt_markers": 0.0,
                                                    "scare_quotes": 0.0})
    sents = synth.generate_sentences(4000, spec, seed=1)
    labels = [synth.planted_label(s.sentence_id, s.text, "stigmatizing_labels", spec) for s in sents]
    assert abs(sum(labels) / len(labels) - 0.439) < 0.03
    for s, lab in zip(sents, labels):
        assert lab == ("repeatedly" in tokenize(s.text))


def test_p_signal_thins_positives_deterministically():
    spec = synth.SyntheticCorpusSpec(p_signal=0.5)
    text = "Pt repeatedly refuses."
    got = [synth.planted_label(f"s{i}", text, "stigmatizing_labels", spec) for i in range(2000)]
    assert 0.45 < sum(got) / 2000 < 0.55
    assert got == [synth.planted_label(f"s{i}", text, "stigmatizing_labels", spec) for i in range(2000)]


def test_spec_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        synth.SyntheticCorpusSpec(p_signal=1.5)
    with pytest.raises(ValueError):
        synth.SyntheticCorpusSpec(planted_rates={"doubt_markers": -0.1})
    spec = synth.SyntheticCorpusSpec(n_notes=7)
    (tmp_path / "s.json").write_text(spec.to_json())
    assert synth.SyntheticCorpusSpec.load(tmp_path / "s.json") == spec


def test_planted_sentences_survive_segmentation():
    spec = synth.SyntheticCorpusSpec(n_notes=30, seed=5)
    rows = synth.generate_notes(spec)
    notes = [corpus.ClinicalNote(r["ROW_ID"], r["SUBJECT_ID"], r["CATEGORY"], r["TEXT"]) for r in rows]
    for n in notes:
        for s in corpus.split_sentences(n):
            assert s.text.endswith(".") and s.text[0].isupper()
