import json
import shutil

import numpy as np

from care_sd import annotate, corpus, features
from care_sd.cli import main
from conftest import FIXTURES, cli, run_pipeline


def _example_sentences(path):
    rows = [line.split("\t") for line in (FIXTURES / "annotated_examples.tsv").read_text(encoding="utf-8").splitlines()[1:]]
    corpus.write_sentences([corpus.Sentence(r[0], r[0].split(":")[0], 0, r[3], 0) for r in rows], path)


def test_scan_flags_annotated_doubt_example(tmp_path):
    _example_sentences(tmp_path / "s.tsv")
    lex = tmp_path / "doubt.lex"
    from care_sd.lexicon import shipped_lexicon_path
    shutil.copy(shipped_lexicon_path("doubt_markers"), lex)
    cli("scan", "--feature", "doubt_markers", "--in", tmp_path / "s.tsv", "--lexicon", lex, "--out", tmp_path / "m.tsv")
    lines = (tmp_path / "m.tsv").read_text().splitlines()
    assert any(line.startswith("ex:doubt2\tdoubt_markers\tsupposedly\t") for line in lines)


def test_exit_codes(tmp_path, caplog):
    assert main(["scan", "--bogus"]) == 1
    assert main(["scan", "--feature", "doubt_markers"]) == 1
    assert "missing required option(s): --in, --out" in caplog.text
    assert main(["scan", "--feature", "nope", "--in", "x", "--out", "y"]) == 1
    assert main(["ingest", "--notes", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.tsv")]) == 1
    (tmp_path / "bad.csv").write_text("A,B\n1,2\n")
    assert main(["ingest", "--notes", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o.tsv")]) == 1
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    _example_sentences(tmp_path / "s.tsv")
    assert main(["scan", "--feature", "doubt_markers", "--in", str(tmp_path / "s.tsv"),
                 "--out", str(blocker / "m.tsv")]) == 2
    assert main([]) == 1


def test_config_file_and_flag_precedence(tmp_path):
    _example_sentences(tmp_path / "s.tsv")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# pipeline settings\nfeature=stigmatizing_labels\nin={tmp_path / 's.tsv'}\nout={tmp_path / 'cfg.tsv'}\n")
    cli("--config", cfg, "scan")
    assert "ex:stig1" in (tmp_path / "cfg.tsv").read_text()
    cli("--config", cfg, "scan", "--feature", "doubt_markers")
    assert "ex:doubt1" in (tmp_path / "cfg.tsv").read_text()
    (tmp_path / "bad.cfg").write_text("not_an_option=1\n")
    assert main(["--config", str(tmp_path / "bad.cfg"), "scan"]) == 1


def test_synth_twice_is_byte_identical(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps({"n_notes": 30, "seed": 4}))
    cli("synth", "--spec", tmp_path / "spec.json", "--out", tmp_path / "a.csv")
    cli("synth", "--spec", tmp_path / "spec.json", "--out", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_lexicon_subcommands(tmp_path):
    from care_sd.lexicon import load_lexicon, shipped_lexicon_path
    src = shipped_lexicon_path("doubt_markers")
    (tmp_path / "emb.txt").write_text("4 2\nclaimed 1 0\navowed 0.99 0.1\nstable 0 1\ninsists 0.5 0.5\n")
    cli("lexicon", "expand", "--lexicon", src, "--embeddings", tmp_path / "emb.txt", "--stems", "claimed",
        "--k", 1, "--edges", tmp_path / "edges.tsv", "--out", tmp_path / "x.lex")
    lex = load_lexicon(tmp_path / "x.lex")
    assert lex.get("avowed").origin == "embedding" and lex.get("avowed").source_stem == "claimed"
    (tmp_path / "dec.tsv").write_text("term\tfirst\tsecond\tfinal\navowed\tremove\tremove\t\n")
    cli("lexicon", "prune", "--lexicon", tmp_path / "x.lex", "--decisions", tmp_path / "dec.tsv", "--out", tmp_path / "y.lex")
    assert load_lexicon(tmp_path / "y.lex").get("avowed").status == "pruned"
    (tmp_path / "cands.txt").write_text("Reportedly\nclaimed\n")
    cli("lexicon", "import", "--lexicon", tmp_path / "y.lex", "--candidates", tmp_path / "cands.txt", "--out", tmp_path / "z.lex")
    assert load_lexicon(tmp_path / "z.lex").get("reportedly").origin == "generated"
    cli("lexicon", "noise", "--lexicon", tmp_path / "z.lex", "--out", tmp_path / "n.lex")
    cli("lexicon", "compile", "--lexicon", tmp_path / "n.lex", "--out", tmp_path / "c.json")
    summary = json.loads((tmp_path / "c.json").read_text())
    assert "reportedly" in summary["active_terms"] and summary["counts"]["noise_removed"] == 8


def test_full_pipeline_outputs_parse(tmp_path):
    out = run_pipeline(tmp_path / "run")
    ev = json.loads(out["evaluation"].read_text())
    assert set(ev["models"]) == {"nb", "logreg", "rf"}
    assert ev["models"]["logreg"]["metrics"]["f1_macro"]["point"] >= 0.95
    table = (out["report"] / "metrics.tsv").read_text().splitlines()
    assert len(table) == 4
    assert (out["report"] / "importance_stigmatizing_labels_rf.tsv").exists()
    agree = json.loads((out["work"] / "agreement.json").read_text())
    assert agree["n"] == 100 and agree["percent_agreement"] < 1.0
    cv = (out["models"] / "cv_table.tsv").read_text().splitlines()
    assert cv[0] == "model\tparams\tfold\tf1_macro"


def test_vocabulary_is_built_from_training_texts_only(tmp_path):
    out = run_pipeline(tmp_path / "run", models="nb")
    ds = annotate.LabeledDataset.load(out["work"] / "stigmatizing_labels.tsv")
    split = json.loads((out["models"] / "split.json").read_text())
    train = [ds.texts[i] for i in split["train_idx"]]
    rebuilt = features.build_vocabulary(train)
    saved = features.Vocabulary.load(out["models"] / "vocabulary.tsv")
    assert saved.terms == rebuilt.terms
    test_only = set(features.build_vocabulary([ds.texts[i] for i in split["test_idx"]]).terms) - set(rebuilt.terms)
    assert test_only and not test_only & set(saved.terms)
    assert np.isin(split["test_idx"], split["train_idx"]).sum() == 0


def test_scan_patient_position_switch(tmp_path):
    corpus.write_sentences([corpus.Sentence("a:0", "a", 0, '"Help me" yelled pt repeatedly.', 0)], tmp_path / "s.tsv")
    cli("scan", "--feature", "scare_quotes", "--in", tmp_path / "s.tsv", "--out", tmp_path / "any.tsv")
    cli("scan", "--feature", "scare_quotes", "--in", tmp_path / "s.tsv", "--patient-before-quote",
        "--out", tmp_path / "before.tsv")
    assert len((tmp_path / "any.tsv").read_text().splitlines()) == 2
    assert len((tmp_path / "before.tsv").read_text().splitlines()) == 1


def test_dataset_from_sheets_and_adjudicated_tsv(tmp_path):
    sents = [corpus.Sentence(f"n:{i}", "n", i, f"Sentence number {i} here.", 0) for i in range(6)]
    corpus.write_sentences(sents, tmp_path / "s.tsv")
    texts = {s.sentence_id: s.text for s in sents}

    def labels(ids, who):
        return [annotate.AnnotationLabel(i, who, int(i[-1]) % 2) for i in ids]

    annotate.export_annotation_csv(["n:0", "n:1"], texts, tmp_path / "a.csv", labels(["n:0", "n:1"], "A"))
    annotate.export_annotation_csv(["n:0", "n:1"], texts, tmp_path / "b.csv",
                                   [annotate.AnnotationLabel("n:0", "B", 1), annotate.AnnotationLabel("n:1", "B", 1)])
    (tmp_path / "res.tsv").write_text("n:0\t0\n")
    cli("adjudicate", "--a", tmp_path / "a.csv", "--b", tmp_path / "b.csv", "--resolutions", tmp_path / "res.tsv",
        "--out", tmp_path / "rel.tsv")
    annotate.export_annotation_csv(["n:2", "n:3", "n:4", "n:5"], texts, tmp_path / "solo.csv",
                                   labels(["n:2", "n:3", "n:4", "n:5"], "A"))
    cli("dataset", "--feature", "doubt_markers", "--labels", tmp_path / "rel.tsv", tmp_path / "solo.csv",
        "--sentences", tmp_path / "s.tsv", "--out", tmp_path / "ds.tsv")
    ds = annotate.LabeledDataset.load(tmp_path / "ds.tsv")
    assert sorted((sid, lab) for sid, _, lab in ds.items) == [(f"n:{i}", i % 2) for i in range(6)]
    assert main(["dataset", "--feature", "doubt_markers", "--labels", str(tmp_path / "rel.tsv"), str(tmp_path / "rel.tsv"),
                 "--sentences", str(tmp_path / "s.tsv"), "--out", str(tmp_path / "dup.tsv")]) == 1
