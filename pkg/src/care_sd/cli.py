"""``care-sd`` command line.

Every subcommand reads and writes files only.  Options can also come from a
``key=value`` config file given with ``--config``; the key is the long option
name without dashes (``seed_split=3``, ``jobs=4``).  Command-line flags win.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import annotate, corpus, detect, evaluation, features, lexicon, reporting, synth
from .models import grid as gridmod
from .models.persist import ModelFormatError, load_model, save_model, vocabulary_checksum

log = logging.getLogger("care_sd")

MODEL_NAMES = {"nb": "Naive Bayes", "logreg": "Logistic Regression", "rf": "Random Forest"}


class UsageError(Exception):
    """Bad flags, config keys or input files; exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- config -------------------------------------------------------------------

def read_config(path: str | Path) -> dict[str, str]:
    out = {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file {path} does not exist")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        flags = ", ".join("--" + n.rstrip("_").replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags} (flag or config key)")


def _exists(*paths):
    for p in paths:
        if p is not None and not Path(p).exists():
            raise UsageError(f"input file {p} does not exist")


def _csv_list(value: str | None) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()] if value else []


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- ingest / stats -------------------------------------------------------------

def cmd_ingest(args):
    _need(args, "notes", "out")
    _exists(args.notes, args.columns)
    columns = corpus.load_column_config(args.columns) if args.columns else None
    excluded = _csv_list(args.exclude_categories) if args.exclude_categories is not None else corpus.DEFAULT_EXCLUDED
    tally = corpus.IngestTally()
    with open(args.notes, encoding="utf-8", newline="") as fh:
        notes = corpus.filter_categories(corpus.parse_notes(fh, columns, tally), excluded)
    sentences = corpus.segment_corpus(notes)
    corpus.write_sentences(sentences, args.out)
    for err in tally.errors:
        log.warning("malformed row: %s", err)
    log.info("ingested rows=%d notes=%d sentences=%d skipped_empty=%d errors=%d",
             tally.rows, len(notes), len(sentences), tally.skipped_empty, len(tally.errors))
    if args.stats:
        Path(args.stats).write_text(corpus.corpus_stats(notes, sentences).to_json(), encoding="utf-8")


def cmd_stats(args):
    _need(args, "notes", "sentences", "out")
    _exists(args.notes, args.sentences, args.columns, *(args.matches or []))
    columns = corpus.load_column_config(args.columns) if args.columns else None
    excluded = _csv_list(args.exclude_categories) if args.exclude_categories is not None else corpus.DEFAULT_EXCLUDED
    with open(args.notes, encoding="utf-8", newline="") as fh:
        notes = corpus.filter_categories(corpus.parse_notes(fh, columns), excluded)
    sentences = corpus.read_sentences(args.sentences)
    stats = json.loads(corpus.corpus_stats(notes, sentences).to_json())
    counts = {}
    for path in args.matches or []:
        with open(path, encoding="utf-8") as fh:
            fh.readline()
            for line in fh:
                feat = line.split("\t", 2)[1]
                counts[feat] = counts.get(feat, 0) + 1
    stats["matched_sentences"] = counts
    _write_json(Path(args.out), stats)


# -- scan ---------------------------------------------------------------------

def cmd_scan(args):
    _need(args, "feature", "in_", "out")
    if args.feature not in detect.ALL_FEATURES:
        raise UsageError(f"--feature must be one of {', '.join(detect.ALL_FEATURES)}")
    _exists(args.in_, args.lexicon, args.placeholders)
    sentences = corpus.read_sentences(args.in_)
    if args.feature == detect.SCARE_QUOTES:
        tokens = _csv_list(args.patient_tokens) or detect.DEFAULT_PATIENT_TOKENS
        placeholders = detect.load_placeholders(args.placeholders)
        records, diag = detect.detect_scare_quote_candidates(sentences, tokens, placeholders,
                                                             patient_before_quote=args.patient_before_quote)
        if diag.unbalanced_quotes:
            log.warning("%d sentence(s) with unbalanced quotes skipped", diag.unbalanced_quotes)
        if args.diagnostics:
            Path(args.diagnostics).write_text(diag.to_json(), encoding="utf-8")
    else:
        lex = lexicon.load_lexicon(args.lexicon, args.feature) if args.lexicon else lexicon.shipped_lexicon(args.feature)
        records = detect.scan_lexicon(sentences, lexicon.compile_lexicon(lex), args.feature)
    detect.write_matches(records, args.out)
    log.info("scan feature=%s sentences=%d matches=%d", args.feature, len(sentences), len(records))
    if args.report_dir:
        out = Path(args.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.feature == detect.SCARE_QUOTES:
            reports = list(detect.quoted_ngrams(records, top=args.top).values())
        else:
            reports = [detect.top_terms(records, args.top)]
        reporting.emit_reports(reporting.ReportBundle(frequencies=reports), out, figures=not args.no_figures)


# -- annotation ---------------------------------------------------------------

def _texts(path) -> dict[str, str]:
    return {s.sentence_id: s.text for s in corpus.read_sentences(path)}


def _matched_ids(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        return [line.split("\t", 1)[0] for line in fh if line.strip()]


def _feature_of(matches_path) -> str:
    with open(matches_path, encoding="utf-8") as fh:
        fh.readline()
        first = fh.readline()
    return first.split("\t")[1] if first else ""


def cmd_sample(args):
    _need(args, "matches", "sentences", "out_dir")
    _exists(args.matches, args.sentences)
    sizes = [int(s) for s in _csv_list(args.sizes)]
    ids = _matched_ids(args.matches)
    texts = _texts(args.sentences)
    try:
        batches = annotate.sample_batches(ids, sizes, args.seed_sampling, feature=_feature_of(args.matches))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    annotate.save_batches(batches, out / "batches.json")
    for b in batches:
        annotate.export_annotation_csv(b.sentence_ids, texts, out / f"{b.batch_kind}.csv")
    log.info("sampled %s from %d matched sentences", "+".join(map(str, sizes)), len(ids))


def _load_labels(path, annotator, known=None) -> dict[str, int]:
    if str(path).endswith(".csv"):
        return {lab.sentence_id: lab.label for lab in annotate.import_annotation_csv(path, annotator, known)}
    return annotate.read_resolutions(path)


def cmd_agreement(args):
    _need(args, "a", "b", "out")
    _exists(args.a, args.b)
    report = annotate.agreement(_load_labels(args.a, "A"), _load_labels(args.b, "B"))
    Path(args.out).write_text(report.to_json(), encoding="utf-8")
    log.info("agreement n=%d percent=%.3f kappa=%.3f", report.n, report.percent_agreement, report.kappa)


def cmd_adjudicate(args):
    _need(args, "a", "b", "out")
    _exists(args.a, args.b, args.resolutions)
    resolutions = annotate.read_resolutions(args.resolutions) if args.resolutions else {}
    final = annotate.adjudicate(_load_labels(args.a, "A"), _load_labels(args.b, "B"), resolutions)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sentence_id\tlabel\n")
        for sid in sorted(final):
            fh.write(f"{sid}\t{final[sid]}\n")


def cmd_dataset(args):
    _need(args, "feature", "labels", "sentences", "out")
    _exists(args.sentences, *args.labels)
    texts = _texts(args.sentences)
    sets = [_load_labels(p, f"file{i}", texts.keys()) for i, p in enumerate(args.labels)]
    ds = annotate.assemble_dataset(args.feature, sets, texts, names=[Path(p).name for p in args.labels])
    ds.save(args.out)
    log.info("dataset feature=%s n=%d positive_fraction=%.3f", args.feature, len(ds.items), ds.positive_fraction)


def cmd_autolabel(args):
    _need(args, "batches", "sentences", "out")
    _exists(args.batches, args.sentences, args.spec)
    spec = synth.SyntheticCorpusSpec.load(args.spec) if args.spec else synth.SyntheticCorpusSpec()
    batches = annotate.load_batches(args.batches)
    feature = args.feature or (batches[0].feature if batches else "")
    if feature not in spec.marker_tokens:
        raise UsageError(f"no marker token configured for feature {feature!r}")
    texts = _texts(args.sentences)
    sets = [synth.autolabel(((sid, texts[sid]) for sid in b.sentence_ids), feature, spec) for b in batches]
    ds = annotate.assemble_dataset(feature, sets, texts, names=[b.batch_kind for b in batches])
    ds.save(args.out)
    log.info("autolabel feature=%s n=%d positive_fraction=%.3f", feature, len(ds.items), ds.positive_fraction)


# -- training / evaluation ---------------------------------------------------------

def _grid(args, kinds) -> gridmod.GridSpec:
    if args.grid:
        _exists(args.grid)
        try:
            spec = gridmod.GridSpec.from_json(json.loads(Path(args.grid).read_text(encoding="utf-8")))
        except (KeyError, ValueError) as exc:
            raise UsageError(f"{args.grid}: bad grid file ({exc})") from None
        return gridmod.GridSpec({k: v for k, v in spec.grids.items() if k in kinds}, spec.k)
    return gridmod.default_grid(kinds)


def cmd_train(args):
    _need(args, "dataset", "out_dir")
    _exists(args.dataset)
    kinds = _csv_list(args.models)
    bad = [k for k in kinds if k not in gridmod.MODEL_KINDS]
    if bad or not kinds:
        raise UsageError(f"--models takes a comma list of {', '.join(gridmod.MODEL_KINDS)}")
    ds = annotate.LabeledDataset.load(args.dataset, args.feature or Path(args.dataset).stem)
    y = ds.labels
    try:
        plan = features.stratified_split(y, args.test_fraction, args.seed_split)
    except ValueError as exc:
        raise UsageError(f"{args.dataset}: {exc}") from None
    spec = _grid(args, kinds)
    # The vocabulary sees training texts only.
    train_texts = [ds.texts[i] for i in plan.train_idx]
    vocab = features.build_vocabulary(train_texts, args.min_df, binary=args.binary)
    X = features.vectorize(train_texts, vocab)
    y_train = y[plan.train_idx]
    try:
        plan.folds = features.stratified_kfold(y_train, spec.k, args.seed_split)
    except ValueError as exc:
        raise UsageError(f"{args.dataset}: {exc}") from None

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocabulary.tsv")
    split = plan.to_json()
    split["dataset_sha256"] = _sha256(args.dataset)
    split["test_fraction"] = args.test_fraction
    _write_json(out / "split.json", split)

    timings = {}
    t0 = time.perf_counter()
    try:
        result = gridmod.grid_search(X, y_train, spec, seed=args.seed_model, jobs=args.jobs, folds=plan.folds)
    except gridmod.GridConfigError as exc:
        raise UsageError(str(exc)) from None
    timings["grid_search_s"] = time.perf_counter() - t0
    (out / "cv_table.tsv").write_text(result.to_tsv(), encoding="utf-8")
    _write_json(out / "best_params.json", {k: {"params": result.best[k], "mean_f1_macro": result.best_score[k]}
                                           for k in kinds})
    checksum = vocabulary_checksum(vocab.terms)
    for kind in kinds:
        t0 = time.perf_counter()
        model = gridmod.fit(kind, X, y_train, result.best[kind], args.seed_model)
        timings[f"train_{kind}_s"] = time.perf_counter() - t0
        save_model(model, out / f"model_{kind}.json", checksum,
                   {"feature": ds.feature, "seed": args.seed_model, "n_train": int(len(y_train))})
        log.info("trained %s params=%s cv_f1_macro=%.4f", kind, json.dumps(result.best[kind], sort_keys=True),
                 result.best_score[kind])
    # wall-clock numbers never go into the deterministic outputs
    _write_json(out / "timings.json", timings)


def _load_run(model_dir: Path, dataset_path):
    split = json.loads((model_dir / "split.json").read_text(encoding="utf-8"))
    if dataset_path is not None and split.get("dataset_sha256") not in (None, _sha256(dataset_path)):
        raise UsageError(f"{dataset_path} is not the dataset the models in {model_dir} were trained on")
    vocab = features.Vocabulary.load(model_dir / "vocabulary.tsv")
    kinds = [k for k in gridmod.MODEL_KINDS if (model_dir / f"model_{k}.json").exists()]
    if not kinds:
        raise UsageError(f"no model files in {model_dir}")
    checksum = vocabulary_checksum(vocab.terms)
    models = {k: load_model(model_dir / f"model_{k}.json", k, checksum) for k in kinds}
    return split, vocab, models


def cmd_evaluate(args):
    _need(args, "model_dir", "dataset", "out")
    _exists(args.model_dir, args.dataset)
    model_dir = Path(args.model_dir)
    split, vocab, models = _load_run(model_dir, args.dataset)
    ds = annotate.LabeledDataset.load(args.dataset, args.feature or Path(args.dataset).stem)
    test = np.asarray(split["test_idx"], dtype=np.int64)
    X = features.vectorize([ds.texts[i] for i in test], vocab)
    y = ds.labels[test]
    meta = json.loads((model_dir / f"model_{next(iter(models))}.json").read_text(encoding="utf-8"))["metadata"]
    feature = args.feature or meta.get("feature") or ds.feature
    result = {"feature": feature, "n_test": int(len(test)), "bootstrap": reporting.BOOTSTRAP_NOTE, "models": {}}
    pred_lines = ["sentence_id\tlabel\t" + "\t".join(models)]
    preds = {}
    for kind, model in models.items():
        preds[kind] = model.predict(X)
        ci = evaluation.bootstrap_ci(y, preds[kind], args.resamples, args.level, args.seed_bootstrap)
        result["models"][kind] = ci.to_dict()
        log.info("evaluate %s f1_macro=%.4f [%.4f, %.4f]", kind, *ci.bounds("f1_macro"))
    for j, i in enumerate(test):
        pred_lines.append(f"{ds.items[i][0]}\t{y[j]}\t" + "\t".join(str(int(preds[k][j])) for k in models))
    _write_json(Path(args.out), result)
    if args.predictions:
        Path(args.predictions).write_text("\n".join(pred_lines) + "\n", encoding="utf-8")


def cmd_importance(args):
    _need(args, "model_dir", "out_dir")
    _exists(args.model_dir)
    _, vocab, models = _load_run(Path(args.model_dir), None)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    terms = vocab.terms
    for kind, model in models.items():
        if kind == "rf":
            rep = evaluation.gini_importance(model, terms, args.top_n)
        elif kind == "logreg":
            rep = evaluation.logreg_contributions(model, terms, args.top_n)
        else:
            continue
        (out / f"importance_{kind}.tsv").write_text(rep.to_tsv(), encoding="utf-8")


def cmd_report(args):
    _need(args, "out_dir")
    inputs = (args.evaluation or []) + (args.matches or []) + (args.model_dir or []) + (args.timings or [])
    _exists(args.stats, args.sentences, *inputs, *(args.agreement or []), *(args.dataset or []))
    durations = {}
    for path in args.timings or []:
        for key, v in json.loads(Path(path).read_text(encoding="utf-8")).items():
            if key.startswith("train_") and key.endswith("_s"):
                durations[key[6:-2]] = v
    rows = []
    for path in args.evaluation or []:
        ev = json.loads(Path(path).read_text(encoding="utf-8"))
        for kind, ci in ev["models"].items():
            rows.append(reporting.MetricRow(ev["feature"], MODEL_NAMES.get(kind, kind),
                                            evaluation.MetricCI.from_dict(ci), durations.get(kind)))
    freqs = []
    if args.matches:
        _need(args, "sentences")
        texts = _texts(args.sentences)
        for path in args.matches:
            recs = detect.read_matches(path, texts)
            if not recs:
                continue
            if recs[0].feature == detect.SCARE_QUOTES:
                freqs.extend(detect.quoted_ngrams(recs, top=args.top).values())
            else:
                freqs.append(detect.top_terms(recs, args.top))
    importances = {}
    for d in args.model_dir or []:
        _, vocab, models = _load_run(Path(d), None)
        for kind, model in models.items():
            feat = json.loads((Path(d) / f"model_{kind}.json").read_text())["metadata"].get("feature") or Path(d).name
            if kind == "rf":
                importances[f"{feat}_rf"] = evaluation.gini_importance(model, vocab.terms, args.top_n)
            elif kind == "logreg":
                importances[f"{feat}_logreg"] = evaluation.logreg_contributions(model, vocab.terms, args.top_n)
    agreement = {}
    for spec in args.agreement or []:
        obj = json.loads(Path(spec).read_text(encoding="utf-8"))
        agreement[obj.get("feature") or Path(spec).stem] = obj
    datasets = {}
    for path in args.dataset or []:
        ds = annotate.LabeledDataset.load(path)
        datasets[Path(path).stem] = {"n": len(ds.items), "positive_fraction": ds.positive_fraction}
    stats = json.loads(Path(args.stats).read_text(encoding="utf-8")) if args.stats else None
    bundle = reporting.ReportBundle(stats, freqs, rows, importances, agreement, datasets)
    written = reporting.emit_reports(bundle, args.out_dir, figures=not args.no_figures)
    log.info("report wrote %d file(s) to %s", len(written), args.out_dir)


# -- lexicon ------------------------------------------------------------------

def _load_lex(args) -> lexicon.Lexicon:
    _need(args, "lexicon")
    _exists(args.lexicon)
    return lexicon.load_lexicon(args.lexicon)


def cmd_lexicon(args):
    action = args.action
    if action == "expand":
        _need(args, "embeddings", "out")
        _exists(args.embeddings)
        lex = _load_lex(args)
        stems = _csv_list(args.stems) or [e.term for e in lex.entries if e.origin == "stem"]
        edges = lexicon.expand_with_embeddings(stems, lexicon.load_embeddings(args.embeddings), args.k)
        if args.edges:
            lexicon.write_edges(edges, args.edges)
        lexicon.save_lexicon(lex.extended(lexicon.edges_to_entries(edges, lex)), args.out)
    elif action == "import":
        _need(args, "candidates", "out")
        _exists(args.candidates)
        lex = _load_lex(args)
        entries, dup = lexicon.import_candidates(args.candidates, args.origin, lex)
        log.info("imported %d candidate(s), %d duplicate(s) skipped", len(entries), dup)
        lexicon.save_lexicon(lex.extended(entries), args.out)
    elif action == "prune":
        _need(args, "decisions", "out")
        _exists(args.decisions)
        lex, agreement = lexicon.apply_prune_decisions(_load_lex(args), lexicon.read_prune_decisions(args.decisions))
        log.info("prune agreement=%.3f", agreement)
        lexicon.save_lexicon(lex, args.out)
    elif action == "noise":
        _need(args, "out")
        lex = _load_lex(args)
        if args.terms:
            _exists(args.terms)
            terms = [t for t in Path(args.terms).read_text(encoding="utf-8").splitlines() if t.strip()]
        else:
            terms = sorted(lexicon.NOISE_TERMS.get(lex.feature, ()))
        lexicon.save_lexicon(lexicon.remove_noise_terms(lex, terms), args.out)
    elif action == "compile":
        lex = _load_lex(args)
        matcher = lexicon.compile_lexicon(lex)
        summary = {"feature": lex.feature, "counts": lex.counts(), "active_terms": lex.active_terms,
                   "pattern": matcher.pattern}
        if args.out:
            _write_json(Path(args.out), summary)
        else:
            sys.stdout.write(json.dumps(summary["counts"], sort_keys=True) + "\n")


def cmd_synth(args):
    _need(args, "out")
    _exists(args.spec)
    spec = synth.SyntheticCorpusSpec.load(args.spec) if args.spec else synth.SyntheticCorpusSpec()
    if args.seed_synth is not None:
        spec.seed = args.seed_synth
    if args.n_notes is not None:
        spec.n_notes = args.n_notes
    rows = synth.generate_notes(spec)
    synth.write_notes_csv(rows, args.out)
    log.info("synth notes=%d seed=%d", len(rows), spec.seed)


# -- parser -------------------------------------------------------------------

def build_parser() -> _Parser:
    p = _Parser(prog="care-sd", description="Lexicon, annotation and classifier pipeline for biased language in notes.")
    p.add_argument("--config", help="key=value file supplying option defaults")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        return sp

    def ingest_opts(sp):
        sp.add_argument("--notes", help="notes CSV (MIMIC NOTEEVENTS shape)")
        sp.add_argument("--columns", help="field=COLUMN mapping file")
        sp.add_argument("--exclude-categories", help="comma list; default EEG,Radiology")

    sp = cmd("ingest", cmd_ingest, "notes CSV -> deduplicated sentence table")
    ingest_opts(sp)
    sp.add_argument("--out")
    sp.add_argument("--stats", help="also write corpus statistics JSON")

    sp = cmd("stats", cmd_stats, "corpus statistics")
    ingest_opts(sp)
    sp.add_argument("--sentences")
    sp.add_argument("--matches", nargs="*")
    sp.add_argument("--out")

    sp = cmd("scan", cmd_scan, "flag sentences for one feature")
    sp.add_argument("--feature")
    sp.add_argument("--in", dest="in_")
    sp.add_argument("--lexicon")
    sp.add_argument("--patient-tokens")
    sp.add_argument("--placeholders")
    sp.add_argument("--patient-before-quote", action="store_true",
                    help="require the patient token before the first quote (default: anywhere in the sentence)")
    sp.add_argument("--out")
    sp.add_argument("--diagnostics")
    sp.add_argument("--report-dir")
    sp.add_argument("--top", type=int, default=20)
    sp.add_argument("--no-figures", action="store_true")

    sp = cmd("sample", cmd_sample, "draw annotation batches")
    sp.add_argument("--matches")
    sp.add_argument("--sentences")
    sp.add_argument("--sizes", default="100,400,500")
    sp.add_argument("--seed-sampling", type=int, default=0)
    sp.add_argument("--out-dir")

    for name, func, help_ in (("agreement", cmd_agreement, "percent agreement and Cohen's kappa"),
                              ("adjudicate", cmd_adjudicate, "merge two annotators with resolutions")):
        sp = cmd(name, func, help_)
        sp.add_argument("--a")
        sp.add_argument("--b")
        sp.add_argument("--out")
        if name == "adjudicate":
            sp.add_argument("--resolutions")

    sp = cmd("dataset", cmd_dataset, "assemble final labels into a dataset")
    sp.add_argument("--feature")
    sp.add_argument("--labels", nargs="+")
    sp.add_argument("--sentences")
    sp.add_argument("--out")

    sp = cmd("autolabel", cmd_autolabel, "label sampled batches with the synthetic planted rule")
    sp.add_argument("--batches")
    sp.add_argument("--sentences")
    sp.add_argument("--spec")
    sp.add_argument("--feature")
    sp.add_argument("--out")

    sp = cmd("train", cmd_train, "grid search and fit models")
    sp.add_argument("--dataset")
    sp.add_argument("--feature")
    sp.add_argument("--models", default="nb,logreg,rf")
    sp.add_argument("--grid", help="grid JSON")
    sp.add_argument("--min-df", type=int, default=1)
    sp.add_argument("--binary", action="store_true", help="presence features instead of counts")
    sp.add_argument("--test-fraction", type=float, default=0.2)
    sp.add_argument("--seed-split", type=int, default=0)
    sp.add_argument("--seed-model", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out-dir")

    sp = cmd("evaluate", cmd_evaluate, "held-out metrics with bootstrap intervals")
    sp.add_argument("--model-dir")
    sp.add_argument("--dataset")
    sp.add_argument("--feature")
    sp.add_argument("--resamples", type=int, default=1000)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--seed-bootstrap", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--predictions")

    sp = cmd("importance", cmd_importance, "Gini importances and regression coefficients")
    sp.add_argument("--model-dir")
    sp.add_argument("--top-n", type=int, default=30)
    sp.add_argument("--out-dir")

    sp = cmd("report", cmd_report, "tables and figures")
    sp.add_argument("--evaluation", nargs="*")
    sp.add_argument("--timings", nargs="*", help="timings.json files; fills duration_s")
    sp.add_argument("--matches", nargs="*")
    sp.add_argument("--sentences")
    sp.add_argument("--model-dir", nargs="*")
    sp.add_argument("--agreement", nargs="*")
    sp.add_argument("--dataset", nargs="*")
    sp.add_argument("--stats")
    sp.add_argument("--top", type=int, default=20)
    sp.add_argument("--top-n", type=int, default=30)
    sp.add_argument("--no-figures", action="store_true")
    sp.add_argument("--out-dir")

    sp = cmd("lexicon", cmd_lexicon, "lexicon maintenance")
    sp.add_argument("action", choices=["expand", "import", "prune", "noise", "compile"])
    sp.add_argument("--lexicon")
    sp.add_argument("--embeddings")
    sp.add_argument("--stems")
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--edges")
    sp.add_argument("--candidates")
    sp.add_argument("--origin", default="generated")
    sp.add_argument("--decisions")
    sp.add_argument("--terms")
    sp.add_argument("--out")

    sp = cmd("synth", cmd_synth, "generate a synthetic notes CSV")
    sp.add_argument("--spec")
    sp.add_argument("--seed-synth", type=int)
    sp.add_argument("--n-notes", type=int)
    sp.add_argument("--out")
    return p


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    dests = {a.dest for sp in subparsers.choices.values() for a in sp._actions}
    dests.add("in")
    unknown = sorted(k for k in config if k not in dests)
    if unknown:
        raise UsageError(f"{known.config}: unknown config key(s): {', '.join(unknown)}")
    for sp in subparsers.choices.values():
        own = {a.dest: a for a in sp._actions}
        values = {}
        for key, value in config.items():
            dest = "in_" if key == "in" else key
            action = own.get(dest)
            if action is None:
                continue
            if action.nargs in ("*", "+"):
                values[dest] = value.split()
            elif isinstance(action, argparse._StoreTrueAction):
                values[dest] = value.lower() in ("1", "true", "yes")
            elif action.type is not None:
                try:
                    values[dest] = action.type(value)
                except ValueError:
                    raise UsageError(f"{known.config}: bad value for {key}: {value!r}") from None
            else:
                values[dest] = value
        sp.set_defaults(**values)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(asctime)s level=%(levelname)s logger=%(name)s %(message)s")
    logging.captureWarnings(True)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return 1
    except (corpus.SchemaError, lexicon.LexiconError, annotate.AnnotationError, ModelFormatError,
            gridmod.GridConfigError, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        log.error("runtime failure: %s: %s", type(exc).__name__, exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
