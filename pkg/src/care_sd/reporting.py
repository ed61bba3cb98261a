"""Report files: metric tables, frequency and importance tables, and SVG charts.

Everything written here is a pure function of the inputs.  Wall-clock
durations are the one exception; they are only printed when the caller
passes them in, otherwise the column holds ``NA``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .detect import TermFrequencyReport
from .evaluation import ImportanceReport, MetricCI

METRIC_COLUMNS = [
    "feature", "model", "accuracy", "acc_lo", "acc_hi", "p_pos", "p_lo", "p_hi", "r_pos", "r_lo", "r_hi",
    "f1_pos", "f1_lo", "f1_hi", "p_macro", "r_macro", "f1_macro", "f1m_lo", "f1m_hi", "duration_s",
]
BOOTSTRAP_NOTE = ("percentile bootstrap; resamples drawn with replacement "
                  "(a same-size draw without replacement would reproduce the sample exactly)")


@dataclass
class MetricRow:
    feature: str
    model: str
    ci: MetricCI
    duration_s: float | None = None

    def cells(self) -> list[str]:
        def f(x: float) -> str:
            return f"{x:.4f}"

        def with_ci(name: str) -> list[str]:
            point, lo, hi = self.ci.bounds(name)
            return [f(point), f(lo), f(hi)]

        c = self.ci
        return [
            self.feature, self.model,
            *with_ci("accuracy"), *with_ci("precision_pos"), *with_ci("recall_pos"), *with_ci("f1_pos"),
            f(c.point.precision_macro), f(c.point.recall_macro), *with_ci("f1_macro"),
            "NA" if self.duration_s is None else f"{self.duration_s:.3f}",
        ]


def metric_table(rows: Sequence[MetricRow]) -> str:
    lines = ["\t".join(METRIC_COLUMNS)]
    lines += ["\t".join(r.cells()) for r in rows]
    return "\n".join(lines) + "\n"


@dataclass
class ReportBundle:
    stats: Mapping | None = None
    frequencies: Sequence[TermFrequencyReport] = ()
    metric_rows: Sequence[MetricRow] = ()
    importances: Mapping[str, ImportanceReport] = field(default_factory=dict)
    agreement: Mapping[str, Mapping] = field(default_factory=dict)
    datasets: Mapping[str, Mapping] = field(default_factory=dict)


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _bar_chart(rows: Sequence[tuple[str, float]], title: str, xlabel: str, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [r[0] for r in rows][::-1]
    values = [r[1] for r in rows][::-1]
    with matplotlib.rc_context({"svg.hashsalt": "care-sd", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 0.25 * max(len(rows), 4) + 1))
        colors = ["#b2182b" if v >= 0 else "#2166ac" for v in values]
        ax.barh(range(len(values)), values, color=colors)
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels, fontsize=8)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit_reports(bundle: ReportBundle, out_dir: str | Path, figures: bool = True) -> list[Path]:
    """Write every report in ``bundle`` into ``out_dir``; returns the paths written."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from None
    written: list[Path] = []

    def put(name: str, text: str) -> None:
        p = out / name
        _write(p, text)
        written.append(p)

    put("metrics.tsv", metric_table(bundle.metric_rows))
    put("metrics.json", json.dumps({
        "bootstrap": BOOTSTRAP_NOTE,
        "rows": [{"feature": r.feature, "model": r.model, **r.ci.to_dict()} for r in bundle.metric_rows],
    }, indent=2, sort_keys=True) + "\n")

    if bundle.stats is not None:
        put("corpus_stats.json", json.dumps(dict(bundle.stats), indent=2, sort_keys=True) + "\n")
    for rep in bundle.frequencies:
        stem = f"top_{rep.label.replace('-', '')}_{rep.feature}"
        put(f"{stem}.tsv", rep.to_tsv())
        if figures and rep.rows:
            p = out / f"{stem}.svg"
            _bar_chart(rep.rows, f"{rep.feature}: top {rep.label}s", "count", p)
            written.append(p)
    for name, imp in sorted(bundle.importances.items()):
        put(f"importance_{name}.tsv", imp.to_tsv())
        if figures and imp.rows:
            p = out / f"importance_{name}.svg"
            xlabel = "mean decrease in impurity" if imp.method == "gini_mdi" else "coefficient"
            _bar_chart(imp.rows, f"{name}: top {imp.top_n}", xlabel, p)
            written.append(p)
    if bundle.agreement or bundle.datasets:
        lines = ["feature\tn\tpercent_agreement\tkappa\tdataset_n\tpositive_fraction"]
        for feat in sorted(set(bundle.agreement) | set(bundle.datasets)):
            a, d = bundle.agreement.get(feat, {}), bundle.datasets.get(feat, {})
            lines.append("\t".join([
                feat,
                str(a.get("n", "NA")),
                f"{a['percent_agreement']:.4f}" if "percent_agreement" in a else "NA",
                f"{a['kappa']:.4f}" if "kappa" in a else "NA",
                str(d.get("n", "NA")),
                f"{d['positive_fraction']:.4f}" if "positive_fraction" in d else "NA",
            ]))
        put("annotation_summary.tsv", "\n".join(lines) + "\n")
    return written
