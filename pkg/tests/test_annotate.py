import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from care_sd import annotate as an


def test_sample_batches_disjoint_and_deterministic():
    ids = [f"s{i}" for i in range(20)]
    a = an.sample_batches(ids, [5, 5], seed=11)
    b = an.sample_batches(ids, [5, 5], seed=11)
    assert [x.sentence_ids for x in a] == [x.sentence_ids for x in b]
    first, second = set(a[0].sentence_ids), set(a[1].sentence_ids)
    assert len(first) == len(second) == 5 and not first & second
    assert first | second <= set(ids)


def test_sample_batch_kinds_and_sizes():
    ids = [f"s{i}" for i in range(10_278)]
    batches = an.sample_batches(ids, [100, 400, 500], seed=0, feature="stigmatizing_labels")
    assert [b.batch_kind for b in batches] == ["reliability_100", "solo_400", "solo_500"]
    assert len({i for b in batches for i in b.sentence_ids}) == 1000
    assert an.sample_batches(ids, [0])[0].sentence_ids == []


def test_sample_batches_errors():
    with pytest.raises(ValueError, match="only 3"):
        an.sample_batches(["a", "b", "c"], [2, 2])
    with pytest.raises(ValueError, match="duplicate"):
        an.sample_batches(["a", "a", "b"], [1])


def test_sampling_is_uniform():
    ids = [f"s{i}" for i in range(20)]
    counts = np.zeros(20)
    for seed in range(10_000):
        (b,) = an.sample_batches(ids, [3], seed=seed)
        for sid in b.sentence_ids:
            counts[int(sid[1:])] += 1
    assert chisquare(counts).pvalue > 0.001


def test_export_template_and_import_errors(tmp_path):
    texts = {"a:0": "Pt, very \"needy\".", "b:0": "Stable.", "c:0": "Refuses."}
    p = tmp_path / "sheet.csv"
    an.export_annotation_csv(["a:0", "b:0", "c:0"], texts, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "sentence_id,text,label,close_call,exemplary,note"
    assert lines[1] == 'a:0,"Pt, very ""needy"".",,,,'
    with pytest.raises(an.AnnotationError, match="unknown sentence_id 'zz'"):
        an.export_annotation_csv(["zz"], texts, p)

    p.write_text("sentence_id,text,label,close_call,exemplary,note\n"
                 "a:0,x,2,,,\nb:0,x,1,,,\nb:0,x,0,,,\nq:0,x,1,maybe,,\n")
    with pytest.raises(an.AnnotationError) as err:
        an.import_annotation_csv(p, "A", known_ids=texts)
    problems = err.value.problems
    assert any(":2: label must be 0 or 1, got '2'" in m for m in problems)
    assert any(":4: duplicate label for 'b:0'" in m for m in problems)
    assert any(":5: unknown sentence_id 'q:0'" in m for m in problems)
    assert any(":5: close_call/exemplary" in m for m in problems)


def test_filled_sheet_round_trip_is_byte_exact(tmp_path):
    rng = random.Random(4)
    texts = {f"s{i}:0": f"Sentence {i}, with \"quotes\" and, commas" for i in range(100)}
    labels = [an.AnnotationLabel(sid, "A", rng.randint(0, 1), rng.random() < 0.2, rng.random() < 0.1,
                                 rng.choice(["", "close, call", "ok"])) for sid in texts]
    first = tmp_path / "a.csv"
    an.export_annotation_csv(list(texts), texts, first, labels)
    back = an.import_annotation_csv(first, "A", texts)
    assert back == labels
    second = tmp_path / "b.csv"
    an.export_annotation_csv(list(texts), texts, second, back)
    assert first.read_bytes() == second.read_bytes()


def _m(vals):
    return {f"s{i}": v for i, v in enumerate(vals)}


def test_kappa_hand_cases():
    r = an.agreement(_m([1, 1, 0, 0]), _m([0, 0, 1, 1]))
    assert (r.percent_agreement, r.pe, r.kappa) == (0.0, 0.5, -1.0)
    r = an.agreement(_m([1, 1, 0, 0]), _m([1, 0, 0, 1]))
    assert (r.percent_agreement, r.kappa) == (0.5, 0.0)
    r = an.agreement(_m([1, 0, 1, 0, 0]), _m([1, 0, 1, 0, 0]))
    assert (r.percent_agreement, r.kappa) == (1.0, 1.0)


def test_kappa_degenerate_and_errors():
    with pytest.warns(UserWarning, match="kappa set to 1.0"):
        assert an.agreement(_m([1, 1]), _m([1, 1])).kappa == 1.0
    # constant but different: po = 0, pe = 0 -> 0
    assert an.agreement(_m([1, 1]), _m([0, 0])).kappa == 0.0
    with pytest.raises(ValueError, match=r"\['s2', 'x'\]"):
        an.agreement(_m([1, 0, 1]), {"s0": 1, "s1": 0, "x": 1})


def brute_kappa(a, b):
    n = len(a)
    po = sum(x == y for x, y in zip(a, b)) / n
    pe = sum((a.count(c) / n) * (b.count(c) / n) for c in (0, 1))
    return po, (1.0 if pe == 1 else (po - pe) / (1 - pe))


pairs = st.integers(1, 40).flatmap(lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                                                       st.lists(st.integers(0, 1), min_size=n, max_size=n)))


@settings(max_examples=300)
@given(pairs)
def test_kappa_properties(pair):
    a, b = pair
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = an.agreement(_m(a), _m(b))
        swapped = an.agreement(_m(b), _m(a))
        flipped = an.agreement(_m([1 - x for x in a]), _m([1 - x for x in b]))
    po, k = brute_kappa(a, b)
    assert r.percent_agreement == pytest.approx(po, abs=1e-12)
    assert r.kappa == pytest.approx(k, abs=1e-12)
    assert -1 - 1e-12 <= r.kappa <= 1 + 1e-12 and 0 <= r.percent_agreement <= 1
    assert (swapped.percent_agreement, swapped.kappa) == pytest.approx((r.percent_agreement, r.kappa), abs=1e-12)
    assert flipped.kappa == pytest.approx(r.kappa, abs=1e-12)


def test_adjudicate_cases():
    assert an.adjudicate(_m([1, 0]), _m([1, 0]), {}) == _m([1, 0])
    assert an.adjudicate(_m([1, 0]), _m([1, 1]), {"s1": 1}) == _m([1, 1])
    with pytest.raises(an.AnnotationError, match="no resolution"):
        an.adjudicate(_m([1, 0]), _m([1, 1]), {})
    with pytest.raises(an.AnnotationError, match="not a disagreement"):
        an.adjudicate(_m([1, 0]), _m([1, 1]), {"s1": 0, "s0": 1})


def test_adjudicate_matches_brute_merge():
    rng = random.Random(50)
    a = _m([rng.randint(0, 1) for _ in range(50)])
    b = _m([rng.randint(0, 1) for _ in range(50)])
    res = {k: rng.randint(0, 1) for k in a if a[k] != b[k]}
    expected = {}
    for k in a:
        expected[k] = a[k] if a[k] == b[k] else res[k]
    assert an.adjudicate(a, b, res) == expected


def test_assemble_dataset(tmp_path):
    texts = {f"s{i}": f"text {i}" for i in range(200)}
    labels = {f"s{i}": int(i < 60) for i in range(200)}
    ds = an.assemble_dataset("doubt_markers", [dict(list(labels.items())[:100]), dict(list(labels.items())[100:])],
                             texts, names=["reliability_100", "solo"])
    assert ds.positive_fraction == 0.3
    assert ds.provenance["s150"] == "solo"
    ds.save(tmp_path / "d.tsv")
    assert an.LabeledDataset.load(tmp_path / "d.tsv").items == ds.items
    assert an.assemble_dataset("x", [{"s0": 0}], texts).positive_fraction == 0.0
    with pytest.raises(an.AnnotationError, match="appears in both"):
        an.assemble_dataset("x", [{"s0": 0}, {"s0": 1}], texts)
