import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minutesum.corpus import Utterance
from minutesum.embedding import PrecomputedEmbedder
from minutesum.errors import ContractError
from minutesum.metrics import diff_report, eval_diff, rouge1_recall
from minutesum.triplets import Triplet

DAY = dt.date(2020, 1, 1)


def naive_recall(candidate, reference, noise=("（拍手）", "--")):
    for lit in noise:
        reference = reference.replace(lit, " ")
    ref = [c for c in reference if not c.isspace()]
    pool = [c for c in candidate if not c.isspace()]
    used = [False] * len(pool)
    hits = 0
    for r in ref:
        for i, c in enumerate(pool):
            if not used[i] and c == r:
                used[i] = True
                hits += 1
                break
    return hits, len(ref)


def planted_triplets(cos_pairs):
    """Triplets with prescribed (cos(t, p), cos(t, n)) in 3-d space."""
    vectors, ts = {}, []
    for i, (cp, cn) in enumerate(cos_pairs):
        ids = [f"t{i}", f"p{i}", f"n{i}"]
        vectors[ids[0]] = [1.0, 0.0, 0.0]
        vectors[ids[1]] = [cp, np.sqrt(1 - cp**2), 0.0]
        vectors[ids[2]] = [cn, 0.0, np.sqrt(1 - cn**2)]
        us = [Utterance(k, 0, DAY, k, "A", k) for k in ids]
        ts.append(Triplet(*us, cp, cn))
    return ts, vectors


def test_hand_built_diffs():
    ts, vectors = planted_triplets([(0.9, 0.1), (0.5, 0.5), (0.2, 0.6)])
    report = eval_diff(None, PrecomputedEmbedder(vectors), ts)
    assert report.per_triplet_diff == pytest.approx([0.8, 0.0, -0.4], abs=1e-12)
    assert report.accuracy == pytest.approx(2 / 3)
    assert report.mean_diff == pytest.approx(0.1333, abs=1e-4)


def test_tie_counts_as_correct_unless_strict():
    assert diff_report([0.0]).accuracy == 1.0
    assert diff_report([0.0], strict=True).accuracy == 0.0


def test_same_text_positive_and_negative():
    us = [Utterance(k, 0, DAY, k, "A", k) for k in ("t", "p", "n")]
    backend = PrecomputedEmbedder({"t": [1, 0], "p": [0.6, 0.8], "n": [0.6, 0.8]})
    report = eval_diff(None, backend, [Triplet(*us, 0, 0)])
    assert report.per_triplet_diff == [0.0] and report.accuracy == 1.0


def test_empty_triplet_list():
    with pytest.raises(ContractError):
        eval_diff(None, PrecomputedEmbedder({"a": [1.0]}), [])


def test_order_and_scale_invariance():
    rng = np.random.default_rng(0)
    pairs = [tuple(rng.uniform(-1, 1, size=2)) for _ in range(30)]
    ts, vectors = planted_triplets(pairs)
    base = eval_diff(None, PrecomputedEmbedder(vectors), ts)
    shuffled = eval_diff(None, PrecomputedEmbedder(vectors), ts[::-1])
    assert shuffled.accuracy == base.accuracy
    assert shuffled.mean_diff == pytest.approx(base.mean_diff, abs=1e-15)
    scaled = eval_diff(None, PrecomputedEmbedder({k: 3.7 * np.asarray(v) for k, v in vectors.items()}), ts)
    assert scaled.per_triplet_diff == pytest.approx(base.per_triplet_diff, abs=1e-15)


# -- ROUGE -------------------------------------------------------------------


def test_rouge_examples():
    assert rouge1_recall("都政運営", "都政運営").recall == 1.0
    rep = rouge1_recall("都政", "都政運営")
    assert (rep.recall, rep.overlap_count, rep.reference_count) == (0.5, 2, 4)


def test_rouge_empty_candidate_and_reference():
    assert rouge1_recall("", "都政").recall == 0.0
    with pytest.raises(ContractError):
        rouge1_recall("都政", "  ")
    with pytest.raises(ContractError):
        rouge1_recall("都政", "（拍手）")


def test_rouge_ignores_whitespace_and_noise():
    rep = rouge1_recall("都 政", "都政（拍手）")
    assert rep.recall == 1.0 and rep.reference_count == 2


def test_rouge_clipping():
    rep = rouge1_recall("ああああ", "あい")
    assert rep.overlap_count == 1


def test_rouge_token_unit():
    rep = rouge1_recall("the cat sat", "the cat the dog", unit="token")
    assert (rep.overlap_count, rep.reference_count) == (2, 4)


short = st.text(alphabet="ab -", max_size=8)


@given(short, short.filter(lambda s: naive_recall("", s)[1] > 0))
def test_rouge_matches_naive_counter(c, r):
    rep = rouge1_recall(c, r)
    assert (rep.overlap_count, rep.reference_count) == naive_recall(c, r)
    assert 0.0 <= rep.recall <= 1.0


@given(short, short, short.filter(lambda s: naive_recall("", s)[1] > 0))
def test_rouge_monotone_in_candidate(c, extra, r):
    assert rouge1_recall(c + extra, r).recall >= rouge1_recall(c, r).recall
    assert rouge1_recall(extra + c, r).recall >= rouge1_recall(c, r).recall
