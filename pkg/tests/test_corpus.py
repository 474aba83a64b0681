import datetime as dt
import json

import numpy as np
import pytest

from minutesum.corpus import (
    Corpus,
    Utterance,
    candidate_pool,
    clean_text,
    load_corpus,
    load_tasks,
    strip_party_suffix,
    task_from_record,
)
from minutesum.errors import IntegrityError, NoCandidatesError, ParseError, SchemaError
from minutesum.synthetic import random_corpus, random_task

D = "2013-02-26"
M = "平成25年第1回定例会"


def rec(id, seq, text, speaker="知事", date=D, meeting=M):
    return {"id": id, "seq": seq, "date": date, "meeting": meeting, "speaker": speaker, "text": text}


def test_noise_literal_removed(write_jsonl):
    path = write_jsonl([rec("a", 0, "ご清聴ありがとうございました。（拍手）")])
    corpus = load_corpus(path, ["（拍手）", "--"])
    assert corpus[0].text == "ご清聴ありがとうございました。"


def test_noise_only_utterance_dropped(write_jsonl):
    path = write_jsonl([rec("a", 0, "--"), rec("b", 1, "残る発言です。")])
    corpus = load_corpus(path, ["（拍手）", "--"])
    assert [u.id for u in corpus] == ["b"]


def test_sorted_by_seq(write_jsonl):
    path = write_jsonl([rec("c", 2, "三番目"), rec("a", 0, "一番目"), rec("b", 1, "二番目")])
    assert [u.seq for u in load_corpus(path)] == [0, 1, 2]


def test_iteration_order_across_sessions(write_jsonl):
    path = write_jsonl(
        [
            rec("x", 0, "後の会議", date="2014-01-01"),
            rec("y", 1, "前の会議二", meeting="A"),
            rec("z", 0, "前の会議一", meeting="A"),
        ]
    )
    assert [u.id for u in load_corpus(path)] == ["z", "y", "x"]


def test_malformed_line_reports_line_number(write_jsonl):
    path = write_jsonl([rec("a", 0, "正常"), "{not json"])
    with pytest.raises(ParseError) as err:
        load_corpus(path)
    assert err.value.line_no == 2


def test_missing_field_is_parse_error(write_jsonl):
    bad = rec("a", 0, "正常")
    del bad["speaker"]
    with pytest.raises(ParseError, match="speaker"):
        load_corpus(write_jsonl([bad]))


def test_duplicate_seq_is_integrity_error(write_jsonl):
    path = write_jsonl([rec("a", 0, "一"), rec("b", 0, "二")])
    with pytest.raises(IntegrityError):
        load_corpus(path)


def test_whitespace_normalized():
    assert clean_text("  都政\t\n運営  （拍手） ") == "都政 運営"


@pytest.mark.parametrize("seed", range(20))
def test_cleaning_only_deletes(seed):
    rng = np.random.default_rng(seed)
    alphabet = list("都政 （拍手）-\t")
    raw = "".join(rng.choice(alphabet, size=30))
    cleaned = clean_text(raw)
    # subsequence check modulo whitespace
    it = iter(raw.replace("\t", " "))
    assert all(any(c == r for r in it) for c in cleaned)


def test_roundtrip_is_identity(fixture_corpus, tmp_path):
    out = tmp_path / "c.jsonl"
    fixture_corpus.dump(out, meta={"stage": "test"})
    assert load_corpus(out) == fixture_corpus


def test_fixture_shape(fixture_corpus):
    assert len(fixture_corpus) == 20
    assert len(fixture_corpus.sessions()) == 3
    for key, group in fixture_corpus.index.items():
        assert all((u.date, u.meeting, u.speaker) == key for u in group)


# -- tasks -------------------------------------------------------------------


def test_table_five_record(fixture_tasks):
    task = fixture_tasks[0]
    assert task.answer_length == 150
    assert task.question_length == 100
    assert task.answer_summary is None
    assert task.question_summary is None  # stored as the string "None"
    assert "<br>" in task.main_topic
    assert task.main_topic_segments() == ["新知事の東京の将来像を示せ", "エネルギー需要側の政策進化を"]


def test_empty_task_file(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("[]", encoding="utf-8")
    assert load_tasks(path) == []
    path.write_text("", encoding="utf-8")
    assert load_tasks(path) == []


@pytest.mark.parametrize("field", ["Answer speaker", "Question length", "Main topic", "Date"])
def test_missing_required_field(field, fixture_tasks):
    raw = json.loads(open_fixture_tasks())[0]
    del raw[field]
    with pytest.raises(SchemaError) as err:
        task_from_record(raw)
    assert err.value.field == field
    assert err.value.record_id == raw["ID"]


def test_nonpositive_length_rejected():
    raw = json.loads(open_fixture_tasks())[0]
    raw["Answer length"] = 0
    with pytest.raises(SchemaError, match="Answer length"):
        task_from_record(raw)


def open_fixture_tasks():
    from minutesum.synthetic import fixture_path

    return fixture_path("fixture_tasks.json").read_text(encoding="utf-8")


# -- candidate pools ---------------------------------------------------------


def test_party_suffix_stripped():
    assert strip_party_suffix("酒井大史（民主党）") == "酒井大史"
    assert strip_party_suffix("山口拓（立憲・民主）") == "山口拓"
    assert strip_party_suffix("知事") == "知事"


def test_pool_filters_by_session_and_speaker():
    day = dt.date(2013, 2, 26)
    us = [Utterance(f"g{i}", i, day, M, "知事", f"知事の発言{i}") for i in range(4)]
    us += [Utterance(f"o{i}", 10 + i, day, M, "議員", f"議員の発言{i}") for i in range(2)]
    us += [Utterance("z", 0, day, "別の会議", "知事", "別会議の発言")]
    corpus = Corpus(reversed(us))
    task = task_from_record(json.loads(open_fixture_tasks())[0])
    pool = candidate_pool(corpus, task, "answer")
    assert [u.id for u in pool] == ["g0", "g1", "g2", "g3"]


def test_pool_matches_suffixed_speaker(fixture_corpus, fixture_tasks):
    pool = candidate_pool(fixture_corpus, fixture_tasks[0], "question")
    assert pool and all(u.speaker == "酒井大史" for u in pool)


def test_no_candidates(fixture_corpus, fixture_tasks):
    with pytest.raises(NoCandidatesError):
        candidate_pool(fixture_corpus, fixture_tasks[2], "question")


@pytest.mark.parametrize("seed", range(25))
def test_pool_equals_brute_force_filter(seed):
    rng = np.random.default_rng(seed)
    corpus = random_corpus(rng)
    task = random_task(rng, corpus, "t")
    for role in ("question", "answer"):
        name = task.speaker(role).split("（")[0]
        expected = [
            u for u in corpus.utterances if u.date == task.date and u.meeting == task.meeting and u.speaker == name
        ]
        expected.sort(key=lambda u: u.seq)
        if not expected:
            with pytest.raises(NoCandidatesError):
                candidate_pool(corpus, task, role)
        else:
            assert candidate_pool(corpus, task, role) == expected
