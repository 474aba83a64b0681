"""Synthetic corpora and triplet sets for tests, demos and the bundled fixture."""

from __future__ import annotations

import datetime as dt
from importlib import resources

import numpy as np

from .corpus import Corpus, SummaryTask, Utterance
from .triplets import Triplet

KANJI = "都政運営予算防災教育福祉環境交通港湾医療住宅産業経済文化観光農業雇用安全"
KATAKANA = "アイウエオカキクケコサシスセソタチツテトナニヌネノハヒフヘホマミムメモ"
PUNCT = "、。"


def fixture_path(name: str = "fixture_minutes.jsonl"):
    """Path to a bundled fixture file (``fixture_minutes.jsonl`` or ``fixture_tasks.json``)."""
    return resources.files("minutesum") / "data" / name


def _word(rng: np.random.Generator, alphabet: str, length: int) -> str:
    return "".join(alphabet[i] for i in rng.integers(len(alphabet), size=length))


def random_text(rng: np.random.Generator, alphabet: str = KANJI, max_len: int = 40) -> str:
    n = int(rng.integers(3, max_len + 1))
    chars = [alphabet[i] for i in rng.integers(len(alphabet), size=n)]
    for pos in sorted(rng.choice(n, size=min(n // 8, 3), replace=False)):
        chars[pos] = PUNCT[int(rng.integers(2))]
    text = "".join(chars).strip(PUNCT)
    return text if len(text) >= 3 else alphabet[:3]


def random_corpus(
    rng: np.random.Generator,
    n_sessions: int = 3,
    max_per_session: int = 8,
    speakers: tuple[str, ...] = ("知事", "議員甲", "議員乙"),
    max_len: int = 40,
) -> Corpus:
    """Small random corpus; speakers tend to hold the floor for a few turns."""
    utterances = []
    base = dt.date(2020, 1, 1)
    for s in range(n_sessions):
        date = base + dt.timedelta(days=int(rng.integers(0, 3)) * 30 + s)
        meeting = f"第{s + 1}回定例会"
        speaker = speakers[int(rng.integers(len(speakers)))]
        for seq in range(int(rng.integers(1, max_per_session + 1))):
            if rng.random() < 0.4:
                speaker = speakers[int(rng.integers(len(speakers)))]
            utterances.append(
                Utterance(f"s{s}u{seq}", seq, date, meeting, speaker, random_text(rng, max_len=max_len))
            )
    return Corpus(utterances)


def random_task(rng: np.random.Generator, corpus: Corpus, task_id: str, speakers=("知事", "議員甲", "議員乙")) -> SummaryTask:
    date, meeting = corpus.sessions()[int(rng.integers(len(corpus.sessions())))]
    q = speakers[int(rng.integers(len(speakers)))]
    a = speakers[int(rng.integers(len(speakers)))]
    return SummaryTask(
        id=task_id,
        date=date,
        meeting=meeting,
        main_topic="<br>".join(random_text(rng, max_len=12) for _ in range(int(rng.integers(1, 3)))),
        subtopic=random_text(rng, max_len=8),
        question_speaker=f"{q}（会派）" if rng.random() < 0.5 else q,
        answer_speaker=a,
        question_length=int(rng.integers(1, 200)),
        answer_length=int(rng.integers(1, 300)),
    )


def separable_fixture(
    n_triplets: int = 600,
    seed: int = 0,
    n_topics: int = 80,
    n_styles: int = 6,
    style_repeats: int = 3,
) -> tuple[Corpus, list[Triplet]]:
    """Triplets a linear adapter can learn to separate but raw n-grams cannot.

    Target and positive share a topic word; target and negative share a
    style word that is repeated ``style_repeats`` times and so dominates the
    raw n-gram vector. Down-weighting the style features separates the set.
    """
    rng = np.random.default_rng(seed)
    topics = sorted({_word(rng, KANJI, 5) for _ in range(n_topics)})
    styles = sorted({_word(rng, KATAKANA, 5) for _ in range(n_styles)})

    def text(topic, style):
        return "。".join([topic] + [style] * style_repeats) + "。"

    utterances, triplets = [], []
    day = dt.date(2015, 1, 1)
    for i in range(n_triplets):
        t_topic, n_topic = rng.choice(len(topics), size=2, replace=False)
        t_style, p_style = rng.choice(len(styles), size=2, replace=False)
        session = (day + dt.timedelta(days=2 * i), f"会議{i}")
        other = (day + dt.timedelta(days=2 * i + 1), f"会議{i}b")
        tu = Utterance(f"t{i}", 0, *session, "話者", text(topics[t_topic], styles[t_style]))
        pu = Utterance(f"p{i}", 1, *session, "話者", text(topics[t_topic], styles[p_style]))
        nu = Utterance(f"n{i}", 0, *other, "別話者", text(topics[n_topic], styles[t_style]))
        utterances.extend([tu, pu, nu])
        triplets.append(Triplet(tu, pu, nu, float("nan"), float("nan")))
    return Corpus(utterances), triplets


def placeholder_triplets(n: int) -> list[Triplet]:
    """``n`` distinct triplets over a tiny corpus; for split bookkeeping only."""
    day = dt.date(2000, 1, 1)
    a = Utterance("a", 0, day, "m1", "x", "テキスト甲")
    b = Utterance("b", 1, day, "m1", "x", "テキスト乙")
    c = Utterance("c", 0, day, "m2", "y", "テキスト丙")
    return [Triplet(a, b, c, float(i), 0.0) for i in range(n)]
