"""Minutes corpus and summarization task records.

Corpus files are UTF-8 JSON Lines, one utterance per line::

    {"id": "u001", "seq": 0, "date": "2013-02-26", "meeting": "...",
     "speaker": "...", "text": "..."}

Task files are a single JSON array whose records use the field names of the
task distribution ("ID", "Date", "Meeting", "Main topic", "Subtopic",
"Question speaker", "Answer speaker", "Question length", "Answer length",
"Question summary", "Answer summary"). Unknown fields are ignored.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import (
    ContractError,
    IntegrityError,
    NoCandidatesError,
    ParseError,
    SchemaError,
)

DEFAULT_NOISE = ("（拍手）", "--")
ROLES = ("question", "answer")

_WS_RE = re.compile(r"\s+")
_PARTY_SUFFIX_RE = re.compile(r"\s*（[^（）]*）\s*$")
_META_KEY = "_meta"


@dataclass(frozen=True, order=False)
class Utterance:
    id: str
    seq: int
    date: dt.date
    meeting: str
    speaker: str
    text: str

    @property
    def session(self) -> tuple[dt.date, str]:
        return (self.date, self.meeting)

    def sort_key(self):
        return (self.date, self.meeting, self.seq)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "seq": self.seq,
            "date": self.date.isoformat(),
            "meeting": self.meeting,
            "speaker": self.speaker,
            "text": self.text,
        }


class Corpus:
    """Immutable, chronologically ordered collection of utterances.

    Iterates in ``(date, meeting, seq)`` order and indexes utterances by
    ``(date, meeting, speaker)``.
    """

    def __init__(self, utterances: Iterable[Utterance]):
        ordered = sorted(utterances, key=Utterance.sort_key)
        seen: set = set()
        ids: dict[str, Utterance] = {}
        for u in ordered:
            key = (u.date, u.meeting, u.seq)
            if key in seen:
                raise IntegrityError(
                    f"duplicate (date, meeting, seq) = ({u.date}, {u.meeting!r}, {u.seq})"
                )
            seen.add(key)
            if u.id in ids:
                raise IntegrityError(f"duplicate utterance id {u.id!r}")
            ids[u.id] = u
        self._utterances = tuple(ordered)
        self._by_id = ids
        index: dict[tuple, list[Utterance]] = {}
        sessions: dict[tuple, list[Utterance]] = {}
        for u in ordered:
            index.setdefault((u.date, u.meeting, u.speaker), []).append(u)
            sessions.setdefault(u.session, []).append(u)
        self._index = {k: tuple(v) for k, v in index.items()}
        self._by_pos = {(u.date, u.meeting, u.seq): u for u in ordered}
        self._sessions = {k: tuple(v) for k, v in sessions.items()}

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self._utterances)

    def __len__(self) -> int:
        return len(self._utterances)

    def __getitem__(self, i):
        return self._utterances[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self._utterances == other._utterances

    def __repr__(self) -> str:
        return f"Corpus({len(self)} utterances, {len(self._sessions)} sessions)"

    @property
    def utterances(self) -> tuple[Utterance, ...]:
        return self._utterances

    @property
    def index(self) -> dict:
        return dict(self._index)

    def get(self, utterance_id: str) -> Utterance:
        return self._by_id[utterance_id]

    def lookup(self, date: dt.date, meeting: str, speaker: str) -> tuple[Utterance, ...]:
        return self._index.get((date, meeting, speaker), ())

    def sessions(self) -> list[tuple[dt.date, str]]:
        return list(self._sessions)

    def session(self, date: dt.date, meeting: str) -> tuple[Utterance, ...]:
        return self._sessions.get((date, meeting), ())

    def next_of(self, u: Utterance) -> Utterance | None:
        """The utterance with ``seq + 1`` in the same session, if any."""
        return self._by_pos.get((u.date, u.meeting, u.seq + 1))

    def dump(self, path, meta: dict | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if meta is not None:
                fh.write(json.dumps({_META_KEY: meta}, ensure_ascii=False, sort_keys=True) + "\n")
            for u in self._utterances:
                fh.write(json.dumps(u.to_record(), ensure_ascii=False) + "\n")


def clean_text(text: str, noise_list: Sequence[str] = DEFAULT_NOISE) -> str:
    """Remove every noise literal, then collapse and trim whitespace."""
    for noise in noise_list:
        if noise:
            text = text.replace(noise, "")
    return _WS_RE.sub(" ", text).strip()


def _parse_date(value, path, line_no) -> dt.date:
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise ParseError(path, line_no, f"bad date {value!r}") from None


def _utterance_from_record(rec, path, line_no, noise_list) -> Utterance | None:
    if not isinstance(rec, dict):
        raise ParseError(path, line_no, "record is not an object")
    for key in ("id", "seq", "date", "meeting", "speaker", "text"):
        if key not in rec:
            raise ParseError(path, line_no, f"missing field {key!r}")
    seq = rec["seq"]
    if isinstance(seq, bool) or not isinstance(seq, int) or seq < 0:
        raise ParseError(path, line_no, f"seq must be a non-negative integer, got {seq!r}")
    for key in ("id", "meeting", "speaker", "text"):
        if not isinstance(rec[key], str):
            raise ParseError(path, line_no, f"field {key!r} must be a string")
    text = clean_text(rec["text"], noise_list)
    if not text:
        return None
    return Utterance(
        id=rec["id"],
        seq=seq,
        date=_parse_date(rec["date"], path, line_no),
        meeting=rec["meeting"],
        speaker=rec["speaker"].strip(),
        text=text,
    )


def load_corpus(path, noise_list: Sequence[str] = DEFAULT_NOISE) -> Corpus:
    """Read a JSON Lines minutes file into a cleaned, ordered Corpus.

    Utterances whose text is empty after noise removal are dropped.
    """
    utterances = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON ({exc.msg})") from None
            if isinstance(rec, dict) and _META_KEY in rec:
                continue
            u = _utterance_from_record(rec, path, line_no, noise_list)
            if u is not None:
                utterances.append(u)
    return Corpus(utterances)


@dataclass(frozen=True)
class SummaryTask:
    id: str
    date: dt.date
    meeting: str
    main_topic: str
    subtopic: str
    question_speaker: str
    answer_speaker: str
    question_length: int
    answer_length: int
    question_summary: str | None = None
    answer_summary: str | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def speaker(self, role: str) -> str:
        if role == "question":
            return self.question_speaker
        if role == "answer":
            return self.answer_speaker
        raise ContractError(f"role must be one of {ROLES}, got {role!r}")

    def budget(self, role: str) -> int:
        self.speaker(role)
        return self.question_length if role == "question" else self.answer_length

    def reference(self, role: str) -> str | None:
        self.speaker(role)
        return self.question_summary if role == "question" else self.answer_summary

    def main_topic_segments(self) -> list[str]:
        return [seg.strip() for seg in self.main_topic.split("<br>") if seg.strip()]


_TASK_FIELDS = {
    "id": "ID",
    "date": "Date",
    "meeting": "Meeting",
    "main_topic": "Main topic",
    "subtopic": "Subtopic",
    "question_speaker": "Question speaker",
    "answer_speaker": "Answer speaker",
    "question_length": "Question length",
    "answer_length": "Answer length",
}


def _optional_summary(value) -> str | None:
    if value is None:
        return None
    value = str(value)
    if value.strip() in ("", "None"):
        return None
    return value


def task_from_record(rec: dict) -> SummaryTask:
    if not isinstance(rec, dict):
        raise SchemaError("<record>")
    record_id = rec.get("ID")
    if not isinstance(record_id, str) or not record_id:
        raise SchemaError("ID", record_id)
    values = {}
    for attr, key in _TASK_FIELDS.items():
        value = rec.get(key)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise SchemaError(key, record_id)
        values[attr] = value
    for attr in ("question_length", "answer_length"):
        value = values[attr]
        if isinstance(value, str) and value.strip().isdigit():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            raise SchemaError(_TASK_FIELDS[attr], record_id)
        values[attr] = value
    try:
        values["date"] = dt.date.fromisoformat(str(values["date"]))
    except ValueError:
        raise SchemaError("Date", record_id) from None
    known = set(_TASK_FIELDS.values()) | {"Question summary", "Answer summary"}
    return SummaryTask(
        **values,
        question_summary=_optional_summary(rec.get("Question summary")),
        answer_summary=_optional_summary(rec.get("Answer summary")),
        extra={k: v for k, v in rec.items() if k not in known},
    )


def task_to_record(task: SummaryTask) -> dict:
    rec = {key: getattr(task, attr) for attr, key in _TASK_FIELDS.items()}
    rec["Date"] = task.date.isoformat()
    rec["Question summary"] = task.question_summary
    rec["Answer summary"] = task.answer_summary
    rec.update(task.extra)
    return rec


def load_tasks(path) -> list[SummaryTask]:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    if not raw.strip():
        return []
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(data, list):
        raise ParseError(path, 1, "task file must contain a JSON array")
    return [task_from_record(rec) for rec in data]


def strip_party_suffix(speaker: str) -> str:
    """``"酒井大史（民主党）"`` -> ``"酒井大史"``."""
    return _PARTY_SUFFIX_RE.sub("", speaker).strip()


def candidate_pool(corpus: Corpus, task: SummaryTask, role: str) -> list[Utterance]:
    speaker = strip_party_suffix(task.speaker(role))
    pool = list(corpus.lookup(task.date, task.meeting, speaker))
    if not pool:
        raise NoCandidatesError(task.id, role)
    return pool
