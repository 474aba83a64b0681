"""Topic-aware MMR selection of utterances under a character budget.

The score of candidate ``i`` given selected set ``S`` is::

    k * (lam * cos(D_i, Q) - (1 - lam) * max_{j in S} cos(D_i, D_j))
      + m * cos(D_i, MT) + s * cos(D_i, ST)

where ``Q`` is the mean pool embedding, ``MT`` the mean embedding of the
main-topic segments (split on ``<br>``) and ``ST`` the subtopic embedding.
With an empty ``S`` the redundancy term is zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import ROLES, Corpus, SummaryTask, Utterance, candidate_pool
from .embedding import EmbeddingBackend, cosine, mean_vector
from .errors import ContractError, DataError, NoCandidatesError

SEPARATOR = "/"
QUERY_SCOPES = ("pool", "meeting")


@dataclass(frozen=True)
class MmrConfig:
    lam: float = 0.5
    k: float = 0.2
    m: float = 0.3
    s: float = 0.5
    chars_per_key: int = 50
    query_scope: str = "pool"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ContractError("lam must lie in [0, 1]")
        if self.chars_per_key < 1:
            raise ContractError("chars_per_key must be positive")
        if self.query_scope not in QUERY_SCOPES:
            raise ContractError(f"query_scope must be one of {QUERY_SCOPES}")


def key_size(length: int, chars_per_key: int = 50) -> int:
    """Number of utterances to extract for a character budget (ceil, at least 1)."""
    if length < 1 or chars_per_key < 1:
        raise ContractError("length and chars_per_key must be positive")
    return max(1, -(-length // chars_per_key))


@dataclass
class SelectionState:
    vectors: np.ndarray
    items: list
    query: np.ndarray
    mt_vec: np.ndarray
    st_vec: np.ndarray
    selected: list = field(default_factory=list)
    scores: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.items)
        self._sim = np.full((n, n), np.nan)
        self.rel_q = np.array([cosine(v, self.query) for v in self.vectors])
        self.rel_mt = np.array([cosine(v, self.mt_vec) for v in self.vectors])
        self.rel_st = np.array([cosine(v, self.st_vec) for v in self.vectors])

    def __len__(self) -> int:
        return len(self.items)

    def sim(self, i: int, j: int) -> float:
        if np.isnan(self._sim[i, j]):
            self._sim[i, j] = self._sim[j, i] = cosine(self.vectors[i], self.vectors[j])
        return float(self._sim[i, j])

    def redundancy(self, i: int) -> float:
        if not self.selected:
            return 0.0
        return max(self.sim(i, j) for j in self.selected)

    @property
    def selected_items(self) -> list:
        return [self.items[i] for i in self.selected]


def mmr_score(state: SelectionState, i: int, cfg: MmrConfig = MmrConfig()) -> float:
    if i in state.selected:
        raise ContractError(f"candidate {i} is already selected")
    if not 0 <= i < len(state):
        raise ContractError(f"candidate index {i} out of range")
    relevance = cfg.lam * state.rel_q[i] - (1.0 - cfg.lam) * state.redundancy(i)
    return float(cfg.k * relevance + cfg.m * state.rel_mt[i] + cfg.s * state.rel_st[i])


def _seq(item) -> int:
    return getattr(item, "seq", 0)


def topic_vector(backend: EmbeddingBackend, topic: str) -> np.ndarray:
    segments = [seg.strip() for seg in topic.split("<br>") if seg.strip()]
    if not segments:
        raise DataError(f"topic {topic!r} has no content")
    return mean_vector([backend.embed(seg) for seg in segments])


def greedy(state: SelectionState, n: int, cfg: MmrConfig) -> SelectionState:
    """Run the arg-max loop on a prepared state; ties go to the lowest seq."""
    while len(state.selected) < min(n, len(state)):
        best, best_score = None, None
        for i in range(len(state)):
            if i in state.selected:
                continue
            score = mmr_score(state, i, cfg)
            if best is None or score > best_score or (
                score == best_score and _seq(state.items[i]) < _seq(state.items[best])
            ):
                best, best_score = i, score
        state.selected.append(best)
        state.scores.append(best_score)
    return state


def select(
    pool: Sequence[Utterance],
    mt: str,
    st: str,
    n: int,
    backend: EmbeddingBackend,
    cfg: MmrConfig = MmrConfig(),
    query_pool: Sequence[Utterance] | None = None,
) -> SelectionState:
    """Greedily pick up to ``n`` utterances from ``pool``.

    ``query_pool`` overrides the utterances averaged into the query vector
    (the pool itself by default). Candidates the backend cannot embed are
    left out of the pool.
    """
    if n < 1:
        raise ContractError("n must be at least 1")
    items, vecs = [], []
    for u in pool:
        try:
            vecs.append(backend.embed(u.text, u.id))
        except DataError:
            continue
        items.append(u)
    if not items:
        raise NoCandidatesError(None, "pool")
    if query_pool is None:
        query = mean_vector(vecs)
    else:
        qv = []
        for u in query_pool:
            try:
                qv.append(backend.embed(u.text, u.id))
            except DataError:
                continue
        query = mean_vector(qv) if qv else mean_vector(vecs)
    state = SelectionState(
        vectors=np.vstack(vecs),
        items=items,
        query=query,
        mt_vec=topic_vector(backend, mt),
        st_vec=topic_vector(backend, st),
    )
    return greedy(state, n, cfg)


def fit_budget(texts: Sequence[str], budget: int) -> tuple[str, int]:
    """Join ``texts`` with ``/`` within ``budget`` characters.

    Whole texts are dropped from the end while the join is too long; a lone
    text that still exceeds the budget is truncated. Returns the summary and
    the number of texts kept.
    """
    kept = list(texts)
    while len(kept) > 1 and len(SEPARATOR.join(kept)) > budget:
        kept.pop()
    summary = SEPARATOR.join(kept)[:budget]
    return summary, len(kept)


@dataclass
class SummaryOutput:
    task_id: str
    question_summary: str
    answer_summary: str
    selected_ids: dict
    scores: dict
    flags: list = field(default_factory=list)

    def summary(self, role: str) -> str:
        return self.question_summary if role == "question" else self.answer_summary

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "question_summary": self.question_summary,
            "answer_summary": self.answer_summary,
            "selected_ids": self.selected_ids,
            "scores": self.scores,
            "flags": self.flags,
        }


def summarize_role(corpus: Corpus, task: SummaryTask, role: str, backend: EmbeddingBackend, cfg: MmrConfig):
    pool = candidate_pool(corpus, task, role)
    query_pool = corpus.session(task.date, task.meeting) if cfg.query_scope == "meeting" else None
    budget = task.budget(role)
    state = select(
        pool, task.main_topic, task.subtopic, key_size(budget, cfg.chars_per_key), backend, cfg, query_pool
    )
    chosen = sorted(zip(state.selected_items, state.scores), key=lambda p: p[0].seq)
    summary, n_kept = fit_budget([u.text for u, _ in chosen], budget)
    kept = chosen[:n_kept]
    return summary, [u.id for u, _ in kept], [score for _, score in kept]


def summarize_task(corpus: Corpus, task: SummaryTask, backend: EmbeddingBackend, cfg: MmrConfig = MmrConfig()) -> SummaryOutput:
    out = {}
    ids, scores, flags = {}, {}, []
    for role in ROLES:
        try:
            out[role], ids[role], scores[role] = summarize_role(corpus, task, role, backend, cfg)
        except NoCandidatesError:
            out[role], ids[role], scores[role] = "", [], []
            flags.append(f"no_candidates:{role}")
    return SummaryOutput(task.id, out["question"], out["answer"], ids, scores, flags)


def write_summaries(path, outputs: Sequence[SummaryOutput], meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False, sort_keys=True) + "\n")
        for o in outputs:
            fh.write(json.dumps(o.to_record(), ensure_ascii=False) + "\n")


def read_summaries(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if "_meta" not in rec:
                    records.append(rec)
    return records
