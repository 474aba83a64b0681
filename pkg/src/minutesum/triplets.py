"""Triplet construction from chronologically ordered minutes.

A target utterance and the utterance right after it in the same session form
a positive pair when both come from the same speaker and their cosine is at
least ``pos_threshold``. The negative is sampled uniformly from other
sessions (different date or meeting) until one has cosine at most
``neg_threshold`` with the target.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import Corpus, Utterance
from .embedding import EmbeddingBackend, cosine
from .errors import BuildError, DataError, ParseError

_META_KEY = "_meta"


@dataclass(frozen=True)
class Triplet:
    target: Utterance
    positive: Utterance
    negative: Utterance
    pos_sim: float
    neg_sim: float

    def to_record(self) -> dict:
        return {
            "target_id": self.target.id,
            "positive_id": self.positive.id,
            "negative_id": self.negative.id,
            "pos_sim": self.pos_sim,
            "neg_sim": self.neg_sim,
        }


@dataclass
class BuildReport:
    backend: str
    pos_threshold: float
    neg_threshold: float
    seed: int
    max_attempts: int
    pairs_checked: int = 0
    positive_pairs: int = 0
    emitted: int = 0
    skipped: int = 0
    skipped_targets: list = field(default_factory=list)
    unembeddable: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TripletSplit:
    train: list
    dev: list
    test: list
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.dev), len(self.test)


def _stream_seed(seed: int, key: str) -> list[int]:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return [int(seed) & 0xFFFFFFFFFFFFFFFF, int.from_bytes(digest, "little")]


def target_rng(seed: int, target_id: str) -> np.random.Generator:
    """Per-target negative-sampling stream; independent of iteration order."""
    return np.random.default_rng(_stream_seed(seed, target_id))


def build_triplets(
    corpus: Corpus,
    backend: EmbeddingBackend,
    pos_threshold: float = 0.5,
    neg_threshold: float = 0.9,
    seed: int = 0,
    max_attempts: int = 100,
) -> tuple[list[Triplet], BuildReport]:
    """Build triplets and a report of emitted/skipped counts.

    Utterances the backend cannot embed are excluded from every role and
    listed in the report.
    """
    if max_attempts < 1:
        raise BuildError("max_attempts must be positive")
    report = BuildReport(backend.name, pos_threshold, neg_threshold, seed, max_attempts)

    vecs: dict[str, np.ndarray] = {}
    for u in corpus:
        try:
            vecs[u.id] = backend.embed(u.text, u.id)
        except DataError:
            report.unembeddable.append(u.id)
    usable = [u for u in corpus if u.id in vecs]
    if len({u.session for u in usable}) < 2:
        raise BuildError("negatives need utterances from at least two (date, meeting) sessions")

    others: dict[tuple, list[Utterance]] = {}
    for session in {u.session for u in usable}:
        others[session] = [u for u in usable if u.session != session]

    triplets = []
    for target in usable:
        positive = corpus.next_of(target)
        if positive is None or positive.id not in vecs:
            continue
        report.pairs_checked += 1
        if positive.speaker != target.speaker:
            continue
        pos_sim = cosine(vecs[target.id], vecs[positive.id])
        if pos_sim < pos_threshold:
            continue
        report.positive_pairs += 1

        pool = others[target.session]
        rng = target_rng(seed, target.id)
        negative = None
        for _ in range(max_attempts):
            cand = pool[int(rng.integers(len(pool)))]
            neg_sim = cosine(vecs[target.id], vecs[cand.id])
            if neg_sim <= neg_threshold:
                negative = cand
                break
        if negative is None:
            report.skipped += 1
            report.skipped_targets.append(target.id)
            continue
        triplets.append(Triplet(target, positive, negative, pos_sim, neg_sim))
    report.emitted = len(triplets)
    return triplets, report


def split_sizes(n: int) -> tuple[int, int, int]:
    """80/10/10 by count; dev and test get equal shares, the rest goes to train."""
    held_out = n - (8 * n) // 10
    dev = test = held_out // 2
    return n - dev - test, dev, test


def split_triplets(ts: list[Triplet], seed: int = 0) -> TripletSplit:
    n_train, n_dev, _ = split_sizes(len(ts))
    order = np.random.default_rng(seed).permutation(len(ts))
    shuffled = [ts[i] for i in order]
    return TripletSplit(
        train=shuffled[:n_train],
        dev=shuffled[n_train : n_train + n_dev],
        test=shuffled[n_train + n_dev :],
        seed=seed,
    )


def write_triplets(path, triplets: list[Triplet], meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({_META_KEY: meta}, ensure_ascii=False, sort_keys=True) + "\n")
        for t in triplets:
            fh.write(json.dumps(t.to_record(), ensure_ascii=False) + "\n")


def read_triplets(path, corpus: Corpus) -> list[Triplet]:
    triplets = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON ({exc.msg})") from None
            if _META_KEY in rec:
                continue
            try:
                triplets.append(
                    Triplet(
                        corpus.get(rec["target_id"]),
                        corpus.get(rec["positive_id"]),
                        corpus.get(rec["negative_id"]),
                        float(rec["pos_sim"]),
                        float(rec["neg_sim"]),
                    )
                )
            except KeyError as exc:
                raise ParseError(path, line_no, f"unknown utterance or field {exc}") from None
    return triplets
