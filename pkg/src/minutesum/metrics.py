"""Embedding separation metrics and ROUGE-1 recall."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import DEFAULT_NOISE
from .embedding import EmbeddingBackend, cosine
from .errors import ContractError

UNITS = ("char", "token")


@dataclass(frozen=True)
class DiffReport:
    per_triplet_diff: list
    mean_diff: float
    accuracy: float
    n: int
    strict: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_diff": self.mean_diff,
            "accuracy": self.accuracy,
            "strict": self.strict,
            "per_triplet_diff": list(self.per_triplet_diff),
        }


def diff_report(diffs, strict: bool = False) -> DiffReport:
    diffs = [float(d) for d in diffs]
    if not diffs:
        raise ContractError("no triplets to evaluate")
    correct = sum(1 for d in diffs if (d > 0 if strict else d >= 0))
    return DiffReport(diffs, float(np.mean(diffs)), correct / len(diffs), len(diffs), strict)


def eval_diff(model, backend: EmbeddingBackend, triplets: Sequence, strict: bool = False) -> DiffReport:
    """Cosine(target, positive) - cosine(target, negative) for each triplet.

    With ``strict=False`` a zero difference counts as correct.
    """
    if not triplets:
        raise ContractError("no triplets to evaluate")
    space = backend if model is None else model.embedder(backend)
    diffs = []
    for t in triplets:
        ft = space.embed(t.target.text, t.target.id)
        fp = space.embed(t.positive.text, t.positive.id)
        fn = space.embed(t.negative.text, t.negative.id)
        diffs.append(cosine(ft, fp) - cosine(ft, fn))
    return diff_report(diffs, strict)


@dataclass(frozen=True)
class RougeReport:
    recall: float
    overlap_count: int
    reference_count: int
    unit: str


def unigrams(text: str, unit: str = "char", noise_list: Sequence[str] = ()) -> list[str]:
    for noise in noise_list:
        if noise:
            text = text.replace(noise, " ")
    if unit == "char":
        return [ch for ch in text if not ch.isspace()]
    if unit == "token":
        return text.split()
    raise ContractError(f"unit must be one of {UNITS}, got {unit!r}")


def rouge1_recall(
    candidate: str,
    reference: str,
    unit: str = "char",
    noise_list: Sequence[str] = DEFAULT_NOISE,
) -> RougeReport:
    """Clipped unigram recall of ``candidate`` against ``reference``.

    Noise literals are removed from the reference only, which keeps recall
    monotone in the candidate.
    """
    ref = Counter(unigrams(reference, unit, noise_list))
    total = sum(ref.values())
    if total == 0:
        raise ContractError("reference has no unigrams")
    cand = Counter(unigrams(candidate, unit))
    overlap = sum(min(count, cand[gram]) for gram, count in ref.items())
    return RougeReport(overlap / total, overlap, total, unit)
