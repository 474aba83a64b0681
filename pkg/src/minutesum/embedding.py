"""Sentence embedding backends and vector helpers.

Every backend maps a text to a unit-norm ``float64`` vector of fixed
dimension and is deterministic. Three kinds exist:

* ``NgramEmbedder``: hashed character bigram/trigram term frequencies.
* ``PrecomputedEmbedder``: vectors produced offline by any external encoder,
  read from JSON Lines ``{"id": ..., "v": [...]}``.
* ``AdaptedEmbedder``: a trained linear adapter on top of another backend.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DegenerateInputError, LookupMissError, ParseError

_STRIP_CATEGORIES = ("P", "Z", "C", "S")


def _is_feature_char(ch: str) -> bool:
    return not unicodedata.category(ch).startswith(_STRIP_CATEGORIES)


def char_ngrams(text: str, orders: Sequence[int] = (2, 3)) -> list[str]:
    """Character n-grams taken inside runs of letters/digits.

    Punctuation, symbols, whitespace and control characters split runs and
    never appear inside an n-gram.
    """
    runs, cur = [], []
    for ch in unicodedata.normalize("NFKC", text):
        if _is_feature_char(ch):
            cur.append(ch)
        elif cur:
            runs.append("".join(cur))
            cur = []
    if cur:
        runs.append("".join(cur))
    grams = []
    for run in runs:
        for n in orders:
            grams.extend(run[i : i + n] for i in range(len(run) - n + 1))
    return grams


def _bucket(gram: str, dim: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def _unit(v: np.ndarray, what: str = "vector") -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm):
        raise DegenerateInputError(f"{what} has non-finite entries")
    if norm == 0.0:
        raise DegenerateInputError(f"{what} is the zero vector")
    out = v / norm
    out.setflags(write=False)
    return out


class EmbeddingBackend:
    name: str
    dim: int
    kind: str

    def embed(self, text: str, key: str | None = None) -> np.ndarray:
        raise NotImplementedError

    def embed_many(self, texts: Iterable[str], keys: Iterable[str | None] | None = None) -> np.ndarray:
        texts = list(texts)
        keys = [None] * len(texts) if keys is None else list(keys)
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([self.embed(t, k) for t, k in zip(texts, keys)])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, dim={self.dim})"


class NgramEmbedder(EmbeddingBackend):
    kind = "baseline-ngram"

    def __init__(self, dim: int = 256, orders: Sequence[int] = (2, 3)):
        if dim <= 0:
            raise ContractError("dim must be positive")
        self.dim = int(dim)
        self.orders = tuple(orders)
        self.name = f"ngram-{''.join(map(str, self.orders))}-d{self.dim}"
        self._cache: dict[str, np.ndarray] = {}

    def features(self, text: str) -> np.ndarray:
        counts = np.zeros(self.dim)
        for gram in char_ngrams(text, self.orders):
            counts[_bucket(gram, self.dim)] += 1.0
        return counts

    def embed(self, text: str, key: str | None = None) -> np.ndarray:
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        if not text or not text.strip():
            raise DegenerateInputError("cannot embed empty text")
        counts = self.features(text)
        if not counts.any():
            raise DegenerateInputError(f"no character n-grams in {text!r}")
        vec = _unit(counts)
        self._cache[text] = vec
        return vec


class PrecomputedEmbedder(EmbeddingBackend):
    """Lookup table of externally computed vectors.

    ``embed`` looks up ``key`` first (an utterance id), then the text itself,
    so topic strings can be stored under their literal text as id.
    """

    kind = "precomputed"

    def __init__(self, vectors: dict[str, Sequence[float]], name: str = "precomputed"):
        if not vectors:
            raise ContractError("precomputed backend needs at least one vector")
        table = {}
        dim = None
        for vid, values in vectors.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim != 1 or (dim is not None and arr.shape[0] != dim):
                raise ContractError(f"vector {vid!r} has inconsistent shape {arr.shape}")
            dim = arr.shape[0]
            table[vid] = _unit(arr, f"vector {vid!r}")
        self.dim = int(dim)
        self.name = name
        self._table = table

    @classmethod
    def load(cls, path, name: str | None = None) -> "PrecomputedEmbedder":
        vectors = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    vectors[str(rec["id"])] = rec["v"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ParseError(path, line_no, f"bad vector record ({exc})") from None
        return cls(vectors, name=name or f"file:{path}")

    def embed(self, text: str, key: str | None = None) -> np.ndarray:
        if key is not None and key in self._table:
            return self._table[key]
        if text in self._table:
            return self._table[text]
        raise LookupMissError(f"no precomputed vector for id {key!r}")


class AdaptedEmbedder(EmbeddingBackend):
    """``normalize(W @ base.embed(text))``."""

    kind = "adapted"

    def __init__(self, base: EmbeddingBackend, weights: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[1] != base.dim:
            raise ContractError(f"adapter shape {weights.shape} does not fit base dim {base.dim}")
        self.base = base
        self.weights = weights
        self.dim = weights.shape[0]
        self.name = f"adapted({base.name})"

    def embed(self, text: str, key: str | None = None) -> np.ndarray:
        return _unit(self.weights @ self.base.embed(text, key), "adapted vector")


def save_vectors(path, items: Iterable[tuple[str, np.ndarray]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for vid, v in items:
            fh.write(json.dumps({"id": vid, "v": [float(x) for x in v]}, ensure_ascii=False) + "\n")


def embed(backend: EmbeddingBackend, text: str, key: str | None = None) -> np.ndarray:
    return backend.embed(text, key)


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ContractError("cosine of a zero vector is undefined")
    return float(min(1.0, max(-1.0, float(a @ b) / (na * nb))))


def mean_vector(vs: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of the vectors, L2-normalized."""
    if len(vs) == 0:
        raise ContractError("mean of an empty list")
    mat = np.vstack([np.asarray(v, dtype=np.float64) for v in vs])
    return _unit(mat.mean(axis=0), "mean vector")
