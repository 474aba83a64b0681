"""Margin triplet training of a linear adapter over frozen base embeddings.

The adapted embedding of a text is ``normalize(W @ base(text))``. Training
minimizes ``max(0, |f(t) - f(p)| - |f(t) - f(n)| + margin)`` with minibatch
Adam, a linear warm-up, and checkpoint selection on dev accuracy.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .embedding import AdaptedEmbedder, EmbeddingBackend
from .errors import ContractError, NumericError, ParseError
from .metrics import DiffReport, diff_report
from .triplets import Triplet, TripletSplit

log = logging.getLogger(__name__)

_ADAM_BETAS = (0.9, 0.999)
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 1.0
    batch_size: int = 16
    learning_rate: float = 2e-5
    epochs: int = 3
    warmup_fraction: float = 0.1
    seed: int = 0
    init_noise: float = 1e-3

    def __post_init__(self):
        if self.margin < 0:
            raise ContractError("margin must be non-negative")
        if self.batch_size < 1:
            raise ContractError("batch_size must be positive")
        if not self.learning_rate > 0:
            raise ContractError("learning_rate must be positive")
        if self.epochs < 0:
            raise ContractError("epochs must be non-negative")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ContractError("warmup_fraction must lie in [0, 1]")


@dataclass
class AdapterModel:
    weights: np.ndarray
    backend_name: str = ""
    config: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def identity(cls, dim: int, noise: float = 0.0, seed: int = 0, backend_name: str = "") -> "AdapterModel":
        w = np.eye(dim)
        if noise:
            w = w + noise * np.random.default_rng(seed).standard_normal((dim, dim))
        return cls(w, backend_name)

    def embedder(self, backend: EmbeddingBackend) -> AdaptedEmbedder:
        return AdaptedEmbedder(backend, self.weights)

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Adapt and row-normalize base vectors (``x`` is ``n x in_dim``)."""
        z = np.atleast_2d(x) @ self.weights.T
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    def save(self, path) -> None:
        header = {
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "backend": self.backend_name,
            "config": self.config,
            "history": self.history,
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
            for row in self.weights:
                fh.write(json.dumps([float(x) for x in row]) + "\n")

    @classmethod
    def load(cls, path) -> "AdapterModel":
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in fh if line.strip()]
        if not lines:
            raise ParseError(path, 1, "empty model file")
        try:
            header = json.loads(lines[0])
            rows = [json.loads(line) for line in lines[1:]]
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, f"invalid JSON ({exc.msg})") from None
        w = np.asarray(rows, dtype=np.float64)
        if w.shape != (header["out_dim"], header["in_dim"]):
            raise ParseError(path, 1, f"matrix shape {w.shape} disagrees with header")
        return cls(w, header.get("backend", ""), header.get("config", {}), header.get("history", {}))


def normalized_distances(a: float, b: float) -> tuple[float, float]:
    """Softmax over the two distances: ``(e^a, e^b) / (e^a + e^b)``."""
    d_plus = 1.0 / (1.0 + math.exp(b - a)) if b - a < 700 else 0.0
    return d_plus, 1.0 - d_plus


def _vectors(model, backend, t: Triplet):
    space = backend if model is None else model.embedder(backend)
    return (
        space.embed(t.target.text, t.target.id),
        space.embed(t.positive.text, t.positive.id),
        space.embed(t.negative.text, t.negative.id),
    )


def triplet_distances(model: AdapterModel | None, backend: EmbeddingBackend, t: Triplet) -> tuple[float, float]:
    ft, fp, fn = _vectors(model, backend, t)
    return normalized_distances(float(np.linalg.norm(ft - fp)), float(np.linalg.norm(ft - fn)))


def triplet_loss(model: AdapterModel | None, backend: EmbeddingBackend, t: Triplet, margin: float = 1.0) -> float:
    if margin < 0:
        raise ContractError("margin must be non-negative")
    ft, fp, fn = _vectors(model, backend, t)
    return max(0.0, float(np.linalg.norm(ft - fp)) - float(np.linalg.norm(ft - fn)) + margin)


def loss_and_grad(w: np.ndarray, xt: np.ndarray, xp: np.ndarray, xn: np.ndarray, margin: float):
    """Mean hinge loss over a batch and its gradient with respect to ``w``.

    ``xt``, ``xp``, ``xn`` hold base vectors row-wise.
    """
    zs = [x @ w.T for x in (xt, xp, xn)]
    norms = [np.linalg.norm(z, axis=1, keepdims=True) for z in zs]
    ft, fp, fn = (z / n for z, n in zip(zs, norms))
    dp, dn = ft - fp, ft - fn
    a = np.linalg.norm(dp, axis=1)
    b = np.linalg.norm(dn, axis=1)
    hinge = a - b + margin
    active = hinge > 0
    batch = xt.shape[0]
    loss = float(np.where(active, hinge, 0.0).sum() / batch)

    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where((active & (a > 0))[:, None], dp / a[:, None], 0.0)
        un = np.where((active & (b > 0))[:, None], dn / b[:, None], 0.0)
    grads_f = (up - un, -up, un)
    grad = np.zeros_like(w)
    for g, f, n, x in zip(grads_f, (ft, fp, fn), norms, (xt, xp, xn)):
        gz = (g - f * np.sum(f * g, axis=1, keepdims=True)) / n
        grad += gz.T @ x
    return loss, grad / batch


def _base_matrix(backend, triplets):
    def rows(attr):
        return np.vstack([backend.embed(getattr(t, attr).text, getattr(t, attr).id) for t in triplets])

    return rows("target"), rows("positive"), rows("negative")


def _diffs(w, mats) -> np.ndarray:
    xt, xp, xn = mats
    model = AdapterModel(w)
    ft, fp, fn = (model.transform(x) for x in (xt, xp, xn))
    pos = np.clip(np.sum(ft * fp, axis=1), -1.0, 1.0)
    neg = np.clip(np.sum(ft * fn, axis=1), -1.0, 1.0)
    return pos - neg


def train(split: TripletSplit, backend: EmbeddingBackend, cfg: TrainConfig = TrainConfig()) -> AdapterModel:
    """Fit an adapter on ``split.train``; keep the checkpoint with best dev accuracy.

    Checkpoints are the initial model and the end of every epoch; ties on
    accuracy go to the larger mean dev diff, then to the later checkpoint.
    """
    if not split.train:
        raise ContractError("training split is empty")
    dim = backend.dim
    w = AdapterModel.identity(dim, cfg.init_noise, cfg.seed).weights
    train_mats = _base_matrix(backend, split.train)
    dev_mats = _base_matrix(backend, split.dev) if split.dev else None

    n = len(split.train)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    warmup_steps = int(cfg.warmup_fraction * steps_per_epoch)
    rng = np.random.default_rng(cfg.seed)
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    beta1, beta2 = _ADAM_BETAS

    def epoch_loss(weights):
        return loss_and_grad(weights, *train_mats, cfg.margin)[0]

    def dev_report(weights) -> DiffReport | None:
        return diff_report(_diffs(weights, dev_mats)) if dev_mats is not None else None

    losses = [epoch_loss(w)]
    dev_acc, dev_diff = [], []
    best_w, best_key = w.copy(), None
    rep = dev_report(w)
    if rep is not None:
        dev_acc.append(rep.accuracy)
        dev_diff.append(rep.mean_diff)
        best_key = (rep.accuracy, rep.mean_diff)

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            loss, grad = loss_and_grad(w, *(x[idx] for x in train_mats), cfg.margin)
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                raise NumericError(f"non-finite loss or gradient in epoch {epoch}, batch {b}")
            step += 1
            lr = cfg.learning_rate * (min(1.0, step / warmup_steps) if warmup_steps else 1.0)
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad**2
            m_hat = m / (1 - beta1**step)
            v_hat = v / (1 - beta2**step)
            with np.errstate(invalid="ignore", over="ignore"):
                w = w - lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
            if not np.all(np.isfinite(w)):
                raise NumericError(f"non-finite weights after epoch {epoch}, batch {b}")
        losses.append(epoch_loss(w))
        rep = dev_report(w)
        if rep is None:
            best_w = w.copy()
        else:
            dev_acc.append(rep.accuracy)
            dev_diff.append(rep.mean_diff)
            key = (rep.accuracy, rep.mean_diff)
            if key >= best_key:
                best_w, best_key = w.copy(), key
        log.info("epoch %d: train loss %.6f", epoch, losses[-1])

    history = {"train_loss": losses, "dev_accuracy": dev_acc, "dev_mean_diff": dev_diff}
    return AdapterModel(best_w, backend.name, asdict(cfg), history)
