import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minutesum.corpus import Utterance
from minutesum.embedding import NgramEmbedder, PrecomputedEmbedder
from minutesum.errors import ContractError, NumericError
from minutesum.metrics import eval_diff
from minutesum.synthetic import separable_fixture
from minutesum.trainer import (
    AdapterModel,
    TrainConfig,
    loss_and_grad,
    normalized_distances,
    train,
    triplet_distances,
    triplet_loss,
)
from minutesum.triplets import Triplet, TripletSplit, split_triplets

DAY = dt.date(2020, 1, 1)


def planted(t, p, n):
    """Triplet over three utterances whose vectors are given directly."""
    us = [Utterance(k, i, DAY, "m", "A", k) for i, k in enumerate(("t", "p", "n"))]
    backend = PrecomputedEmbedder({"t": t, "p": p, "n": n})
    return Triplet(us[0], us[1], us[2], 0.0, 0.0), backend


def at_angle(theta):
    return [math.cos(theta), math.sin(theta)]


def angle_for_distance(d):
    # chord length d on the unit circle
    return 2 * math.asin(d / 2)


def test_defaults():
    cfg = TrainConfig()
    assert (cfg.margin, cfg.batch_size, cfg.learning_rate, cfg.epochs, cfg.warmup_fraction) == (1.0, 16, 2e-5, 3, 0.1)


def test_distances_symmetric_case():
    t, backend = planted([1, 0], [0, 1], [0, 1])
    assert triplet_distances(None, backend, t) == pytest.approx((0.5, 0.5))


def test_distances_limit():
    assert normalized_distances(0.0, 50.0)[0] < 1e-20
    assert normalized_distances(0.0, 50.0)[1] == pytest.approx(1.0)


def test_distances_hand_values():
    t, backend = planted([1, 0], at_angle(angle_for_distance(1.0)), [-1, 0])
    d_plus, d_minus = triplet_distances(None, backend, t)
    assert d_plus == pytest.approx(math.e / (math.e + math.e**2), abs=1e-12)
    assert d_plus == pytest.approx(0.2689, abs=1e-4)
    assert d_plus + d_minus == 1.0


@given(st.floats(0, 2), st.floats(0, 2))
def test_distances_sum_to_one(a, b):
    d_plus, d_minus = normalized_distances(a, b)
    assert abs(d_plus + d_minus - 1.0) <= 1e-12
    assert 0.0 <= d_plus <= 1.0


def test_loss_examples():
    t, backend = planted([1, 0], [1, 0], [-1, 0])
    assert triplet_loss(None, backend, t, 1.0) == 0.0
    t, backend = planted([1, 0], [0, 1], [0, -1])
    assert triplet_loss(None, backend, t, 1.0) == pytest.approx(1.0)
    t, backend = planted([1, 0], at_angle(angle_for_distance(0.4)), at_angle(-angle_for_distance(0.9)))
    assert triplet_loss(None, backend, t, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_negative_margin_rejected():
    t, backend = planted([1, 0], [0, 1], [0, -1])
    with pytest.raises(ContractError):
        triplet_loss(None, backend, t, -0.1)


@given(st.integers(0, 10_000))
def test_loss_nonnegative_and_zero_means_margin_met(seed):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((3, 4))
    t, backend = planted(*vecs)
    margin = float(rng.uniform(0, 1.5))
    loss = triplet_loss(None, backend, t, margin)
    assert loss >= 0
    if loss == 0:
        f = [backend.embed(k, k) for k in "tpn"]
        assert np.linalg.norm(f[0] - f[2]) - np.linalg.norm(f[0] - f[1]) >= margin - 1e-12


def finite_difference(w, xs, margin, h=1e-6):
    grad = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        wp, wm = w.copy(), w.copy()
        wp[idx] += h
        wm[idx] -= h
        grad[idx] = (loss_and_grad(wp, *xs, margin)[0] - loss_and_grad(wm, *xs, margin)[0]) / (2 * h)
    return grad


def random_instance(rng, dim=8, batch=1):
    w = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
    xs = tuple(np.abs(rng.standard_normal((batch, dim))) for _ in range(3))
    return w, xs


def hinge_values(w, xs, margin):
    f = [AdapterModel(w).transform(x) for x in xs]
    return np.linalg.norm(f[0] - f[1], axis=1) - np.linalg.norm(f[0] - f[2], axis=1) + margin


@pytest.mark.parametrize("batch", [1, 4])
def test_gradient_matches_finite_differences(batch):
    rng = np.random.default_rng(batch)
    checked = 0
    while checked < 5:
        w, xs = random_instance(rng, batch=batch)
        if np.min(np.abs(hinge_values(w, xs, 1.0))) < 1e-3:
            continue
        analytic = loss_and_grad(w, *xs, 1.0)[1]
        numeric = finite_difference(w, xs, 1.0)
        assert np.linalg.norm(analytic - numeric) <= 1e-4 * max(np.linalg.norm(numeric), 1e-12)
        checked += 1


def test_batch_loss_matches_per_triplet_loss():
    rng = np.random.default_rng(5)
    w, xs = random_instance(rng, dim=6, batch=1)
    us = [Utterance(k, i, DAY, "m", "A", k) for i, k in enumerate("tpn")]
    backend = PrecomputedEmbedder({k: x[0] for k, x in zip("tpn", xs)})
    t = Triplet(*us, 0.0, 0.0)
    assert loss_and_grad(w, *xs, 1.0)[0] == pytest.approx(triplet_loss(AdapterModel(w), backend, t, 1.0), abs=1e-12)


# -- training ----------------------------------------------------------------


@pytest.fixture(scope="module")
def separable():
    _, ts = separable_fixture(200, seed=1)
    return split_triplets(ts, seed=0), NgramEmbedder(256)


def test_zero_epochs_returns_initial_model(separable):
    split, backend = separable
    cfg = TrainConfig(epochs=0, seed=4)
    model = train(split, backend, cfg)
    expected = AdapterModel.identity(256, cfg.init_noise, 4).weights
    assert np.array_equal(model.weights, expected)


def test_same_seed_same_weights(separable):
    split, backend = separable
    cfg = TrainConfig(learning_rate=1e-3, epochs=1, seed=2)
    assert np.array_equal(train(split, backend, cfg).weights, train(split, backend, cfg).weights)


def test_training_improves_dev_accuracy(separable):
    split, backend = separable
    model = train(split, backend, TrainConfig(learning_rate=1e-2))
    before = eval_diff(AdapterModel.identity(256), backend, split.dev)
    after = eval_diff(model, backend, split.dev)
    assert after.accuracy > before.accuracy
    losses = model.history["train_loss"]
    assert losses[3] < losses[0]


def test_history_matches_metrics_module(separable):
    split, backend = separable
    model = train(split, backend, TrainConfig(learning_rate=1e-3, epochs=1))
    report = eval_diff(model, backend, split.dev)
    assert report.accuracy == max(model.history["dev_accuracy"])


def test_empty_train_split_rejected(separable):
    _, backend = separable
    with pytest.raises(ContractError):
        train(TripletSplit([], [], [], 0), backend)


def test_non_finite_gradient_aborts():
    us = [Utterance(k, i, DAY, "m", "A", k) for i, k in enumerate("tpn")]
    backend = PrecomputedEmbedder({"t": [1.0, 0.0], "p": [0.0, 1.0], "n": [1.0, 1.0]})
    split = TripletSplit([Triplet(*us, 0.0, 0.0)], [], [], 0)
    with pytest.raises(NumericError, match="batch 0"):
        train(split, backend, TrainConfig(learning_rate=float("inf"), warmup_fraction=0.0))


def test_model_file_roundtrip(tmp_path, separable):
    split, backend = separable
    model = train(split, backend, TrainConfig(epochs=1, learning_rate=1e-3))
    path = tmp_path / "m.jsonl"
    model.save(path)
    loaded = AdapterModel.load(path)
    assert np.array_equal(loaded.weights, model.weights)
    assert loaded.backend_name == backend.name
    assert loaded.config["batch_size"] == 16
