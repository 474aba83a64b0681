"""
Training a linear adapter
=========================

A synthetic set where raw n-grams rank the wrong neighbour closer: the
negative shares a repeated style word with the target. A trained adapter
learns to down-weight it.
"""

from minutesum.embedding import NgramEmbedder
from minutesum.metrics import eval_diff
from minutesum.synthetic import separable_fixture
from minutesum.trainer import AdapterModel, TrainConfig, normalized_distances, train
from minutesum.triplets import split_triplets

# Softmax-normalized distances always sum to one.
print(normalized_distances(0.4, 0.9))

_, triplets = separable_fixture(600, seed=0)
split = split_triplets(triplets, seed=0)
backend = NgramEmbedder(256)
print("split", split.sizes)

cfg = TrainConfig(learning_rate=1e-3)
model = train(split, backend, cfg)
print("train loss per epoch", [round(x, 4) for x in model.history["train_loss"]])

before = eval_diff(AdapterModel.identity(256, cfg.init_noise, cfg.seed), backend, split.dev)
after = eval_diff(model, backend, split.dev)
print(f"dev accuracy {before.accuracy:.3f} -> {after.accuracy:.3f}")
print(f"dev mean diff {before.mean_diff:.4f} -> {after.mean_diff:.4f}")
