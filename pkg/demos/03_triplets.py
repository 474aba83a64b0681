"""
Mining training triplets
========================

A target and the next utterance by the same speaker form a positive pair when
they are similar enough; the negative comes from a different session.
"""

from minutesum.corpus import load_corpus
from minutesum.embedding import NgramEmbedder
from minutesum.synthetic import fixture_path, placeholder_triplets
from minutesum.triplets import build_triplets, split_sizes, split_triplets

corpus = load_corpus(fixture_path("fixture_minutes.jsonl"))
backend = NgramEmbedder(256)

triplets, report = build_triplets(corpus, backend, pos_threshold=0.5, neg_threshold=0.9, seed=0)
for t in triplets:
    print(t.target.id, t.positive.id, t.negative.id, f"{t.pos_sim:.3f}", f"{t.neg_sim:.3f}")
print(report.to_dict())

# The 80/10/10 split on a large set
print(split_sizes(27078))
split = split_triplets(placeholder_triplets(27078), seed=0)
print(split.sizes)
