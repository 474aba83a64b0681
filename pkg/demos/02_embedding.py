"""
Hashed character n-gram vectors
===============================

The baseline backend hashes character bigrams and trigrams into a fixed
number of buckets and normalizes the counts.
"""

import numpy as np

from minutesum.embedding import NgramEmbedder, char_ngrams, cosine

print(char_ngrams("都政運営。将来像"))

backend = NgramEmbedder(dim=256)
a = backend.embed("東京の将来像について伺います")
b = backend.embed("東京の将来像についてお答えします")
c = backend.embed("予算案の審議を行います")
print("norm", np.linalg.norm(a))
print("related", round(cosine(a, b), 3))
print("unrelated", round(cosine(a, c), 3))

# embed_many stacks vectors row-wise
m = backend.embed_many(["都政運営", "将来像", "エネルギー政策"])
print(m.shape)
print(np.round(m @ m.T, 3))
