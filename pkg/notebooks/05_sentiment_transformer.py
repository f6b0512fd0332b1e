"""
A quantum-enhanced Transformer on review sentiment
==================================================

Queries, keys, values and the feed-forward sublayer are dressed VQCs. The
bundled mini-IMDB fixture is synthetic and small, so this is a smoke run,
not a benchmark.
"""

import numpy as np

from qnlp.config import make_config
from qnlp.data import mini_imdb_path
from qnlp.qlstm import count_parameters
from qnlp.qtransformer import QTransformerClassifier, TransformerConfig
from qnlp.training import train

# at a 20k vocabulary the token embedding holds nearly every weight
big = QTransformerClassifier(TransformerConfig(vocab_size=20_000), np.random.default_rng(0))
total, rows = count_parameters(big)
embedding = dict((n, c) for n, _, c in rows)["token_embedding"]
print(f"vocab 20000: {total} weights, {embedding / total:.3f} of them in the embedding")

print("fixture:", mini_imdb_path())
config = make_config("sentiment", None, seed=42, epochs=2, vocab_size=1000, out_dir="runs/sentiment")
result = train(config)
print(f"initial train loss {result.initial.loss:.5f}")
for row in result.rows:
    print(f"epoch {row.epoch} {row.split:5s} loss {row.loss:.5f} accuracy {row.accuracy:.3f}")
