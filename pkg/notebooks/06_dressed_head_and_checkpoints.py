"""
A dressed-VQC classifier head, saved and reloaded
=================================================

Precomputed sentence embeddings (here a synthetic separable set) go through
a squeeze layer, a 4-qubit circuit and a bloat layer. The checkpoint
reloads to the same loss bit for bit.
"""

from qnlp.config import make_config
from qnlp.training import evaluate, evaluate_examples, train

config = make_config("embed-classify", None, seed=42, out_dir="runs/embed")
result = train(config)
first = next(r.epoch for r in result.rows if r.accuracy == 1.0)
print(f"perfect training accuracy first reached at epoch {first}")

in_memory, _ = evaluate_examples(result.model, config, result.data.train)
reloaded = evaluate(result.checkpoint)
print(f"in-memory loss {in_memory!r}")
print(f"reloaded loss  {reloaded.loss!r}")
print("checkpoint:", result.checkpoint, result.checkpoint.stat().st_size, "bytes")
