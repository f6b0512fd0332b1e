"""
Tagging two sentences with a quantum LSTM
=========================================

Both the classical LSTM and the quantum variant (whose gates run through
VQCs) are trained for 300 epochs on the two toy sentences.
"""

import numpy as np

from qnlp.config import make_config
from qnlp.data import TAGS, build_pos_dataset
from qnlp.qlstm import count_parameters, predict_tags
from qnlp.training import train

vocab, examples = build_pos_dataset()
print("vocabulary:", vocab.itos)

for mode in ("classical", "quantum"):
    config = make_config("pos", None, mode=mode, seed=42, out_dir=f"runs/pos-{mode}")
    result = train(config)
    total, _ = count_parameters(result.model)
    final = result.rows[-1]
    print(f"\n{mode}: {total} weights, final loss {final.loss:.4f}, accuracy {final.accuracy:.2f}")
    # every 50th epoch, to see the curve behind the final numbers
    for row in result.rows[49::50]:
        print(f"  epoch {row.epoch:3d}  loss {row.loss:.4f}  acc {row.accuracy:.2f}")
    for ex in examples:
        tags = [TAGS[k] for k in predict_tags(result.model, ex.token_ids)]
        print("  ", ex.text, "->", tags)
