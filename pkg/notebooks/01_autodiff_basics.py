"""
Reverse-mode gradients on a tape
================================

Operations record themselves only while a ``Tape`` is open and at least one
input asks for gradients. ``backward`` then fills ``.grad`` on the leaves.
"""

import numpy as np

from qnlp.functional import cross_entropy, softmax
from qnlp.tensor import Tape, Tensor

rng = np.random.default_rng(0)

# a tiny logistic-regression style model: logits = x @ w + b
x = Tensor(rng.normal(size=(4, 3)))
w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
b = Tensor(np.zeros(2), requires_grad=True)
targets = [0, 1, 1, 0]

with Tape() as tape:
    loss = cross_entropy(x @ w + b, targets)
tape.backward(loss, [w, b])
print("loss", loss.item())
print("dL/dw\n", w.grad)

# the fused cross-entropy gradient is (softmax - onehot) / batch
p = softmax(x.data @ w.data + b.data).data
onehot = np.eye(2)[targets]
print("matches closed form:", np.allclose(b.grad, (p - onehot).sum(axis=0) / 4))

# tapes are single use; open a new one for the next step
try:
    tape.backward(loss)
except Exception as err:
    print(type(err).__name__, "-", err)
