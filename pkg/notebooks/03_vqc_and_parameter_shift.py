"""
Variational circuits and their gradients
========================================

A VQC angle-encodes its input with RY, applies one trainable RX per qubit
per layer and a CNOT ring, and measures <Z> on every qubit. Gradients come
from the tape; the parameter-shift rule is an independent check.
"""

import numpy as np

from qnlp.qsim import parameter_shift_grad
from qnlp.tensor import Tape, Tensor
from qnlp.vqc import DressedVQC, VQCConfig, VQCParams, build_circuit, vqc_forward

# one qubit: <Z> = cos(x) cos(theta)
cfg1 = VQCConfig(n_qubits=1)
for x, theta in [(0.3, 0.0), (1.0, 0.5)]:
    out = vqc_forward(cfg1, VQCParams(Tensor([[theta]])), [x]).data[0]
    print(f"x={x} theta={theta}: {out:.6f} vs cos*cos {np.cos(x) * np.cos(theta):.6f}")

# four qubits, two layers
cfg = VQCConfig(n_qubits=4, n_layers=2)
rng = np.random.default_rng(1)
theta = Tensor(rng.uniform(0, 2 * np.pi, (2, 4)), requires_grad=True)
x = rng.uniform(-1, 1, 4)
with Tape() as tape:
    out = vqc_forward(cfg, VQCParams(theta), x)
    loss = out[2]
tape.backward(loss, [theta])

bindings = {f"x{i}": x[i] for i in range(4)}
bindings.update({f"theta{l}_{i}": theta.data[l, i] for l in range(2) for i in range(4)})
shift = np.array([[parameter_shift_grad(build_circuit(cfg), bindings, f"theta{l}_{i}", 2) for i in range(4)]
                  for l in range(2)])
print("tape vs shift, max diff:", np.max(np.abs(theta.grad - shift)))

# the dressed variant wraps the circuit between two linear layers
layer = DressedVQC(16, 2, VQCConfig(4), rng)
print("dressed 16 -> 4 qubits -> 2 has", layer.num_parameters(), "weights")
