"""Random circuit generators shared by the simulator and acceptance tests."""

import numpy as np

from qnlp.qsim import GateOp, run_circuit
from qnlp.tensor import Tape, Tensor
from qnlp.vqc import VQCConfig, build_circuit, input_slot, weight_slot


def random_circuit(rng, n_qubits, depth, slots=False):
    """``depth`` random gates; rotations get literal angles unless ``slots`` is set."""
    gates, bindings = [], {}
    kinds = ["H", "RX", "RY", "RZ"] + (["CNOT"] if n_qubits > 1 else [])
    for k in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        target = int(rng.integers(n_qubits))
        if kind == "CNOT":
            control = int(rng.choice([q for q in range(n_qubits) if q != target]))
            gates.append(GateOp("CNOT", target, control=control))
        elif kind == "H":
            gates.append(GateOp("H", target))
        elif slots:
            name = f"p{k}"
            bindings[name] = float(rng.uniform(-np.pi, np.pi))
            gates.append(GateOp(kind, target, param=name))
        else:
            gates.append(GateOp(kind, target, angle=float(rng.uniform(-np.pi, np.pi))))
    return gates, bindings


def random_vqc(rng, n_qubits=4, max_layers=2):
    """A VQC circuit plus random input and weight bindings."""
    config = VQCConfig(n_qubits, int(rng.integers(1, max_layers + 1)))
    bindings = {input_slot(i): float(rng.uniform(-np.pi, np.pi)) for i in range(n_qubits)}
    for layer in range(config.n_layers):
        for i in range(n_qubits):
            bindings[weight_slot(layer, i)] = float(rng.uniform(0, 2 * np.pi))
    return config, build_circuit(config), bindings


def tape_jacobian_row(circuit, bindings, n_qubits, qubit):
    """d<Z_qubit>/d(slot) for every slot via the tape."""
    leaves = {k: Tensor(v, requires_grad=True) for k, v in bindings.items()}
    with Tape() as tape:
        out = run_circuit(circuit, leaves, n_qubits)
        loss = out[qubit]
    tape.backward(loss, list(leaves.values()))
    return {k: float(t.grad) for k, t in leaves.items()}
