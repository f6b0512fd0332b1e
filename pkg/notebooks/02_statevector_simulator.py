"""
Simulating small circuits
=========================

Qubit 0 is the least-significant bit of the basis index. The strided
simulator is checked against an explicit dense-matrix construction.
"""

import numpy as np

from qnlp.qsim import GateOp, dense_matrix_oracle, expectation_z, run_circuit, simulate

# Bell pair: H on qubit 0, then CNOT 0 -> 1
bell = [GateOp("H", 0), GateOp("CNOT", 1, control=0)]
state = simulate(bell, {}, 2)
print("amplitudes", np.round(state.amplitudes, 4))
print("<Z0>, <Z1> =", expectation_z(state, 0), expectation_z(state, 1))

# a GHZ state has zero magnetisation on every qubit
ghz = bell + [GateOp("CNOT", 2, control=1)]
print("GHZ <Z>:", run_circuit(ghz, {}, 3).data)

# rotations can take a named slot that is bound at run time
circuit = [GateOp("RX", 0, param="theta"), GateOp("RY", 1, angle=0.4), GateOp("CNOT", 1, control=0)]
for theta in (0.0, np.pi / 3, np.pi):
    fast = run_circuit(circuit, {"theta": theta}, 2).data
    dense = dense_matrix_oracle(circuit, {"theta": theta}, 2)
    print(f"theta={theta:.3f}  strided={fast}  dense={dense}  max diff={np.max(np.abs(fast - dense)):.1e}")
