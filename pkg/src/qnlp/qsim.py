"""Exact statevector simulation of few-qubit circuits.

Bit convention: qubit ``q`` is bit ``q`` of the basis-state index, so qubit 0
is the least-significant bit and ``|10>`` (qubit 1 set) is index 2.

Two execution paths share the gate conventions below:

* :class:`StateVector` / :func:`apply_gate` mutate a complex amplitude array
  in place with strided 2x2 updates.
* :func:`run_circuit` evolves a ``(batch, 2, 2**n)`` real tensor holding the
  real and imaginary parts, recording every gate on the active tape so angle
  gradients come out of ordinary reverse-mode differentiation.

:func:`dense_matrix_oracle` and :func:`parameter_shift_grad` are independent
checks on both.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .tensor import ContractError, Tensor, as_tensor, make

MAX_QUBITS = 12
MAX_ORACLE_QUBITS = 6
ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ("H", "RX", "RY", "RZ", "CNOT")

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


@dataclass(frozen=True)
class GateOp:
    """One gate. Rotations take either a literal ``angle`` or a ``param`` slot name."""

    kind: str
    target: int
    control: Optional[int] = None
    angle: Optional[float] = None
    param: Optional[str] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CNOT":
            if self.control is None:
                raise ContractError("CNOT needs a control qubit")
            if self.control == self.target:
                raise ContractError(f"CNOT control and target are both qubit {self.target}")
        elif self.control is not None:
            raise ContractError(f"{self.kind} takes no control qubit")
        if self.kind in ROTATIONS:
            if (self.angle is None) == (self.param is None):
                raise ContractError(f"{self.kind} needs exactly one of angle or param")
        elif self.angle is not None or self.param is not None:
            raise ContractError(f"{self.kind} carries no angle or parameter slot")

    @property
    def qubits(self) -> tuple:
        return (self.target,) if self.control is None else (self.control, self.target)


Circuit = Sequence[GateOp]
Binding = Union[float, Tensor]


def rotation_matrix(kind: str, theta) -> np.ndarray:
    """Rotation unitaries for an array of angles, shape ``theta.shape + (2, 2)``."""
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    out = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    if kind == "RX":
        out[..., 0, 0] = c
        out[..., 1, 1] = c
        out[..., 0, 1] = -1j * s
        out[..., 1, 0] = -1j * s
    elif kind == "RY":
        out[..., 0, 0] = c
        out[..., 1, 1] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
    elif kind == "RZ":
        out[..., 0, 0] = np.exp(-0.5j * theta)
        out[..., 1, 1] = np.exp(0.5j * theta)
    else:
        raise ValueError(f"{kind} is not a rotation")
    return out


def rotation_derivative(kind: str, theta) -> np.ndarray:
    """d/dtheta of :func:`rotation_matrix`."""
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2) / 2
    s = np.sin(theta / 2) / 2
    out = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    if kind == "RX":
        out[..., 0, 0] = -s
        out[..., 1, 1] = -s
        out[..., 0, 1] = -1j * c
        out[..., 1, 0] = -1j * c
    elif kind == "RY":
        out[..., 0, 0] = -s
        out[..., 1, 1] = -s
        out[..., 0, 1] = -c
        out[..., 1, 0] = c
    else:
        out[..., 0, 0] = -0.5j * np.exp(-0.5j * theta)
        out[..., 1, 1] = 0.5j * np.exp(0.5j * theta)
    return out


# ---------------------------------------------------------------------------
# In-place statevector
# ---------------------------------------------------------------------------


class StateVector:
    """Amplitudes of an ``n_qubits`` register, owned and mutated by the simulator."""

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2**n_qubits,):
            raise ValueError(f"{n_qubits} qubits need {2**n_qubits} amplitudes, got {amplitudes.shape}")
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, amplitudes={self.amplitudes!r})"


def init_state(n_qubits: int) -> StateVector:
    """The all-zeros basis state."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _check_qubits(gate: GateOp, n_qubits: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n_qubits:
            raise IndexError(f"{gate.kind} acts on qubit {q} but the register has {n_qubits} qubits")


@lru_cache(maxsize=None)
def _cnot_permutation(control: int, target: int, n_qubits: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    return idx ^ (((idx >> control) & 1) << target)


@lru_cache(maxsize=None)
def _z_signs(n_qubits: int) -> np.ndarray:
    """``(2**n, n)`` table of +1/-1: +1 where qubit's bit is 0."""
    idx = np.arange(2**n_qubits)[:, None]
    bits = (idx >> np.arange(n_qubits)[None, :]) & 1
    return 1.0 - 2.0 * bits


def gate_matrix(gate: GateOp, angle: Optional[float] = None) -> np.ndarray:
    """2x2 unitary of a single-qubit gate."""
    if gate.kind == "H":
        return _H
    theta = gate.angle if angle is None else angle
    return rotation_matrix(gate.kind, theta)


def apply_gate(state: StateVector, gate: GateOp, angle: Optional[float] = None) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return it.

    ``angle`` overrides the gate's literal angle (used for bound parameter slots).
    """
    n = state.n_qubits
    _check_qubits(gate, n)
    amps = state.amplitudes
    if gate.kind == "CNOT":
        amps[:] = amps[_cnot_permutation(gate.control, gate.target, n)]
        return state
    if gate.kind in ROTATIONS and angle is None and gate.angle is None:
        raise ContractError(f"parameter slot {gate.param!r} is unbound")
    u = gate_matrix(gate, angle)
    view = amps.reshape(2 ** (n - gate.target - 1), 2, 2**gate.target)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return state


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z> on ``qubit``: probability of bit 0 minus probability of bit 1."""
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    probs = np.abs(state.amplitudes) ** 2
    # rounding can push a fully polarised qubit a few ulps past +-1
    return float(np.clip(probs @ _z_signs(n)[:, qubit], -1.0, 1.0))


# ---------------------------------------------------------------------------
# Differentiable evolution of (batch, re/im, amplitude) tensors
# ---------------------------------------------------------------------------


def _apply_1q(psi: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """``psi`` is ``(B, 2**n)`` complex; ``u`` is ``(2, 2)`` or ``(B, 2, 2)``."""
    batch = psi.shape[0]
    view = psi.reshape(batch, 2 ** (n - qubit - 1), 2, 2**qubit)
    if u.ndim == 2:
        out = np.einsum("ij,bhjl->bhil", u, view)
    else:
        out = np.einsum("bij,bhjl->bhil", u, view)
    return out.reshape(batch, -1)


def _to_complex(x: np.ndarray) -> np.ndarray:
    return x[:, 0, :] + 1j * x[:, 1, :]


def _to_real(psi: np.ndarray) -> np.ndarray:
    return np.stack([psi.real, psi.imag], axis=1)


def zero_state_tensor(n_qubits: int, batch: int = 1) -> Tensor:
    data = np.zeros((batch, 2, 2**n_qubits))
    data[:, 0, 0] = 1.0
    return Tensor(data)


def rotate(state: Tensor, kind: str, angle: Binding, qubit: int, n_qubits: int) -> Tensor:
    """Rotation gate on a ``(B, 2, 2**n)`` state; ``angle`` is scalar or ``(B,)``."""
    angle = as_tensor(angle)
    psi = _to_complex(state.data)
    u = rotation_matrix(kind, angle.data)
    out = _apply_1q(psi, u, qubit, n_qubits)

    def backward(g):
        gc = _to_complex(g)
        g_state = _apply_1q(gc, np.conj(np.swapaxes(u, -1, -2)), qubit, n_qubits)
        du = _apply_1q(psi, rotation_derivative(kind, angle.data), qubit, n_qubits)
        g_angle = np.real(np.conj(gc) * du).sum(axis=1)
        if angle.ndim == 0:
            g_angle = g_angle.sum()
        return _to_real(g_state), g_angle.reshape(angle.shape)

    return make(_to_real(out), (state, angle), backward)


def hadamard(state: Tensor, qubit: int, n_qubits: int) -> Tensor:
    out = _apply_1q(_to_complex(state.data), _H, qubit, n_qubits)
    return make(
        _to_real(out),
        (state,),
        lambda g: (_to_real(_apply_1q(_to_complex(g), _H, qubit, n_qubits)),),
    )


def cnot(state: Tensor, control: int, target: int, n_qubits: int) -> Tensor:
    perm = _cnot_permutation(control, target, n_qubits)
    # the permutation is its own inverse
    return make(state.data[..., perm], (state,), lambda g: (g[..., perm],))


def measure_z(state: Tensor, n_qubits: int) -> Tensor:
    """``(B, n)`` tensor of <Z_q> for every qubit."""
    signs = _z_signs(n_qubits)
    re, im = state.data[:, 0, :], state.data[:, 1, :]
    out = (re * re + im * im) @ signs

    def backward(g):
        w = 2.0 * (g @ signs.T)
        return (np.stack([w * re, w * im], axis=1),)

    return make(out, (state,), backward)


def _batch_of(bindings: Mapping[str, Binding]) -> Optional[int]:
    batch = None
    for value in bindings.values():
        shape = np.shape(value.data if isinstance(value, Tensor) else value)
        if len(shape) == 1:
            if batch is not None and batch != shape[0]:
                raise ContractError(f"bindings mix batch sizes {batch} and {shape[0]}")
            batch = shape[0]
        elif len(shape) > 1:
            raise ContractError(f"binding values must be scalars or 1-D, got shape {shape}")
    return batch


def run_circuit(circuit: Circuit, bindings: Mapping[str, Binding], n_qubits: int) -> Tensor:
    """Simulate ``circuit`` from ``|0...0>`` and return <Z_q> for every qubit.

    Binding values may be floats, scalar tensors, or ``(B,)`` tensors; in the
    batched case the result is ``(B, n_qubits)``, otherwise ``(n_qubits,)``.
    Gradients flow to every tensor-valued binding.
    """
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must lie in [1, {MAX_QUBITS}], got {n_qubits}")
    batch = _batch_of(bindings)
    state = zero_state_tensor(n_qubits, batch or 1)
    for gate in circuit:
        _check_qubits(gate, n_qubits)
        if gate.kind == "H":
            state = hadamard(state, gate.target, n_qubits)
        elif gate.kind == "CNOT":
            state = cnot(state, gate.control, gate.target, n_qubits)
        else:
            if gate.param is not None:
                if gate.param not in bindings:
                    raise ContractError(f"parameter slot {gate.param!r} is unbound")
                angle = bindings[gate.param]
            else:
                angle = gate.angle
            state = rotate(state, gate.kind, angle, gate.target, n_qubits)
    out = measure_z(state, n_qubits)
    return out if batch is not None else out.reshape(n_qubits)


def simulate(circuit: Circuit, bindings: Mapping[str, float], n_qubits: int) -> StateVector:
    """Final state of ``circuit`` via the in-place strided path."""
    state = init_state(n_qubits)
    for gate in circuit:
        angle = None
        if gate.param is not None:
            if gate.param not in bindings:
                raise ContractError(f"parameter slot {gate.param!r} is unbound")
            angle = float(as_tensor(bindings[gate.param]).item())
        apply_gate(state, gate, angle)
    return state


# ---------------------------------------------------------------------------
# Independent checks
# ---------------------------------------------------------------------------


def _full_operator(ops_by_qubit: dict, n_qubits: int) -> np.ndarray:
    """Kronecker product over qubits n-1 ... 0; missing qubits get identity."""
    full = np.ones((1, 1), dtype=np.complex128)
    for q in reversed(range(n_qubits)):
        full = np.kron(full, ops_by_qubit.get(q, np.eye(2, dtype=np.complex128)))
    return full


def dense_unitary(gate: GateOp, n_qubits: int, angle: Optional[float] = None) -> np.ndarray:
    """Full ``2**n x 2**n`` unitary of ``gate`` built by identity tensoring."""
    _check_qubits(gate, n_qubits)
    if gate.kind == "CNOT":
        p0 = np.diag([1.0, 0.0]).astype(np.complex128)
        p1 = np.diag([0.0, 1.0]).astype(np.complex128)
        x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        return _full_operator({gate.control: p0}, n_qubits) + _full_operator(
            {gate.control: p1, gate.target: x}, n_qubits
        )
    if gate.kind == "H":
        u = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    else:
        theta = gate.angle if angle is None else angle
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        u = {
            "RX": np.array([[c, -1j * s], [-1j * s, c]]),
            "RY": np.array([[c, -s], [s, c]], dtype=np.complex128),
            "RZ": np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]),
        }[gate.kind]
    return _full_operator({gate.target: u}, n_qubits)


def dense_matrix_oracle(circuit: Circuit, bindings: Mapping[str, Binding], n_qubits: int) -> np.ndarray:
    """<Z_q> for every qubit by explicit dense matrix-vector products."""
    if not 1 <= n_qubits <= MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle supports 1..{MAX_ORACLE_QUBITS} qubits, got {n_qubits}")
    psi = np.zeros(2**n_qubits, dtype=np.complex128)
    psi[0] = 1.0
    for gate in circuit:
        angle = None
        if gate.param is not None:
            if gate.param not in bindings:
                raise ContractError(f"parameter slot {gate.param!r} is unbound")
            angle = float(as_tensor(bindings[gate.param]).item())
        psi = dense_unitary(gate, n_qubits, angle) @ psi
    z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    out = np.empty(n_qubits)
    for q in range(n_qubits):
        zq = _full_operator({q: z}, n_qubits)
        out[q] = float(np.real(np.conj(psi) @ zq @ psi))
    return out


def _expectations(circuit: Circuit, bindings: Mapping[str, float], n_qubits: int) -> np.ndarray:
    state = simulate(circuit, bindings, n_qubits)
    return np.array([expectation_z(state, q) for q in range(n_qubits)])


def parameter_shift_grad(
    circuit: Circuit,
    bindings: Mapping[str, float],
    slot: str,
    qubit: int,
    n_qubits: Optional[int] = None,
) -> float:
    """d<Z_qubit>/d(slot) by the two-term shift rule, summed over every gate using ``slot``.

    ``n_qubits`` defaults to the smallest register covering the circuit and ``qubit``.
    """
    uses = [i for i, g in enumerate(circuit) if g.param == slot]
    if not uses:
        raise ContractError(f"parameter slot {slot!r} is not attached to any rotation")
    if slot not in bindings:
        raise ContractError(f"parameter slot {slot!r} is unbound")
    n = n_qubits or max([qubit] + [q for g in circuit for q in g.qubits]) + 1
    theta = float(as_tensor(bindings[slot]).item())
    total = 0.0
    for i in uses:
        shifted = []
        for sign in (1.0, -1.0):
            circ = list(circuit)
            circ[i] = replace(circ[i], param=None, angle=theta + sign * np.pi / 2)
            shifted.append(_expectations(circ, bindings, n)[qubit])
        total += 0.5 * (shifted[0] - shifted[1])
    return total
