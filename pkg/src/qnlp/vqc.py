"""Variational quantum circuit layers.

A VQC angle-encodes an ``n_qubits`` input vector (one rotation per qubit),
applies ``n_layers`` variational blocks of one trainable rotation per qubit
followed by a CNOT ring ``i -> (i + 1) mod n``, and reads out <Z> on every
qubit. The dressed variant squeezes an arbitrary input down to ``n_qubits``
with a linear layer and bloats the readout back up with another.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .functional import Linear, Module
from .qsim import GateOp, run_circuit
from .tensor import ArrayLike, ShapeError, Tensor, as_tensor


@dataclass(frozen=True)
class VQCConfig:
    n_qubits: int
    n_layers: int = 1
    encoding_axis: str = "Y"
    variational_axis: str = "X"

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 1:
            raise ValueError(f"VQC needs n_qubits >= 1 and n_layers >= 1, got {self.n_qubits}, {self.n_layers}")
        if self.encoding_axis not in ("X", "Y"):
            raise ValueError(f"encoding axis must be X or Y, got {self.encoding_axis!r}")
        if self.variational_axis not in ("X", "Y", "Z"):
            raise ValueError(f"variational axis must be X, Y or Z, got {self.variational_axis!r}")

    @property
    def n_params(self) -> int:
        return self.n_layers * self.n_qubits


@dataclass
class VQCParams:
    theta: Tensor  # (n_layers, n_qubits) rotation angles in radians

    def check(self, config: VQCConfig) -> None:
        if self.theta.shape != (config.n_layers, config.n_qubits):
            raise ShapeError(
                f"VQC angles have shape {self.theta.shape}, config needs {(config.n_layers, config.n_qubits)}"
            )


def input_slot(i: int) -> str:
    return f"x{i}"


def weight_slot(layer: int, i: int) -> str:
    return f"theta{layer}_{i}"


@lru_cache(maxsize=None)
def build_circuit(config: VQCConfig) -> tuple:
    """Gate list with input slots ``x{i}`` and trainable slots ``theta{l}_{i}``."""
    n = config.n_qubits
    enc = "R" + config.encoding_axis
    var = "R" + config.variational_axis
    gates = [GateOp(enc, i, param=input_slot(i)) for i in range(n)]
    for layer in range(config.n_layers):
        gates.extend(GateOp(var, i, param=weight_slot(layer, i)) for i in range(n))
        if n > 1:
            # for two qubits the ring is 0->1 then 1->0
            gates.extend(GateOp("CNOT", (i + 1) % n, control=i) for i in range(n))
    return tuple(gates)


def init_vqc_params(config: VQCConfig, rng: np.random.Generator) -> VQCParams:
    theta = rng.uniform(0.0, 2.0 * np.pi, (config.n_layers, config.n_qubits))
    return VQCParams(Tensor(theta, requires_grad=True))


def vqc_forward(config: VQCConfig, params: VQCParams, x: ArrayLike) -> Tensor:
    """<Z_i> after encoding ``x`` and running the variational blocks.

    ``x`` is ``(n_qubits,)`` or a batch ``(B, n_qubits)``; the output matches.
    """
    x = as_tensor(x)
    n = config.n_qubits
    if x.ndim not in (1, 2) or x.shape[-1] != n:
        raise ShapeError(f"VQC with {n} qubits got input of shape {x.shape}")
    params.check(config)
    bindings = {input_slot(i): x[..., i] for i in range(n)}
    for layer in range(config.n_layers):
        for i in range(n):
            bindings[weight_slot(layer, i)] = params.theta[layer, i]
    return run_circuit(build_circuit(config), bindings, n)


class DressedVQC(Module):
    """``bloat(vqc(squeeze(x)))`` mapping ``in_dim`` to ``out_dim``."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        config: VQCConfig,
        rng: np.random.Generator,
    ):
        self.config = config
        self.squeeze = Linear(in_dim, config.n_qubits, rng)
        self.vqc = init_vqc_params(config, rng)
        self.bloat = Linear(config.n_qubits, out_dim, rng)

    @property
    def in_dim(self) -> int:
        return self.squeeze.in_dim

    @property
    def out_dim(self) -> int:
        return self.bloat.out_dim

    def __call__(self, x: ArrayLike) -> Tensor:
        return dressed_forward(self, x)

    def named_parameters(self, prefix: str = "dressed") -> list:
        return (
            self.squeeze.named_parameters(f"{prefix}.squeeze")
            + [(f"{prefix}.vqc.theta", self.vqc.theta)]
            + self.bloat.named_parameters(f"{prefix}.bloat")
        )

    def parameter_count(self) -> int:
        q = self.config.n_qubits
        return (self.in_dim * q + q) + self.config.n_params + (q * self.out_dim + self.out_dim)


def dressed_forward(layer: DressedVQC, x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if x.shape[-1] != layer.in_dim:
        raise ShapeError(f"dressed VQC expects last axis {layer.in_dim}, got input shape {x.shape}")
    return layer.bloat(vqc_forward(layer.config, layer.vqc, layer.squeeze(x)))

