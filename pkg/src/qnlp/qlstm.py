"""Classical and quantum-enhanced LSTM taggers.

Both modes run the same cell::

    v_t = [h_{t-1}, x_t]
    f_t = sigmoid(G_f(v_t))      i_t = sigmoid(G_i(v_t))
    C~  = tanh(G_C(v_t))         o_t = sigmoid(G_o(v_t))
    c_t = f_t * c_{t-1} + i_t * C~
    h_t = o_t * tanh(c_t)

and differ only in the gate maps ``G``. Classically each ``G`` is an affine
map (stored the usual way: one input-to-hidden matrix, one hidden-to-hidden
matrix and two bias vectors for all four gates). In quantum mode
``G_g(v) = bloat(VQC_g(squeeze(v)))``: the squeeze and bloat layers are shared
by the four gates and each gate owns one VQC angle block. With the default
sizes and a 9-token vocabulary the quantum tagger has 199 weights and the
classical one 477.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from . import tensor as T
from .functional import Linear, Module, embedding_lookup
from .qsim import run_circuit
from .tensor import ShapeError, Tensor
from .vqc import VQCConfig, VQCParams, build_circuit, init_vqc_params, input_slot, weight_slot

GATES = ("f", "i", "C", "o")
MODES = ("classical", "quantum")


@dataclass(frozen=True)
class LSTMConfig:
    vocab_size: int = 9
    embedding_dim: int = 8
    hidden_dim: int = 6
    n_qubits: int = 4
    n_qlayers: int = 1
    n_tags: int = 3
    mode: str = "quantum"

    def __post_init__(self):
        for name in ("vocab_size", "embedding_dim", "hidden_dim", "n_qubits", "n_qlayers", "n_tags"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def concat_dim(self) -> int:
        return self.embedding_dim + self.hidden_dim

    @property
    def vqc_config(self) -> VQCConfig:
        return VQCConfig(self.n_qubits, self.n_qlayers)

    def to_dict(self) -> dict:
        return asdict(self)


class CellState(NamedTuple):
    h: Tensor
    c: Tensor


class LSTMTagger(Module):
    """Embedding -> LSTM (classical or quantum gates) -> per-token tag head."""

    def __init__(self, config: LSTMConfig, rng: np.random.Generator):
        self.config = config
        H, E = config.hidden_dim, config.embedding_dim
        self.embedding = Tensor(rng.normal(0.0, 1.0, (config.vocab_size, E)), requires_grad=True)
        if config.mode == "classical":
            b_ih, b_hh = 1.0 / np.sqrt(E), 1.0 / np.sqrt(H)
            self.w_ih = Tensor(rng.uniform(-b_ih, b_ih, (4 * H, E)), requires_grad=True)
            self.w_hh = Tensor(rng.uniform(-b_hh, b_hh, (4 * H, H)), requires_grad=True)
            self.b_ih = Tensor(rng.uniform(-b_ih, b_ih, (4 * H,)), requires_grad=True)
            self.b_hh = Tensor(rng.uniform(-b_hh, b_hh, (4 * H,)), requires_grad=True)
        else:
            vcfg = config.vqc_config
            self.squeeze = Linear(config.concat_dim, config.n_qubits, rng)
            self.vqcs = {g: init_vqc_params(vcfg, rng) for g in GATES}
            self.bloat = Linear(config.n_qubits, H, rng)
        self.head = Linear(H, config.n_tags, rng)

    def named_parameters(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        params = [("embedding", self.embedding)]
        if self.config.mode == "classical":
            params += [
                ("lstm.weight_ih", self.w_ih),
                ("lstm.weight_hh", self.w_hh),
                ("lstm.bias_ih", self.b_ih),
                ("lstm.bias_hh", self.b_hh),
            ]
        else:
            params += self.squeeze.named_parameters("lstm.squeeze")
            params += [(f"lstm.vqc_{g}.theta", self.vqcs[g].theta) for g in GATES]
            params += self.bloat.named_parameters("lstm.bloat")
        params += self.head.named_parameters("head")
        return [(prefix + name, t) for name, t in params]

    def zero_state(self) -> CellState:
        H = self.config.hidden_dim
        return CellState(Tensor(np.zeros(H)), Tensor(np.zeros(H)))

    def gate_preactivations(self, h_prev: Tensor, x_t: Tensor) -> List[Tensor]:
        """``G_f, G_i, G_C, G_o`` evaluated at ``v_t = [h_prev, x_t]``."""
        H = self.config.hidden_dim
        if self.config.mode == "classical":
            z = x_t @ self.w_ih.T + self.b_ih + h_prev @ self.w_hh.T + self.b_hh
            return [z[k * H : (k + 1) * H] for k in range(4)]
        v = T.concat([h_prev, x_t])
        angles = self.squeeze(v)
        # the four gate circuits share their encoded input, so run them as
        # one batch of four with per-gate variational angles
        cfg = self.config.vqc_config
        thetas = T.stack([self.vqcs[g].theta for g in GATES])
        bindings = {input_slot(q): angles[q] for q in range(cfg.n_qubits)}
        for layer in range(cfg.n_layers):
            for q in range(cfg.n_qubits):
                bindings[weight_slot(layer, q)] = thetas[:, layer, q]
        z = self.bloat(run_circuit(build_circuit(cfg), bindings, cfg.n_qubits))
        return [z[k] for k in range(4)]

    def gate_vqc(self, gate: str) -> VQCParams:
        return self.vqcs[gate]


def lstm_step(model: LSTMTagger, state: CellState, x_t: Tensor) -> Tuple[CellState, Tensor]:
    """One recurrence step; returns the new state and ``h_t``."""
    cfg = model.config
    if x_t.shape != (cfg.embedding_dim,):
        raise ShapeError(f"x_t must have shape ({cfg.embedding_dim},), got {x_t.shape}")
    if state.h.shape != (cfg.hidden_dim,) or state.c.shape != (cfg.hidden_dim,):
        raise ShapeError(f"cell state must be ({cfg.hidden_dim},), got h {state.h.shape}, c {state.c.shape}")
    gf, gi, gc, go = model.gate_preactivations(state.h, x_t)
    f = T.sigmoid(gf)
    i = T.sigmoid(gi)
    c_tilde = T.tanh(gc)
    c = f * state.c + i * c_tilde
    o = T.sigmoid(go)
    h = o * T.tanh(c)
    return CellState(h, c), h


def run_sequence(model: LSTMTagger, token_ids: Sequence[int]) -> Tensor:
    """Hidden vectors ``(T, hidden_dim)`` for every token, from a zero state."""
    if len(token_ids) < 1:
        raise ValueError("run_sequence needs at least one token")
    xs = embedding_lookup(model.embedding, token_ids)
    state = model.zero_state()
    hs = []
    for t in range(len(token_ids)):
        state, h = lstm_step(model, state, xs[t])
        hs.append(h)
    return T.stack(hs)


def tag_logits(model: LSTMTagger, h_array: Tensor) -> Tensor:
    if h_array.ndim != 2 or h_array.shape[1] != model.config.hidden_dim:
        raise ShapeError(f"expected (T, {model.config.hidden_dim}) hidden states, got {h_array.shape}")
    return model.head(h_array)


def predict_tags(model: LSTMTagger, token_ids: Sequence[int]) -> List[int]:
    """Most likely tag per token; ties go to the lowest tag index."""
    logits = tag_logits(model, run_sequence(model, token_ids))
    return [int(k) for k in np.argmax(logits.data, axis=1)]


def count_parameters(model: Module) -> Tuple[int, List[Tuple[str, Tuple[int, ...], int]]]:
    """Total trainable scalars and a ``(name, shape, count)`` row per array."""
    rows = [(name, t.shape, t.size) for name, t in model.named_parameters()]
    return sum(r[2] for r in rows), rows
