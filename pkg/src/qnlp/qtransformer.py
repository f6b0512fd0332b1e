"""Transformer encoder block with VQC-based projections for sentiment classification.

The query, key and value maps and the feed-forward sublayer are dressed VQCs
(``embed_dim -> n_qubits -> embed_dim``) applied position-wise. Everything
else is a standard post-norm encoder block: learned positional embeddings,
scaled dot-product attention split over heads, a classical output
projection, residual connections with layer normalisation, mean pooling over
time and a linear classifier.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import tensor as T
from .functional import Linear, Module, dropout, dropout_rng, embedding_lookup, layer_norm, softmax
from .tensor import ContractError, ShapeError, Tensor
from .vqc import DressedVQC, VQCConfig


@dataclass(frozen=True)
class TransformerConfig:
    vocab_size: int = 50_000
    embed_dim: int = 8
    max_seq_len: int = 64
    n_blocks: int = 1
    n_heads: int = 2
    ffn_dim: int = 8
    dropout: float = 0.1
    n_qubits_attn: int = 2
    n_qubits_ffn: int = 2
    n_qlayers: int = 1
    n_classes: int = 2

    def __post_init__(self):
        if self.embed_dim % self.n_heads:
            raise ValueError(f"embed_dim {self.embed_dim} is not divisible by n_heads {self.n_heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        for name in ("vocab_size", "embed_dim", "max_seq_len", "n_blocks", "n_heads", "ffn_dim",
                     "n_qubits_attn", "n_qubits_ffn", "n_qlayers", "n_classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.n_heads

    def to_dict(self) -> dict:
        return asdict(self)


class TransformerBlock(Module):
    def __init__(self, config: TransformerConfig, rng: np.random.Generator):
        d = config.embed_dim
        attn = VQCConfig(config.n_qubits_attn, config.n_qlayers)
        self.config = config
        self.query = DressedVQC(d, d, attn, rng)
        self.key = DressedVQC(d, d, attn, rng)
        self.value = DressedVQC(d, d, attn, rng)
        self.out_proj = Linear(d, d, rng)
        # the feed-forward sublayer bloats to ffn_dim and must come back to
        # embed_dim for the residual, so ffn_dim has to equal embed_dim
        if config.ffn_dim != d:
            raise ValueError(f"ffn_dim ({config.ffn_dim}) must equal embed_dim ({d})")
        self.ffn = DressedVQC(d, config.ffn_dim, VQCConfig(config.n_qubits_ffn, config.n_qlayers), rng)
        self.ln1_gain = Tensor(np.ones(d), requires_grad=True)
        self.ln1_bias = Tensor(np.zeros(d), requires_grad=True)
        self.ln2_gain = Tensor(np.ones(d), requires_grad=True)
        self.ln2_bias = Tensor(np.zeros(d), requires_grad=True)

    def named_parameters(self, prefix: str = "block") -> List[Tuple[str, Tensor]]:
        return (
            self.query.named_parameters(f"{prefix}.query")
            + self.key.named_parameters(f"{prefix}.key")
            + self.value.named_parameters(f"{prefix}.value")
            + self.out_proj.named_parameters(f"{prefix}.out_proj")
            + self.ffn.named_parameters(f"{prefix}.ffn")
            + [
                (f"{prefix}.ln1.gain", self.ln1_gain),
                (f"{prefix}.ln1.bias", self.ln1_bias),
                (f"{prefix}.ln2.gain", self.ln2_gain),
                (f"{prefix}.ln2.bias", self.ln2_bias),
            ]
        )


class QTransformerClassifier(Module):
    def __init__(self, config: TransformerConfig, rng: np.random.Generator):
        self.config = config
        d = config.embed_dim
        self.token_embedding = Tensor(rng.normal(0.0, 1.0, (config.vocab_size, d)), requires_grad=True)
        self.position_embedding = Tensor(rng.normal(0.0, 1.0, (config.max_seq_len, d)), requires_grad=True)
        self.blocks = [TransformerBlock(config, rng) for _ in range(config.n_blocks)]
        self.head = Linear(d, config.n_classes, rng)

    def named_parameters(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        params = [("token_embedding", self.token_embedding), ("position_embedding", self.position_embedding)]
        for k, block in enumerate(self.blocks):
            params += block.named_parameters(f"blocks.{k}")
        params += self.head.named_parameters("head")
        return [(prefix + name, t) for name, t in params]


def embed_sequence(model: QTransformerClassifier, token_ids: Sequence[int], positional: bool = True) -> Tensor:
    """Token embedding plus the learned embedding of each position."""
    n = len(token_ids)
    if n > model.config.max_seq_len:
        raise ShapeError(f"sequence of {n} tokens exceeds max_seq_len {model.config.max_seq_len}")
    x = embedding_lookup(model.token_embedding, token_ids)
    if positional:
        x = x + model.position_embedding[:n]
    return x


def attention_weights(q: Tensor, k: Tensor) -> Tensor:
    """Row-stochastic ``softmax(q k^T / sqrt(d_k))``."""
    if q.ndim != 2 or k.ndim != 2 or q.shape[1] != k.shape[1]:
        raise ShapeError(f"attention needs (T, d_k) queries and keys, got {q.shape} and {k.shape}")
    if q.shape[1] < 1:
        raise ShapeError("attention needs d_k > 0")
    return softmax((q @ k.T) * (1.0 / np.sqrt(q.shape[1])), axis=-1)


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    if v.ndim != 2 or v.shape[0] != k.shape[0]:
        raise ShapeError(f"values {v.shape} do not match keys {k.shape}")
    return attention_weights(q, k) @ v


def quantum_projection(dressed: DressedVQC, x: Tensor) -> Tensor:
    """Apply a dressed VQC to each row of ``x`` independently."""
    if x.ndim != 2 or x.shape[1] != dressed.in_dim:
        raise ShapeError(f"expected (T, {dressed.in_dim}) input, got {x.shape}")
    return dressed(x)


def multi_head_attention(block: TransformerBlock, x: Tensor) -> Tensor:
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] != block.config.embed_dim:
        raise ShapeError(f"expected (T, {block.config.embed_dim}) input with T >= 1, got {x.shape}")
    q = quantum_projection(block.query, x)
    k = quantum_projection(block.key, x)
    v = quantum_projection(block.value, x)
    w = block.config.head_dim
    heads = [
        scaled_dot_attention(q[:, h * w : (h + 1) * w], k[:, h * w : (h + 1) * w], v[:, h * w : (h + 1) * w])
        for h in range(block.config.n_heads)
    ]
    return block.out_proj(T.concat(heads, axis=-1))


def transformer_block(
    block: TransformerBlock,
    x: Tensor,
    training: bool = False,
    rng: Optional[Tuple[int, int]] = None,
    block_index: int = 0,
) -> Tensor:
    """Post-norm encoder block.

    ``rng`` is a ``(seed, step)`` pair; each dropout site draws from its own
    counter-based stream keyed by that pair and a per-site id.
    """
    rate = block.config.dropout
    if training and rate > 0 and rng is None:
        raise ContractError("training with dropout needs a (seed, step) rng key")

    def drop(t: Tensor, site: int) -> Tensor:
        if not training or rate == 0:
            return t
        seed, step = rng
        return dropout(t, rate, dropout_rng(seed, step, 2 * block_index + site), training=True)

    y = layer_norm(x + drop(multi_head_attention(block, x), 0), block.ln1_gain, block.ln1_bias)
    return layer_norm(y + drop(quantum_projection(block.ffn, y), 1), block.ln2_gain, block.ln2_bias)


def sentiment_forward(
    model: QTransformerClassifier,
    token_ids: Sequence[int],
    training: bool = False,
    rng: Optional[Tuple[int, int]] = None,
    positional: bool = True,
) -> Tensor:
    """Two class logits for one (unpadded) review."""
    if len(token_ids) == 0:
        raise ContractError("sentiment_forward needs a non-empty token sequence")
    x = embed_sequence(model, token_ids, positional=positional)
    for k, block in enumerate(model.blocks):
        x = transformer_block(block, x, training=training, rng=rng, block_index=k)
    return model.head(x.mean(axis=0))
