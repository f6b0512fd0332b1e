"""Neural-network building blocks on top of :mod:`qnlp.tensor`."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .tensor import ArrayLike, ContractError, ShapeError, Tensor, as_tensor, make


def softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``."""
    x = as_tensor(x)
    if x.ndim == 0 or x.shape[axis] < 1:
        raise ShapeError(f"softmax needs a non-empty axis, got shape {x.shape}")
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)
    return make(s, (x,), lambda g: (s * (g - (g * s).sum(axis=axis, keepdims=True)),))


def log_softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    out = z - lse
    s = np.exp(out)
    return make(out, (x,), lambda g: (g - s * g.sum(axis=axis, keepdims=True),))


def layer_norm(x: ArrayLike, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalise the last axis to zero mean and unit variance, then scale and shift."""
    x = as_tensor(x)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm: gain {gain.shape} / bias {bias.shape} do not match last axis {d}")
    if eps <= 0:
        raise ValueError("layer_norm eps must be positive")
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        gx_hat = g * gain.data
        gx = inv * (
            gx_hat
            - gx_hat.mean(axis=-1, keepdims=True)
            - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(g.ndim - 1))
        return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return make(out, (x, gain, bias), backward)


def embedding_lookup(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Gather rows of ``table``; gradients scatter-add back into it."""
    ids = np.asarray(ids, dtype=np.int64).reshape(-1)
    vocab, dim = table.shape
    bad = ids[(ids < 0) | (ids >= vocab)]
    if bad.size:
        raise IndexError(f"token id {int(bad[0])} out of range for vocabulary of size {vocab}")

    def backward(g):
        out = np.zeros_like(table.data)
        np.add.at(out, ids, g)
        return (out,)

    return make(table.data[ids].reshape(len(ids), dim), (table,), backward)


def cross_entropy(logits: ArrayLike, targets: Sequence[int]) -> Tensor:
    """Mean negative log-likelihood of ``targets`` under softmax(``logits``)."""
    logits = as_tensor(logits)
    if logits.ndim == 1:
        logits = logits.reshape(1, -1)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    batch, n_classes = logits.shape
    if len(targets) != batch:
        raise ShapeError(f"cross_entropy: {batch} rows of logits but {len(targets)} targets")
    bad = targets[(targets < 0) | (targets >= n_classes)]
    if bad.size:
        raise IndexError(f"target class {int(bad[0])} out of range for {n_classes} classes")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(batch)
    loss = np.mean(lse - z[rows, targets])

    def backward(g):
        p = np.exp(z - lse[:, None])
        p[rows, targets] -= 1.0
        return (g * p / batch,)

    return make(np.asarray(loss), (logits,), backward)


def mse(pred: ArrayLike, target: ArrayLike) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse: prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred.data - target.data
    n = diff.size
    return make(
        np.asarray(np.mean(diff * diff)),
        (pred, target),
        lambda g: (2.0 * g * diff / n, -2.0 * g * diff / n),
    )


def dropout_rng(seed: int, step: int, layer_id: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, step, layer_id)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, step, layer_id])))


def dropout(
    x: ArrayLike,
    rate: float,
    rng: Optional[np.random.Generator] = None,
    training: bool = True,
) -> Tensor:
    """Inverted dropout; identity when ``training`` is false or ``rate`` is 0."""
    x = as_tensor(x)
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ContractError("dropout in training mode needs an rng")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return make(x.data * keep, (x,), lambda g: (g * keep,))


class Module:
    """Anything that owns named trainable tensors."""

    def named_parameters(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        raise NotImplementedError

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise KeyError(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for name, t in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != t.shape:
                raise ShapeError(f"{name}: stored shape {value.shape} != model shape {t.shape}")
            t.data = value.copy()

    def num_parameters(self) -> int:
        return sum(t.size for t in self.parameters())


class Linear(Module):
    """Affine map ``x @ weight + bias`` with weight shaped ``(in_dim, out_dim)``."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True):
        bound = 1.0 / np.sqrt(in_dim)
        self.weight = Tensor(rng.uniform(-bound, bound, (in_dim, out_dim)), requires_grad=True)
        self.bias = Tensor(rng.uniform(-bound, bound, (out_dim,)), requires_grad=True) if bias else None

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    def __call__(self, x: ArrayLike) -> Tensor:
        x = as_tensor(x)
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"linear layer expects last axis {self.in_dim}, got input shape {x.shape}")
        out = x @ self.weight
        return out + self.bias if self.bias is not None else out

    def named_parameters(self, prefix: str = "linear") -> list:
        params = [(f"{prefix}.weight", self.weight)]
        if self.bias is not None:
            params.append((f"{prefix}.bias", self.bias))
        return params
