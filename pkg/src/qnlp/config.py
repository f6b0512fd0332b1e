"""Run configuration: defaults per task, flat ``key = value`` files, validation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .qlstm import LSTMConfig
from .qtransformer import TransformerConfig

TASKS = ("pos", "sentiment", "embed-classify")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    task: str = "pos"
    mode: str = "quantum"
    epochs: int = 300
    lr: float = 0.01
    batch_size: int = 1
    seed: int = 42
    optimizer: str = "adam"
    loss: str = "cross_entropy"
    # POS tagger
    vocab_size: int = 9
    n_tags: int = 3
    embedding_dim: int = 8
    hidden_dim: int = 6
    n_qlayers: int = 1
    n_qubits: int = 4
    # transformer
    max_seq_len: int = 64
    ffn_dim: int = 8
    dropout: float = 0.1
    n_blocks: int = 1
    n_heads: int = 2
    n_qubits_attn: int = 2
    n_qubits_ffn: int = 2
    limit: Optional[int] = None
    # embedding classifier
    n_classes: int = 2
    # io
    data_dir: Optional[str] = None
    out_dir: str = "runs/latest"
    wallclock: bool = True

    def validate(self) -> "RunConfig":
        if self.task not in TASKS:
            raise ConfigError("task", f"must be one of {TASKS}, got {self.task!r}")
        if self.mode not in ("classical", "quantum"):
            raise ConfigError("mode", f"must be classical or quantum, got {self.mode!r}")
        if self.task != "pos" and self.mode != "quantum":
            raise ConfigError("mode", f"task {self.task} only has a quantum model")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError("optimizer", f"must be adam or sgd, got {self.optimizer!r}")
        if self.loss not in ("cross_entropy", "mse"):
            raise ConfigError("loss", f"must be cross_entropy or mse, got {self.loss!r}")
        if self.epochs < 0:
            raise ConfigError("epochs", f"must be non-negative, got {self.epochs}")
        if self.lr <= 0:
            raise ConfigError("lr", f"must be positive, got {self.lr}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout", f"must lie in [0, 1), got {self.dropout}")
        if self.limit is not None and self.limit < 1:
            raise ConfigError("limit", f"must be positive, got {self.limit}")
        for name in ("batch_size", "vocab_size", "n_tags", "embedding_dim", "hidden_dim", "n_qlayers",
                     "n_qubits", "max_seq_len", "ffn_dim", "n_blocks", "n_heads", "n_qubits_attn",
                     "n_qubits_ffn", "n_classes"):
            if getattr(self, name) < 1:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")
        if self.embedding_dim % self.n_heads and self.task == "sentiment":
            raise ConfigError("n_heads", f"embedding dim {self.embedding_dim} is not divisible by {self.n_heads}")
        if self.task == "sentiment" and self.vocab_size < 2:
            raise ConfigError("vocab_size", "needs room for padding and unknown tokens")
        return self

    def lstm_config(self) -> LSTMConfig:
        return LSTMConfig(
            vocab_size=self.vocab_size,
            embedding_dim=self.embedding_dim,
            hidden_dim=self.hidden_dim,
            n_qubits=self.n_qubits,
            n_qlayers=self.n_qlayers,
            n_tags=self.n_tags,
            mode=self.mode,
        )

    def transformer_config(self) -> TransformerConfig:
        return TransformerConfig(
            vocab_size=self.vocab_size,
            embed_dim=self.embedding_dim,
            max_seq_len=self.max_seq_len,
            n_blocks=self.n_blocks,
            n_heads=self.n_heads,
            ffn_dim=self.ffn_dim,
            dropout=self.dropout,
            n_qubits_attn=self.n_qubits_attn,
            n_qubits_ffn=self.n_qubits_ffn,
            n_qlayers=self.n_qlayers,
            n_classes=self.n_classes,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


TASK_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "pos": {"epochs": 300, "lr": 0.01, "batch_size": 1, "vocab_size": 9},
    "sentiment": {"epochs": 1, "lr": 0.001, "batch_size": 32, "vocab_size": 50_000},
    "embed-classify": {"epochs": 100, "lr": 0.01, "batch_size": 16, "n_qubits": 4, "n_classes": 2},
}

# long-form spellings of the hyperparameter names
TABLE_KEYS = {
    "epochs": "epochs",
    "vocab size": "vocab_size",
    "number of tags": "n_tags",
    "embedding dim": "embedding_dim",
    "hidden dim": "hidden_dim",
    "no. of quantum layers": "n_qlayers",
    "no. of qubits in vqc": "n_qubits",
    "batch size": "batch_size",
    "max seq length": "max_seq_len",
    "feed-forward net dim": "ffn_dim",
    "drop-out rate": "dropout",
    "no. of transformer blocks": "n_blocks",
    "no. of transformer heads": "n_heads",
    "no. of qubits in transformer blocks": "n_qubits_attn",
    "no. of qubits in feed-forward net dim": "n_qubits_ffn",
    "learning rate": "lr",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    kind = _FIELD_TYPES[name]
    text = raw.strip()
    try:
        if kind == "int":
            return int(text.replace(",", "").replace("_", ""))
        if kind == "Optional[int]":
            return None if text.lower() in ("", "none") else int(text.replace(",", ""))
        if kind == "float":
            return float(text)
        if kind == "bool":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "Optional[str]":
            return None if text.lower() in ("", "none") else text
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r} as {kind}") from None
    return text


def canonical_key(key: str) -> str:
    k = key.strip()
    low = k.lower()
    if low in TABLE_KEYS:
        return TABLE_KEYS[low]
    k = k.replace("-", "_").replace(" ", "_")
    if k not in _FIELD_TYPES:
        raise ConfigError(key, "unknown configuration key")
    return k


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}", f"expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            values[canonical_key(key)] = value.strip()
    return values


def make_config(task: Optional[str] = None, file_values: Optional[dict] = None, /, **overrides) -> RunConfig:
    """Task defaults, then config-file values, then explicit overrides."""
    merged: Dict[str, Any] = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    task = merged.get("task", task) or "pos"
    values: Dict[str, Any] = dict(TASK_DEFAULTS.get(task, {}))
    values["task"] = task
    for key, raw in merged.items():
        name = canonical_key(key)
        values[name] = _coerce(name, raw)
    return RunConfig(**values).validate()
