"""Training and evaluation loops for the three tasks.

``pos``            the two-sentence tagger (classical or quantum LSTM), one
                   optimizer step per sentence.
``sentiment``      the quantum Transformer on an IMDB-style folder, mini-batches.
``embed-classify`` a dressed-VQC head on precomputed sentence embeddings.

Every epoch ends with a dropout-free pass over the training data; that pass
is what the metrics log records, so evaluating the saved checkpoint on the
same data reproduces the final logged loss.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from . import data as D
from . import tensor as T
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import RunConfig
from .functional import Module, cross_entropy, mse, softmax
from .optim import make_optimizer
from .qlstm import LSTMTagger, run_sequence, tag_logits
from .qtransformer import QTransformerClassifier, sentiment_forward
from .tensor import Tape, Tensor
from .vqc import DressedVQC, VQCConfig

logger = logging.getLogger(__name__)

METRICS_LOG = "metrics.jsonl"
METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "checkpoint.qnlp"
METRIC_COLUMNS = ("epoch", "split", "loss", "accuracy", "seconds")


class NumericError(FloatingPointError):
    """Training produced a non-finite loss."""


@dataclass
class MetricsRow:
    epoch: int
    split: str
    loss: float
    accuracy: float
    seconds: float


@dataclass
class TaskData:
    train: list
    test: Optional[list] = None
    vocab: Optional[D.Vocab] = None


@dataclass
class TrainResult:
    model: Module
    rows: List[MetricsRow]
    initial: MetricsRow
    checkpoint: Path
    data: TaskData = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# models and data per task
# ---------------------------------------------------------------------------


def build_model(config: RunConfig, rng: np.random.Generator, input_dim: Optional[int] = None) -> Module:
    if config.task == "pos":
        return LSTMTagger(config.lstm_config(), rng)
    if config.task == "sentiment":
        return QTransformerClassifier(config.transformer_config(), rng)
    if input_dim is None:
        raise ValueError("embed-classify needs the embedding dimension")
    return DressedVQC(input_dim, config.n_classes, VQCConfig(config.n_qubits, config.n_qlayers), rng)


def load_task_data(config: RunConfig, vocab_tokens: Optional[List[str]] = None) -> TaskData:
    """Load the task's examples; ``vocab_tokens`` pins a saved vocabulary."""
    if config.task == "pos":
        vocab, examples = D.build_pos_dataset()
        if len(vocab) > config.vocab_size:
            raise D.FormatError(f"POS corpus has {len(vocab)} tokens but vocab_size is {config.vocab_size}")
        return TaskData(examples, None, vocab)

    if config.task == "sentiment":
        root = Path(config.data_dir) if config.data_dir else D.mini_imdb_path()
        raw = {"train": D.load_imdb(root, "train", config.limit)}
        if (root / "test").is_dir():
            raw["test"] = D.load_imdb(root, "test", config.limit)
        if vocab_tokens is None:
            vocab = D.build_vocab([D.tokenize(ex.text, "imdb") for ex in raw["train"]], max_size=config.vocab_size)
        else:
            vocab = D.Vocab(vocab_tokens[2:], reserved=True)
        encoded = {}
        for name, examples in raw.items():
            encoded[name] = [ex for ex in D.encode_examples(examples, vocab, config.max_seq_len) if ex.token_ids]
            if len(encoded[name]) < len(examples):
                logger.warning("dropped %d empty reviews from %s", len(examples) - len(encoded[name]), root / name)
        return TaskData(encoded["train"], encoded.get("test"), vocab)

    if config.data_dir:
        records = D.load_embeddings(config.data_dir)
    else:
        records = D.separable_embeddings(seed=config.seed)
    if not records:
        raise D.FormatError("embedding file holds no records")
    return TaskData(records)


def _batch_loss(model: Module, config: RunConfig, batch: list, training: bool, step: int) -> Tuple[Tensor, np.ndarray]:
    """Mean loss over ``batch`` and the per-item predictions/labels for accuracy."""
    if config.task == "pos":
        logits = T.concat([tag_logits(model, run_sequence(model, ex.token_ids)) for ex in batch], axis=0)
        targets = np.concatenate([ex.label for ex in batch])
    elif config.task == "sentiment":
        logits = T.stack(
            [
                sentiment_forward(
                    model,
                    ex.token_ids,
                    training=training,
                    rng=(config.seed, step * config.batch_size + j),
                )
                for j, ex in enumerate(batch)
            ]
        )
        targets = np.array([ex.label for ex in batch])
    else:
        x = np.stack([rec.vector for rec in batch])
        logits = model(Tensor(x))
        targets = np.array([rec.label for rec in batch])
    if config.loss == "mse":
        loss = mse(softmax(logits, axis=-1), np.eye(logits.shape[-1])[targets])
    else:
        loss = cross_entropy(logits, targets)
    correct = np.argmax(logits.data, axis=1) == targets
    return loss, correct


def evaluate_examples(model: Module, config: RunConfig, examples: list) -> Tuple[float, float]:
    """Dropout-free loss and accuracy (token-level for POS, example-level otherwise)."""
    if not examples:
        raise ValueError("cannot evaluate on an empty dataset")
    if config.task == "pos" or config.loss == "mse":
        loss, correct = _batch_loss(model, config, examples, training=False, step=0)
        return float(loss.item()), float(correct.mean())
    # per-example losses summed in a fixed order
    total, hits = 0.0, 0
    chunk = max(config.batch_size, 1)
    for start in range(0, len(examples), chunk):
        batch = examples[start : start + chunk]
        loss, correct = _batch_loss(model, config, batch, training=False, step=0)
        total += loss.item() * len(batch)
        hits += int(correct.sum())
    return total / len(examples), hits / len(examples)


def _batches(config: RunConfig, examples: list, epoch: int) -> List[list]:
    if config.task == "pos":
        return [[ex] for ex in examples]
    order = np.random.default_rng([config.seed, epoch]).permutation(len(examples))
    items = [examples[i] for i in order]
    return [items[i : i + config.batch_size] for i in range(0, len(items), config.batch_size)]


# ---------------------------------------------------------------------------
# metrics files
# ---------------------------------------------------------------------------


def _format_row(row: MetricsRow) -> str:
    return f"{row.epoch},{row.split},{row.loss!r},{row.accuracy!r},{row.seconds!r}"


def read_metrics(run_dir: Union[str, Path]) -> List[MetricsRow]:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    log = run_dir / METRICS_LOG
    if not log.is_file():
        raise FileNotFoundError(f"no metrics log in {run_dir}")
    with open(log, encoding="utf-8") as fh:
        return [MetricsRow(**json.loads(line)) for line in fh if line.strip()]


def export_metrics(run_dir: Union[str, Path], dest: Union[str, Path, None] = None) -> Path:
    """Write ``epoch,split,loss,accuracy,seconds`` CSV from a run's metrics log."""
    rows = read_metrics(run_dir)
    dest = Path(dest) if dest else Path(run_dir) / METRICS_FILE
    lines = [",".join(METRIC_COLUMNS)] + [_format_row(r) for r in rows]
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return dest


# ---------------------------------------------------------------------------
# train / evaluate
# ---------------------------------------------------------------------------


def _checkpoint_extra(task_data: TaskData, epochs_done: int) -> dict:
    extra = {"epochs_completed": epochs_done}
    if task_data.vocab is not None:
        extra["vocab"] = list(task_data.vocab.itos)
    if task_data.train and isinstance(task_data.train[0], D.EmbeddingRecord):
        extra["input_dim"] = int(task_data.train[0].vector.shape[0])
    return extra


def _write_checkpoint(path: Path, model: Module, config: RunConfig, task_data: TaskData, epochs_done: int) -> None:
    # the output location is not part of the model, and leaving it out keeps
    # checkpoints from identical runs byte-identical wherever they are written
    echo = {k: v for k, v in config.to_dict().items() if k != "out_dir"}
    save_checkpoint(path, model.state_dict(), echo, _checkpoint_extra(task_data, epochs_done))


def train(config: RunConfig, task_data: Optional[TaskData] = None) -> TrainResult:
    """Run the task's training loop, logging metrics each epoch and saving a checkpoint."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if task_data is None:
        task_data = load_task_data(config)
    if not task_data.train:
        raise D.FormatError("training set is empty")

    rng = np.random.default_rng(config.seed)
    input_dim = None
    if config.task == "embed-classify":
        input_dim = int(task_data.train[0].vector.shape[0])
    model = build_model(config, rng, input_dim)
    params = model.parameters()
    opt = make_optimizer(config.optimizer, params, config.lr)

    loss0, acc0 = evaluate_examples(model, config, task_data.train)
    initial = MetricsRow(0, "train", loss0, acc0, 0.0)

    log_path = out_dir / METRICS_LOG
    log_path.write_text("", encoding="utf-8")
    rows: List[MetricsRow] = []
    start = time.perf_counter()
    step = 0
    for epoch in range(1, config.epochs + 1):
        for batch in _batches(config, task_data.train, epoch):
            with Tape() as tape:
                loss, _ = _batch_loss(model, config, batch, training=True, step=step)
            if not math.isfinite(loss.item()):
                raise NumericError(f"non-finite loss {loss.item()} at epoch {epoch}, step {step}")
            tape.backward(loss, params)
            opt.step()
            step += 1
        splits = [("train", task_data.train)]
        if task_data.test:
            splits.append(("test", task_data.test))
        for split, examples in splits:
            loss_e, acc_e = evaluate_examples(model, config, examples)
            if not math.isfinite(loss_e):
                raise NumericError(f"non-finite {split} loss at epoch {epoch}")
            seconds = time.perf_counter() - start if config.wallclock else 0.0
            row = MetricsRow(epoch, split, loss_e, acc_e, seconds)
            rows.append(row)
            with open(log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(asdict(row)) + "\n")
        logger.info("epoch %d: train loss %.6f acc %.4f", epoch, rows[-len(splits)].loss, rows[-len(splits)].accuracy)

    ckpt = out_dir / CHECKPOINT_FILE
    _write_checkpoint(ckpt, model, config, task_data, config.epochs)
    export_metrics(out_dir)
    return TrainResult(model, rows, initial, ckpt, task_data)


def load_model(checkpoint: Union[str, Path]) -> Tuple[Module, RunConfig, dict]:
    arrays, cfg, extra = load_checkpoint(checkpoint)
    try:
        config = RunConfig(**cfg).validate()
    except TypeError as err:
        raise CheckpointError(f"{checkpoint}: config echo does not match this version ({err})") from None
    model = build_model(config, np.random.default_rng(0), extra.get("input_dim"))
    try:
        model.load_state_dict(arrays)
    except (KeyError, T.ShapeError) as err:
        raise CheckpointError(f"{checkpoint}: incompatible weights (format version 1): {err}") from None
    return model, config, extra


def evaluate(
    checkpoint: Union[str, Path],
    data_dir: Optional[str] = None,
    split: str = "train",
) -> MetricsRow:
    """Loss and accuracy of a saved model, without recording a tape."""
    model, config, extra = load_model(checkpoint)
    if data_dir is not None:
        config.data_dir = data_dir
    task_data = load_task_data(config, extra.get("vocab"))
    examples = task_data.test if split == "test" else task_data.train
    if not examples:
        raise D.FormatError(f"no {split} examples for task {config.task}")
    if config.task == "embed-classify" and examples[0].vector.shape[0] != extra.get("input_dim"):
        raise CheckpointError(
            f"{checkpoint}: model expects {extra.get('input_dim')}-dim embeddings, data has {examples[0].vector.shape[0]}"
        )
    loss, acc = evaluate_examples(model, config, examples)
    return MetricsRow(extra.get("epochs_completed", 0), split, loss, acc, 0.0)
