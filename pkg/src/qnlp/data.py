"""Datasets: the two-sentence POS corpus, IMDB-style review folders, and
precomputed sentence embeddings."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"
TAGS = ("DET", "NN", "V")

POS_SENTENCES = (
    ("The dog ate the apple", ("DET", "NN", "V", "DET", "NN")),
    ("Everybody read that book", ("NN", "V", "DET", "NN")),
)


class FormatError(ValueError):
    """A data file does not follow its documented layout."""


class Vocab:
    """Token to id map with dense ids.

    With ``reserved=True`` id 0 is padding and id 1 stands for any unknown
    token; otherwise every id is a real token and unknown tokens raise.
    """

    def __init__(self, tokens: Iterable[str] = (), reserved: bool = False):
        self.reserved = reserved
        self.itos: List[str] = [PAD, UNK] if reserved else []
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if token not in self.stoi:
            self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return self.stoi[token]

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def __getitem__(self, token: str) -> int:
        return self.stoi[token]

    @property
    def pad_id(self) -> int:
        if not self.reserved:
            raise KeyError("this vocabulary has no padding id")
        return 0

    @property
    def unk_id(self) -> int:
        if not self.reserved:
            raise KeyError("this vocabulary has no unknown-token id")
        return 1

    def encode(self, tokens: Sequence[str]) -> List[int]:
        if self.reserved:
            return [self.stoi.get(t, 1) for t in tokens]
        try:
            return [self.stoi[t] for t in tokens]
        except KeyError as err:
            raise KeyError(f"token {err.args[0]!r} is not in the vocabulary") from None

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self.itos[i] for i in ids]


@dataclass
class Example:
    token_ids: List[int]
    label: Union[int, List[int]]
    text: str = ""


@dataclass
class EmbeddingRecord:
    vector: np.ndarray
    label: int


class ExampleList(list):
    """A list of examples that also reports how many files were skipped."""

    def __init__(self, items=(), skipped: int = 0):
        super().__init__(items)
        self.skipped = skipped


# ---------------------------------------------------------------------------
# Tokenisation and vocabularies
# ---------------------------------------------------------------------------

_BR = re.compile(r"<br\s*/?>", re.IGNORECASE)
_EDGE_PUNCT = re.compile(r"^[^0-9a-z]+|[^0-9a-z]+$")


def tokenize(text: str, mode: str = "pos") -> List[str]:
    """Whitespace tokenisation.

    ``pos`` keeps tokens verbatim (case-sensitive); ``imdb`` lowercases, drops
    HTML line breaks and strips non-alphanumeric characters from token edges.
    """
    if mode == "pos":
        return text.split()
    if mode == "imdb":
        words = _BR.sub(" ", text).lower().split()
        return [w for w in (_EDGE_PUNCT.sub("", w) for w in words) if w]
    raise ValueError(f"unknown tokenisation mode {mode!r}")


def build_vocab(token_lists: Iterable[Sequence[str]], max_size: Optional[int] = None, mode: str = "imdb") -> Vocab:
    """Build a vocabulary from tokenised documents.

    ``imdb`` mode keeps the ``max_size`` entries (padding and unknown
    included) of highest frequency, ties broken lexicographically. ``pos``
    mode keeps every token in first-occurrence order.
    """
    if mode == "pos":
        vocab = Vocab()
        for tokens in token_lists:
            for tok in tokens:
                vocab.add(tok)
        return vocab
    if mode != "imdb":
        raise ValueError(f"unknown vocabulary mode {mode!r}")
    if max_size is not None and max_size < 2:
        raise ValueError(f"an imdb vocabulary needs room for padding and unknown, got max_size={max_size}")
    counts = Counter(tok for tokens in token_lists for tok in tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if max_size is not None:
        ranked = ranked[: max_size - 2]
    return Vocab((tok for tok, _ in ranked), reserved=True)


def build_pos_dataset() -> Tuple[Vocab, List[Example]]:
    """The two tagged sentences and their case-sensitive vocabulary (9 tokens)."""
    token_lists = [tokenize(text, "pos") for text, _ in POS_SENTENCES]
    vocab = build_vocab(token_lists, mode="pos")
    examples = [
        Example(vocab.encode(tokens), [TAGS.index(t) for t in tags], text)
        for tokens, (text, tags) in zip(token_lists, POS_SENTENCES)
    ]
    return vocab, examples


def pad_truncate(ids: Sequence[int], max_len: int = 64, pad_id: int = 0) -> Tuple[List[int], int]:
    """Right-pad or cut ``ids`` to ``max_len``; also return the unpadded length."""
    if max_len < 1:
        raise ValueError(f"max_len must be positive, got {max_len}")
    ids = list(ids[:max_len])
    true_len = len(ids)
    return ids + [pad_id] * (max_len - true_len), true_len


# ---------------------------------------------------------------------------
# IMDB directory layout
# ---------------------------------------------------------------------------


def load_imdb(root: Union[str, Path], split: str = "train", limit: Optional[int] = None) -> ExampleList:
    """Read ``root/split/{pos,neg}/*.txt`` (positive reviews first).

    Returned examples carry the raw text and label; ``token_ids`` are filled
    in later by :func:`encode_examples`. Files that are not valid UTF-8 are
    skipped with a warning and counted in ``.skipped``.
    """
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    examples = ExampleList()
    for label, sub in ((1, "pos"), (0, "neg")):
        folder = Path(root) / split / sub
        if not folder.is_dir():
            raise FileNotFoundError(f"IMDB folder not found: {folder}")
        taken = 0
        for path in sorted(folder.glob("*.txt")):
            if limit is not None and taken >= limit:
                break
            try:
                text = path.read_text(encoding="utf-8")
            except UnicodeDecodeError:
                logger.warning("skipping undecodable review %s", path)
                examples.skipped += 1
                continue
            examples.append(Example([], label, text))
            taken += 1
    if examples.skipped:
        logger.warning("skipped %d undecodable files under %s", examples.skipped, root)
    return examples


def encode_examples(examples: Sequence[Example], vocab: Vocab, max_len: int = 64) -> List[Example]:
    """Tokenise, encode and truncate review texts (no padding is added)."""
    out = []
    for ex in examples:
        ids, n = pad_truncate(vocab.encode(tokenize(ex.text, "imdb")), max_len, vocab.pad_id)
        out.append(Example(ids[:n], ex.label, ex.text))
    return out


def mini_imdb_path() -> Path:
    """Location of the bundled ~200-review fixture."""
    return Path(str(resources.files("qnlp") / "datasets" / "mini_imdb"))


# ---------------------------------------------------------------------------
# Precomputed embeddings
# ---------------------------------------------------------------------------

_SPLIT = re.compile(r"[,\t]")


def load_embeddings(path: Union[str, Path]) -> List[EmbeddingRecord]:
    """Read ``label, v1, ..., vd`` lines (comma- or tab-delimited, no header)."""
    records: List[EmbeddingRecord] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f.strip().replace("−", "-") for f in _SPLIT.split(line)]
            try:
                label = int(fields[0])
                vector = np.array([float(f) for f in fields[1:]])
            except ValueError as err:
                raise FormatError(f"{path}:{lineno}: non-numeric field ({err})") from None
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise FormatError(f"{path}:{lineno}: expected {dim} values, found {len(vector)}")
            records.append(EmbeddingRecord(vector, label))
    return records


def save_embeddings(path: Union[str, Path], records: Sequence[EmbeddingRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(",".join([str(int(rec.label))] + [repr(float(v)) for v in rec.vector]) + "\n")


def separable_embeddings(n: int = 64, dim: int = 16, seed: int = 42, margin: float = 0.5) -> List[EmbeddingRecord]:
    """Two classes split by a random hyperplane, with a margin around it."""
    rng = np.random.default_rng(seed)
    normal = rng.normal(size=dim)
    normal /= np.linalg.norm(normal)
    records = []
    while len(records) < n:
        v = rng.normal(size=dim)
        side = float(v @ normal)
        if abs(side) < margin:
            continue
        records.append(EmbeddingRecord(v, int(side > 0)))
    return records
