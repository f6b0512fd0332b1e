"""Self-describing weight files.

Layout::

    b"QNLPCKPT"                 8-byte magic
    uint32 LE                   format version
    uint64 LE                   header length in bytes
    header                      UTF-8 JSON: config echo, extras, array table, payload digest
    payload                     little-endian float64 arrays, back to back

Every array entry lists its name, shape and element offset into the payload.
Writing the same arrays and metadata always produces the same bytes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

MAGIC = b"QNLPCKPT"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, corrupted or incompatible checkpoint."""


def save_checkpoint(
    path: Union[str, Path],
    arrays: Dict[str, np.ndarray],
    config: Dict[str, Any],
    extra: Dict[str, Any] | None = None,
) -> None:
    table = []
    chunks = []
    offset = 0
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype="<f8")  # ascontiguousarray would promote 0-d to 1-d
        table.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(arr.tobytes())
        offset += arr.size
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "config": config,
        "extra": extra or {},
        "arrays": table,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", FORMAT_VERSION, len(head)))
        fh.write(head)
        fh.write(payload)


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, np.ndarray], Dict[str, Any], Dict[str, Any]]:
    """Return ``(arrays, config, extra)``."""
    try:
        blob = Path(path).read_bytes()
    except OSError as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err.strerror}") from None
    if len(blob) < 20 or blob[:8] != MAGIC:
        raise CheckpointError(f"{path} is not a qnlp checkpoint")
    version, head_len = struct.unpack("<IQ", blob[8:20])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format version {version} (expected {FORMAT_VERSION})")
    try:
        header = json.loads(blob[20 : 20 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointError(f"{path}: corrupted header (format version {version})") from None
    payload = blob[20 + head_len :]
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise CheckpointError(f"{path}: payload checksum mismatch (format version {version})")
    flat = np.frombuffer(payload, dtype="<f8")
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape, dtype=np.int64))
        start = entry["offset"]
        if start + n > flat.size:
            raise CheckpointError(f"{path}: array {entry['name']} runs past the payload (format version {version})")
        arrays[entry["name"]] = flat[start : start + n].reshape(shape).astype(np.float64)
    return arrays, header["config"], header["extra"]
