import struct

import numpy as np
import pytest

from qnlp.checkpoint import FORMAT_VERSION, MAGIC, CheckpointError, load_checkpoint, save_checkpoint


def arrays(rng):
    return {"a": rng.normal(size=(3, 4)), "b": rng.normal(size=5), "c": np.array(2.5)}


def test_round_trip_exact(tmp_path, rng):
    src = arrays(rng)
    save_checkpoint(tmp_path / "m.qnlp", src, {"task": "pos"}, {"epochs_completed": 3})
    got, cfg, extra = load_checkpoint(tmp_path / "m.qnlp")
    assert list(got) == list(src)
    for k in src:
        np.testing.assert_array_equal(got[k], src[k])
        assert got[k].shape == np.shape(src[k])
    assert cfg == {"task": "pos"} and extra == {"epochs_completed": 3}


def test_bytes_are_deterministic(tmp_path, rng):
    src = arrays(rng)
    save_checkpoint(tmp_path / "1.qnlp", src, {"b": 1, "a": 2})
    save_checkpoint(tmp_path / "2.qnlp", dict(src), {"a": 2, "b": 1})
    assert (tmp_path / "1.qnlp").read_bytes() == (tmp_path / "2.qnlp").read_bytes()


def test_layout_header(tmp_path, rng):
    save_checkpoint(tmp_path / "m.qnlp", arrays(rng), {})
    blob = (tmp_path / "m.qnlp").read_bytes()
    assert blob[:8] == MAGIC
    assert struct.unpack("<I", blob[8:12])[0] == FORMAT_VERSION


def test_corrupted_payload(tmp_path, rng):
    path = tmp_path / "m.qnlp"
    save_checkpoint(path, arrays(rng), {})
    blob = bytearray(path.read_bytes())
    blob[-3] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError, match="checksum.*version 1"):
        load_checkpoint(path)


def test_wrong_version(tmp_path, rng):
    path = tmp_path / "m.qnlp"
    save_checkpoint(path, arrays(rng), {})
    blob = bytearray(path.read_bytes())
    blob[8:12] = struct.pack("<I", 99)
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError, match="version 99"):
        load_checkpoint(path)


def test_not_a_checkpoint(tmp_path):
    (tmp_path / "junk").write_bytes(b"hello world, definitely not weights")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "junk")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing")
