import numpy as np
import pytest

from qnlp.data import (
    TAGS,
    FormatError,
    build_pos_dataset,
    build_vocab,
    encode_examples,
    load_embeddings,
    load_imdb,
    mini_imdb_path,
    pad_truncate,
    save_embeddings,
    separable_embeddings,
    tokenize,
)


def test_pos_dataset():
    vocab, examples = build_pos_dataset()
    assert len(vocab) == 9
    assert vocab.itos == ["The", "dog", "ate", "the", "apple", "Everybody", "read", "that", "book"]
    assert [TAGS[t] for t in examples[0].label] == ["DET", "NN", "V", "DET", "NN"]
    assert len(TAGS) == 3
    for ex in examples:
        assert len(ex.token_ids) == len(ex.label)
    assert sum(len(ex.label) for ex in examples) == 9


def test_tokenize_examples():
    assert tokenize("The the", "pos") == ["The", "the"]
    assert tokenize("Good, GREAT!", "imdb") == ["good", "great"]
    assert tokenize("", "pos") == [] and tokenize("", "imdb") == []
    assert tokenize("Fine.<br /><br />Really fine", "imdb") == ["fine", "really", "fine"]
    assert tokenize("don't -- stop", "imdb") == ["don't", "stop"]
    with pytest.raises(ValueError):
        tokenize("x", "other")


def test_build_vocab_cap():
    vocab = build_vocab([tokenize("a a b", "imdb")], max_size=3)
    assert vocab.stoi == {"<pad>": 0, "<unk>": 1, "a": 2}
    assert vocab.encode(["b"]) == [vocab.unk_id]


def test_build_vocab_keeps_all_when_cap_is_large():
    vocab = build_vocab([["b", "a"], ["c"]], max_size=100)
    assert len(vocab) == 5
    # equal frequencies break ties lexicographically
    assert vocab.itos[2:] == ["a", "b", "c"]


def test_vocab_deterministic_and_round_trip():
    docs = [tokenize(t, "imdb") for t in ["The film was good", "the plot was bad", "Good acting"]]
    a, b = build_vocab(docs, 6), build_vocab(docs, 6)
    assert a.itos == b.itos
    for doc in docs:
        decoded = a.decode(a.encode(doc))
        assert all(d == t or d == "<unk>" for d, t in zip(decoded, doc))


def test_pos_vocab_rejects_unknown():
    vocab, _ = build_pos_dataset()
    with pytest.raises(KeyError):
        vocab.encode(["cat"])
    with pytest.raises(KeyError):
        vocab.pad_id


def test_pad_truncate():
    assert pad_truncate([5, 6, 7], 5) == ([5, 6, 7, 0, 0], 3)
    ids = list(range(70))
    assert pad_truncate(ids, 64) == (ids[:64], 64)
    assert pad_truncate(ids[:64], 64) == (ids[:64], 64)


def _write(path, text, raw=None):
    path.parent.mkdir(parents=True, exist_ok=True)
    if raw is not None:
        path.write_bytes(raw)
    else:
        path.write_text(text, encoding="utf-8")


def test_load_imdb_small(tmp_path):
    _write(tmp_path / "train/pos/0_9.txt", "great")
    _write(tmp_path / "train/pos/1_8.txt", "good")
    _write(tmp_path / "train/neg/0_1.txt", "bad")
    examples = load_imdb(tmp_path, "train")
    assert [ex.label for ex in examples] == [1, 1, 0]
    assert [ex.text for ex in examples] == ["great", "good", "bad"]


def test_load_imdb_empty_and_missing(tmp_path):
    (tmp_path / "test/pos").mkdir(parents=True)
    (tmp_path / "test/neg").mkdir(parents=True)
    assert load_imdb(tmp_path, "test") == []
    with pytest.raises(FileNotFoundError, match="train"):
        load_imdb(tmp_path, "train")


def test_load_imdb_skips_undecodable(tmp_path, caplog):
    _write(tmp_path / "train/pos/0_9.txt", "fine")
    _write(tmp_path / "train/pos/1_9.txt", None, raw=b"\xff\xfe\xfa bad bytes")
    (tmp_path / "train/neg").mkdir(parents=True)
    examples = load_imdb(tmp_path, "train")
    assert len(examples) == 1 and examples.skipped == 1
    assert "skipping" in caplog.text


def test_encode_examples_truncates(tmp_path):
    _write(tmp_path / "train/pos/0_9.txt", " ".join(["word"] * 80))
    (tmp_path / "train/neg").mkdir(parents=True)
    examples = load_imdb(tmp_path, "train")
    vocab = build_vocab([tokenize(e.text, "imdb") for e in examples], 10)
    (ex,) = encode_examples(examples, vocab, 64)
    assert ex.token_ids == [vocab["word"]] * 64


def test_bundled_fixture():
    train = load_imdb(mini_imdb_path(), "train")
    test = load_imdb(mini_imdb_path(), "test")
    assert len(train) == 200 and sum(e.label for e in train) == 100
    assert len(test) == 40
    assert load_imdb(mini_imdb_path(), "train", limit=10) and len(load_imdb(mini_imdb_path(), "train", limit=10)) == 20


def test_load_embeddings_examples(tmp_path):
    f = tmp_path / "emb.csv"
    f.write_text("1, 0.5, −0.5\n0, 1.0, 2.0\n", encoding="utf-8")
    recs = load_embeddings(f)
    assert len(recs) == 2 and len(recs[0].vector) == 2
    np.testing.assert_array_equal(recs[0].vector, [0.5, -0.5])
    assert [r.label for r in recs] == [1, 0]
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert load_embeddings(empty) == []


def test_load_embeddings_tabs(tmp_path):
    f = tmp_path / "emb.tsv"
    f.write_text("0\t1.5\t2\n", encoding="utf-8")
    np.testing.assert_array_equal(load_embeddings(f)[0].vector, [1.5, 2.0])


def test_load_embeddings_errors(tmp_path):
    f = tmp_path / "ragged.csv"
    f.write_text("1,0,0,0\n0,1,1\n")
    with pytest.raises(FormatError, match=":2:"):
        load_embeddings(f)
    g = tmp_path / "text.csv"
    g.write_text("1,abc\n")
    with pytest.raises(FormatError, match=":1:"):
        load_embeddings(g)


def test_embedding_round_trip_and_separability(tmp_path):
    recs = separable_embeddings()
    assert len(recs) == 64 and all(len(r.vector) == 16 for r in recs)
    assert {r.label for r in recs} == {0, 1}
    path = tmp_path / "sep.csv"
    save_embeddings(path, recs)
    back = load_embeddings(path)
    for a, b in zip(recs, back):
        np.testing.assert_array_equal(a.vector, b.vector)
        assert a.label == b.label
