"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line to the terminal
(even under pytest's output capture). Run directly with
``python3 tests/test_acceptance.py`` or as part of ``pytest``.
"""

import json
import time

import numpy as np
import pytest

from circuits import random_circuit, random_vqc, tape_jacobian_row
from gradcheck import numerical_grad
from qnlp.cli import main
from qnlp.config import make_config
from qnlp.functional import cross_entropy, softmax
from qnlp.qlstm import LSTMConfig, LSTMTagger, run_sequence, tag_logits
from qnlp.qsim import apply_gate, dense_matrix_oracle, expectation_z, init_state, parameter_shift_grad
from qnlp.qtransformer import (
    QTransformerClassifier,
    TransformerConfig,
    embed_sequence,
    multi_head_attention,
    scaled_dot_attention,
    sentiment_forward,
)
from qnlp.data import build_pos_dataset
from qnlp.tensor import Tape, Tensor
from qnlp.training import evaluate, evaluate_examples, train


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_parameter_accounting(report, capsys):
    start = time.perf_counter()
    totals = {}
    for mode in ("quantum", "classical"):
        assert main(["count-params", "--task", "pos", "--mode", mode, "--json"]) == 0
        totals[mode] = json.loads(capsys.readouterr().out)["total"]
    elapsed = time.perf_counter() - start
    ok = totals == {"quantum": 199, "classical": 477} and elapsed < 1.0
    report(1, "parameter accounting", ok, f"quantum={totals['quantum']} classical={totals['classical']} {elapsed:.2f}s")


def test_criterion_2_pos_training(report, tmp_path):
    start = time.perf_counter()
    details, ok = [], True
    for mode in ("classical", "quantum"):
        config = make_config("pos", None, mode=mode, seed=42, out_dir=str(tmp_path / mode))
        result = train(config)
        final = result.rows[-1]
        first_perfect = next((r.epoch for r in result.rows if r.accuracy == 1.0), None)
        ok &= len(result.rows) == 300 and final.accuracy == 1.0 and final.loss <= 0.10
        details.append(f"{mode}: acc={final.accuracy:.3f} loss={final.loss:.4f} first 100% at epoch {first_perfect}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    report(2, "POS training reproduction", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def _sampled_fd_check(loss_fn, named, rng, n_samples, skip=()):
    """Worst relative error between tape and central differences on sampled scalars."""
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss, [p for _, p in named])
    candidates = [(n, p) for n, p in named if n not in skip]
    worst = 0.0
    for _ in range(n_samples):
        name, p = candidates[rng.integers(len(candidates))]
        idx = int(rng.integers(p.size))
        g = p.grad.reshape(-1)[idx]
        num = numerical_grad(lambda: loss_fn().item(), p, indices=[idx]).reshape(-1)[idx]
        # the floor keeps exactly-zero gradients from dividing by zero
        worst = max(worst, abs(g - num) / max(abs(g), abs(num), 1e-8))
    return worst


def test_criterion_3_quantum_gradient_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst_shift = 0.0
    for _ in range(100):
        _, circuit, bindings = random_vqc(rng, n_qubits=4, max_layers=2)
        for q in range(4):
            tape = tape_jacobian_row(circuit, bindings, 4, q)
            for slot in bindings:
                worst_shift = max(worst_shift, abs(tape[slot] - parameter_shift_grad(circuit, bindings, slot, q, 4)))

    _, examples = build_pos_dataset()
    ex = examples[0]
    worst_fd = 0.0
    for mode in ("quantum", "classical"):
        tagger = LSTMTagger(LSTMConfig(mode=mode), np.random.default_rng(42))
        worst_fd = max(worst_fd, _sampled_fd_check(
            lambda: cross_entropy(tag_logits(tagger, run_sequence(tagger, ex.token_ids)), ex.label),
            tagger.named_parameters(), rng, 40,
        ))
    model = QTransformerClassifier(TransformerConfig(vocab_size=50), np.random.default_rng(42))
    ids = [3, 9, 27, 3, 41]
    worst_fd = max(worst_fd, _sampled_fd_check(
        lambda: cross_entropy(sentiment_forward(model, ids), [1]),
        model.named_parameters(), rng, 40, skip=("token_embedding", "position_embedding"),
    ))
    elapsed = time.perf_counter() - start
    ok = worst_shift <= 1e-9 and worst_fd < 1e-4 and elapsed < 60
    report(3, "quantum gradient oracle", ok,
           f"max |tape-shift|={worst_shift:.1e}, max FD rel err={worst_fd:.1e}, {elapsed:.1f}s")


def test_criterion_4_simulator_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst_diff = worst_norm = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        gates, _ = random_circuit(rng, n, int(rng.integers(1, 11)))
        state = init_state(n)
        for gate in gates:
            apply_gate(state, gate)
            worst_norm = max(worst_norm, abs(state.norm() - 1.0))
        strided = np.array([expectation_z(state, q) for q in range(n)])
        worst_diff = max(worst_diff, float(np.max(np.abs(strided - dense_matrix_oracle(gates, {}, n)))))
    elapsed = time.perf_counter() - start
    ok = worst_diff <= 1e-12 and worst_norm <= 1e-12 and elapsed < 10
    report(4, "simulator oracle equivalence", ok,
           f"max diff={worst_diff:.1e}, max norm drift={worst_norm:.1e}, {elapsed:.2f}s")


def _naive_attention(q, k, v):
    t, d = q.shape
    out = np.zeros((t, v.shape[1]))
    for i in range(t):
        scores = [sum(q[i, c] * k[j, c] for c in range(d)) / np.sqrt(d) for j in range(k.shape[0])]
        m = max(scores)
        e = [np.exp(s - m) for s in scores]
        for j in range(k.shape[0]):
            for c in range(v.shape[1]):
                out[i, c] += e[j] / sum(e) * v[j, c]
    return out


def test_criterion_5_attention(report):
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    naive = 0.0
    for _ in range(20):
        q, k, v = (rng.normal(size=(4, 4)) for _ in range(3))
        got = scaled_dot_attention(Tensor(q), Tensor(k), Tensor(v)).data
        naive = max(naive, float(np.max(np.abs(got - _naive_attention(q, k, v)))))
    v1 = rng.normal(size=(1, 4))
    t1_exact = np.array_equal(scaled_dot_attention(Tensor(rng.normal(size=(1, 4))), Tensor(rng.normal(size=(1, 4))),
                                                   Tensor(v1)).data, v1)
    row_sum = max(float(np.max(np.abs(softmax(rng.normal(size=(8, 8)) * 20).data.sum(axis=1) - 1))) for _ in range(20))
    model = QTransformerClassifier(TransformerConfig(vocab_size=100), np.random.default_rng(42))
    equiv = 0.0
    for _ in range(10):
        ids = list(rng.integers(0, 100, size=6))
        perm = rng.permutation(6)
        a = multi_head_attention(model.blocks[0], embed_sequence(model, [ids[p] for p in perm], positional=False)).data
        b = multi_head_attention(model.blocks[0], embed_sequence(model, ids, positional=False)).data[perm]
        equiv = max(equiv, float(np.max(np.abs(a - b))))
    elapsed = time.perf_counter() - start
    ok = naive <= 1e-12 and t1_exact and row_sum <= 1e-12 and equiv <= 1e-10 and elapsed < 5
    report(5, "attention correctness", ok,
           f"naive diff={naive:.1e}, T=1 exact={t1_exact}, row-sum err={row_sum:.1e}, "
           f"permutation err={equiv:.1e}, {elapsed:.2f}s")


def test_criterion_6_sentiment_smoke(report, tmp_path):
    start = time.perf_counter()
    config = make_config("sentiment", None, seed=42, epochs=2, vocab_size=1000, out_dir=str(tmp_path / "run"))
    result = train(config)
    train_rows = [r for r in result.rows if r.split == "train"]
    l0, l1, l2 = result.initial.loss, train_rows[0].loss, train_rows[1].loss
    elapsed = time.perf_counter() - start
    ok = l1 < l0 and l2 <= 1.10 * l1 and elapsed < 900
    report(6, "sentiment smoke test", ok,
           f"initial={l0:.5f} epoch1={l1:.5f} epoch2={l2:.5f}, {len(result.data.train)} reviews, {elapsed:.1f}s")


def test_criterion_7_dressed_head(report, tmp_path):
    start = time.perf_counter()
    config = make_config("embed-classify", None, seed=42, out_dir=str(tmp_path / "run"))
    result = train(config)
    first = next((r.epoch for r in result.rows if r.accuracy == 1.0), None)
    elapsed = time.perf_counter() - start
    ok = first is not None and first <= 100 and len(result.data.train) == 64 and elapsed < 60
    report(7, "dressed-VQC classifier head", ok, f"100% train accuracy first at epoch {first}, {elapsed:.1f}s")


def test_criterion_8_determinism_and_round_trip(report, tmp_path):
    identical = True
    for task, extra in (("pos", {"epochs": 20}), ("embed-classify", {"epochs": 10}),
                        ("sentiment", {"epochs": 1, "vocab_size": 300, "limit": 10})):
        blobs = []
        for rep in ("a", "b"):
            cfg = make_config(task, None, seed=42, wallclock=False, out_dir=str(tmp_path / task / rep), **extra)
            result = train(cfg)
            blobs.append(((tmp_path / task / rep / "metrics.csv").read_bytes(), result.checkpoint.read_bytes()))
        identical &= blobs[0] == blobs[1]
    worst = 0.0
    for task, extra in (("pos", {"epochs": 20, "mode": "classical"}), ("embed-classify", {"epochs": 10}),
                        ("sentiment", {"epochs": 1, "vocab_size": 300, "limit": 10})):
        cfg = make_config(task, None, seed=7, out_dir=str(tmp_path / "rt" / task), **extra)
        result = train(cfg)
        loss, _ = evaluate_examples(result.model, cfg, result.data.train)
        worst = max(worst, abs(evaluate(result.checkpoint).loss - loss))
    ok = identical and worst <= 1e-12
    report(8, "determinism and checkpoint round trip", ok,
           f"byte-identical metrics and checkpoints={identical}, max |reloaded-in-memory| loss={worst:.1e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
