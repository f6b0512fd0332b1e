import numpy as np
import pytest

from circuits import random_vqc, tape_jacobian_row
from gradcheck import numerical_grad, rel_error
from qnlp.functional import Linear
from qnlp.qsim import dense_matrix_oracle, parameter_shift_grad, run_circuit
from qnlp.tensor import ShapeError, Tape, Tensor
from qnlp.vqc import (
    DressedVQC,
    VQCConfig,
    VQCParams,
    build_circuit,
    init_vqc_params,
    vqc_forward,
)


def params(theta):
    return VQCParams(Tensor(np.atleast_2d(np.asarray(theta, dtype=float)), requires_grad=True))


def test_zero_input_zero_angles_gives_ones():
    for n in (1, 2, 4):
        out = vqc_forward(VQCConfig(n), params(np.zeros(n)), np.zeros(n))
        np.testing.assert_array_equal(out.data, np.ones(n))


@pytest.mark.parametrize("x,theta", [(0.3, 0.0), (1.1, 0.7), (-2.0, 2.5)])
def test_single_qubit_law(x, theta):
    cfg = VQCConfig(1)
    out = vqc_forward(cfg, params([theta]), [x]).data[0]
    assert out == pytest.approx(np.cos(x) * np.cos(theta), abs=1e-12)
    oracle = dense_matrix_oracle(build_circuit(cfg), {"x0": x, "theta0_0": theta}, 1)
    assert out == pytest.approx(oracle[0], abs=1e-12)


def test_half_turn_encoding_zeroes_output(rng):
    for theta in rng.uniform(0, 2 * np.pi, 5):
        assert abs(vqc_forward(VQCConfig(1), params([theta]), [np.pi / 2]).data[0]) < 1e-15


def test_identity_law(rng):
    for x in rng.uniform(-np.pi, np.pi, 10):
        assert vqc_forward(VQCConfig(1), params([0.0]), [x]).data[0] == pytest.approx(np.cos(x), abs=1e-12)


def test_circuit_layout():
    gates = build_circuit(VQCConfig(3, 2))
    assert [g.kind for g in gates[:3]] == ["RY"] * 3
    assert [g.kind for g in gates[3:6]] == ["RX"] * 3
    assert [(g.control, g.target) for g in gates[6:9]] == [(0, 1), (1, 2), (2, 0)]
    assert len(gates) == 3 + 2 * 6
    assert all(g.kind != "CNOT" for g in build_circuit(VQCConfig(1, 2)))


def test_matches_dense_oracle(rng):
    for _ in range(20):
        cfg, circuit, bindings = random_vqc(rng, n_qubits=int(rng.integers(1, 5)))
        n = cfg.n_qubits
        theta = np.array([[bindings[f"theta{l}_{i}"] for i in range(n)] for l in range(cfg.n_layers)])
        x = np.array([bindings[f"x{i}"] for i in range(n)])
        out = vqc_forward(cfg, params(theta), x).data
        np.testing.assert_allclose(out, dense_matrix_oracle(circuit, bindings, n), rtol=0, atol=1e-12)


def test_batched_input(rng):
    cfg = VQCConfig(3, 2)
    p = init_vqc_params(cfg, rng)
    xs = rng.normal(size=(4, 3))
    out = vqc_forward(cfg, p, xs)
    assert out.shape == (4, 3)
    for b in range(4):
        np.testing.assert_allclose(out.data[b], vqc_forward(cfg, p, xs[b]).data, atol=1e-14)


def test_theta_gradients_match_shift(rng):
    for _ in range(10):
        _, circuit, bindings = random_vqc(rng)
        for q in range(4):
            tape = tape_jacobian_row(circuit, bindings, 4, q)
            for slot in bindings:
                if slot.startswith("theta"):
                    assert abs(tape[slot] - parameter_shift_grad(circuit, bindings, slot, q, 4)) < 1e-9


def test_input_shape_errors(rng):
    cfg = VQCConfig(2)
    with pytest.raises(ShapeError):
        vqc_forward(cfg, init_vqc_params(cfg, rng), np.zeros(3))
    with pytest.raises(ShapeError):
        vqc_forward(cfg, params(np.zeros(3)), np.zeros(2))


def test_init_params_seeded():
    cfg = VQCConfig(4, 2)
    a = init_vqc_params(cfg, np.random.default_rng(1)).theta.data
    b = init_vqc_params(cfg, np.random.default_rng(1)).theta.data
    c = init_vqc_params(cfg, np.random.default_rng(2)).theta.data
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (2, 4) and np.all((a >= 0) & (a < 2 * np.pi))


def _zero(linear: Linear):
    linear.weight.data[:] = 0.0
    linear.bias.data[:] = 0.0


def test_dressed_all_zero_classical_weights(rng):
    layer = DressedVQC(5, 3, VQCConfig(2), rng)
    _zero(layer.squeeze)
    _zero(layer.bloat)
    layer.vqc.theta.data[:] = 0.0
    np.testing.assert_array_equal(layer(rng.normal(size=5)).data, np.zeros(3))


def test_dressed_zero_bloat_returns_bias(rng):
    layer = DressedVQC(5, 3, VQCConfig(2), rng)
    layer.bloat.weight.data[:] = 0.0
    layer.bloat.bias.data[:] = [0.1, -0.2, 0.3]
    for _ in range(3):
        np.testing.assert_allclose(layer(rng.normal(size=5)).data, [0.1, -0.2, 0.3], atol=1e-15)


@pytest.mark.parametrize("in_dim,out_dim,q,layers", [(5, 3, 2, 1), (8, 8, 2, 1), (14, 6, 4, 2), (1, 1, 1, 3)])
def test_dressed_count_matches_enumeration(in_dim, out_dim, q, layers, rng):
    layer = DressedVQC(in_dim, out_dim, VQCConfig(q, layers), rng)
    formula = (in_dim * q + q) + layers * q + (q * out_dim + out_dim)
    assert layer.parameter_count() == formula == layer.num_parameters()


def test_dressed_gradients_match_finite_differences(rng):
    layer = DressedVQC(5, 3, VQCConfig(3, 2), rng)
    x = rng.normal(size=(2, 5))
    w = rng.normal(size=(2, 3))

    def loss():
        return (layer(x) * w).sum()

    with Tape() as tape:
        out = loss()
    leaves = layer.parameters()
    tape.backward(out, leaves)
    for leaf in leaves:
        num = numerical_grad(lambda: loss().item(), leaf)
        assert rel_error(leaf.grad, num) < 1e-6


def test_dressed_shape_error(rng):
    with pytest.raises(ShapeError):
        DressedVQC(5, 3, VQCConfig(2), rng)(np.zeros(4))


def test_circuit_and_forward_agree_for_batched_bindings(rng):
    cfg = VQCConfig(2)
    p = init_vqc_params(cfg, rng)
    x = rng.normal(size=(3, 2))
    bindings = {"x0": x[:, 0], "x1": x[:, 1], "theta0_0": p.theta.data[0, 0], "theta0_1": p.theta.data[0, 1]}
    np.testing.assert_allclose(run_circuit(build_circuit(cfg), bindings, 2).data, vqc_forward(cfg, p, x).data)
