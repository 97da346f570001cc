"""Core state/operator behavior, including frozen oracle values."""

import numpy as np
import pytest

from walknet.qudit import (
    Basis,
    OperatorMatrix,
    QuditState,
    SizeCapError,
    apply,
    basis_state,
    canonical_bell,
    canonical_ghz,
    fidelity,
    fourier_op,
    identity_op,
    label_shift_op,
    measure_all_branches,
    pauli_ops,
    shift_op,
    tensor,
)


def test_basis_state_index_encoding():
    s = basis_state(2, [0, 0])
    assert s.amps[0] == 1.0 and np.count_nonzero(s.amps) == 1
    s = basis_state(3, [2, 1])
    assert s.amps[7] == 1.0 and np.count_nonzero(s.amps) == 1


def test_basis_state_value_out_of_range():
    with pytest.raises(ValueError):
        basis_state(2, [0, 2])


def test_size_cap_enforced():
    with pytest.raises(SizeCapError):
        basis_state(2, [0] * 23)


def test_canonical_bell_00():
    s = canonical_bell(2, 0, 0)
    expect = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(s.amps, expect)


def test_canonical_bell_11_oracle():
    # direct substitution: (1/sqrt2)(w^0 |0,0-1> + w^1 |1,1-1>) = (|01> - |10>)/sqrt2
    s = canonical_bell(2, 1, 1)
    expect = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.allclose(s.amps, expect)
    assert abs(np.vdot(canonical_bell(2, 0, 0).amps, s.amps)) < 1e-12


def test_canonical_bell_qutrit_oracle():
    w = np.exp(2j * np.pi / 3)
    s = canonical_bell(3, 1, 0)
    expect = np.zeros(9, dtype=complex)
    expect[0], expect[4], expect[8] = 1, w, w**2
    assert np.allclose(s.amps, expect / np.sqrt(3))


def test_bell_basis_orthonormal():
    for d in (2, 3):
        vecs = [canonical_bell(d, m, n).amps for m in range(d) for n in range(d)]
        gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
        assert np.allclose(gram, np.eye(d * d), atol=1e-12)


def test_canonical_ghz():
    s = canonical_ghz(2, 3)
    expect = np.zeros(8)
    expect[0] = expect[7] = 1 / np.sqrt(2)
    assert np.allclose(s.amps, expect)
    assert np.allclose(canonical_ghz(2, 2).amps, canonical_bell(2, 0, 0).amps)
    s3 = canonical_ghz(3, 3)
    idx = np.nonzero(s3.amps)[0]
    assert list(idx) == [0, 13, 26]


def test_fourier_op_is_hadamard_at_d2():
    f = fourier_op(2)
    assert np.allclose(f.mat, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def test_fourier_unitary_and_uniform_column():
    for d in (2, 3, 5, 7):
        f = fourier_op(d)
        assert np.allclose(f.mat @ f.mat.conj().T, np.eye(d), atol=1e-12)
        out = apply(basis_state(d, [0]), f, [0])
        assert np.allclose(out.amps, np.full(d, 1 / np.sqrt(d)))


def test_shift_op_is_cnot_at_d2():
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    assert np.array_equal(shift_op(2).mat, cnot)


def test_shift_op_permutation_and_d3_action():
    s = shift_op(3)
    assert np.all((s.mat == 0) | (s.mat == 1))
    assert np.all(s.mat.sum(axis=0) == 1) and np.all(s.mat.sum(axis=1) == 1)
    out = apply(basis_state(3, [1, 0]), s, [0, 1])
    assert out.amps[1 * 3 + 2] == 1.0  # |1>|0> -> |1>|2>


def test_pauli_ops_d2_standard():
    x, z = pauli_ops(2)
    assert np.allclose(x.mat, [[0, 1], [1, 0]])
    assert np.allclose(z.mat, [[1, 0], [0, -1]])


def test_label_shift_identity():
    for d in (2, 3):
        assert np.allclose(label_shift_op(d, 0, 0).mat, np.eye(d))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_label_shift_recovers_reference_bell(d):
    target = canonical_bell(d, 0, 0)
    for m in range(d):
        for n in range(d):
            fixed = apply(canonical_bell(d, m, n), label_shift_op(d, m, n), [0])
            assert fidelity(fixed, target) >= 1 - 1e-10


def test_apply_identity_and_x():
    s = basis_state(2, [0, 0])
    assert np.allclose(apply(s, identity_op(2), [1]).amps, s.amps)
    x, _ = pauli_ops(2)
    assert np.allclose(apply(s, x, [0]).amps, basis_state(2, [1, 0]).amps)


def test_apply_then_dagger_roundtrip():
    rng = np.random.default_rng(7)
    for d, n in ((2, 4), (3, 3)):
        amps = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
        s = QuditState(d, n, amps / np.linalg.norm(amps))
        f = fourier_op(d)
        back = apply(apply(s, f, [1]), f.dagger(), [1])
        assert np.allclose(back.amps, s.amps, atol=1e-10)


def test_apply_validation_errors():
    s = basis_state(2, [0, 0])
    x, _ = pauli_ops(2)
    with pytest.raises(ValueError):
        apply(s, x, [0, 1])
    with pytest.raises(ValueError):
        apply(s, shift_op(2), [1, 1])
    with pytest.raises(ValueError):
        apply(s, shift_op(3), [0, 1])


def test_tensor_products():
    b = canonical_bell(2, 0, 0)
    four = tensor(b, b)
    # one-step check of the amplitude layout: |0000>,|0011>,|1100>,|1111> at 1/2
    assert np.allclose(four.amps[[0, 3, 12, 15]], 0.5)
    assert np.count_nonzero(np.abs(four.amps) > 1e-12) == 4
    s01 = tensor(basis_state(2, [0]), basis_state(2, [1]))
    assert np.allclose(s01.amps, basis_state(2, [0, 1]).amps)
    with pytest.raises(ValueError):
        tensor(basis_state(2, [0]), basis_state(3, [0]))


def test_measure_bell_computational():
    branches = measure_all_branches(canonical_bell(2, 0, 0), [(1, Basis.COMPUTATIONAL)])
    assert len(branches) == 2
    for b in branches:
        assert b.probability == pytest.approx(0.5)
        (site, basis, val) = b.outcome[0]
        expect = basis_state(2, [val])
        assert fidelity(b.post, expect) == pytest.approx(1.0)


def test_measure_product_state_single_branch():
    s = basis_state(3, [2, 1, 0])
    branches = measure_all_branches(s, [(1, Basis.COMPUTATIONAL)])
    assert len(branches) == 1
    assert branches[0].probability == pytest.approx(1.0)
    assert branches[0].outcome[0][2] == 1
    assert np.allclose(branches[0].post.amps, basis_state(3, [2, 0]).amps)


def test_fourier_basis_labels_d2():
    plus = QuditState(2, 1, np.array([1, 1]) / np.sqrt(2))
    minus = QuditState(2, 1, np.array([1, -1]) / np.sqrt(2))
    (b,) = measure_all_branches(plus, [(0, Basis.FOURIER)])
    assert b.outcome[0][2] == 0 and b.post is None
    (b,) = measure_all_branches(minus, [(0, Basis.FOURIER)])
    assert b.outcome[0][2] == 1


def test_branch_probabilities_sum_to_one():
    rng = np.random.default_rng(11)
    for d, n in ((2, 5), (3, 4)):
        amps = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
        s = QuditState(d, n, amps / np.linalg.norm(amps))
        branches = measure_all_branches(
            s, [(0, Basis.FOURIER), (2, Basis.COMPUTATIONAL)]
        )
        assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-9)


def test_measure_empty_targets_rejected():
    with pytest.raises(ValueError):
        measure_all_branches(canonical_bell(2, 0, 0), [])


def test_fidelity_properties():
    s = canonical_ghz(3, 2)
    assert fidelity(s, s) == pytest.approx(1.0)
    phased = QuditState(3, 2, np.exp(0.7j) * s.amps)
    assert fidelity(s, phased) == pytest.approx(1.0)
    assert fidelity(basis_state(2, [0, 0]), canonical_bell(2, 0, 0)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity(basis_state(2, [0]), basis_state(2, [0, 0]))


def test_norm_preserved_under_random_circuits():
    rng = np.random.default_rng(3)
    s = canonical_ghz(3, 4)
    f = fourier_op(3)
    sh = shift_op(3)
    for _ in range(30):
        if rng.random() < 0.5:
            s = apply(s, f, [int(rng.integers(4))])
        else:
            a, b = rng.permutation(4)[:2]
            s = apply(s, sh, [int(a), int(b)])
    assert abs(np.linalg.norm(s.amps) - 1.0) < 1e-9


def test_operator_unitarity_enforced():
    with pytest.raises(ValueError):
        OperatorMatrix(2, 1, np.array([[1, 0], [0, 2]], dtype=complex))


def test_state_json_roundtrip():
    s = canonical_bell(3, 2, 1)
    back = QuditState.from_json(3, 2, s.to_json())
    assert np.allclose(back.amps, s.amps)
