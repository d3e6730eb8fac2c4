import numpy as np
import pytest

from qvpkit import simcore
from qvpkit.errors import InvalidInput
from qvpkit.problems import oracles as orc


def test_marked_state_oracle_flips_only_the_marked_direction():
    o = orc.marked_state_oracle(3, 2, basis_state=True)
    dim = 4
    states = np.eye(2 * dim, dtype=complex)
    out = simcore.apply_to_array(states, 3, o.gate(2, range(2)))
    assert o.query_count == 1
    # The full action is a permutation swapping exactly one pair of basis states.
    moved = [i for i in range(8) if not np.isclose(out[i, i], 1)]
    assert len(moved) == 2
    np.testing.assert_allclose(out @ out, np.eye(8), atol=1e-12)


def test_marked_state_oracle_is_an_involution_haar():
    o = orc.marked_state_oracle(5, 3)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=(16, 3)) + 1j * rng.normal(size=(16, 3))
    g = o.gate(3, range(3))
    twice = simcore.apply_to_array(simcore.apply_to_array(psi, 4, g), 4, g)
    np.testing.assert_allclose(twice, psi, atol=1e-12)
    assert o.query_count == 2


def test_seeded_oracles_are_reproducible():
    a, b = orc.unitary_powers_oracle(7, 2), orc.unitary_powers_oracle(7, 2)
    np.testing.assert_allclose(orc.query_unitary(a), orc.query_unitary(b))
    assert not np.allclose(orc.query_unitary(a), orc.query_unitary(orc.unitary_powers_oracle(8, 2)))


def test_unitary_powers_applies_the_register_power():
    o = orc.unitary_powers_oracle(1, 1)
    u = orc.query_unitary(o)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    # power register holds 3 (two qubits): result is U^3 |0>.
    psi = np.zeros(8, dtype=complex)
    psi[3 << 1] = 1
    out = simcore.run_circuit(psi, 3, [o.gate([1, 2], [0])])
    np.testing.assert_allclose(out[6:8], np.linalg.matrix_power(u, 3)[:, 0], atol=1e-12)
    inv = o.gate([1, 2], [0]).inverse()
    np.testing.assert_allclose(simcore.run_circuit(out, 3, [inv]), psi, atol=1e-12)


def test_oracle_size_limits():
    with pytest.raises(InvalidInput):
        orc.marked_state_oracle(0, orc.MAX_ORACLE_QUBITS + 1)
    with pytest.raises(InvalidInput):
        orc.marked_state_oracle(0, 2).gate(2, [0])


def test_group_tables_are_groups():
    for table in (orc.cyclic_table(6), orc.dihedral_table(4)):
        g = table.shape[0]
        for x in range(g):
            for y in range(g):
                for z in range(0, g, 3):
                    assert table[table[x, y], z] == table[x, table[y, z]]
    d = orc.dihedral_table(4)
    assert d[1, 4] != d[4, 1]  # r s != s r


def test_group_oracle_classical_queries():
    spec = orc.make_group_spec(orc.cyclic_table(8), [2], 4, seed=0)
    o = orc.group_oracle(spec)
    labels = spec.labels
    assert o.multiply(labels[3], labels[5]) == labels[2]
    unused = next(v for v in range(1 << spec.label_bits) if v not in set(labels.tolist()))
    assert o.multiply(unused, labels[1]) is None
    assert o.query_count == 2
    assert o.identity_label == labels[0] and o.target_label == labels[4]


def test_group_oracle_gate_is_a_permutation_flagging_invalid_labels():
    spec = orc.make_group_spec(orc.cyclic_table(4), [1], 2, seed=1)
    o = orc.group_oracle(spec)
    n = spec.label_bits
    q = 2 * n + 1
    states = np.eye(1 << q, dtype=complex)
    out = simcore.apply_to_array(states, q, o.gate(range(n), range(n, 2 * n), 2 * n))
    assert o.query_count == 1
    np.testing.assert_allclose(out.conj().T @ out, np.eye(1 << q))
    bad = next(v for v in range(1 << n) if v not in set(spec.labels.tolist()))
    col = out[:, bad | (int(spec.labels[0]) << n)]
    assert (int(np.argmax(np.abs(col))) >> (2 * n)) & 1 == 1


def test_group_spec_validation():
    with pytest.raises(InvalidInput):
        orc.make_group_spec(orc.cyclic_table(8), [9], 1, seed=0)
    with pytest.raises(InvalidInput):
        orc.make_group_spec(orc.cyclic_table(8), [1], 1, seed=0, label_bits=2)
