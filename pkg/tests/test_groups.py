import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvpkit import qvp
from qvpkit.problems import groups as gp
from qvpkit.problems.oracles import cyclic_table, dihedral_table, group_oracle, make_group_spec


def z8(target):
    return group_oracle(make_group_spec(cyclic_table(8), [2], target, seed=0))


@given(st.lists(st.integers(0, 6), min_size=1, max_size=4), st.integers(3, 4))
def test_certificate_round_trip(word, bits):
    assert gp.decode_certificate(gp.encode_certificate(word, bits), len(word), bits) == tuple(word)


def test_symbol_table_and_word_evaluation():
    spec = make_group_spec(dihedral_table(4), [1, 4], 5, seed=2)
    o = group_oracle(spec)
    sym = gp.SymbolTable(o)
    lab = spec.labels
    assert sym.evaluate([1, 2]) == lab[spec.table[1, 4]]
    assert sym.evaluate([gp.PAD, 1, gp.PAD]) == lab[1]
    w = (1, 2, 3)
    x = spec.table[spec.table[1, 4], spec.inverse(1)]
    assert sym.inverse_label(w) == lab[spec.inverse(x)]


def test_subgroup_labels_by_closure():
    o = z8(4)
    labs = gp.subgroup_labels(o)
    spec = make_group_spec(cyclic_table(8), [2], 4, seed=0)
    assert labs == sorted(int(spec.labels[i]) for i in (0, 2, 4, 6))


def test_certificate_branch():
    o = z8(4)
    gnm = gp.build_gnm_procedure(o, repetitions=2)
    good = gp.find_certificate(o, 2)
    assert good is not None
    assert qvp.acceptance_probabilities(gnm.procedure, gnm.certificate_witness(good)[:, None])[0] == pytest.approx(1)
    bad = (1, 0)  # evaluates to g = 2, not 4
    assert qvp.acceptance_probabilities(gnm.procedure, gnm.certificate_witness(bad)[:, None])[0] == pytest.approx(0)


@pytest.mark.parametrize("target, expected", [(4, 0.0), (1, 0.5)])
def test_subgroup_state_branch(target, expected):
    o = z8(target)
    gnm = gp.build_gnm_procedure(o, repetitions=2)
    psi = gp.uniform_label_state(o.n, gp.subgroup_labels(o))
    circuit = qvp.acceptance_probabilities(gnm.procedure, gnm.quantum_witness(psi)[:, None])[0]
    branch = gp.quantum_branch_acceptance(gnm, psi[:, None])[0]
    assert circuit == pytest.approx(expected, abs=1e-9)
    assert branch == pytest.approx(circuit, abs=1e-12)


def test_branch_operator_matches_circuit_on_random_states():
    o = z8(1)
    gnm = gp.build_gnm_procedure(o, repetitions=2)
    rng = np.random.default_rng(0)
    for _ in range(3):
        v = rng.normal(size=1 << o.n) + 1j * rng.normal(size=1 << o.n)
        v /= np.linalg.norm(v)
        circuit = qvp.acceptance_probabilities(gnm.procedure, gnm.quantum_witness(v)[:, None])[0]
        assert gp.quantum_branch_acceptance(gnm, v[:, None])[0] == pytest.approx(circuit, abs=1e-12)


def test_closure_words_are_nested_prefixes():
    a = gp.draw_words(3, 5, 4, 6)
    b = gp.draw_words(3, 5, 8, 6)
    assert b[:4] == a


@pytest.mark.parametrize("table, gens, target", [(cyclic_table(16), [4], 8), (dihedral_table(8), [2, 8], 4)])
def test_decay_is_non_increasing(table, gens, target):
    # Targets lie in the subgroup, so the best flag-1 witness should fade with t.
    o = group_oracle(make_group_spec(table, gens, target, seed=1))
    vals = [gp.max_quantum_branch_acceptance(gp.build_gnm_procedure(o, repetitions=t, seed=1))
            for t in (1, 2, 4, 8)]
    assert all(y <= x + 1e-9 for x, y in zip(vals, vals[1:]))
    assert vals[-1] < vals[0]
