from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvpkit import qvp, simcore
from qvpkit.errors import InvalidInput, SizeCapExceeded
from qvpkit.jordan import spectrum
from qvpkit.simcore import DensityMatrix, StateVector

from conftest import random_state


def test_accept_on_one_probabilities():
    p = qvp.accept_on_one()
    assert qvp.acceptance_probability(p, StateVector.basis(1, 1)) == pytest.approx(1)
    assert qvp.acceptance_probability(p, StateVector.basis(1, 0)) == pytest.approx(0)
    plus = StateVector.normalized([1, 1])
    assert qvp.acceptance_probability(p, plus) == pytest.approx(0.5)


def test_acceptance_operator_reproduces_probabilities(rng):
    proc = qvp.random_procedure(7, 2, 2)
    a = qvp.acceptance_operator(proc).matrix
    states = random_state(rng, 4, 10)
    direct = qvp.acceptance_probabilities(proc, states)
    via_op = np.real(np.einsum("ij,ik,kj->j", states.conj(), a, states))
    np.testing.assert_allclose(direct, via_op, atol=1e-12)


def test_acceptance_operator_is_between_zero_and_identity():
    for seed in range(5):
        vals = np.linalg.eigvalsh(qvp.acceptance_operator(qvp.random_procedure(seed, 2, 2)).matrix)
        assert vals.min() > -1e-12 and vals.max() < 1 + 1e-12


def test_mixed_state_acceptance_is_weighted_average(rng):
    proc = qvp.random_procedure(3, 2, 1)
    a, b = random_state(rng, 4), random_state(rng, 4)
    rho = DensityMatrix(2, 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj()))
    expect = 0.3 * qvp.acceptance_probability(proc, StateVector(2, a)) + \
        0.7 * qvp.acceptance_probability(proc, StateVector(2, b))
    assert qvp.acceptance_probability_mixed(proc, rho) == pytest.approx(expect, abs=1e-12)


def test_cap_is_enforced():
    proc = qvp.random_procedure(0, 3, 3)
    with pytest.raises(SizeCapExceeded):
        qvp.acceptance_operator(proc, cap=5)


def test_wrong_witness_dimension_rejected():
    with pytest.raises(InvalidInput):
        qvp.acceptance_probabilities(qvp.accept_on_one(), np.ones((4, 1)))


def test_bounds_pair_requires_order_and_gap():
    with pytest.raises(InvalidInput):
        qvp.BoundsPair(Fraction(1, 3), Fraction(2, 3))
    with pytest.raises(InvalidInput):
        qvp.BoundsPair(Fraction(2, 3), Fraction(1, 3), q=2)
    assert qvp.BoundsPair(Fraction(2, 3), Fraction(1, 3), q=3).a == Fraction(2, 3)


def test_totality_of_always_accept_and_gap_of_accept_on_one():
    assert qvp.check_total(qvp.always_accept(2), 1)
    assert qvp.check_gapped(qvp.accept_on_one(), qvp.BoundsPair(1, 0))


def test_totality_witness_attains_the_maximum():
    proc = qvp.synthesize_with_spectrum([(0.2, 2), (0.7, 2)], basis_seed=3)
    res = qvp.check_total(proc, 0.7)
    assert res.total
    assert qvp.acceptance_probability(proc, res.witness) == pytest.approx(0.7, abs=1e-9)
    assert not qvp.check_total(proc, 0.71)


def test_totality_agrees_with_random_mixed_state_search(rng):
    """No random density matrix passes a bound that the operator test says is unreachable."""
    proc = qvp.random_procedure(11, 2, 2)
    top = qvp.check_total(proc, 0).max_probability
    bound = top + 1e-3
    assert not qvp.check_total(proc, bound)
    for _ in range(200):
        vecs = random_state(rng, 4, 3)
        w = rng.dirichlet(np.ones(3))
        rho = DensityMatrix(2, (vecs * w) @ vecs.conj().T)
        assert not qvp.relation_membership(proc, rho, bound, qvp.GEQ)
    witness = qvp.check_total(proc, top).witness
    assert qvp.relation_membership(proc, DensityMatrix.pure(witness), top, qvp.GEQ)


@given(st.lists(st.tuples(st.sampled_from([0.0, 0.125, 0.5, 0.875, 1.0]), st.integers(1, 3)),
                min_size=1, max_size=4))
def test_synthesized_spectrum_round_trip(values):
    total = sum(m for _, m in values)
    size = 1 << max(0, (total - 1).bit_length())
    values = list(values) + ([(0.3, size - total)] if size > total else [])
    proc = qvp.synthesize_with_spectrum(values, basis_seed=1)
    expect = {}
    for p, m in values:
        expect[p] = expect.get(p, 0) + m
    got = {round(e.p, 9): e.multiplicity for e in spectrum(proc).entries}
    assert got == {round(p, 9): m for p, m in expect.items()}


def test_synthesize_requires_power_of_two():
    with pytest.raises(InvalidInput):
        qvp.synthesize_with_spectrum([(0.5, 3)])


def test_subspace_relations_dimensions():
    proc = qvp.synthesize_with_spectrum([(0.1, 1), (0.5, 1), (0.9, 2)])
    spec = spectrum(proc)
    assert qvp.subspace_relations(spec, 0.5, qvp.GEQ).dimension == 3
    assert qvp.subspace_relations(spec, 0.5, qvp.LEQ).dimension == 2
    assert qvp.subspace_relations(spec, 0.95, qvp.GEQ).dimension == 0


def test_random_procedure_is_unitary_and_seeded():
    a, b = qvp.random_procedure(5, 2, 1), qvp.random_procedure(5, 2, 1)
    assert a.is_unitary()
    np.testing.assert_array_equal(simcore.circuit_unitary(3, a.circuit), simcore.circuit_unitary(3, b.circuit))


def test_swap_antisymmetric_spectrum():
    spec = spectrum(qvp.swap_antisymmetric(1))
    assert [(round(e.p, 9), e.multiplicity) for e in spec.entries] == [(0.0, 3), (1.0, 1)]
