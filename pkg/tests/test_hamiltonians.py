from fractions import Fraction

import numpy as np
import pytest

from qvpkit import qvp
from qvpkit.errors import InvalidInput
from qvpkit.jordan import certify_binary_spectrum, spectrum
from qvpkit.problems import hamiltonians as hm
from qvpkit.problems.hamiltonians import HamiltonianInstance, Term


def proj(vec):
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def binary(values, tol=1e-9):
    return all(min(abs(p), abs(p - 1)) < tol for p in values)


def test_non_commuting_terms_rejected():
    with pytest.raises(InvalidInput, match="commute"):
        HamiltonianInstance(1, (Term((0,), proj([1, 0])), Term((0,), proj([1, 1])), ))


def test_non_projector_rejected():
    with pytest.raises(InvalidInput, match="projector"):
        HamiltonianInstance(1, (Term((0,), np.diag([0.5, 0])),))


def test_bounded_terms_must_fit_scale():
    with pytest.raises(InvalidInput):
        HamiltonianInstance(1, (Term((0,), np.diag([0, 0.6])), Term((0,), np.diag([0, 0.1]))), hm.BOUNDED)


def test_joint_eigenspaces_cover_the_register():
    inst = hm.random_projector_instance(3, 3)
    spaces = hm.joint_eigenspaces(inst)
    assert sum(b.shape[1] for b in spaces.values()) == 8
    full = np.column_stack(list(spaces.values()))
    np.testing.assert_allclose(full.conj().T @ full, np.eye(8), atol=1e-10)


def test_qsat_satisfiable_instance():
    inst = HamiltonianInstance(2, (Term((0,), proj([0, 1])), Term((1,), proj([1, 1]))))
    proc = hm.build_qsat_procedure(inst)
    spec = spectrum(proc)
    assert binary(spec.values())
    assert qvp.check_total(proc, 1)
    top = spec.entry_near(1.0)
    assert np.linalg.norm(top.projector() - hm.qsat_accepting_projector(inst)) < 1e-7
    # |0> on qubit 0 and |-> on qubit 1 is frustration free; flag 0, any second register.
    ff = np.kron(np.array([1, -1]) / np.sqrt(2), [1, 0])
    w = np.kron(np.kron([1, 0, 0, 0], ff), [1, 0])
    assert qvp.acceptance_probabilities(proc, w[:, None])[0] == pytest.approx(1)


def test_qsat_identity_constraint_accepts_antisymmetric_collision():
    inst = HamiltonianInstance(2, (Term((0,), np.eye(2)), Term((1,), proj([1, 0]))))
    proc = hm.build_qsat_procedure(inst)
    res = qvp.check_total(proc, 1)
    assert res.total
    flag_one = np.sum(np.abs(res.witness.amplitudes[1::2]) ** 2)
    assert flag_one == pytest.approx(1)


@pytest.mark.parametrize("seed", range(4))
def test_qsat_random_family(seed):
    inst = hm.random_projector_instance(seed, 2, identity_terms=seed % 2)
    proc = hm.build_qsat_procedure(inst)
    spec = spectrum(proc)
    assert binary(spec.values())
    assert np.linalg.norm(spec.entry_near(1.0).projector() - hm.qsat_accepting_projector(inst)) < 1e-7


def test_qsat_needs_n_terms():
    inst = HamiltonianInstance(2, (Term((0,), proj([0, 1])),))
    with pytest.raises(InvalidInput):
        hm.build_qsat_procedure(inst)


@pytest.mark.parametrize("seed", range(3))
def test_almost_degenerate_matches_brute_force(seed):
    inst = hm.random_bounded_instance(seed, 2, style="local")
    proc = hm.build_almost_degenerate_procedure(inst)
    spec = spectrum(proc)
    assert binary(spec.values())
    top = spec.entry_near(1.0)
    ref = hm.almost_degenerate_accepting_projector(inst)
    got = top.projector() if top is not None else np.zeros_like(ref)
    assert np.linalg.norm(got - ref) < 1e-7


def test_almost_degenerate_totality_can_fail_without_a_close_pair():
    # Two energy levels 0 and 1 on one qubit: no pair within 1/2, nothing accepts.
    inst = HamiltonianInstance(1, (Term((0,), np.diag([0.0, 1.0]), (Fraction(0), Fraction(1))),), hm.BOUNDED)
    proc = hm.build_almost_degenerate_procedure(inst)
    assert not qvp.check_total(proc, 1)
    energy_gap, _ = hm.closest_energy_pair(inst)
    assert energy_gap > Fraction(1, 2)


def test_almost_degenerate_totality_with_few_levels():
    inst = hm.random_bounded_instance(0, 2, num_terms=2, denominator=1, style="local")
    assert qvp.check_total(hm.build_almost_degenerate_procedure(inst), 1)


def test_multicopy_multiplicity_counts_equal_sequences():
    inst = hm.random_projector_instance(1, 2, num_terms=2, style="local")
    proc = hm.build_multicopy_procedure(inst)
    spec = spectrum(proc)
    assert binary(spec.values())
    assert spec.entry_near(1.0).multiplicity == hm.multicopy_accepting_multiplicity(inst)


def test_multicopy_product_basis_certifies_above_the_cap():
    inst = hm.random_projector_instance(1, 3, num_terms=1, style="shared")
    proc = hm.build_multicopy_procedure(inst)
    basis, expected = hm.multicopy_product_basis(inst)
    spec = certify_binary_spectrum(proc, basis)
    assert spec.entry_near(1.0).multiplicity == int(expected.sum())


def test_term_measurement_reads_eigenvalues():
    inst = HamiltonianInstance(1, (Term((0,), np.diag([0.0, 0.5]), (Fraction(0), Fraction(1, 2))),), hm.BOUNDED)
    gates, readout = hm.measure_terms(inst, [0], 1)
    from qvpkit import simcore
    out = simcore.run_circuit(np.array([0, 1, 0, 0], dtype=complex), 1 + len(readout.qubits), gates)
    idx = int(np.argmax(np.abs(out)))
    assert inst.values(0)[(idx >> 1) & 1] == Fraction(1, 2)
