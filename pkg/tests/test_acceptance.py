"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the summary lines appear at the
end of the session) or directly with ``python3 tests/test_acceptance.py``.
Expected values come from independent reference computations: brute-force
linear algebra on the full registers, scipy's binomial distribution, direct
Fourier sums and exhaustive eigenphase enumeration.
"""

from __future__ import annotations

import itertools
import json
import os
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import binom

from qvpkit import cli, qvp, simcore
from qvpkit.instances import load_instance
from qvpkit.jordan import certify_binary_spectrum, crosscheck_uniqueness, spectrum
from qvpkit.problems import groups as gp
from qvpkit.problems import hamiltonians as hm
from qvpkit.problems import marked, qlll
from qvpkit.problems import unitary_powers as up
from qvpkit.problems.oracles import (cyclic_table, dihedral_table, group_oracle, make_group_spec,
                                     marked_state_oracle, query_unitary, unitary_powers_oracle)
from qvpkit.reductions import (Affine, BinomialTail, StrongReductionClaim, amplify, deamplify,
                               retarget_bounds, solve_deamplification, verify_strong_reduction)
from qvpkit.reports import read_report, report_differences
from qvpkit.rng import haar_state, stream

GOLDEN = Path(__file__).parent / "golden"


def _random_procedures():
    for s in range(50):
        yield s, qvp.random_procedure(s, 1 + s % 3, 1 + (s // 3) % 3)


def _binary(values, tol=1e-9) -> bool:
    return all(min(abs(p), abs(p - 1)) <= tol for p in values)


def _joint_classes(inst: hm.HamiltonianInstance) -> list[int]:
    """Sizes of the joint eigenspaces, found by diagonalizing a random combination of terms."""
    mats = [hm.embed(inst.n, t.support, t.matrix) for t in inst.terms]
    coeffs = np.random.default_rng(99).uniform(1, 2, size=len(mats))
    _, vecs = np.linalg.eigh(sum(c * m for c, m in zip(coeffs, mats)))
    labels = [tuple(np.round([np.real(v.conj() @ m @ v) for m in mats], 6)) for v in vecs.T]
    return [labels.count(h) for h in set(labels)]


@pytest.mark.criterion(1, "spectrum uniqueness on 50 random procedures")
def test_c01_spectrum_uniqueness():
    start = time.perf_counter()
    worst_value, worst_space = 0.0, 0.0
    for _, proc in _random_procedures():
        rep = crosscheck_uniqueness(proc, raise_on_mismatch=False)
        assert rep.passed, rep.message
        worst_value = max(worst_value, max(rep.value_differences))
        worst_space = max(worst_space, max(rep.distances))
    elapsed = time.perf_counter() - start
    assert worst_value <= 1e-8 and worst_space < 1e-7
    assert elapsed < 60, f"took {elapsed:.1f} s"


@pytest.mark.criterion(2, "acceptance of eigenbasis superpositions")
def test_c02_no_interference():
    rng = stream(0, "acceptance-superpositions")
    worst = 0.0
    for _, proc in _random_procedures():
        spec = spectrum(proc)
        basis, ps = spec.eigenbasis(), spec.eigenvalues()
        alphas = np.column_stack([haar_state(rng, basis.shape[1]) for _ in range(20)])
        got = qvp.acceptance_probabilities(proc, basis @ alphas)
        want = (np.abs(alphas) ** 2).T @ ps
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst < 1e-9, worst


@pytest.mark.criterion(3, "three-level fixture spectrum and relation subspace")
def test_c03_example_fixture():
    report = cli.cmd_spectrum(cli.RunConfig(command="spectrum", instance="builtin:example1"))
    got = [(r["p"], r["multiplicity"]) for r in report.find("eigenspace")]
    want = [(1 / 3, 1), (2 / 3 - 2 ** -6, 1), (2 / 3, 2)]
    assert [m for _, m in got] == [m for _, m in want]
    assert np.allclose([p for p, _ in got], [p for p, _ in want], atol=1e-8)
    spec = spectrum(load_instance("builtin:example1").procedure)
    rel = qvp.subspace_relations(spec, Fraction(2, 3), qvp.GEQ)
    assert rel.basis.shape[1] == 2
    near = spec.entry_near(2 / 3 - 2 ** -6)
    assert np.linalg.norm(rel.basis.conj().T @ near.basis) < 1e-9


@pytest.mark.criterion(4, "deamplification on 10 random bound quadruples")
def test_c04_deamplification():
    rng = stream(0, "deamplification-quadruples")
    for i in range(10):
        b, bp, ap, a = np.sort(rng.uniform(0, 1, size=4))
        z, zp = solve_deamplification(a, b, ap, bp)
        assert 0 <= zp < z <= 1
        assert abs((z - zp) * a + zp - ap) < 1e-12 and abs((z - zp) * b + zp - bp) < 1e-12
        source = qvp.random_procedure(100 + i, 2, 1)
        target = deamplify(source, z, zp)
        src = spectrum(source)
        got = qvp.acceptance_probabilities(target, src.eigenbasis())
        assert np.max(np.abs(got - ((z - zp) * src.eigenvalues() + zp))) < 1e-9
        assert verify_strong_reduction(StrongReductionClaim(source, target, Affine(z, zp))).passed


@pytest.mark.criterion(5, "amplification contract and composite retarget")
def test_c05_amplification():
    f = BinomialTail(63, Fraction(1, 2))
    hi, lo = f(Fraction(2, 3)), f(Fraction(1, 3))
    assert isinstance(hi, Fraction) and hi >= 1 - Fraction(1, 8) and lo <= Fraction(1, 8)
    assert abs(float(hi) - binom.sf(f.threshold - 1, 63, 2 / 3)) < 1e-12
    assert abs(float(lo) - binom.sf(f.threshold - 1, 63, 1 / 3)) < 1e-12

    source = qvp.synthesize_with_spectrum([(1 / 3, 1), (2 / 3, 1)], basis_seed=1)
    assert source.num_qubits == 2
    for rounds in (3, 7):
        declared = BinomialTail(rounds, Fraction(1, 2))
        claim = StrongReductionClaim(source, amplify(source, rounds, Fraction(1, 2)), declared)
        rep = verify_strong_reduction(claim)
        assert rep.passed, rep.message
        assert all(abs(c.target_p - declared(c.p)) < 1e-9 for c in rep.checks)

    claim = retarget_bounds(source, Fraction(2, 3), Fraction(1, 3), 0.6, 0.4, 3, always_amplify=True)
    assert abs(claim.f(2 / 3) - 0.6) < 1e-9 and abs(claim.f(1 / 3) - 0.4) < 1e-9
    rep = verify_strong_reduction(claim, cap=24)
    assert rep.passed, rep.message
    assert {round(c.target_p, 9) for c in rep.checks} == {0.4, 0.6}


@pytest.mark.criterion(6, "QSAT (1,0) gap and totality on 30 instances")
def test_c06_qsat():
    start = time.perf_counter()
    with_identity = 0
    for s in range(30):
        ident = 1 if s < 6 else 0
        with_identity += ident
        inst = hm.random_projector_instance(s, 2, identity_terms=ident)
        proc = hm.build_qsat_procedure(inst)
        spec = spectrum(proc)
        assert _binary(spec.values()), spec.values()
        assert qvp.check_total(proc, 1)
        top = spec.entry_near(1.0)
        assert np.linalg.norm(top.projector() - hm.qsat_accepting_projector(inst)) < 1e-7
    assert with_identity >= 5
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(7, "almost-degenerate and multi-copy gap, totality and multiplicity")
def test_c07_almost_degenerate_and_multicopy():
    # Grid families where energies take fewer values than there are states.
    for n, terms, den in ((2, 2, 1), (3, 3, 2)):
        for s in range(3):
            inst = hm.random_bounded_instance(s, n, num_terms=terms, denominator=den, style="local")
            proc = hm.build_almost_degenerate_procedure(inst)
            spec = spectrum(proc)
            assert _binary(spec.values())
            assert qvp.check_total(proc, 1)
            ref = hm.almost_degenerate_accepting_projector(inst)
            assert np.linalg.norm(spec.entry_near(1.0).projector() - ref) < 1e-7
    # General bounded instances: gap always, totality exactly when a close pair exists.
    for n in (1, 2, 3):
        for s in range(3):
            inst = hm.random_bounded_instance(s, n, style="local")
            proc = hm.build_almost_degenerate_procedure(inst)
            spec = spectrum(proc)
            assert _binary(spec.values())
            gap, _ = hm.closest_energy_pair(inst)
            assert bool(qvp.check_total(proc, 1)) == (gap <= Fraction(1, 1 << n))

    dense = [hm.random_projector_instance(s, n, num_terms=n, style="local") for n in (1, 2) for s in range(3)]
    for inst in dense:
        proc = hm.build_multicopy_procedure(inst)
        spec = spectrum(proc)
        assert _binary(spec.values())
        assert qvp.check_total(proc, 1)
        assert spec.entry_near(1.0).multiplicity == sum(k ** 3 for k in _joint_classes(inst))
    large = [hm.random_projector_instance(1, 3, num_terms=1, style="shared"),
             hm.random_projector_instance(2, 3, num_terms=2, style="local")]
    for inst in large:
        proc = hm.build_multicopy_procedure(inst)
        basis, _ = hm.multicopy_product_basis(inst)
        spec = certify_binary_spectrum(proc, basis)
        assert _binary(spec.values())
        assert spec.entry_near(1.0).multiplicity == sum(k ** 3 for k in _joint_classes(inst))


@pytest.mark.criterion(8, "QLLL error-free bounds at n=3, 4 bits")
def test_c08_qlll():
    bits = 4
    for s in range(10):
        inst, ground = qlll.random_frustration_free_instance(s, 3, 3 + s % 3)
        proc = qlll.build_qlll_procedure(inst, bits)
        assert abs(qvp.acceptance_probability(proc, simcore.StateVector(3, ground)) - 1) < 1e-9
        energies, vecs = np.linalg.eigh(qlll.rescaled_hamiltonian(inst))
        accept = qvp.acceptance_probabilities(proc, vecs)
        assert np.all(np.abs(accept[energies < 1e-12] - 1) < 1e-9)
        high = energies >= 2.0 ** (-bits + 1)
        assert np.all(accept[high] <= 0.5 + 1e-9), accept[high]


@pytest.mark.criterion(9, "phase-estimation tail at 6 bits")
def test_c09_phase_estimation_tail():
    bits = 6
    dim = 1 << bits
    phases = stream(0, "tail-phases").random(100)
    ks = np.arange(dim)
    for i, phi in enumerate(phases):
        probs = simcore.phase_estimation_probabilities(phi, bits)
        amps = np.exp(2j * np.pi * np.outer(phi - ks / dim, ks)).sum(axis=1) / dim
        assert np.max(np.abs(probs - np.abs(amps) ** 2)) < 1e-12
        if i < 5:
            state = simcore.phase_estimate(
                lambda k, t: simcore.StateVector(1, np.exp(2j * np.pi * phi * k) * t.amplitudes),
                simcore.StateVector.basis(1, 0), bits)
            assert np.max(np.abs(simcore.marginal(state.probabilities(), bits + 1, range(1, bits + 1))
                                 - probs)) < 1e-12
        dist = np.array([simcore.circle_distance(phi, y / dim) for y in ks])
        for k in (2, 3, 5):
            assert probs[dist > k / dim + 1e-15].sum() < 1 / (2 * k - 1)


@pytest.mark.criterion(10, "marked-state separation at n=4 and n=6")
def test_c10_marked_state():
    for n in (4, 6):
        for seed in range(3):
            o = marked_state_oracle(seed, n, basis_state=True)
            proc = marked.build_marked_state_procedure(o)
            state, queries = marked.grover_search(o)
            assert queries <= int(np.ceil(np.pi / 4 * 2 ** (n / 2))) + 1
            assert qvp.acceptance_probability(proc, state) >= 2 / 3
            base = marked.classical_baseline(o, trials=500, seed=seed)
            assert base.probes == (1 << n) // 10 and base.mean_success < 0.1
            spec = spectrum(proc)
            assert spec.multiplicities() == [(1 << n) - 1, 1]
            assert abs(spec.values()[0]) < 1e-9 and abs(spec.values()[1] - 1) < 1e-9


@pytest.mark.criterion(11, "unitary-powers thresholds at n=4")
def test_c11_unitary_powers():
    n = 4
    dim = 1 << n
    for seed in range(3):
        phases, vecs = up.eigenphases(query_unitary(unitary_powers_oracle(seed, n)))
        dist = np.array([[simcore.circle_distance(a, b) for b in phases] for a in phases])
        assert np.min(dist[np.triu_indices(dim, 1)]) <= 1 / dim + 1e-12

        o = unitary_powers_oracle(seed, n)
        proc = up.build_udeg_procedure(o)
        pairs = list(itertools.combinations(range(dim), 2))
        anti = np.column_stack([(np.kron(vecs[:, j], vecs[:, i]) - np.kron(vecs[:, i], vecs[:, j])) / np.sqrt(2)
                                for i, j in pairs])
        acc = qvp.acceptance_probabilities(proc, anti)
        d = np.array([dist[i, j] for i, j in pairs])
        assert np.all(acc[d <= 1 / dim + 1e-12] >= 2 / 3)
        assert np.all(acc[d > 9 / dim] <= 1 / 3)
        sym = np.column_stack([np.kron(vecs[:, i], vecs[:, i]) for i in range(dim)]
                              + [(np.kron(vecs[:, j], vecs[:, i]) + np.kron(vecs[:, i], vecs[:, j])) / np.sqrt(2)
                                 for i, j in pairs[:20]])
        assert np.all(qvp.acceptance_probabilities(proc, sym) <= 1 / 3)

        dists = up.estimate_distribution(unitary_powers_oracle(seed, n), vecs)
        for i in range(dim):
            assert up.product_acceptance([dists[:, i]] * 3, n) >= 2 / 3
        for i, j, k in itertools.combinations_with_replacement(range(dim), 3):
            if max(dist[i, j], dist[i, k], dist[j, k]) > 14 / dim:
                assert up.product_acceptance([dists[:, i], dists[:, j], dists[:, k]], n) <= 1 / 3

    # The product formula used above agrees with the full circuit where it fits.
    small = 3
    o = unitary_powers_oracle(7, small)
    vecs = up.eigenphases(query_unitary(unitary_powers_oracle(7, small)))[1]
    dists = up.estimate_distribution(unitary_powers_oracle(7, small), vecs)
    triples = [(0, 0, 0), (0, 1, 2), (3, 5, 7), (6, 6, 1)]
    states = np.column_stack([np.kron(np.kron(vecs[:, k], vecs[:, j]), vecs[:, i]) for i, j, k in triples])
    circuit = qvp.acceptance_probabilities(up.build_umulticopy_procedure(o), states)
    formula = [up.product_acceptance([dists[:, i], dists[:, j], dists[:, k]], small) for i, j, k in triples]
    assert np.max(np.abs(circuit - formula)) < 1e-10


GROUP_CASES = [
    ("Z8", cyclic_table(8), [2], 4, 1),
    ("Z16", cyclic_table(16), [4], 8, 2),
    ("Z64", cyclic_table(64), [2], 4, 1),
    ("Z64/6", cyclic_table(64), [6], 12, 3),
    ("D4", dihedral_table(4), [1, 4], 5, None),
    ("D8", dihedral_table(8), [2, 8], 10, 1),
    ("D16", dihedral_table(16), [4, 16], 20, 1),
    ("D32", dihedral_table(32), [2, 32], 4, 3),
]


@pytest.mark.criterion(12, "group non-membership contracts")
def test_c12_group_non_membership():
    for name, table, gens, member, nonmember in GROUP_CASES:
        o = group_oracle(make_group_spec(table, gens, member, seed=1), seed=1)
        word = gp.find_certificate(o, 2)
        assert word is not None, name
        gnm = gp.build_gnm_procedure(o, repetitions=2, seed=1)
        cert = qvp.acceptance_probabilities(gnm.procedure, gnm.certificate_witness(word)[:, None])[0]
        assert abs(cert - 1) < 1e-9, name
        decay = [gp.max_quantum_branch_acceptance(gp.build_gnm_procedure(o, repetitions=t, seed=1))
                 for t in (1, 2, 4, 8)]
        assert all(y <= x + 1e-9 for x, y in zip(decay, decay[1:])), (name, decay)
        assert decay[-1] < 1 - 1e-9, (name, decay)

        if nonmember is None:
            continue
        o = group_oracle(make_group_spec(table, gens, nonmember, seed=1), seed=1)
        assert gp.find_certificate(o, 2) is None
        gnm = gp.build_gnm_procedure(o, repetitions=2, seed=1)
        psi = gp.uniform_label_state(o.n, gp.subgroup_labels(o))
        acc = qvp.acceptance_probabilities(gnm.procedure, gnm.quantum_witness(psi)[:, None])[0]
        assert abs(acc - 0.5) < 1e-9, (name, acc)
        assert abs(gp.quantum_branch_acceptance(gnm, psi[:, None])[0] - acc) < 1e-9


@pytest.mark.criterion(13, "CLI determinism and golden reports")
def test_c13_cli_determinism(tmp_path):
    argv = [sys.executable, "-m", "qvpkit", "gnm", "--instance", "builtin:gnm_z8_member", "--seed", "3"]
    runs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and runs[0]
    for case in json.loads((GOLDEN / "cases.json").read_text()):
        out = tmp_path / f"{case['name']}.jsonl"
        assert cli.main([*case["argv"], "--out", str(out)]) == 0, case["name"]
        diffs = report_differences(read_report(GOLDEN / f"{case['name']}.jsonl"), read_report(out))
        assert not diffs, (case["name"], diffs[:5])
        again = tmp_path / "again.jsonl"
        cli.main([*case["argv"], "--out", str(again)])
        assert again.read_bytes() == out.read_bytes(), case["name"]


if __name__ == "__main__":
    os.chdir(Path(__file__).parent.parent)
    sys.exit(pytest.main([__file__, "-q"]))
