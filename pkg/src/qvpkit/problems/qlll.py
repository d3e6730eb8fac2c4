"""Phase-estimation test for frustration-free projector Hamiltonians.

With H = (1/m) sum_i P_i and U = exp(i pi H), an eigenstate of energy E has
eigenphase E/2 in [0, 1/2]. The procedure estimates that phase to ``precision``
bits and accepts when the estimate is exactly 0. Powers of U are computed
exactly from the eigendecomposition of H, so there is no simulation error.
"""

from __future__ import annotations

import numpy as np

from .. import simcore
from ..errors import InvalidInput
from ..qvp import VerificationProcedure
from ..rng import haar_unitary, stream
from .hamiltonians import PROJECTOR, HamiltonianInstance, Term

MAX_PRECISION = 12


def rescaled_hamiltonian(instance: HamiltonianInstance) -> np.ndarray:
    return instance.hamiltonian() / instance.num_terms


def evolution(instance: HamiltonianInstance) -> np.ndarray:
    """U = exp(i pi H) for the rescaled Hamiltonian."""
    vals, vecs = np.linalg.eigh(rescaled_hamiltonian(instance))
    return (vecs * np.exp(1j * np.pi * vals)) @ vecs.conj().T


def build_qlll_procedure(instance: HamiltonianInstance, precision: int) -> VerificationProcedure:
    """Witness on qubits 0..n-1, estimate register next, then the accept qubit."""
    if instance.flavor != PROJECTOR:
        raise InvalidInput("the phase-estimation test needs projector terms")
    if not 1 <= precision <= MAX_PRECISION:
        raise InvalidInput(f"precision must be between 1 and {MAX_PRECISION}")
    n = instance.n
    u = evolution(instance)
    est = list(range(n, n + precision))
    acc = n + precision
    powers = {}

    def controlled_power(control: int, exponent: int) -> simcore.GateOp:
        powers[exponent] = np.linalg.matrix_power(u, exponent)
        return simcore.unitary(range(n), powers[exponent], controls=(control,), label=f"U^{exponent}")

    gates = simcore.phase_estimation_gates(est, controlled_power)
    gates.append(simcore.classical_function(est, acc, lambda v: v == 0, label="estimate-is-zero"))
    return VerificationProcedure(n, precision + 1, tuple(gates), accept_qubit=acc, x=instance.x,
                                 name="qlll")


def zero_estimate_probability(energy: float, precision: int) -> float:
    """Closed-form probability that the estimate of phase E/2 reads 0."""
    return float(simcore.phase_estimation_probabilities(energy / 2, precision)[0])


def random_frustration_free_instance(seed: int, n: int, num_terms: int, locality: int = 2
                                     ) -> tuple[HamiltonianInstance, np.ndarray]:
    """Commuting projectors with a known frustration-free product state.

    All terms are diagonal in one random product basis; each projects onto a
    random set of local basis strings that avoids the restriction of a hidden
    target string. Returns the instance and the frustration-free state.
    """
    if locality > n:
        raise InvalidInput("locality exceeds the number of qubits")
    rng = stream(seed, "frustration-free")
    local = [haar_unitary(rng, 2) for _ in range(n)]
    target = [int(b) for b in rng.integers(2, size=n)]
    terms = []
    for _ in range(num_terms):
        support = tuple(sorted(int(q) for q in rng.choice(n, size=locality, replace=False)))
        basis = np.ones((1, 1), dtype=complex)
        for q in support:
            basis = np.kron(local[q], basis)
        forbidden = sum(target[q] << j for j, q in enumerate(support))
        allowed = [s for s in range(1 << locality) if s != forbidden]
        rank = int(rng.integers(1, len(allowed) + 1))
        chosen = rng.choice(allowed, size=rank, replace=False)
        mask = np.zeros(1 << locality)
        mask[chosen] = 1
        terms.append(Term(support, (basis * mask) @ basis.conj().T))
    inst = HamiltonianInstance(n, tuple(terms), PROJECTOR, x=f"qlll:{seed}".encode())
    ground = np.ones(1, dtype=complex)
    for q in range(n):
        ground = np.kron(local[q][:, target[q]], ground)
    return inst, ground
