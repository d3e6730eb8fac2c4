"""Marked-state verification, Grover search and a classical probing baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import simcore
from ..qvp import VerificationProcedure, acceptance_probabilities
from ..rng import haar_unitary, stream
from ..simcore import StateVector
from .oracles import MarkedStateOracle


def build_marked_state_procedure(oracle: MarkedStateOracle) -> VerificationProcedure:
    """Append one ancilla, query the oracle, accept iff the ancilla flipped."""
    n = oracle.n
    gate = oracle.gate(n, range(n))
    return VerificationProcedure(n, 1, (gate,), accept_qubit=n, name="marked_state")


def grover_iterations(n: int) -> int:
    """Iteration count maximizing sin^2((2t+1) theta) with sin theta = 2^(-n/2)."""
    theta = math.asin(2 ** (-n / 2))
    return max(0, round(math.pi / (4 * theta) - 0.5))


def grover_success_closed_form(n: int, iterations: int, overlap: float | None = None) -> float:
    """sin^2((2t+1) theta) with sin theta = |<uniform|marked>|."""
    s = 2 ** (-n / 2) if overlap is None else overlap
    theta = math.asin(min(1.0, s))
    return math.sin((2 * iterations + 1) * theta) ** 2


def grover_search(oracle: MarkedStateOracle, iterations: int | None = None) -> tuple[StateVector, int]:
    """Amplitude amplification from the uniform superposition.

    The oracle acts as a phase flip because its flag qubit is held in |->.
    Returns the register state and the number of queries spent.
    """
    n = oracle.n
    t = grover_iterations(n) if iterations is None else iterations
    dim = 1 << n
    flag = n
    uniform = np.full(dim, dim ** -0.5, dtype=complex)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    psi = np.kron(minus, uniform)
    diffusion = 2 * np.outer(uniform, uniform.conj()) - np.eye(dim)
    gates = [oracle.gate(flag, range(n))]
    if n:
        gates.append(simcore.unitary(range(n), diffusion, label="diffusion"))
    before = oracle.query_count
    for _ in range(t):
        psi = simcore.run_circuit(psi, n + 1, gates)
    queries = oracle.query_count - before
    reg = (psi[:dim] - psi[dim:]) / np.sqrt(2)
    return StateVector(n, reg / np.linalg.norm(reg)), queries


def query_budget(n: int) -> int:
    return math.ceil(math.pi / 4 * 2 ** (n / 2)) + 1


@dataclass(frozen=True)
class BaselineResult:
    probes: int
    trials: int
    mean_success: float
    max_success: float
    queries: int


def classical_baseline(oracle: MarkedStateOracle, trials: int = 200, seed: int = 0,
                       probes: int | None = None) -> BaselineResult:
    """Success of ``probes`` random orthonormal guesses, each checked by one procedure run.

    A trial succeeds if any probe is accepted; its success probability is
    1 - prod(1 - p_i). Reports the mean over ``trials`` independent draws.
    """
    n = oracle.n
    q = (1 << n) // 10 if probes is None else probes
    proc = build_marked_state_procedure(oracle)
    rng = stream(seed, "classical-probes")
    before = oracle.query_count
    succ = []
    for _ in range(trials):
        if q == 0:
            succ.append(0.0)
            continue
        basis = haar_unitary(rng, 1 << n)[:, :q]
        ps = np.array([acceptance_probabilities(proc, basis[:, [j]])[0] for j in range(q)])
        succ.append(1 - float(np.prod(1 - ps)))
    return BaselineResult(q, trials, float(np.mean(succ)), float(np.max(succ)),
                          oracle.query_count - before)
