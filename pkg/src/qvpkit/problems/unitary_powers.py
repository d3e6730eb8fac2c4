"""Eigenphase problems for a hidden unitary accessed through powers.

One query of the powers oracle with the whole estimate register as the power
prepares sum_y |y> U^y |psi>, so each phase estimation costs one query.
Estimates are integers y in [0, 2^n) standing for y / 2^n; distances between
estimates are measured in units of 2^-n around the circle.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np
import scipy.linalg

from .. import simcore
from ..qvp import VerificationProcedure
from .oracles import UnitaryPowersOracle

UDEG_DISTANCE = 5
UMULTI_DISTANCE = 10


def unit_distance(y1, y2, n: int):
    """Circle distance between estimates, in units of 2^-n."""
    d = np.abs(np.asarray(y1) - np.asarray(y2))
    return np.minimum(d, (1 << n) - d)


def _pe_gates(oracle: UnitaryPowersOracle, target, est) -> list[simcore.GateOp]:
    return ([simcore.hadamard(q) for q in est] + [oracle.gate(est, target)]
            + [simcore.qft_gate(est, inverse=True)])


def build_udeg_procedure(oracle: UnitaryPowersOracle, accept_distance: int = UDEG_DISTANCE
                         ) -> VerificationProcedure:
    """SWAP test on two registers, phase-estimate both, accept iff close estimates."""
    n = oracle.n
    reg1, reg2 = list(range(n)), list(range(n, 2 * n))
    ctrl = 2 * n
    est1, est2 = list(range(2 * n + 1, 3 * n + 1)), list(range(3 * n + 1, 4 * n + 1))
    acc = 4 * n + 1
    gates = simcore.swap_test_gates(reg1, reg2, ctrl)
    gates += _pe_gates(oracle, reg1, est1) + _pe_gates(oracle, reg2, est2)
    mask = (1 << n) - 1

    def accept(v: int) -> bool:
        return bool(v & 1) and unit_distance((v >> 1) & mask, (v >> (1 + n)) & mask, n) <= accept_distance

    gates.append(simcore.classical_function([ctrl] + est1 + est2, acc, accept, label="close-estimates"))
    return VerificationProcedure(2 * n, 2 * n + 2, tuple(gates), accept_qubit=acc, name="udeg")


def build_umulticopy_procedure(oracle: UnitaryPowersOracle, copies: int = 3,
                               accept_distance: int = UMULTI_DISTANCE) -> VerificationProcedure:
    """Phase-estimate each of ``copies`` registers; accept iff all pairs are close."""
    n = oracle.n
    m = copies * n
    regs = [list(range(c * n, (c + 1) * n)) for c in range(copies)]
    ests = [list(range(m + c * n, m + (c + 1) * n)) for c in range(copies)]
    acc = 2 * m
    gates = []
    for r, e in zip(regs, ests):
        gates += _pe_gates(oracle, r, e)
    mask = (1 << n) - 1

    def accept(v: int) -> bool:
        ys = [(v >> (c * n)) & mask for c in range(copies)]
        return all(unit_distance(a, b, n) <= accept_distance for a, b in itertools.combinations(ys, 2))

    gates.append(simcore.classical_function([q for e in ests for q in e], acc, accept,
                                            label="all-estimates-close"))
    return VerificationProcedure(m, m + 1, tuple(gates), accept_qubit=acc, name="umulticopy")


def estimate_distribution(oracle: UnitaryPowersOracle, states: np.ndarray) -> np.ndarray:
    """Distribution of the n-bit estimate for each column of ``states`` (one batched query).

    Returns an array of shape (2^n, B).
    """
    n = oracle.n
    dim = 1 << n
    states = np.asarray(states, dtype=complex).reshape(dim, -1)
    full = np.zeros((dim * dim, states.shape[1]), dtype=complex)
    full[:dim] = states
    out = simcore.run_circuit(full, 2 * n, _pe_gates(oracle, range(n), range(n, 2 * n)))
    probs = np.abs(out.reshape(dim, dim, -1)) ** 2  # (estimate, target, column)
    return probs.sum(axis=1)


def antisymmetric_pair_acceptance(pa: np.ndarray, pb: np.ndarray, n: int,
                                  accept_distance: int = UDEG_DISTANCE) -> float:
    """Acceptance of (|a>|b> - |b>|a>)/sqrt 2 for orthogonal eigenvectors a, b.

    The two branches stay orthogonal through phase estimation, so the estimate
    pair is distributed as the average of P_a x P_b and P_b x P_a.
    """
    y = np.arange(1 << n)
    close = unit_distance(y[:, None], y[None, :], n) <= accept_distance
    joint = 0.5 * (np.outer(pa, pb) + np.outer(pb, pa))
    return float(np.sum(joint[close]))


@functools.lru_cache(maxsize=16)
def _close_mask(n: int, copies: int, accept_distance: int) -> np.ndarray:
    y = np.arange(1 << n)
    grids = np.meshgrid(*([y] * copies), indexing="ij")
    ok = np.ones(grids[0].shape, dtype=bool)
    for a, b in itertools.combinations(range(copies), 2):
        ok &= unit_distance(grids[a], grids[b], n) <= accept_distance
    return ok


def product_acceptance(dists: list[np.ndarray], n: int, accept_distance: int = UMULTI_DISTANCE) -> float:
    """Acceptance of a product of eigenvectors from their estimate distributions."""
    joint = dists[0]
    for d in dists[1:]:
        joint = np.multiply.outer(joint, d)
    return float(np.sum(joint, where=_close_mask(n, len(dists), accept_distance)))


def eigenphases(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in [0, 1) and orthonormal eigenvectors of a unitary."""
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.mod(np.angle(np.diagonal(t)) / (2 * np.pi), 1.0)
    phases[phases >= 1.0] = 0.0
    return phases, z
