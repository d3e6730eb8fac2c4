"""Verification procedures, their acceptance probabilities and analyzers.

A procedure acts on ``m`` witness qubits (indices ``0..m-1``) and ``k``
ancilla qubits (indices ``m..m+k-1``) that start in ``|0>``. Because of the
little-endian layout, valid inputs ``|psi>|0^k>`` occupy the first ``2**m``
basis indices of the full register. The run accepts when ``accept_qubit``
reads ``accept_value`` after the circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import simcore
from .errors import InvalidInput, SizeCapExceeded
from .simcore import TOL_BUILD, TOL_EQ, DensityMatrix, GateOp, StateVector

DEFAULT_CAP = 14
# Amplitudes held at once when pushing a basis through a circuit.
CHUNK_AMPLITUDES = 1 << 22

GEQ = ">="
LEQ = "<="


@dataclass(frozen=True, eq=False)
class VerificationProcedure:
    """A circuit V on witness plus ancilla qubits with an accept convention."""

    witness_qubits: int
    ancilla_qubits: int
    circuit: tuple[GateOp, ...]
    accept_qubit: int
    accept_value: int = 1
    x: bytes = b""
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "circuit", tuple(self.circuit))
        n = self.num_qubits
        if self.witness_qubits < 0 or self.ancilla_qubits < 0:
            raise InvalidInput("register sizes must be non-negative")
        if not 0 <= self.accept_qubit < n:
            raise InvalidInput(f"accept qubit {self.accept_qubit} outside {n}-qubit register")
        if self.accept_value not in (0, 1):
            raise InvalidInput("accept value must be 0 or 1")
        for g in self.circuit:
            if max(g.qubits) >= n:
                raise InvalidInput(f"gate {g.kind!r} acts outside the declared {n} qubits")

    @property
    def num_qubits(self) -> int:
        return self.witness_qubits + self.ancilla_qubits

    @property
    def witness_dim(self) -> int:
        return 1 << self.witness_qubits

    def inverse_circuit(self) -> tuple[GateOp, ...]:
        return simcore.invert_circuit(self.circuit)

    def accept_mask(self) -> np.ndarray:
        idx = np.arange(1 << self.num_qubits)
        return ((idx >> self.accept_qubit) & 1) == self.accept_value

    def is_unitary(self, tol: float = TOL_EQ) -> bool:
        """Assemble V densely and check V^dagger V = I (small registers only)."""
        u = simcore.circuit_unitary(self.num_qubits, self.circuit)
        return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < tol)


@dataclass(frozen=True)
class BoundsPair:
    """Completeness and soundness thresholds with a declared minimum gap ``1/q``."""

    a: Fraction
    b: Fraction
    q: Fraction | None = None

    def __post_init__(self):
        a, b = Fraction(self.a), Fraction(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (0 <= b <= 1 and 0 <= a <= 1):
            raise InvalidInput("bounds must lie in [0, 1]")
        if a <= b:
            raise InvalidInput(f"bound a={a} must exceed b={b}")
        if self.q is not None:
            q = Fraction(self.q)
            object.__setattr__(self, "q", q)
            if q <= 0 or a - b < 1 / q:
                raise InvalidInput("gap a - b is below the declared 1/q")


@dataclass(frozen=True, eq=False)
class AcceptanceOperator:
    """Hermitian operator A on the witness space with <psi|A|psi> = Pr[accept]."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if np.max(np.abs(m - m.conj().T), initial=0) > TOL_BUILD:
            raise InvalidInput("acceptance operator is not Hermitian")
        object.__setattr__(self, "matrix", m)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)


@dataclass(frozen=True, eq=False)
class SubspaceRelation:
    """Orthonormal basis (columns) of the span of eigenspaces on one side of a bound."""

    basis: np.ndarray = field(repr=False)
    threshold: float
    direction: str

    def __post_init__(self):
        if self.direction not in (GEQ, LEQ):
            raise InvalidInput(f"direction must be {GEQ!r} or {LEQ!r}")
        b = self.basis
        if b.shape[1] and np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1]))) > TOL_EQ:
            raise InvalidInput("subspace basis is not orthonormal")

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[1])

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def states(self) -> list[StateVector]:
        m = int(self.basis.shape[0]).bit_length() - 1
        return [StateVector(m, c) for c in self.basis.T]


# ---------------------------------------------------------------------------
# Running procedures


def check_cap(proc: VerificationProcedure, cap: int) -> None:
    if cap <= 0:
        raise InvalidInput("size cap must be positive")
    if proc.num_qubits > cap:
        raise SizeCapExceeded(f"procedure uses {proc.num_qubits} qubits, cap is {cap}")


def _chunk_size(num_qubits: int) -> int:
    return max(1, CHUNK_AMPLITUDES >> num_qubits)


def embed_witness(proc: VerificationProcedure, witness: np.ndarray) -> np.ndarray:
    """Place witness columns next to zeroed ancillas."""
    w = np.asarray(witness, dtype=complex)
    full = np.zeros((1 << proc.num_qubits,) + w.shape[1:], dtype=complex)
    full[: proc.witness_dim] = w
    return full


def final_states(proc: VerificationProcedure, witness: np.ndarray) -> np.ndarray:
    """V applied to ``witness (x) |0^k>`` for a vector or a batch of columns."""
    if proc.num_qubits > simcore.MAX_SIM_QUBITS:
        raise SizeCapExceeded(f"{proc.num_qubits} qubits exceeds the simulation limit")
    if np.asarray(witness).shape[0] != proc.witness_dim:
        raise InvalidInput("witness dimension does not match procedure")
    return simcore.run_circuit(embed_witness(proc, witness), proc.num_qubits, proc.circuit)


def iter_images(proc: VerificationProcedure, witness: np.ndarray) -> Iterator[tuple[slice, np.ndarray]]:
    """Yield ``(column slice, V applied to those columns)`` in memory-bounded chunks."""
    witness = np.asarray(witness, dtype=complex)
    cols = witness.shape[1]
    step = _chunk_size(proc.num_qubits)
    for start in range(0, cols, step):
        sl = slice(start, min(cols, start + step))
        yield sl, final_states(proc, witness[:, sl])


def acceptance_probabilities(proc: VerificationProcedure, witnesses: np.ndarray) -> np.ndarray:
    """Acceptance probability of each column of ``witnesses`` (shape (2^m, B))."""
    mask = proc.accept_mask()
    out = np.empty(np.asarray(witnesses).shape[1])
    for sl, img in iter_images(proc, witnesses):
        out[sl] = np.sum(np.abs(img[mask]) ** 2, axis=0)
    return out


def acceptance_probability(proc: VerificationProcedure, witness: StateVector) -> float:
    """Squared norm of the accepting branch of V(|witness>|0^k>)."""
    if witness.num_qubits != proc.witness_qubits:
        raise InvalidInput(
            f"witness has {witness.num_qubits} qubits, procedure expects {proc.witness_qubits}"
        )
    return float(acceptance_probabilities(proc, witness.amplitudes[:, None])[0])


def acceptance_probability_mixed(proc: VerificationProcedure, rho: DensityMatrix) -> float:
    """Convex combination over an eigendecomposition of ``rho``."""
    if rho.num_qubits != proc.witness_qubits:
        raise InvalidInput("density matrix size does not match witness register")
    vals, vecs = rho.eigh()
    keep = vals > 0
    if not np.any(keep):
        return 0.0
    probs = acceptance_probabilities(proc, vecs[:, keep])
    return float(np.dot(vals[keep], probs))


def accepted_images(proc: VerificationProcedure, cap: int = DEFAULT_CAP) -> np.ndarray:
    """P_acc V E_0 restricted to accepting rows, one column per witness basis state."""
    check_cap(proc, cap)
    mask = proc.accept_mask()
    out = np.empty((int(mask.sum()), proc.witness_dim), dtype=complex)
    for sl, img in iter_images(proc, np.eye(proc.witness_dim, dtype=complex)):
        out[:, sl] = img[mask]
    return out


def acceptance_operator(proc: VerificationProcedure, cap: int = DEFAULT_CAP) -> AcceptanceOperator:
    """A = (P_acc V E_0)^dagger (P_acc V E_0) on the witness space."""
    m = accepted_images(proc, cap)
    a = m.conj().T @ m
    return AcceptanceOperator(0.5 * (a + a.conj().T))


# ---------------------------------------------------------------------------
# Relations and analyzers


def _compare(value: float, bound: float, direction: str, tol: float = TOL_EQ) -> bool:
    if direction == GEQ:
        return value >= bound - tol
    if direction == LEQ:
        return value <= bound + tol
    raise InvalidInput(f"direction must be {GEQ!r} or {LEQ!r}")


def relation_membership(proc: VerificationProcedure, rho: DensityMatrix, bound: float,
                        direction: str) -> bool:
    """Whether ``rho`` accepts with probability on the requested side of ``bound``."""
    return _compare(acceptance_probability_mixed(proc, rho), float(bound), direction)


def subspace_relations(spectrum, bound: float, direction: str) -> SubspaceRelation:
    """Span of the eigenspaces whose value lies on the requested side of ``bound``."""
    cols = [e.basis for e in spectrum.entries if _compare(e.p, float(bound), direction)]
    dim = spectrum.entries[0].basis.shape[0] if spectrum.entries else 1
    basis = np.hstack(cols) if cols else np.zeros((dim, 0), dtype=complex)
    return SubspaceRelation(basis, float(bound), direction)


@dataclass(frozen=True, eq=False)
class TotalityResult:
    total: bool
    max_probability: float
    witness: StateVector

    def __bool__(self) -> bool:
        return self.total


def check_total(proc: VerificationProcedure, a: float, cap: int = DEFAULT_CAP) -> TotalityResult:
    """True iff some witness accepts with probability at least ``a`` (up to 1e-9)."""
    vals, vecs = acceptance_operator(proc, cap).eigh()
    top = vecs[:, -1]
    witness = StateVector(proc.witness_qubits, top / np.linalg.norm(top))
    return TotalityResult(bool(vals[-1] >= float(a) - TOL_EQ), float(vals[-1]), witness)


def check_gapped(proc: VerificationProcedure, bounds: BoundsPair, cap: int = DEFAULT_CAP) -> bool:
    """True iff no spectrum value lies strictly inside (b, a), with 1e-9 slack."""
    from .jordan import spectrum

    return gapped_values([e.p for e in spectrum(proc, cap=cap).entries], bounds)


def gapped_values(values: Sequence[float], bounds: BoundsPair) -> bool:
    lo, hi = float(bounds.b) + TOL_EQ, float(bounds.a) - TOL_EQ
    return not any(lo < p < hi for p in values)


# ---------------------------------------------------------------------------
# Fixture procedures


def synthesize_with_spectrum(values: Sequence[tuple[float, int]], basis_seed: int | None = None,
                             name: str = "synthesized") -> VerificationProcedure:
    """Procedure whose spectrum is the requested multiset.

    Witness basis state ``j`` (optionally after a seeded random change of
    basis) controls a Y rotation of one ancilla by ``2 arcsin(sqrt(p_j))``;
    the ancilla is the accept qubit.
    """
    ps: list[float] = []
    for p, mult in values:
        p = float(p)
        if not 0 <= p <= 1:
            raise InvalidInput(f"spectrum value {p!r} outside [0, 1]")
        if int(mult) != mult or mult < 1:
            raise InvalidInput("multiplicities must be positive integers")
        ps.extend([p] * int(mult))
    total = len(ps)
    if total == 0 or total & (total - 1):
        raise InvalidInput(f"multiplicities sum to {total}, which is not a power of two")
    m = total.bit_length() - 1
    dim = total
    block = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for j, p in enumerate(ps):
        c, s = np.sqrt(1 - p), np.sqrt(p)
        block[j, j], block[j, j + dim] = c, -s
        block[j + dim, j], block[j + dim, j + dim] = s, c
    gates = []
    if basis_seed is not None and m > 0:
        from .rng import haar_unitary, stream

        r = haar_unitary(stream(basis_seed, "synthesize-basis"), dim)
        gates.append(simcore.unitary(range(m), r.conj().T, label="basis-change"))
    gates.append(simcore.unitary(list(range(m)) + [m], block, label="spectrum-rotation"))
    return VerificationProcedure(m, 1, tuple(gates), accept_qubit=m, name=name)


def accept_on_one() -> VerificationProcedure:
    """One witness qubit, copied into an ancilla; accept on 1."""
    return VerificationProcedure(1, 1, (simcore.pauli_x(1, controls=(0,)),), accept_qubit=1,
                                 name="accept_on_1")


def always_accept(witness_qubits: int = 1) -> VerificationProcedure:
    m = witness_qubits
    return VerificationProcedure(m, 1, (simcore.pauli_x(m),), accept_qubit=m, name="always_accept")


def swap_antisymmetric(register_qubits: int = 1) -> VerificationProcedure:
    """SWAP test on two witness registers, accepting on the antisymmetric outcome."""
    r = register_qubits
    gates = simcore.swap_test_gates(range(r), range(r, 2 * r), 2 * r)
    return VerificationProcedure(2 * r, 1, tuple(gates), accept_qubit=2 * r, name="swap_antisymmetric")


def random_procedure(seed: int, witness_qubits: int, ancilla_qubits: int,
                     depth: int | None = None) -> VerificationProcedure:
    """Seeded random circuit of Haar two-qubit gates; accepts on a random qubit."""
    from .rng import haar_unitary, stream

    rng = stream(seed, "random-procedure")
    n = witness_qubits + ancilla_qubits
    depth = depth if depth is not None else 2 * n
    gates = []
    for _ in range(depth):
        if n == 1:
            gates.append(simcore.unitary((0,), haar_unitary(rng, 2)))
            continue
        a, b = rng.choice(n, size=2, replace=False)
        gates.append(simcore.unitary((int(a), int(b)), haar_unitary(rng, 4)))
    accept = int(rng.integers(n))
    return VerificationProcedure(witness_qubits, ancilla_qubits, tuple(gates), accept_qubit=accept,
                                 name=f"random-{seed}")
