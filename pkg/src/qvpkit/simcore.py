"""Dense state-vector simulation.

Qubit ordering is little-endian throughout the package: qubit ``q`` is bit
``(i >> q) & 1`` of the basis index ``i``. A register given as a list of qubits
``[q0, q1, ...]`` encodes the integer ``sum(bit(q_j) << j)``.

Circuits are tuples of :class:`GateOp`. The same gate application routine
works on a single amplitude vector of shape ``(2**n,)`` and on a batch of
column vectors of shape ``(2**n, B)``; the batched form is what the analysis
modules use to push a whole basis through a circuit at once.

All measurements are coherent (QND): the outcome is XORed into an outcome
register and nothing collapses, so every circuit stays unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import InvalidInput

# Tolerance hierarchy used across the package.
TOL_BUILD = 1e-10
TOL_EQ = 1e-9
TOL_MC = 1e-6

# Single-state simulations refuse registers larger than this.
MAX_SIM_QUBITS = 24


class BlockAction(Protocol):
    """Custom action on the target block of a gate (used by oracle gates).

    ``apply_block`` receives an array of shape ``(2**r, rest)`` whose rows are
    indexed little-endian by the gate targets, and returns the transformed
    array. ``inverse`` returns the action of the adjoint.
    """

    def apply_block(self, block: np.ndarray) -> np.ndarray: ...

    def inverse(self) -> "BlockAction": ...


@dataclass(frozen=True, eq=False)
class GateOp:
    """One gate: a unitary, a basis permutation, or a custom block action.

    Exactly one of ``matrix``, ``perm`` and ``action`` is set. The optional
    ``controls`` fire when each control qubit equals the matching entry of
    ``control_values`` (default all ones).
    """

    kind: str
    targets: tuple[int, ...]
    matrix: np.ndarray | None = None
    perm: np.ndarray | None = None
    action: BlockAction | None = None
    controls: tuple[int, ...] = ()
    control_values: tuple[int, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if not self.control_values:
            object.__setattr__(self, "control_values", (1,) * len(self.controls))
        else:
            object.__setattr__(self, "control_values", tuple(int(v) for v in self.control_values))
        qubits = self.targets + self.controls
        if len(self.targets) == 0:
            raise InvalidInput("gate needs at least one target")
        if len(set(qubits)) != len(qubits):
            raise InvalidInput(f"gate {self.kind!r}: targets and controls must be distinct")
        if min(qubits) < 0:
            raise InvalidInput(f"gate {self.kind!r}: negative qubit index")
        if len(self.control_values) != len(self.controls) or any(
            v not in (0, 1) for v in self.control_values
        ):
            raise InvalidInput(f"gate {self.kind!r}: bad control values")
        set_fields = sum(x is not None for x in (self.matrix, self.perm, self.action))
        if set_fields != 1:
            raise InvalidInput("gate must define exactly one of matrix, perm, action")
        dim = 1 << len(self.targets)
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise InvalidInput(
                    f"gate {self.kind!r}: matrix shape {m.shape} does not match {len(self.targets)} targets"
                )
            if not np.allclose(m.conj().T @ m, np.eye(dim), atol=TOL_BUILD, rtol=0):
                raise InvalidInput(f"gate {self.kind!r}: matrix is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.perm is not None:
            p = np.asarray(self.perm, dtype=np.int64)
            if p.shape != (dim,) or not np.array_equal(np.sort(p), np.arange(dim)):
                raise InvalidInput(f"gate {self.kind!r}: perm is not a permutation of {dim} items")
            p.setflags(write=False)
            object.__setattr__(self, "perm", p)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def inverse(self) -> "GateOp":
        """The adjoint gate."""
        kw = dict(kind=self.kind, targets=self.targets, controls=self.controls,
                  control_values=self.control_values, label=self.label)
        if self.matrix is not None:
            return GateOp(matrix=self.matrix.conj().T, **kw)
        if self.perm is not None:
            return GateOp(perm=np.argsort(self.perm), **kw)
        return GateOp(action=self.action.inverse(), **kw)

    def with_controls(self, controls: Sequence[int], values: Sequence[int] | None = None) -> "GateOp":
        """Return this gate with extra control qubits prepended."""
        values = tuple(values) if values is not None else (1,) * len(controls)
        return GateOp(kind=self.kind, targets=self.targets, matrix=self.matrix, perm=self.perm,
                      action=self.action, controls=tuple(controls) + self.controls,
                      control_values=values + self.control_values, label=self.label)


# ---------------------------------------------------------------------------
# Gate constructors

H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


def hadamard(q: int, controls: Sequence[int] = (), control_values: Sequence[int] = ()) -> GateOp:
    return GateOp("hadamard", (q,), matrix=H_MATRIX, controls=tuple(controls),
                  control_values=tuple(control_values))


def pauli_x(q: int, controls: Sequence[int] = (), control_values: Sequence[int] = ()) -> GateOp:
    return GateOp("x", (q,), perm=np.array([1, 0]), controls=tuple(controls),
                  control_values=tuple(control_values))


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation(q: int, theta: float, controls: Sequence[int] = (),
             control_values: Sequence[int] = ()) -> GateOp:
    """Y rotation: |0> -> cos(theta/2)|0> + sin(theta/2)|1>."""
    return GateOp("rotation", (q,), matrix=ry_matrix(theta), controls=tuple(controls),
                  control_values=tuple(control_values))


def unitary(targets: Sequence[int], matrix: np.ndarray, controls: Sequence[int] = (),
            control_values: Sequence[int] = (), label: str = "") -> GateOp:
    kind = "controlled" if controls else "unitary"
    return GateOp(kind, tuple(targets), matrix=matrix, controls=tuple(controls),
                  control_values=tuple(control_values), label=label)


def permutation(targets: Sequence[int], perm: Sequence[int], controls: Sequence[int] = (),
                control_values: Sequence[int] = (), label: str = "") -> GateOp:
    """Basis permutation: local basis state ``j`` goes to ``perm[j]``."""
    return GateOp("permutation", tuple(targets), perm=np.asarray(perm), controls=tuple(controls),
                  control_values=tuple(control_values), label=label)


def controlled_swap(control: int | Sequence[int], reg_a: Sequence[int], reg_b: Sequence[int],
                    control_values: Sequence[int] = ()) -> GateOp:
    """Swap two equal-length registers when the control(s) fire."""
    reg_a, reg_b = tuple(reg_a), tuple(reg_b)
    if len(reg_a) != len(reg_b):
        raise InvalidInput("swap registers differ in size")
    controls = (control,) if isinstance(control, (int, np.integer)) else tuple(control)
    r = len(reg_a)
    idx = np.arange(1 << (2 * r))
    lo, hi = idx & ((1 << r) - 1), idx >> r
    perm = hi | (lo << r)
    return GateOp("controlled-swap", reg_a + reg_b, perm=perm, controls=controls,
                  control_values=tuple(control_values))


def classical_function(inputs: Sequence[int], target: int, fn: Callable[[int], int],
                       controls: Sequence[int] = (), control_values: Sequence[int] = (),
                       label: str = "") -> GateOp:
    """Reversible evaluation ``target ^= fn(inputs)`` for a boolean ``fn``.

    ``fn`` receives the little-endian integer value of ``inputs``.
    """
    inputs = tuple(inputs)
    r = len(inputs)
    table = np.array([int(bool(fn(v))) for v in range(1 << r)], dtype=np.int64)
    idx = np.arange(1 << (r + 1))
    perm = idx ^ (table[idx & ((1 << r) - 1)] << r)
    return GateOp("permutation", inputs + (target,), perm=perm, controls=tuple(controls),
                  control_values=tuple(control_values), label=label or "classical")


def xor_constant(register: Sequence[int], value: int, controls: Sequence[int] = (),
                 control_values: Sequence[int] = ()) -> GateOp:
    """XOR a classical constant into a register."""
    register = tuple(register)
    if not 0 <= value < (1 << len(register)):
        raise InvalidInput("constant does not fit in register")
    idx = np.arange(1 << len(register))
    return GateOp("permutation", register, perm=idx ^ value, controls=tuple(controls),
                  control_values=tuple(control_values), label="xor-constant")


def qft_matrix(r: int, inverse: bool = False) -> np.ndarray:
    """Dense Fourier transform F[y, x] = exp(+-2 pi i x y / 2^r) / sqrt(2^r)."""
    dim = 1 << r
    sign = -1.0 if inverse else 1.0
    xy = np.outer(np.arange(dim), np.arange(dim)) % dim
    return np.exp(sign * 2j * np.pi * xy / dim) / np.sqrt(dim)


def qft_gate(register: Sequence[int], inverse: bool = False) -> GateOp:
    return GateOp("qft", tuple(register), matrix=qft_matrix(len(register), inverse),
                  label="iqft" if inverse else "qft")


def qft_circuit(register: Sequence[int], inverse: bool = False) -> list[GateOp]:
    """Hadamard plus controlled-phase decomposition of the Fourier transform."""
    reg = list(register)
    r = len(reg)
    gates: list[GateOp] = []
    for i in range(r - 1, -1, -1):
        gates.append(hadamard(reg[i]))
        for j in range(i - 1, -1, -1):
            angle = 2 * np.pi / (1 << (i - j + 1))
            gates.append(unitary((reg[i],), np.diag([1, np.exp(1j * angle)]), controls=(reg[j],)))
    for i in range(r // 2):
        gates.append(controlled_swap((), (reg[i],), (reg[r - 1 - i],)))
    if inverse:
        gates = [g.inverse() for g in reversed(gates)]
    return gates


def qnd_gate(projectors: Sequence[np.ndarray], data: Sequence[int], outcome: Sequence[int],
             controls: Sequence[int] = (), control_values: Sequence[int] = (),
             label: str = "") -> GateOp:
    """Coherent measurement U = sum_a P_a (x) X^a, XORing outcome ``a`` into ``outcome``."""
    data, outcome = tuple(data), tuple(outcome)
    if set(data) & set(outcome):
        raise InvalidInput("outcome register overlaps data register")
    dd = 1 << len(data)
    do = 1 << len(outcome)
    if len(projectors) > do:
        raise InvalidInput("outcome register too small for the number of outcomes")
    total = np.zeros((dd, dd), dtype=complex)
    for p in projectors:
        p = np.asarray(p, dtype=complex)
        if p.shape != (dd, dd):
            raise InvalidInput("projector shape does not match data register")
        total += p
    if np.max(np.abs(total - np.eye(dd))) > 1e-8:
        raise InvalidInput("projectors do not resolve the identity")
    u = np.zeros((dd * do, dd * do), dtype=complex)
    for a, p in enumerate(projectors):
        shift = np.zeros((do, do))
        shift[np.arange(do) ^ a, np.arange(do)] = 1
        u += np.kron(shift, p)
    return GateOp("qnd", data + outcome, matrix=u, controls=tuple(controls),
                  control_values=tuple(control_values), label=label or "qnd")


# ---------------------------------------------------------------------------
# Core application


def apply_to_array(psi: np.ndarray, num_qubits: int, gate: GateOp) -> np.ndarray:
    """Apply ``gate`` to amplitudes of shape ``(2**n,)`` or ``(2**n, B)``."""
    n = num_qubits
    if max(gate.qubits) >= n:
        raise InvalidInput(f"gate {gate.kind!r} touches qubit {max(gate.qubits)} outside {n}-qubit register")
    shape = psi.shape
    t = np.asarray(psi).reshape((2,) * n + (-1,))
    c, r = len(gate.controls), len(gate.targets)
    src = [n - 1 - q for q in gate.controls] + [n - 1 - q for q in reversed(gate.targets)]
    moved = np.moveaxis(t, src, list(range(c + r)))
    mshape = moved.shape
    block = np.array(moved.reshape(1 << c, 1 << r, -1))
    idx = 0
    for v in gate.control_values:
        idx = (idx << 1) | v
    sub = block[idx]
    if gate.matrix is not None:
        new = gate.matrix @ sub
    elif gate.perm is not None:
        new = np.empty_like(sub)
        new[gate.perm] = sub
    else:
        new = gate.action.apply_block(sub)
    block[idx] = new
    out = np.moveaxis(block.reshape(mshape), list(range(c + r)), src)
    return np.ascontiguousarray(out).reshape(shape)


def run_circuit(psi: np.ndarray, num_qubits: int, circuit: Sequence[GateOp]) -> np.ndarray:
    """Apply a sequence of gates to an amplitude array (single or batched)."""
    out = np.asarray(psi, dtype=complex)
    for g in circuit:
        out = apply_to_array(out, num_qubits, g)
    return out


def invert_circuit(circuit: Sequence[GateOp]) -> tuple[GateOp, ...]:
    return tuple(g.inverse() for g in reversed(circuit))


def circuit_unitary(num_qubits: int, circuit: Sequence[GateOp]) -> np.ndarray:
    """Dense matrix of a circuit (small registers only)."""
    return run_circuit(np.eye(1 << num_qubits, dtype=complex), num_qubits, circuit)


def register_value(index: np.ndarray | int, register: Sequence[int]):
    """Integer value of ``register`` within basis index (vectorized)."""
    v = 0
    for j, q in enumerate(register):
        v = v + (((np.asarray(index) >> q) & 1) << j)
    return v


def marginal(probs: np.ndarray, num_qubits: int, register: Sequence[int]) -> np.ndarray:
    """Marginal distribution of ``register`` given basis probabilities."""
    vals = register_value(np.arange(1 << num_qubits), register)
    return np.bincount(vals, weights=probs, minlength=1 << len(register))


# ---------------------------------------------------------------------------
# States


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 0 or a.shape[0] != (1 << self.num_qubits):
            raise InvalidInput(f"amplitude vector of length {a.shape[0]} does not match {self.num_qubits} qubits")
        if abs(np.linalg.norm(a) - 1.0) > TOL_BUILD:
            raise InvalidInput(f"state is not normalized (norm {np.linalg.norm(a)!r})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        a = np.zeros(1 << num_qubits, dtype=complex)
        a[index] = 1
        return cls(num_qubits, a)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(a.shape[0]).bit_length() - 1
        return cls(n, a / np.linalg.norm(a))

    def tensor(self, other: "StateVector") -> "StateVector":
        """``self`` on the low qubits, ``other`` on the high qubits."""
        return StateVector(self.num_qubits + other.num_qubits,
                           np.kron(other.amplitudes, self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state of ``num_qubits`` qubits."""

    num_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = 1 << self.num_qubits
        if m.shape != (d, d):
            raise InvalidInput("density matrix shape does not match qubit count")
        if np.max(np.abs(m - m.conj().T)) > TOL_BUILD:
            raise InvalidInput("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TOL_BUILD:
            raise InvalidInput("density matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < -TOL_BUILD:
            raise InvalidInput("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.num_qubits, np.outer(a, a.conj()))

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)


@dataclass(frozen=True)
class MeasurementRecord:
    """Label and outcome register of a coherent measurement."""

    observable: str
    outcome_register: tuple[int, ...]
    data_register: tuple[int, ...] = ()

    def __post_init__(self):
        if set(self.outcome_register) & set(self.data_register):
            raise InvalidInput("outcome register overlaps data register")


# ---------------------------------------------------------------------------
# Operations on StateVector


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    return StateVector(state.num_qubits, apply_to_array(state.amplitudes, state.num_qubits, gate))


def apply_circuit(state: StateVector, circuit: Sequence[GateOp]) -> StateVector:
    return StateVector(state.num_qubits, run_circuit(state.amplitudes, state.num_qubits, circuit))


def _require_zero(state: StateVector, register: Sequence[int], what: str) -> None:
    vals = register_value(np.arange(1 << state.num_qubits), register)
    if np.sum(np.abs(state.amplitudes[vals != 0]) ** 2) > TOL_BUILD:
        raise InvalidInput(f"{what} is not in the all-zero state")


def qnd_measure(state: StateVector, projectors: Sequence[np.ndarray], data: Sequence[int],
                outcome: Sequence[int]) -> StateVector:
    """Return sum_a (P_a |state>) (x) |a> on the outcome register."""
    _require_zero(state, outcome, "outcome register")
    return apply_gate(state, qnd_gate(projectors, data, outcome))


def swap_test_gates(reg_a: Sequence[int], reg_b: Sequence[int], control: int,
                    controls: Sequence[int] = ()) -> list[GateOp]:
    controls = tuple(controls)
    return [hadamard(control, controls), controlled_swap((control,) + controls, reg_a, reg_b),
            hadamard(control, controls)]


def swap_test(state: StateVector, reg_a: Sequence[int], reg_b: Sequence[int], control: int) -> StateVector:
    """Hadamard, controlled swap, Hadamard. Control 1 flags the antisymmetric part."""
    if len(reg_a) != len(reg_b):
        raise InvalidInput("swap test registers differ in size")
    if set(reg_a) & set(reg_b) or control in reg_a or control in reg_b:
        raise InvalidInput("swap test registers overlap")
    _require_zero(state, [control], "swap test control")
    return apply_circuit(state, swap_test_gates(reg_a, reg_b, control))


def qft(state: StateVector, register: Sequence[int], inverse: bool = False) -> StateVector:
    return apply_gate(state, qft_gate(register, inverse))


def phase_estimate(apply_power: Callable[[int, StateVector], StateVector], target: StateVector,
                   precision_bits: int, max_bits: int = 16) -> StateVector:
    """Phase estimation with exact controlled powers.

    The returned state has the target on qubits ``0..n-1`` and the estimate
    register on qubits ``n..n+precision_bits-1``; estimate value ``y`` stands for
    the phase ``y / 2**precision_bits``.
    """
    if precision_bits < 1:
        raise InvalidInput("precision_bits must be at least 1")
    if precision_bits > max_bits:
        raise InvalidInput(f"precision_bits {precision_bits} exceeds budget {max_bits}")
    n = target.num_qubits
    dim_y = 1 << precision_bits
    cols = np.empty((1 << n, dim_y), dtype=complex)
    for y in range(dim_y):
        cols[:, y] = apply_power(y, target).amplitudes
    joint = (cols.T / np.sqrt(dim_y)).reshape(-1)
    est = list(range(n, n + precision_bits))
    joint = apply_to_array(joint, n + precision_bits, qft_gate(est, inverse=True))
    return StateVector(n + precision_bits, joint)


def phase_estimation_gates(est: Sequence[int],
                           controlled_power: Callable[[int, int], GateOp]) -> list[GateOp]:
    """Circuit form: Hadamards, ``controlled_power(control, 2**j)``, inverse QFT."""
    gates = [hadamard(q) for q in est]
    for j, q in enumerate(est):
        gates.append(controlled_power(q, 1 << j))
    gates.append(qft_gate(est, inverse=True))
    return gates


def phase_estimation_probabilities(phi: float, bits: int) -> np.ndarray:
    """Closed-form distribution of the estimate register for eigenphase ``phi``."""
    dim = 1 << bits
    delta = phi - np.arange(dim) / dim
    s = np.sin(np.pi * delta)
    out = np.empty(dim)
    near = np.abs(s) < 1e-15
    out[near] = 1.0
    out[~near] = (np.sin(dim * np.pi * delta[~near]) / (dim * s[~near])) ** 2
    return out


def circle_distance(phi: float, phi_prime: float) -> float:
    """Distance between two phases on the unit circle, inputs in [0, 1)."""
    for v in (phi, phi_prime):
        if not 0 <= v < 1:
            raise InvalidInput(f"phase {v!r} outside [0, 1)")
    d = abs(phi - phi_prime)
    return min(d, 1 - d)
