"""Commuting local Hamiltonians and their verification procedures.

Terms act on qubit supports of an ``n``-qubit register. Each term is measured
coherently by projecting onto its eigenspaces and writing the index of the
eigenvalue (in ascending order) into a dedicated outcome block. Eigenvalues
are kept as exact fractions so that energy comparisons carry no round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .. import simcore
from ..errors import InvalidInput
from ..qvp import VerificationProcedure

PROJECTOR = "projector"
BOUNDED = "bounded"
COMMUTE_TOL = 1e-9
VALUE_TOL = 1e-9
MAX_DENOMINATOR = 1 << 20


def exact_value(x: float, candidates: Sequence[Fraction] | None = None) -> Fraction:
    """Rational value of an eigenvalue, from declared candidates or a small denominator."""
    if candidates is not None:
        for c in candidates:
            if abs(float(c) - x) < VALUE_TOL:
                return Fraction(c)
        raise InvalidInput(f"eigenvalue {x!r} matches none of the declared values")
    f = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    if abs(float(f) - x) > 1e-12:
        raise InvalidInput(f"eigenvalue {x!r} is not an exactly representable rational")
    return f


def embed(n: int, support: Sequence[int], matrix: np.ndarray) -> np.ndarray:
    """Full-register matrix of a local operator (little-endian support order)."""
    eye = np.eye(1 << n, dtype=complex)
    g = simcore.GateOp("embed", tuple(support), action=_MatrixAction(np.asarray(matrix, dtype=complex)))
    return simcore.apply_to_array(eye, n, g)


@dataclass(frozen=True, eq=False)
class _MatrixAction:
    """Left-multiplication by an arbitrary (not necessarily unitary) matrix."""

    matrix: np.ndarray

    def apply_block(self, block):
        return self.matrix @ block

    def inverse(self):
        return _MatrixAction(np.linalg.inv(self.matrix))


@dataclass(frozen=True, eq=False)
class Term:
    support: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    eigenvalues: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(q) for q in self.support))
        m = np.array(self.matrix, dtype=complex)
        d = 1 << len(self.support)
        if m.shape != (d, d):
            raise InvalidInput(f"term matrix shape {m.shape} does not match support {self.support}")
        if np.max(np.abs(m - m.conj().T)) > simcore.TOL_BUILD:
            raise InvalidInput("term matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.eigenvalues is not None:
            object.__setattr__(self, "eigenvalues", tuple(Fraction(v) for v in self.eigenvalues))


@dataclass(frozen=True)
class EigenvalueSequence:
    """Per-term eigenvalues of a joint eigenstate."""

    h: tuple[Fraction, ...]

    @property
    def energy(self) -> Fraction:
        return sum(self.h, Fraction(0))


@dataclass(frozen=True, eq=False)
class HamiltonianInstance:
    """Commuting local terms on ``n`` qubits."""

    n: int
    terms: tuple[Term, ...]
    flavor: str = PROJECTOR
    x: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n < 1:
            raise InvalidInput("n must be positive")
        if self.flavor not in (PROJECTOR, BOUNDED):
            raise InvalidInput(f"unknown flavor {self.flavor!r}")
        if not self.terms:
            raise InvalidInput("instance has no terms")
        for a, t in enumerate(self.terms):
            if len(set(t.support)) != len(t.support) or not all(0 <= q < self.n for q in t.support):
                raise InvalidInput(f"term {a} has an invalid support {t.support}")
        if self.flavor == PROJECTOR:
            for a, t in enumerate(self.terms):
                if np.max(np.abs(t.matrix @ t.matrix - t.matrix)) > COMMUTE_TOL:
                    raise InvalidInput(f"term {a} is not a projector")
        else:
            cap = 1.0 / len(self.terms)
            for a, t in enumerate(self.terms):
                ev = np.linalg.eigvalsh(t.matrix)
                if ev.min() < -VALUE_TOL or ev.max() > cap + VALUE_TOL:
                    raise InvalidInput(f"term {a} eigenvalues leave [0, 1/A]")
        full = self.full_terms
        for a in range(len(full)):
            for b in range(a + 1, len(full)):
                if np.linalg.norm(full[a] @ full[b] - full[b] @ full[a]) > COMMUTE_TOL:
                    raise InvalidInput(f"terms {a} and {b} do not commute")
        for a in range(len(self.terms)):
            self.spectral_parts(a)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @cached_property
    def full_terms(self) -> list[np.ndarray]:
        return [embed(self.n, t.support, t.matrix) for t in self.terms]

    def hamiltonian(self) -> np.ndarray:
        return sum(self.full_terms)

    def spectral_parts(self, a: int) -> list[tuple[Fraction, np.ndarray]]:
        """Sorted (exact eigenvalue, local projector) pairs of term ``a``.

        Projector terms always report both values 0 and 1 so that the outcome
        bit equals the eigenvalue.
        """
        cache = self.__dict__.setdefault("_parts", {})
        if a in cache:
            return cache[a]
        t = self.terms[a]
        vals, vecs = np.linalg.eigh(t.matrix)
        groups: dict[Fraction, list[int]] = {}
        for i, v in enumerate(vals):
            key = exact_value(round(v) if self.flavor == PROJECTOR and t.eigenvalues is None else v,
                              t.eigenvalues)
            if self.flavor == PROJECTOR and abs(float(key) - v) > VALUE_TOL:
                raise InvalidInput(f"term {a} is not a projector")
            groups.setdefault(key, []).append(i)
        if self.flavor == PROJECTOR:
            for key in (Fraction(0), Fraction(1)):
                groups.setdefault(key, [])
        parts = []
        for key in sorted(groups):
            cols = vecs[:, groups[key]]
            parts.append((key, cols @ cols.conj().T))
        cache[a] = parts
        return parts

    def outcome_bits(self, a: int) -> int:
        return max(1, math.ceil(math.log2(len(self.spectral_parts(a)))))

    def values(self, a: int) -> list[Fraction]:
        return [v for v, _ in self.spectral_parts(a)]


# ---------------------------------------------------------------------------
# Coherent measurement of all terms


@dataclass(frozen=True)
class TermReadout:
    """Outcome blocks written by measuring every term on one register."""

    blocks: tuple[tuple[int, ...], ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for b in self.blocks for q in b)


def measure_terms(instance: HamiltonianInstance, register: Sequence[int], first_outcome: int,
                  controls: Sequence[int] = (), control_values: Sequence[int] = ()
                  ) -> tuple[list[simcore.GateOp], TermReadout]:
    """Gates measuring each term (in index order) on ``register``."""
    gates, blocks = [], []
    pos = first_outcome
    for a, t in enumerate(instance.terms):
        bits = instance.outcome_bits(a)
        block = tuple(range(pos, pos + bits))
        pos += bits
        data = [register[q] for q in t.support]
        projs = [p for _, p in instance.spectral_parts(a)]
        gates.append(simcore.qnd_gate(projs, data, block, controls=controls,
                                      control_values=control_values, label=f"measure-H{a}"))
        blocks.append(block)
    return gates, TermReadout(tuple(blocks))


def _decoder(instance: HamiltonianInstance, readout: TermReadout, offset: int):
    """Map the integer value of the concatenated inputs to an eigenvalue tuple."""
    widths = [len(b) for b in readout.blocks]

    def decode(v: int):
        v >>= offset
        out = []
        for a, w in enumerate(widths):
            idx = v & ((1 << w) - 1)
            v >>= w
            vals = instance.values(a)
            out.append(vals[idx] if idx < len(vals) else None)
        return tuple(out)

    return decode


def _register(start: int, n: int) -> list[int]:
    return list(range(start, start + n))


def build_qsat_procedure(instance: HamiltonianInstance) -> VerificationProcedure:
    """Frustration-free-or-degenerate procedure on 2n+1 witness qubits.

    Qubit 0 is the flag ``b``; qubits 1..n and n+1..2n hold the two registers.
    ``b = 0`` accepts iff every term reads 0 on the first register. ``b = 1``
    measures every term on both registers, requires equal readouts and accepts
    on the antisymmetric outcome of a SWAP test.
    """
    if instance.flavor != PROJECTOR:
        raise InvalidInput("quantum SAT needs projector terms")
    n, a_terms = instance.n, instance.num_terms
    if a_terms != n:
        raise InvalidInput(f"quantum SAT needs A = n terms, got {a_terms} for n = {n}")
    flag, reg1, reg2 = 0, _register(1, n), _register(n + 1, n)
    m = 2 * n + 1
    g1, r1 = measure_terms(instance, reg1, m)
    g2, r2 = measure_terms(instance, reg2, m + len(r1.qubits), controls=(flag,))
    ctrl = m + len(r1.qubits) + len(r2.qubits)
    acc = ctrl + 1
    swap = simcore.swap_test_gates(reg1, reg2, ctrl, controls=(flag,))
    na = len(r1.qubits)

    def accept(v: int) -> bool:
        b = v & 1
        h1 = (v >> 1) & ((1 << na) - 1)
        h2 = (v >> (1 + na)) & ((1 << na) - 1)
        c = (v >> (1 + 2 * na)) & 1
        return (b == 0 and h1 == 0) or (b == 1 and h1 == h2 and c == 1)

    decide = simcore.classical_function((flag,) + r1.qubits + r2.qubits + (ctrl,), acc, accept,
                                        label="qsat-decision")
    return VerificationProcedure(m, acc - m + 1, tuple(g1 + g2 + swap + [decide]), accept_qubit=acc,
                                 x=instance.x, name="qsat")


def build_almost_degenerate_procedure(instance: HamiltonianInstance,
                                      threshold: Fraction | None = None) -> VerificationProcedure:
    """SWAP test on two registers, then accept iff |E1 - E2| <= threshold exactly.

    The default threshold is 2^-n.
    """
    if instance.flavor != BOUNDED:
        raise InvalidInput("almost-degenerate procedure needs bounded terms")
    n = instance.n
    thr = Fraction(1, 1 << n) if threshold is None else Fraction(threshold)
    reg1, reg2 = _register(0, n), _register(n, n)
    ctrl = 2 * n
    swap = simcore.swap_test_gates(reg1, reg2, ctrl)
    g1, r1 = measure_terms(instance, reg1, ctrl + 1, controls=(ctrl,))
    g2, r2 = measure_terms(instance, reg2, ctrl + 1 + len(r1.qubits), controls=(ctrl,))
    acc = ctrl + 1 + len(r1.qubits) + len(r2.qubits)
    dec1 = _decoder(instance, r1, 1)
    dec2 = _decoder(instance, r2, 1 + len(r1.qubits))

    def accept(v: int) -> bool:
        if not v & 1:
            return False
        h1, h2 = dec1(v), dec2(v)
        if None in h1 or None in h2:
            return False
        return abs(sum(h1, Fraction(0)) - sum(h2, Fraction(0))) <= thr

    decide = simcore.classical_function((ctrl,) + r1.qubits + r2.qubits, acc, accept,
                                        label="energy-comparison")
    return VerificationProcedure(2 * n, acc - 2 * n + 1, tuple(swap + g1 + g2 + [decide]),
                                 accept_qubit=acc, x=instance.x, name="almost_degenerate")


def build_multicopy_procedure(instance: HamiltonianInstance, copies: int = 3) -> VerificationProcedure:
    """Measure every term on each of ``copies`` registers; accept iff all readouts agree."""
    if copies < 2:
        raise InvalidInput("need at least two copies")
    n = instance.n
    m = copies * n
    gates, readouts = [], []
    pos = m
    for c in range(copies):
        g, r = measure_terms(instance, _register(c * n, n), pos)
        pos += len(r.qubits)
        gates += g
        readouts.append(r)
    acc = pos
    width = len(readouts[0].qubits)
    inputs = tuple(q for r in readouts for q in r.qubits)

    def accept(v: int) -> bool:
        first = v & ((1 << width) - 1)
        return all(((v >> (c * width)) & ((1 << width) - 1)) == first for c in range(copies))

    gates.append(simcore.classical_function(inputs, acc, accept, label="copies-agree"))
    return VerificationProcedure(m, acc - m + 1, tuple(gates), accept_qubit=acc, x=instance.x,
                                 name="multicopy")


# ---------------------------------------------------------------------------
# Brute-force references built from the full-register matrices


def joint_eigenspaces(instance: HamiltonianInstance) -> dict[EigenvalueSequence, np.ndarray]:
    """Orthonormal bases of the joint eigenspaces, keyed by eigenvalue sequence.

    Splits the register by diagonalizing each term inside the eigenspaces of the
    previous ones; independent of the circuit-level measurement code.
    """
    spaces: list[tuple[tuple[Fraction, ...], np.ndarray]] = [((), np.eye(1 << instance.n, dtype=complex))]
    for a, h in enumerate(instance.full_terms):
        cands = instance.terms[a].eigenvalues
        nxt = []
        for key, basis in spaces:
            vals, vecs = np.linalg.eigh(basis.conj().T @ h @ basis)
            groups: dict[Fraction, list[int]] = {}
            for i, v in enumerate(vals):
                val = Fraction(round(v)) if instance.flavor == PROJECTOR else exact_value(v, cands)
                groups.setdefault(val, []).append(i)
            for val in sorted(groups):
                nxt.append((key + (val,), basis @ vecs[:, groups[val]]))
        spaces = nxt
    out = {}
    for key, basis in spaces:
        for a, h in enumerate(instance.full_terms):
            if np.linalg.norm(h @ basis - float(key[a]) * basis) > 1e-8:
                raise InvalidInput("terms are not simultaneously diagonalizable")
        out[EigenvalueSequence(key)] = basis
    return out


def _orth_projector(vectors: list[np.ndarray], dim: int) -> np.ndarray:
    if not vectors:
        return np.zeros((dim, dim), dtype=complex)
    u, s, _ = np.linalg.svd(np.column_stack(vectors), full_matrices=False)
    q = u[:, s > 1e-10]
    return q @ q.conj().T


def antisymmetric_pairs(basis_a: np.ndarray, basis_b: np.ndarray | None = None) -> list[np.ndarray]:
    """(|x>|y> - |y>|x>)/sqrt 2 for basis vectors x, y (first factor on low qubits)."""
    out = []
    if basis_b is None:
        cols = list(basis_a.T)
        for i in range(len(cols)):
            for j in range(i + 1, len(cols)):
                out.append((np.kron(cols[j], cols[i]) - np.kron(cols[i], cols[j])) / np.sqrt(2))
    else:
        for x in basis_a.T:
            for y in basis_b.T:
                out.append((np.kron(y, x) - np.kron(x, y)) / np.sqrt(2))
    return out


def qsat_accepting_projector(instance: HamiltonianInstance) -> np.ndarray:
    """Projector onto the eigenvalue-1 space of the quantum SAT procedure.

    Flag 0 with a frustration-free first register and anything in the second,
    plus flag 1 with an antisymmetric pair of eigenstates sharing their
    eigenvalue sequence.
    """
    n = instance.n
    spaces = joint_eigenspaces(instance)
    zero = EigenvalueSequence((Fraction(0),) * instance.num_terms)
    vecs = []
    f0, f1 = np.array([1, 0]), np.array([0, 1])
    if zero in spaces:
        for psi in spaces[zero].T:
            for e in np.eye(1 << n):
                vecs.append(np.kron(np.kron(e, psi), f0))
    for basis in spaces.values():
        for pair in antisymmetric_pairs(basis):
            vecs.append(np.kron(pair, f1))
    return _orth_projector(vecs, 1 << (2 * n + 1))


def almost_degenerate_accepting_projector(instance: HamiltonianInstance,
                                          threshold: Fraction | None = None) -> np.ndarray:
    n = instance.n
    thr = Fraction(1, 1 << n) if threshold is None else Fraction(threshold)
    items = list(joint_eigenspaces(instance).items())
    vecs = []
    for i, (hi, bi) in enumerate(items):
        vecs += antisymmetric_pairs(bi)
        for hj, bj in items[i + 1:]:
            if abs(hi.energy - hj.energy) <= thr:
                vecs += antisymmetric_pairs(bi, bj)
    return _orth_projector(vecs, 1 << (2 * n))


def multicopy_accepting_multiplicity(instance: HamiltonianInstance, copies: int = 3) -> int:
    return sum(b.shape[1] ** copies for b in joint_eigenspaces(instance).values())


def multicopy_product_basis(instance: HamiltonianInstance, copies: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Product eigenbasis of the copies register and its expected 0/1 acceptance."""
    vecs, labels = [], []
    for h, b in joint_eigenspaces(instance).items():
        for col in b.T:
            vecs.append(col)
            labels.append(h)
    cols, accept = [], []
    for idx in np.ndindex(*(len(vecs),) * copies):
        v = np.ones(1, dtype=complex)
        for i in idx:
            v = np.kron(vecs[i], v)
        cols.append(v)
        accept.append(float(all(labels[i] == labels[idx[0]] for i in idx)))
    return np.column_stack(cols), np.array(accept)


def closest_energy_pair(instance: HamiltonianInstance) -> tuple[Fraction, tuple[np.ndarray, np.ndarray]]:
    """The two orthogonal eigenstates with the smallest exact energy difference."""
    states = []
    for h, b in joint_eigenspaces(instance).items():
        for col in b.T:
            states.append((h.energy, col))
    states.sort(key=lambda s: s[0])
    best = None
    for (e1, v1), (e2, v2) in zip(states, states[1:]):
        if best is None or e2 - e1 < best[0]:
            best = (e2 - e1, (v1, v2))
    return best


# ---------------------------------------------------------------------------
# Seeded instance families


def _local_basis(rng: np.random.Generator) -> np.ndarray:
    from ..rng import haar_unitary

    return haar_unitary(rng, 2)


def random_projector_instance(seed: int, n: int, num_terms: int | None = None,
                              identity_terms: int = 0, style: str | None = None) -> HamiltonianInstance:
    """Commuting projector instance; ``style`` is "shared" or "local".

    "shared": every term acts on all n qubits and is diagonal in one Haar basis.
    "local": each term is a single-qubit projector in a per-qubit Haar basis.
    The first ``identity_terms`` terms are the identity.
    """
    from ..rng import haar_unitary, stream

    rng = stream(seed, "projector-instance")
    a_terms = n if num_terms is None else num_terms
    style = style or ("shared" if rng.random() < 0.5 else "local")
    terms = []
    if style == "shared":
        u = haar_unitary(rng, 1 << n)
    else:
        bases = [_local_basis(rng) for _ in range(n)]
    for a in range(a_terms):
        if a < identity_terms:
            q = int(rng.integers(n))
            terms.append(Term((q,), np.eye(2)))
            continue
        if style == "shared":
            mask = rng.random(1 << n) < 0.4
            if not mask.any():
                mask[int(rng.integers(1 << n))] = True
            proj = (u * mask) @ u.conj().T
            terms.append(Term(tuple(range(n)), proj))
        else:
            q = int(rng.integers(n))
            vec = bases[q][:, int(rng.integers(2))]
            terms.append(Term((q,), np.outer(vec, vec.conj())))
    return HamiltonianInstance(n, tuple(terms), PROJECTOR, x=f"projector:{seed}".encode())


def random_bounded_instance(seed: int, n: int, num_terms: int | None = None,
                            denominator: int = 6, style: str | None = None) -> HamiltonianInstance:
    """Commuting bounded instance with rational eigenvalues in [0, 1/A]."""
    from ..rng import haar_unitary, stream

    rng = stream(seed, "bounded-instance")
    a_terms = n if num_terms is None else num_terms
    style = style or ("shared" if rng.random() < 0.5 else "local")
    cap = Fraction(1, a_terms)
    grid = [cap * Fraction(j, denominator) for j in range(denominator + 1)]
    terms = []
    if style == "shared":
        u = haar_unitary(rng, 1 << n)
    else:
        bases = [_local_basis(rng) for _ in range(n)]
    for _ in range(a_terms):
        if style == "shared":
            vals = [grid[int(rng.integers(len(grid)))] for _ in range(1 << n)]
            mat = (u * np.array([float(v) for v in vals])) @ u.conj().T
            terms.append(Term(tuple(range(n)), mat, tuple(sorted(set(vals)))))
        else:
            q = int(rng.integers(n))
            vals = [grid[int(rng.integers(len(grid)))] for _ in range(2)]
            mat = (bases[q] * np.array([float(v) for v in vals])) @ bases[q].conj().T
            terms.append(Term((q,), mat, tuple(sorted(set(vals)))))
    return HamiltonianInstance(n, tuple(terms), BOUNDED, x=f"bounded:{seed}".encode())
