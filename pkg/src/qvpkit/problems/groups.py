"""Group non-membership over a black-box group.

The witness is a flag qubit and a register R. With the flag at 0, R holds a
classical certificate: a word over the generators and their inverses, which
the verifier evaluates with classical queries and accepts iff it equals h.
With the flag at 1, the low label bits of R hold a quantum state |psi>. The
verifier validates the labels. It then runs t closure tests, each a Hadamard test of right
multiplication by a seeded random word. Finally it runs one non-membership test,
a Hadamard test of right multiplication by h that accepts on outcome 1.

For |psi_H>, the uniform superposition over the labels of H = <g_1..g_k>,
every closure test passes with certainty. If h is not in H, the cosets H and
Hh are disjoint and the last test accepts with probability exactly 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .. import simcore
from ..errors import InvalidInput
from ..qvp import VerificationProcedure
from ..rng import stream
from .oracles import GroupOracle

PAD = 0


# ---------------------------------------------------------------------------
# Classical side: symbols, words and certificates


class SymbolTable:
    """Labels of the generators and their inverses, obtained by classical queries.

    Symbol 0 is padding (identity), symbol i in 1..k is g_i and k+i is g_i^-1.
    """

    def __init__(self, oracle: GroupOracle):
        self.oracle = oracle
        e = oracle.identity_label
        gens = list(oracle.generator_labels)
        invs = []
        for g in gens:
            inv = oracle.multiply(g, e)  # e g^-1
            if inv is None:
                raise InvalidInput("generator label is not a group element")
            invs.append(inv)
        self.labels = (e, *gens, *invs)
        self.k = len(gens)

    @property
    def num_symbols(self) -> int:
        return 2 * self.k + 1

    @property
    def bits_per_symbol(self) -> int:
        return max(1, (self.num_symbols - 1).bit_length())

    def inverse_symbol(self, s: int) -> int:
        if s == PAD:
            return PAD
        return s + self.k if s <= self.k else s - self.k

    def right_multiply(self, y_label: int, s: int) -> int:
        """Label of y s, one classical query."""
        out = self.oracle.multiply(self.labels[self.inverse_symbol(s)], y_label)
        if out is None:
            raise InvalidInput("invalid label during word evaluation")
        return out

    def evaluate(self, word: Sequence[int]) -> int:
        """Label of the product of ``word`` read left to right."""
        y = self.oracle.identity_label
        for s in word:
            if not 0 <= s < self.num_symbols:
                raise InvalidInput(f"symbol {s} outside 0..{self.num_symbols - 1}")
            if s != PAD:
                y = self.right_multiply(y, s)
        return y

    def inverse_label(self, word: Sequence[int]) -> int:
        return self.evaluate([self.inverse_symbol(s) for s in reversed(word)])


def encode_certificate(word: Sequence[int], bits_per_symbol: int) -> int:
    value = 0
    for i, s in enumerate(word):
        value |= int(s) << (i * bits_per_symbol)
    return value


def decode_certificate(value: int, length: int, bits_per_symbol: int) -> tuple[int, ...]:
    mask = (1 << bits_per_symbol) - 1
    return tuple((value >> (i * bits_per_symbol)) & mask for i in range(length))


def find_certificate(oracle: GroupOracle, length: int) -> tuple[int, ...] | None:
    """A word of at most ``length`` symbols evaluating to h, or None."""
    table = SymbolTable(oracle)
    for word in product(range(table.num_symbols), repeat=length):
        if table.evaluate(word) == oracle.target_label:
            return word
    return None


def draw_words(seed: int, num_symbols: int, count: int, length: int) -> list[tuple[int, ...]]:
    """Seeded closure words of at most ``length`` symbols (pad symbols allowed).

    Padding lets the effective word length vary. Fixed-length words can all lie in
    the kernel of a sign character, as they do in dihedral groups. Smaller
    counts take a prefix of the same draw.
    """
    rng = stream(seed, "closure-words")
    draws = rng.integers(0, num_symbols, size=(max(count, 64), length))
    return [tuple(int(s) for s in row) for row in draws[:count]]


def subgroup_labels(oracle: GroupOracle) -> list[int]:
    """Labels of H = <g_1..g_k>, by closure under classical right multiplication."""
    table = SymbolTable(oracle)
    seen = {oracle.identity_label}
    frontier = [oracle.identity_label]
    while frontier:
        y = frontier.pop()
        for s in range(1, table.k + 1):
            z = table.right_multiply(y, s)
            if z not in seen:
                seen.add(z)
                frontier.append(z)
    return sorted(seen)


def uniform_label_state(n: int, labels: Sequence[int]) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[list(labels)] = 1 / np.sqrt(len(labels))
    return psi


# ---------------------------------------------------------------------------
# The verification procedure


@dataclass(frozen=True)
class GNMLayout:
    """Qubit positions of the group non-membership procedure."""

    n: int
    register_qubits: int
    certificate_length: int
    bits_per_symbol: int
    repetitions: int

    @property
    def flag(self) -> int:
        return 0

    @property
    def register(self) -> list[int]:
        return list(range(1, 1 + self.register_qubits))

    @property
    def label(self) -> list[int]:
        return self.register[: self.n]

    @property
    def multiplier(self) -> list[int]:
        start = 1 + self.register_qubits
        return list(range(start, start + self.n))

    @property
    def err_valid(self) -> int:
        return 1 + self.register_qubits + self.n

    @property
    def err_work(self) -> int:
        return self.err_valid + 1

    @property
    def closure(self) -> list[int]:
        return list(range(self.err_work + 1, self.err_work + 1 + self.repetitions))

    @property
    def nonmember(self) -> int:
        return self.err_work + 1 + self.repetitions

    @property
    def accept(self) -> int:
        return self.nonmember + 1

    @property
    def witness_qubits(self) -> int:
        return 1 + self.register_qubits

    @property
    def num_qubits(self) -> int:
        return self.accept + 1


@dataclass(frozen=True, eq=False)
class GNMProcedure:
    procedure: VerificationProcedure
    layout: GNMLayout
    words: tuple[tuple[int, ...], ...]
    symbols: SymbolTable

    def certificate_witness(self, word: Sequence[int]) -> np.ndarray:
        """Basis witness |0>|certificate>."""
        lay = self.layout
        if len(word) != lay.certificate_length:
            raise InvalidInput(f"certificate must have {lay.certificate_length} symbols")
        psi = np.zeros(1 << lay.witness_qubits, dtype=complex)
        psi[encode_certificate(word, lay.bits_per_symbol) << 1] = 1
        return psi

    def quantum_witness(self, label_state: np.ndarray) -> np.ndarray:
        """Witness |1>|psi> with |psi> on the label bits and the rest of R zero."""
        lay = self.layout
        label_state = np.asarray(label_state, dtype=complex)
        if label_state.shape != (1 << lay.n,):
            raise InvalidInput("label state has the wrong dimension")
        psi = np.zeros(1 << lay.witness_qubits, dtype=complex)
        psi[1 + (np.arange(1 << lay.n) << 1)] = label_state
        return psi


def _hadamard_test(lay: GNMLayout, oracle: GroupOracle, inverse_label: int, control: int) -> list:
    """Controlled right multiplication of the label register, between Hadamards on ``control``."""
    return [
        simcore.xor_constant(lay.multiplier, inverse_label),
        simcore.hadamard(control),
        oracle.gate(lay.multiplier, lay.label, lay.err_work,
                    controls=(lay.flag, control, lay.err_valid), control_values=(1, 1, 0)),
        simcore.hadamard(control),
        simcore.xor_constant(lay.multiplier, inverse_label),
    ]


def build_gnm_procedure(oracle: GroupOracle, certificate_length: int = 2, repetitions: int | None = None,
                        word_length: int | None = None, seed: int = 0) -> GNMProcedure:
    """Verifier for "h is not in H", with a certificate branch for h in H.

    Defaults: ``repetitions`` t = 2n closure tests with words of length L = 2n.
    Closure tests run in reverse draw order, so the procedure for t + 1 applies
    one extra test before the tests of the procedure for t.
    """
    n = oracle.n
    t = 2 * n if repetitions is None else int(repetitions)
    length = 2 * n if word_length is None else int(word_length)
    if t < 0 or length < 1 or certificate_length < 1:
        raise InvalidInput("repetitions must be >= 0, word and certificate lengths >= 1")
    symbols = SymbolTable(oracle)
    b = symbols.bits_per_symbol
    lay = GNMLayout(n, max(n, certificate_length * b), certificate_length, b, t)
    words = tuple(draw_words(seed, symbols.num_symbols, t, length))

    gates: list = [
        simcore.xor_constant(lay.multiplier, oracle.identity_label),
        oracle.gate(lay.multiplier, lay.label, lay.err_valid, controls=(lay.flag,)),
        simcore.xor_constant(lay.multiplier, oracle.identity_label),
    ]
    for j in reversed(range(t)):
        gates += _hadamard_test(lay, oracle, symbols.inverse_label(words[j]), lay.closure[j])
    h_inverse = oracle.multiply(oracle.target_label, oracle.identity_label)
    gates += _hadamard_test(lay, oracle, h_inverse, lay.nonmember)

    cert_bits = certificate_length * b

    def valid_certificate(w: int) -> bool:
        word = decode_certificate(w, certificate_length, b)
        return (w < (1 << cert_bits) and max(word) < symbols.num_symbols
                and symbols.evaluate(word) == oracle.target_label)

    # Flag 0: accept iff R holds a valid certificate.
    gates.append(simcore.classical_function(lay.register, lay.accept, valid_certificate,
                                            controls=(lay.flag,), control_values=(0,),
                                            label="certificate-check"))
    # Flag 1: accept iff the non-membership test gave 1 and every other check is clean.
    zeros = [*lay.register[n:], lay.err_valid, lay.err_work, *lay.closure]
    gates.append(simcore.pauli_x(lay.accept, controls=(lay.flag, lay.nonmember, *zeros),
                                 control_values=(1, 1, *[0] * len(zeros))))
    proc = VerificationProcedure(lay.witness_qubits, lay.num_qubits - lay.witness_qubits, tuple(gates),
                                 accept_qubit=lay.accept, name="gnm")
    return GNMProcedure(proc, lay, words, symbols)


# ---------------------------------------------------------------------------
# Branch-by-branch evaluation of the quantum branch


def _right_multiplication(oracle: GroupOracle, inverse_label: int, states: np.ndarray,
                          error_out: bool = False) -> np.ndarray:
    """Apply one oracle query with a fixed multiplier to label states of shape (2^n, B)."""
    n = oracle.n
    dim = 1 << n
    full = np.zeros((2 * dim * dim, states.shape[1]), dtype=complex)
    full[inverse_label + dim * np.arange(dim)] = states
    out = simcore.apply_to_array(full, 2 * n + 1, oracle.gate(range(n), range(n, 2 * n), 2 * n))
    part = out[dim * dim:] if error_out else out[: dim * dim]
    return part.reshape(dim, dim, -1)[:, inverse_label, :]


def quantum_branch_operator(gnm: GNMProcedure) -> np.ndarray:
    """K with flag-1 acceptance ||K psi||^2 for label states psi (high R bits zero).

    K = (I - U_h)/2 * prod_j (I + U_{w_j})/2 * V, where V projects onto valid
    labels, computed with one batched oracle query per factor.
    """
    oracle = gnm.symbols.oracle
    dim = 1 << oracle.n
    eye = np.eye(dim, dtype=complex)
    invalid = _right_multiplication(oracle, oracle.identity_label, eye, error_out=True)
    k = np.diag((np.linalg.norm(invalid, axis=0) < 0.5).astype(complex))
    for word in reversed(gnm.words):
        k = (k + _right_multiplication(oracle, gnm.symbols.inverse_label(word), k)) / 2
    h_inverse = oracle.multiply(oracle.target_label, oracle.identity_label)
    return (k - _right_multiplication(oracle, h_inverse, k)) / 2


def quantum_branch_acceptance(gnm: GNMProcedure, label_states: np.ndarray) -> np.ndarray:
    k = quantum_branch_operator(gnm)
    return np.sum(np.abs(k @ np.asarray(label_states, dtype=complex).reshape(k.shape[0], -1)) ** 2, axis=0)


def max_quantum_branch_acceptance(gnm: GNMProcedure) -> float:
    """Largest flag-1 acceptance over all label states."""
    return float(np.linalg.norm(quantum_branch_operator(gnm), 2) ** 2)
