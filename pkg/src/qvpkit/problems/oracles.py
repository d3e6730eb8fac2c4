"""Seeded black-box oracles.

Each handle keeps its hidden object (marked state, unitary, group table and
labels) inside closures owned by the query functions, so the rest of the
package can reach it only by issuing queries. Every query increments
``query_count``: one per classical call and one per application of an oracle
gate to a (possibly batched) state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .. import simcore
from ..errors import InvalidInput
from ..rng import haar_state, haar_unitary, stream

MAX_ORACLE_QUBITS = 12


class OracleHandle:
    """Base class: a kind tag, seed, size parameter and a query counter."""

    kind = "oracle"

    def __init__(self, seed: int, n: int):
        if n < 0 or n > MAX_ORACLE_QUBITS:
            raise InvalidInput(f"oracle size {n} outside [0, {MAX_ORACLE_QUBITS}]")
        self.seed = int(seed)
        self.n = int(n)
        self._count = 0

    @property
    def query_count(self) -> int:
        return self._count

    def _tick(self) -> None:
        self._count += 1

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.seed}, n={self.n}, queries={self._count})"


@dataclass(frozen=True, eq=False)
class _CountingAction:
    """Block action that reports each application to its oracle."""

    forward: Callable[[np.ndarray], np.ndarray]
    backward: Callable[[np.ndarray], np.ndarray]
    tick: Callable[[], None]

    def apply_block(self, block: np.ndarray) -> np.ndarray:
        self.tick()
        return self.forward(block)

    def inverse(self) -> "_CountingAction":
        return _CountingAction(self.backward, self.forward, self.tick)


# ---------------------------------------------------------------------------
# Marked state


class MarkedStateOracle(OracleHandle):
    """A|a>|psi> = |a xor 1>|psi>, identity on the orthogonal complement of |psi>.

    The hidden state is Haar random, or a uniformly random computational basis
    state when ``basis_state`` is set.
    """

    kind = "marked_state"

    def __init__(self, seed: int, n: int, basis_state: bool = False):
        super().__init__(seed, n)
        self.basis_state = bool(basis_state)
        rng = stream(seed, "marked-state")
        dim = 1 << n
        if basis_state:
            psi = np.zeros(dim, dtype=complex)
            psi[int(rng.integers(dim))] = 1
        else:
            psi = haar_state(rng, dim)

        def flip(block: np.ndarray) -> np.ndarray:
            b = block.reshape(2, dim, -1)
            c = np.einsum("i,fir->fr", psi.conj(), b)
            out = b - psi[None, :, None] * c[:, None, :] + psi[None, :, None] * c[::-1, None, :]
            return out.reshape(block.shape)

        self._action = _CountingAction(flip, flip, self._tick)

    def gate(self, flag: int, register: Sequence[int], controls: Sequence[int] = (),
             control_values: Sequence[int] = ()) -> simcore.GateOp:
        """Oracle gate on ``register`` (the n-qubit input) and ``flag``."""
        register = tuple(register)
        if len(register) != self.n:
            raise InvalidInput(f"register has {len(register)} qubits, oracle expects {self.n}")
        return simcore.GateOp("oracle", register + (flag,), action=self._action,
                              controls=tuple(controls), control_values=tuple(control_values),
                              label="marked-state")


def marked_state_oracle(seed: int, n: int, basis_state: bool = False) -> MarkedStateOracle:
    return MarkedStateOracle(seed, n, basis_state)


# ---------------------------------------------------------------------------
# Unitary powers


class UnitaryPowersOracle(OracleHandle):
    """C|k>|psi> = |k> U^k |psi> for a hidden Haar-random n-qubit U."""

    kind = "unitary_powers"

    def __init__(self, seed: int, n: int):
        super().__init__(seed, n)
        u = haar_unitary(stream(seed, "hidden-unitary"), 1 << n)
        dim = 1 << n
        cache: dict[int, np.ndarray] = {}

        def powers(count: int, sign: int) -> np.ndarray:
            key = sign * count
            if key not in cache:
                base = u if sign > 0 else u.conj().T
                stack = np.empty((count, dim, dim), dtype=complex)
                stack[0] = np.eye(dim)
                for k in range(1, count):
                    stack[k] = base @ stack[k - 1]
                cache[key] = stack
            return cache[key]

        def make(sign: int):
            def act(block: np.ndarray) -> np.ndarray:
                count = block.shape[0] // dim
                b = block.reshape(count, dim, -1)
                return np.einsum("kij,kjr->kir", powers(count, sign), b).reshape(block.shape)
            return act

        self._action = _CountingAction(make(1), make(-1), self._tick)

    def gate(self, power_register: Sequence[int], target: Sequence[int], controls: Sequence[int] = (),
             control_values: Sequence[int] = ()) -> simcore.GateOp:
        """Apply U^k to ``target`` where k is the value of ``power_register``."""
        target, power_register = tuple(target), tuple(power_register)
        if len(target) != self.n:
            raise InvalidInput(f"target has {len(target)} qubits, oracle expects {self.n}")
        return simcore.GateOp("oracle", target + power_register, action=self._action,
                              controls=tuple(controls), control_values=tuple(control_values),
                              label="unitary-powers")


def unitary_powers_oracle(seed: int, n: int) -> UnitaryPowersOracle:
    return UnitaryPowersOracle(seed, n)


def query_unitary(oracle: UnitaryPowersOracle) -> np.ndarray:
    """Recover U column by column with one batched query (power register = 1)."""
    n = oracle.n
    dim = 1 << n
    states = np.zeros((2 * dim, dim), dtype=complex)
    states[dim + np.arange(dim), np.arange(dim)] = 1  # power qubit (index n) set
    out = simcore.apply_to_array(states, n + 1, oracle.gate([n], range(n)))
    return out[dim:]


# ---------------------------------------------------------------------------
# Black-box group


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Finite group by multiplication table with a random injective labelling.

    ``table[x, y]`` is the index of the product ``x y``; index 0 is the identity.
    """

    table: np.ndarray
    label_bits: int
    labels: np.ndarray
    generators: tuple[int, ...]
    target: int
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.table)
        g = t.shape[0]
        if t.shape != (g, g) or not np.array_equal(t[0], np.arange(g)) or not np.array_equal(t[:, 0], np.arange(g)):
            raise InvalidInput("table must be square with identity at index 0")
        for row in t:
            if not np.array_equal(np.sort(row), np.arange(g)):
                raise InvalidInput("table rows are not permutations")
        if g > (1 << self.label_bits):
            raise InvalidInput("group does not fit in the label length")
        if len(set(int(v) for v in self.labels)) != g or max(self.labels) >= (1 << self.label_bits):
            raise InvalidInput("label map is not injective into label strings")
        if not all(0 <= x < g for x in (*self.generators, self.target)):
            raise InvalidInput("generator or target outside the group")

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    def inverse(self, x: int) -> int:
        return int(np.flatnonzero(self.table[x] == 0)[0])

    def subgroup(self, gens: Sequence[int] | None = None) -> set[int]:
        gens = self.generators if gens is None else gens
        seen, frontier = {0}, [0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = int(self.table[x, g])
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return seen


def cyclic_table(order: int) -> np.ndarray:
    i = np.arange(order)
    return (i[:, None] + i[None, :]) % order


def dihedral_table(n: int) -> np.ndarray:
    """Dihedral group of order 2n; element r^a s^b has index a + n b."""
    order = 2 * n
    t = np.empty((order, order), dtype=np.int64)
    for x in range(order):
        a1, b1 = x % n, x // n
        for y in range(order):
            a2, b2 = y % n, y // n
            a = (a1 + (-1) ** b1 * a2) % n
            t[x, y] = a + n * ((b1 + b2) % 2)
    return t


def make_group_spec(table: np.ndarray, generators: Sequence[int], target: int, seed: int,
                    label_bits: int | None = None, name: str = "") -> GroupSpec:
    """Draw a random injective labelling with the given (or minimal plus one) length."""
    g = table.shape[0]
    bits = label_bits if label_bits is not None else max(1, (g - 1).bit_length()) + 1
    if g > (1 << bits):
        raise InvalidInput(f"group of order {g} does not fit in {bits} label bits")
    rng = stream(seed, "group-labels")
    labels = rng.choice(1 << bits, size=g, replace=False)
    return GroupSpec(np.asarray(table), bits, labels.astype(np.int64), tuple(int(x) for x in generators),
                     int(target), name)


class GroupOracle(OracleHandle):
    """B|l(x)>|l(y)>|z> = |l(x)>|l(y x^-1)>|z>; invalid labels flip the error qubit.

    Public data: label length, identity label, generator labels and the
    target label. Everything else is reachable only through queries.
    """

    kind = "group"

    def __init__(self, spec: GroupSpec, seed: int = 0):
        super().__init__(seed, spec.label_bits)
        n = spec.label_bits
        size = 1 << n
        table = np.asarray(spec.table)
        labels = np.asarray(spec.labels)
        index_of = np.full(size, -1, dtype=np.int64)
        index_of[labels] = np.arange(spec.order)
        inverses = np.array([spec.inverse(x) for x in range(spec.order)])
        self.identity_label = int(labels[0])
        self.generator_labels = tuple(int(labels[g]) for g in spec.generators)
        self.target_label = int(labels[spec.target])

        def product(x_label: int, y_label: int) -> int | None:
            x, y = index_of[x_label], index_of[y_label]
            if x < 0 or y < 0:
                return None
            return int(labels[table[y, inverses[x]]])

        # Local index: multiplier register (low n bits), target register, error qubit.
        perm = np.empty(2 * size * size, dtype=np.int64)
        for xl in range(size):
            for yl in range(size):
                out = product(xl, yl)
                for err in (0, 1):
                    src = xl | (yl << n) | (err << (2 * n))
                    if out is None:
                        perm[src] = xl | (yl << n) | ((1 - err) << (2 * n))
                    else:
                        perm[src] = xl | (out << n) | (err << (2 * n))
        inv = np.argsort(perm)

        def fwd(block):
            out = np.empty_like(block)
            out[perm] = block
            return out

        def bwd(block):
            out = np.empty_like(block)
            out[inv] = block
            return out

        self._action = _CountingAction(fwd, bwd, self._tick)
        self._product = product

    def multiply(self, x_label: int, y_label: int) -> int | None:
        """Classical query: label of y x^-1, or None for an invalid label."""
        self._tick()
        return self._product(int(x_label), int(y_label))

    def gate(self, multiplier: Sequence[int], target: Sequence[int], error: int,
             controls: Sequence[int] = (), control_values: Sequence[int] = ()) -> simcore.GateOp:
        multiplier, target = tuple(multiplier), tuple(target)
        if len(multiplier) != self.n or len(target) != self.n:
            raise InvalidInput(f"group oracle registers must have {self.n} qubits")
        return simcore.GateOp("oracle", multiplier + target + (error,), action=self._action,
                              controls=tuple(controls), control_values=tuple(control_values),
                              label="group")


def group_oracle(spec: GroupSpec, seed: int = 0) -> GroupOracle:
    return GroupOracle(spec, seed)
