"""Instance documents: parsing, validation and builtin fixtures.

An instance is a JSON object. Every document carries ``version`` (currently 1)
and ``problem``; the remaining fields depend on the problem:

``synthesized``
    ``spectrum``: list of ``{"p": RAT, "multiplicity": INT}``; optional ``basis_seed``.
``random``
    ``seed``, ``witness_qubits``, ``ancilla_qubits``.
``qsat`` | ``almost_degenerate`` | ``multicopy`` | ``qlll``
    ``n``, ``flavor`` ("projector" or "bounded"), ``terms``: list of
    ``{"support": [INT], "matrix": [[[re, im], ...], ...], "eigenvalues": [RAT]?}``.
    ``multicopy`` takes optional ``copies``; ``qlll`` takes ``precision_bits``.
``marked_state`` | ``udeg`` | ``umulticopy`` | ``gnm``
    ``oracle``: ``{"kind", "seed", "n", ...}``. Marked-state oracles accept
    ``basis_state``; group oracles take ``group`` ("cyclic" or "dihedral"),
    ``order``, ``generators`` (element indices) and ``target``.

A document may instead be ``{"builtin": NAME}``; the command line also
accepts ``builtin:NAME`` in place of a path. RAT values are numbers or
strings such as ``"2/3"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import qvp
from .errors import InvalidInput
from .problems import groups, hamiltonians, marked, oracles, qlll, unitary_powers
from .problems.hamiltonians import HamiltonianInstance, Term

SCHEMA_VERSION = 1
HAMILTONIAN_PROBLEMS = ("qsat", "almost_degenerate", "multicopy", "qlll")
ORACLE_PROBLEMS = ("marked_state", "udeg", "umulticopy", "gnm")
PROBLEMS = ("synthesized", "random") + HAMILTONIAN_PROBLEMS + ORACLE_PROBLEMS


@dataclass(frozen=True, eq=False)
class LoadedInstance:
    """A parsed instance: the procedure plus whatever problem data produced it."""

    problem: str
    name: str
    procedure: qvp.VerificationProcedure
    hamiltonian: HamiltonianInstance | None = None
    oracle: oracles.OracleHandle | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Field readers with path-qualified diagnostics


def _get(doc: dict, key: str, where: str, kind: type | tuple = object, default: Any = ...):
    if key not in doc:
        if default is ...:
            raise InvalidInput(f"instance field '{where}{key}' is missing")
        return default
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise InvalidInput(f"instance field '{where}{key}' must be an integer")
    if kind is not object and kind is not int and not isinstance(value, kind):
        raise InvalidInput(f"instance field '{where}{key}' has the wrong type")
    return value


def parse_rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise InvalidInput(f"instance field '{where}' must be a number")
    try:
        return Fraction(value) if isinstance(value, (int, str)) else Fraction(float(value))
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidInput(f"instance field '{where}' is not a rational number") from None


def parse_matrix(value: Any, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput(f"instance field '{where}' must be a matrix of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"instance field '{where}' must be a square matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _guard(where: str, fn: Callable[[], Any]):
    """Run a constructor and prefix its validation message with the field path."""
    try:
        return fn()
    except InvalidInput as exc:
        raise InvalidInput(f"instance field '{where}': {exc}") from None


def parse_hamiltonian(doc: dict) -> HamiltonianInstance:
    n = _get(doc, "n", "", int)
    flavor = _get(doc, "flavor", "", str, hamiltonians.PROJECTOR)
    if flavor not in (hamiltonians.PROJECTOR, hamiltonians.BOUNDED):
        raise InvalidInput("instance field 'flavor' must be 'projector' or 'bounded'")
    raw = _get(doc, "terms", "", list)
    terms = []
    for a, t in enumerate(raw):
        where = f"terms[{a}]."
        if not isinstance(t, dict):
            raise InvalidInput(f"instance field 'terms[{a}]' must be an object")
        support = _get(t, "support", where, list)
        if not all(isinstance(q, int) and not isinstance(q, bool) for q in support):
            raise InvalidInput(f"instance field '{where}support' must list qubit indices")
        matrix = parse_matrix(_get(t, "matrix", where, list), where + "matrix")
        ev = _get(t, "eigenvalues", where, list, None)
        if ev is not None:
            ev = tuple(parse_rational(v, f"{where}eigenvalues[{i}]") for i, v in enumerate(ev))
        terms.append(_guard(f"terms[{a}]", lambda: Term(tuple(support), matrix, ev)))
    return _guard("terms", lambda: HamiltonianInstance(n, tuple(terms), flavor,
                                                      x=json.dumps(doc, sort_keys=True).encode()))


def _make_group_oracle(spec: dict) -> oracles.GroupOracle:
    where = "oracle."
    family = _get(spec, "group", where, str)
    order = _get(spec, "order", where, int)
    if family == "cyclic":
        if order < 1:
            raise InvalidInput("instance field 'oracle.order' must be positive")
        table = oracles.cyclic_table(order)
    elif family == "dihedral":
        if order < 2 or order % 2:
            raise InvalidInput("instance field 'oracle.order' must be an even number >= 2")
        table = oracles.dihedral_table(order // 2)
    else:
        raise InvalidInput("instance field 'oracle.group' must be 'cyclic' or 'dihedral'")
    gens = _get(spec, "generators", where, list)
    target = _get(spec, "target", where, int)
    seed = _get(spec, "seed", where, int, 0)
    bits = _get(spec, "label_bits", where, int, None)
    group_spec = _guard("oracle", lambda: oracles.make_group_spec(table, gens, target, seed, bits,
                                                                  name=f"{family}{order}"))
    return _guard("oracle", lambda: oracles.group_oracle(group_spec, seed))


def parse_oracle(doc: dict, problem: str) -> oracles.OracleHandle:
    spec = _get(doc, "oracle", "", dict)
    kind = _get(spec, "kind", "oracle.", str)
    expected = {"marked_state": "marked_state", "udeg": "unitary_powers",
                "umulticopy": "unitary_powers", "gnm": "group"}[problem]
    if kind != expected:
        raise InvalidInput(f"instance field 'oracle.kind' must be '{expected}' for problem '{problem}'")
    if kind == "group":
        return _make_group_oracle(spec)
    seed = _get(spec, "seed", "oracle.", int)
    n = _get(spec, "n", "oracle.", int)
    if kind == "marked_state":
        basis = _get(spec, "basis_state", "oracle.", bool, False)
        return _guard("oracle", lambda: oracles.marked_state_oracle(seed, n, basis))
    return _guard("oracle", lambda: oracles.unitary_powers_oracle(seed, n))


# ---------------------------------------------------------------------------
# Documents


def parse_document(doc: Any, name: str = "instance", precision_bits: int | None = None) -> LoadedInstance:
    """Turn a decoded JSON document into a :class:`LoadedInstance`."""
    if not isinstance(doc, dict):
        raise InvalidInput("instance document must be a JSON object")
    if "builtin" in doc:
        return load_builtin(_get(doc, "builtin", "", str))
    version = _get(doc, "version", "", int)
    if version != SCHEMA_VERSION:
        raise InvalidInput(f"instance field 'version' must be {SCHEMA_VERSION}")
    problem = _get(doc, "problem", "", str)
    if problem not in PROBLEMS:
        raise InvalidInput(f"instance field 'problem' must be one of {', '.join(PROBLEMS)}")
    name = _get(doc, "name", "", str, name)

    if problem == "synthesized":
        entries = _get(doc, "spectrum", "", list)
        values = []
        for i, e in enumerate(entries):
            if not isinstance(e, dict):
                raise InvalidInput(f"instance field 'spectrum[{i}]' must be an object")
            p = parse_rational(_get(e, "p", f"spectrum[{i}]."), f"spectrum[{i}].p")
            values.append((float(p), _get(e, "multiplicity", f"spectrum[{i}].", int)))
        seed = _get(doc, "basis_seed", "", int, None)
        proc = _guard("spectrum", lambda: qvp.synthesize_with_spectrum(values, seed, name=name))
        return LoadedInstance(problem, name, proc)
    if problem == "random":
        seed = _get(doc, "seed", "", int)
        m, k = _get(doc, "witness_qubits", "", int), _get(doc, "ancilla_qubits", "", int)
        proc = _guard("witness_qubits", lambda: qvp.random_procedure(seed, m, k))
        return LoadedInstance(problem, name, proc)
    if problem in HAMILTONIAN_PROBLEMS:
        h = parse_hamiltonian(doc)
        extra = {}
        if problem == "qsat":
            proc = _guard("flavor", lambda: hamiltonians.build_qsat_procedure(h))
        elif problem == "almost_degenerate":
            proc = hamiltonians.build_almost_degenerate_procedure(h)
        elif problem == "multicopy":
            copies = _get(doc, "copies", "", int, 3)
            extra["copies"] = copies
            proc = _guard("copies", lambda: hamiltonians.build_multicopy_procedure(h, copies))
        else:
            bits = precision_bits if precision_bits is not None else _get(doc, "precision_bits", "", int)
            extra["precision_bits"] = bits
            proc = _guard("precision_bits", lambda: qlll.build_qlll_procedure(h, bits))
        return LoadedInstance(problem, name, proc, hamiltonian=h, extra=extra)

    oracle = parse_oracle(doc, problem)
    if problem == "marked_state":
        proc = marked.build_marked_state_procedure(oracle)
    elif problem == "udeg":
        proc = unitary_powers.build_udeg_procedure(oracle)
    elif problem == "umulticopy":
        proc = unitary_powers.build_umulticopy_procedure(oracle)
    else:
        reps = _get(doc, "repetitions", "", int, 1)
        cert = _get(doc, "certificate_length", "", int, 2)
        gnm = _guard("repetitions", lambda: groups.build_gnm_procedure(oracle, cert, reps))
        return LoadedInstance(problem, name, gnm.procedure, oracle=oracle, extra={"gnm": gnm})
    return LoadedInstance(problem, name, proc, oracle=oracle)


def load_instance(spec: str, precision_bits: int | None = None) -> LoadedInstance:
    """Load ``builtin:NAME`` or a JSON file."""
    if spec.startswith("builtin:"):
        return load_builtin(spec[len("builtin:"):])
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read instance file {spec}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"instance file is not valid JSON (line {exc.lineno}): {exc.msg}") from None
    return parse_document(doc, name=path.stem, precision_bits=precision_bits)


# ---------------------------------------------------------------------------
# Builtins


def _projector_matrix(vec) -> list:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    p = np.outer(v, v.conj())
    return [[[float(z.real), float(z.imag)] for z in row] for row in p]


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


EXAMPLE1_GAP = Fraction(1, 64)

BUILTIN_DOCUMENTS: dict[str, dict] = {
    "example1": {"version": 1, "problem": "synthesized", "basis_seed": 1,
                 "spectrum": [{"p": "1/3", "multiplicity": 1},
                              {"p": str(Fraction(2, 3) - EXAMPLE1_GAP), "multiplicity": 1},
                              {"p": "2/3", "multiplicity": 2}]},
    "qsat_sat": {"version": 1, "problem": "qsat", "n": 2, "flavor": "projector",
                 "terms": [{"support": [0], "matrix": _projector_matrix([0, 1])},
                           {"support": [1], "matrix": _projector_matrix([1, 1])}]},
    "qsat_identity": {"version": 1, "problem": "qsat", "n": 2, "flavor": "projector",
                      "terms": [{"support": [0], "matrix": matrix_to_json(np.eye(2))},
                                {"support": [1], "matrix": _projector_matrix([1, 0])}]},
    "gnm_z8_member": {"version": 1, "problem": "gnm", "repetitions": 1,
                      "oracle": {"kind": "group", "group": "cyclic", "order": 8, "generators": [2],
                                 "target": 4, "seed": 0}},
    "gnm_z8_nonmember": {"version": 1, "problem": "gnm", "repetitions": 1,
                         "oracle": {"kind": "group", "group": "cyclic", "order": 8, "generators": [2],
                                    "target": 1, "seed": 0}},
    "marked_n2": {"version": 1, "problem": "marked_state",
                  "oracle": {"kind": "marked_state", "seed": 0, "n": 2, "basis_state": True}},
}

BUILTIN_PROCEDURES: dict[str, Callable[[], qvp.VerificationProcedure]] = {
    "accept_on_1": qvp.accept_on_one,
    "always_accept": qvp.always_accept,
    "swap_antisymmetric": qvp.swap_antisymmetric,
}

BUILTINS = tuple(sorted((*BUILTIN_PROCEDURES, *BUILTIN_DOCUMENTS)))


def load_builtin(name: str) -> LoadedInstance:
    if name in BUILTIN_PROCEDURES:
        return LoadedInstance("builtin", name, BUILTIN_PROCEDURES[name]())
    if name in BUILTIN_DOCUMENTS:
        return parse_document(BUILTIN_DOCUMENTS[name], name=name)
    raise InvalidInput(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
