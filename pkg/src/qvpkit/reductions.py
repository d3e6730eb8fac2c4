"""Strong reductions: deamplification, alternating-measurement amplification,
bound retargeting, and a checker for claimed reductions.

A reduction keeps the witness register and adds ancillas. The map ``f`` on
acceptance values is kept as a symbolic descriptor so it can be evaluated
exactly at any point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import simcore
from .errors import Infeasible, InvalidInput
from .jordan import CLUSTER_TOL, EIGENSPACE_TOL, SpectrumReport, spectrum
from .qvp import DEFAULT_CAP, VerificationProcedure

DEFAULT_MAX_ROUNDS = 20


# ---------------------------------------------------------------------------
# Value maps


def binomial_tail(rounds: int, threshold: int, p) -> float | Fraction:
    """Pr[Binomial(rounds, p) >= threshold], exact for Fraction ``p``."""
    if isinstance(p, Fraction):
        return sum((Fraction(math.comb(rounds, j)) * p ** j * (1 - p) ** (rounds - j)
                    for j in range(threshold, rounds + 1)), Fraction(0))
    p = float(p)
    return math.fsum(math.comb(rounds, j) * p ** j * (1 - p) ** (rounds - j)
                     for j in range(threshold, rounds + 1))


@dataclass(frozen=True)
class Affine:
    """f(p) = (z - z') p + z'."""

    z: float
    z_prime: float

    def __call__(self, p):
        return (self.z - self.z_prime) * p + self.z_prime

    def strictly_increasing(self) -> bool:
        return self.z > self.z_prime

    def describe(self) -> dict:
        return {"kind": "affine", "z": float(self.z), "z_prime": float(self.z_prime)}


@dataclass(frozen=True)
class BinomialTail:
    """f(p) = Pr[Binomial(N, p) >= ceil(tau N)]."""

    rounds: int
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, "tau", Fraction(self.tau).limit_denominator(10 ** 12))

    @property
    def threshold(self) -> int:
        return math.ceil(self.tau * self.rounds)

    def __call__(self, p):
        return binomial_tail(self.rounds, self.threshold, p)

    def strictly_increasing(self) -> bool:
        return 1 <= self.threshold <= self.rounds

    def describe(self) -> dict:
        return {"kind": "binomial_tail", "rounds": self.rounds, "tau": str(self.tau),
                "threshold": self.threshold}


@dataclass(frozen=True)
class Composed:
    """Apply ``parts`` left to right."""

    parts: tuple

    def __call__(self, p):
        for f in self.parts:
            p = f(p)
        return p

    def strictly_increasing(self) -> bool:
        return all(f.strictly_increasing() for f in self.parts)

    def describe(self) -> dict:
        return {"kind": "composed", "parts": [f.describe() for f in self.parts]}


ValueMap = Union[Affine, BinomialTail, Composed]
IDENTITY = Affine(1.0, 0.0)


def compose(*maps: ValueMap) -> Composed:
    parts: list = []
    for f in maps:
        parts.extend(f.parts if isinstance(f, Composed) else [f])
    return Composed(tuple(parts))


@dataclass(frozen=True, eq=False)
class StrongReductionClaim:
    source: VerificationProcedure
    target: VerificationProcedure
    f: ValueMap

    def __post_init__(self):
        if not self.f.strictly_increasing():
            raise InvalidInput("claimed value map is not strictly increasing")
        if self.source.witness_qubits != self.target.witness_qubits:
            raise InvalidInput("source and target witness registers differ")


# ---------------------------------------------------------------------------
# Constructions


def deamplify(proc: VerificationProcedure, z: float, z_prime: float) -> VerificationProcedure:
    """Add one ancilla rotated to amplitude sqrt(z) (original accepted) or sqrt(z')."""
    z, z_prime = float(z), float(z_prime)
    if not (0 <= z_prime < z <= 1):
        raise InvalidInput(f"need 0 <= z' < z <= 1, got z={z!r}, z'={z_prime!r}")
    new = proc.num_qubits
    acc, val = proc.accept_qubit, proc.accept_value
    gates = list(proc.circuit) + [
        simcore.rotation(new, 2 * math.asin(math.sqrt(z)), controls=(acc,), control_values=(val,)),
        simcore.rotation(new, 2 * math.asin(math.sqrt(z_prime)), controls=(acc,),
                         control_values=(1 - val,)),
    ]
    return VerificationProcedure(proc.witness_qubits, proc.ancilla_qubits + 1, tuple(gates),
                                 accept_qubit=new, x=proc.x, name=f"{proc.name}+deamplify")


def solve_deamplification(a, b, a_prime, b_prime) -> tuple[float, float]:
    """The (z, z') whose affine map sends a to a' and b to b'."""
    a, b, ap, bp = (float(v) for v in (a, b, a_prime, b_prime))
    if not (a >= ap > bp >= b):
        raise InvalidInput("need a >= a' > b' >= b")
    slope = (ap - bp) / (a - b)
    zp = bp - b * slope
    z = zp + slope
    # Round-off can push the endpoints a hair outside [0, 1].
    z, zp = min(1.0, max(0.0, z)), min(1.0, max(0.0, zp))
    if not (0 <= zp < z <= 1):
        raise InvalidInput("deamplification parameters fall outside [0, 1]")
    return z, zp


def amplify(proc: VerificationProcedure, rounds: int, tau, max_rounds: int = DEFAULT_MAX_ROUNDS
            ) -> VerificationProcedure:
    """Alternate coherent measurements of acceptance and input validity.

    Round ``j`` (1-based) records the outcome ``y_j`` of the acceptance
    projector for odd ``j`` and of the valid-input projector for even ``j``.
    With ``y_0 = 1``, the agreement bits ``[y_j == y_{j-1}]`` are independent
    Bernoulli(p) on an eigenvector of value ``p``; the new procedure accepts
    iff at least ``ceil(tau N)`` of them are set.
    """
    if rounds < 1:
        raise InvalidInput("rounds must be at least 1")
    if rounds > max_rounds:
        raise Infeasible(f"{rounds} rounds exceeds the ancilla budget of {max_rounds}")
    tau = Fraction(tau).limit_denominator(10 ** 12)
    if not 0 < tau < 1:
        raise InvalidInput("threshold tau must lie in (0, 1)")
    n = proc.num_qubits
    records = list(range(n, n + rounds))
    out = n + rounds
    anc = list(range(proc.witness_qubits, n))
    inv = proc.inverse_circuit()
    gates: list = []
    for j, rec in enumerate(records, start=1):
        if j % 2:
            gates.extend(proc.circuit)
            gates.append(simcore.pauli_x(rec, controls=(proc.accept_qubit,),
                                         control_values=(proc.accept_value,)))
            gates.extend(inv)
        elif anc:
            gates.append(simcore.classical_function(anc, rec, lambda v: v == 0, label="valid-input"))
        else:
            gates.append(simcore.pauli_x(rec))
    need = math.ceil(tau * rounds)

    def agreements(v: int) -> bool:
        prev, count = 1, 0
        for j in range(rounds):
            y = (v >> j) & 1
            count += y == prev
            prev = y
        return count >= need

    gates.append(simcore.classical_function(records, out, agreements, label="agreement-count"))
    return VerificationProcedure(proc.witness_qubits, proc.ancilla_qubits + rounds + 1, tuple(gates),
                                 accept_qubit=out, x=proc.x, name=f"{proc.name}+amplify")


def choose_rounds(a, b, r: int, max_rounds: int = DEFAULT_MAX_ROUNDS) -> BinomialTail:
    """Smallest N (threshold at the midpoint) with f(a) >= 1-2^-r and f(b) <= 2^-r."""
    tau = (Fraction(a).limit_denominator(10 ** 12) + Fraction(b).limit_denominator(10 ** 12)) / 2
    eps = 2.0 ** (-r)
    for n in range(1, max_rounds + 1):
        f = BinomialTail(n, tau)
        if f(float(a)) >= 1 - eps and f(float(b)) <= eps:
            return f
    raise Infeasible(f"no round count up to {max_rounds} reaches error 2^-{r}")


def retarget_bounds(proc: VerificationProcedure, a, b, a_prime, b_prime, r: int,
                    max_rounds: int = DEFAULT_MAX_ROUNDS, always_amplify: bool = False
                    ) -> StrongReductionClaim:
    """Reduction sending acceptance value a to a' and b to b'.

    When ``a >= a' > b' >= b`` a single deamplification suffices (unless
    ``always_amplify``); otherwise the procedure is first amplified so that
    f1(a) >= 1-2^-r and f1(b) <= 2^-r, then deamplified.
    """
    a, b, ap, bp = (float(v) for v in (a, b, a_prime, b_prime))
    if not (0 <= b < a <= 1 and 0 <= bp < ap <= 1):
        raise InvalidInput("need 0 <= b < a <= 1 and 0 <= b' < a' <= 1")
    if a >= ap > bp >= b and not always_amplify:
        z, zp = solve_deamplification(a, b, ap, bp)
        return StrongReductionClaim(proc, deamplify(proc, z, zp), Affine(z, zp))
    eps = 2.0 ** (-r)
    if not (ap < 1 - eps and bp > eps):
        raise Infeasible(f"targets must satisfy a' < 1-2^-r and b' > 2^-r (r={r})")
    f1 = choose_rounds(a, b, r, max_rounds)
    amp = amplify(proc, f1.rounds, f1.tau, max_rounds)
    z, zp = solve_deamplification(f1(a), f1(b), ap, bp)
    return StrongReductionClaim(proc, deamplify(amp, z, zp), compose(f1, Affine(z, zp)))


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class EigenspaceCheck:
    p: float
    f_p: float
    target_p: float | None
    multiplicity: int
    distance: float


@dataclass(frozen=True, eq=False)
class ReductionReport:
    passed: bool
    checks: tuple[EigenspaceCheck, ...]
    monotone: bool
    message: str = ""
    source_spectrum: SpectrumReport | None = field(default=None, repr=False)
    target_spectrum: SpectrumReport | None = field(default=None, repr=False)


def verify_strong_reduction(claim: StrongReductionClaim, cap: int = DEFAULT_CAP) -> ReductionReport:
    """Check that each source eigenspace sits inside the target eigenspace of value f(p)."""
    s_src = spectrum(claim.source, cap=cap)
    s_tgt = spectrum(claim.target, cap=cap)
    checks = []
    ok, msg = True, ""
    for e in s_src.entries:
        fp = float(claim.f(e.p))
        match = s_tgt.entry_near(fp, tol=max(CLUSTER_TOL, 1e-9))
        if match is None:
            checks.append(EigenspaceCheck(e.p, fp, None, e.multiplicity, float("inf")))
            ok, msg = False, msg or f"no target eigenspace at f({e.p:.12g}) = {fp:.12g}"
            continue
        resid = e.basis - match.basis @ (match.basis.conj().T @ e.basis)
        dist = float(np.linalg.norm(resid))
        checks.append(EigenspaceCheck(e.p, fp, match.p, e.multiplicity, dist))
        if dist >= EIGENSPACE_TOL:
            ok, msg = False, msg or f"eigenspace at p={e.p:.12g} is not preserved (distance {dist:.3g})"
    fvals = [c.f_p for c in checks]
    monotone = claim.f.strictly_increasing() and all(y > x for x, y in zip(fvals, fvals[1:]))
    if not monotone:
        ok, msg = False, msg or "f is not strictly increasing on observed values"
    return ReductionReport(ok, tuple(checks), monotone, msg, s_src, s_tgt)
