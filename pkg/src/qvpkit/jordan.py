"""Two-projector decomposition and the acceptance spectrum of a procedure.

Given the valid-input projector P0 (ancillas zero) and the accepting
projector P1 = V^dagger P_acc V, the space splits into one- and
two-dimensional subspaces invariant under both. On a two-dimensional block
the reflection product (2 P1 - I)(2 P0 - I) rotates by twice the angle
between the blocks' P0 and P1 lines, so its eigenvalues are exp(+-2i theta)
and the acceptance probability of the block's valid vector is cos^2 theta.

:func:`spectrum` does not decompose the full ``2**(m+k)`` space. It works in
the span of range(P0) and P1 range(P0), which has dimension at most
``2**(m+1)`` and is invariant under both projectors, so only the blocks that
meet range(P0) are ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import simcore
from .errors import CrossCheckFailure, InvalidInput
from .qvp import DEFAULT_CAP, VerificationProcedure, acceptance_operator, check_cap, final_states
from .simcore import StateVector

CLUSTER_TOL = 1e-8
BLOCK_TOL = 1e-8
PROJECTOR_TOL = 1e-9
EIGENSPACE_TOL = 1e-7
# Eigenvalue angles closer than this to 0 or pi are treated as exact +-1.
ANGLE_TOL = 1e-9
RANK_TOL = 1e-10

ONE_DIM = "one-dim"
TWO_DIM = "two-dim"


@dataclass(frozen=True, eq=False)
class JordanBlock:
    """An invariant subspace of both projectors.

    One-dimensional blocks hold ``vector`` with labels ``b`` (eigenvalue of P0)
    and ``c`` (eigenvalue of P1). Two-dimensional blocks hold the P0 pair
    ``(w, w_perp)``, the P1 pair ``(v, v_perp)``, the angle ``theta`` and
    ``p = |<v|w>|^2 = cos^2 theta``.
    """

    kind: str
    vector: np.ndarray | None = field(default=None, repr=False)
    b: int | None = None
    c: int | None = None
    w: np.ndarray | None = field(default=None, repr=False)
    w_perp: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)
    v_perp: np.ndarray | None = field(default=None, repr=False)
    theta: float | None = None
    p: float | None = None

    @property
    def dimension(self) -> int:
        return 1 if self.kind == ONE_DIM else 2

    def vectors(self) -> list[np.ndarray]:
        return [self.vector] if self.kind == ONE_DIM else [self.w, self.w_perp]

    def check(self, pi0: np.ndarray, pi1: np.ndarray, tol: float = BLOCK_TOL) -> None:
        """Raise if the block violates its defining relations."""

        def close(x, y):
            return np.linalg.norm(x - y) < tol

        if self.kind == ONE_DIM:
            u = self.vector
            ok = close(pi0 @ u, self.b * u) and close(pi1 @ u, self.c * u)
        else:
            ok = (close(pi0 @ self.w, self.w) and close(pi0 @ self.w_perp, 0 * self.w)
                  and close(pi1 @ self.v, self.v) and close(pi1 @ self.v_perp, 0 * self.v)
                  and abs(abs(np.vdot(self.v, self.w)) ** 2 - self.p) < tol
                  and abs(np.cos(self.theta) ** 2 - self.p) < tol)
        if not ok:
            raise CrossCheckFailure(f"{self.kind} block fails its invariance relations")


@dataclass(frozen=True, eq=False)
class SpectrumEntry:
    p: float
    multiplicity: int
    basis: np.ndarray = field(repr=False)

    def states(self) -> list[StateVector]:
        m = int(self.basis.shape[0]).bit_length() - 1
        return [StateVector(m, c) for c in self.basis.T]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Clustered acceptance spectrum with an orthonormal basis per eigenspace."""

    entries: tuple[SpectrumEntry, ...]
    source: str
    witness_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        dim = 1 << self.witness_qubits
        if sum(e.multiplicity for e in self.entries) != dim:
            raise CrossCheckFailure("eigenspace multiplicities do not sum to the witness dimension")
        ps = [e.p for e in self.entries]
        if any(q - p <= CLUSTER_TOL for p, q in zip(ps, ps[1:])):
            raise CrossCheckFailure("spectrum entries are not sorted and separated")
        full = self.eigenbasis()
        if np.max(np.abs(full.conj().T @ full - np.eye(dim))) > BLOCK_TOL:
            raise CrossCheckFailure("eigenbasis is not orthonormal")

    def values(self) -> list[float]:
        return [e.p for e in self.entries]

    def multiplicities(self) -> list[int]:
        return [e.multiplicity for e in self.entries]

    def eigenbasis(self) -> np.ndarray:
        return np.hstack([e.basis for e in self.entries])

    def eigenvalues(self) -> np.ndarray:
        """Acceptance value of each column of :meth:`eigenbasis`."""
        return np.concatenate([[e.p] * e.multiplicity for e in self.entries])

    def entry_near(self, p: float, tol: float = CLUSTER_TOL) -> SpectrumEntry | None:
        for e in self.entries:
            if abs(e.p - p) <= tol:
                return e
        return None


# ---------------------------------------------------------------------------
# Helpers


def _check_projector(p: np.ndarray, name: str) -> None:
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidInput(f"{name} is not square")
    if np.max(np.abs(p - p.conj().T), initial=0) > PROJECTOR_TOL:
        raise InvalidInput(f"{name} is not Hermitian")
    if np.max(np.abs(p @ p - p), initial=0) > PROJECTOR_TOL:
        raise InvalidInput(f"{name} is not idempotent")


def cluster_values(values: Sequence[float], tol: float = CLUSTER_TOL) -> list[np.ndarray]:
    """Group indices whose sorted values are chained within ``tol``."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return [np.array(g) for g in groups]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-8)
    if nz.size == 0:
        return v
    a = v[nz[0]]
    return v * (abs(a) / a)


def canonical_basis(cols: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of orthonormal ``cols``.

    Gram-Schmidt over the columns of the subspace projector in index order,
    preferring well-conditioned columns; each vector's first non-negligible
    amplitude is made real and positive.
    """
    rank = cols.shape[1]
    if rank == 0:
        return cols
    proj = cols @ cols.conj().T
    d = proj.shape[0]
    q = np.zeros((d, rank), dtype=complex)
    count = 0
    used = np.zeros(d, dtype=bool)
    for thresh in (0.1, 1e-3, 1e-6):
        for i in range(d):
            if count == rank:
                break
            if used[i]:
                continue
            r = proj[:, i].copy()
            for _ in range(2):
                r -= q[:, :count] @ (q[:, :count].conj().T @ r)
            nr = np.linalg.norm(r)
            if nr > thresh:
                q[:, count] = r / nr
                count += 1
                used[i] = True
        if count == rank:
            break
    if count != rank:
        raise CrossCheckFailure("could not build a canonical eigenspace basis")
    chosen = q.T
    return np.column_stack([_fix_phase(q) for q in chosen])


def _entries_from_pairs(ps: np.ndarray, vecs: np.ndarray) -> list[SpectrumEntry]:
    out = []
    for g in cluster_values(ps):
        basis = canonical_basis(vecs[:, g])
        out.append(SpectrumEntry(float(np.mean(ps[g])), len(g), basis))
    return out


# ---------------------------------------------------------------------------
# Decomposition


def jordan_decompose(pi0: np.ndarray, pi1: np.ndarray) -> list[JordanBlock]:
    """Split the space into blocks invariant under two projectors."""
    pi0 = np.asarray(pi0, dtype=complex)
    pi1 = np.asarray(pi1, dtype=complex)
    if pi0.shape != pi1.shape:
        raise InvalidInput("projectors have different dimensions")
    _check_projector(pi0, "pi0")
    _check_projector(pi1, "pi1")
    d = pi0.shape[0]
    eye = np.eye(d)
    f = (2 * pi1 - eye) @ (2 * pi0 - eye)
    t, z = scipy.linalg.schur(f, output="complex")
    angles = np.angle(np.diagonal(t))
    blocks: list[JordanBlock] = []

    plus = np.abs(angles) <= ANGLE_TOL
    minus = np.abs(angles) >= np.pi - ANGLE_TOL
    upper = ~plus & ~minus & (angles > 0)
    lower = ~plus & ~minus & (angles < 0)
    if upper.sum() != lower.sum():
        raise CrossCheckFailure("rotation eigenvalues do not come in conjugate pairs")

    for sel, sign in ((plus, 1), (minus, -1)):
        zs = z[:, sel]
        if zs.shape[1] == 0:
            continue
        labels, vecs = np.linalg.eigh(zs.conj().T @ pi0 @ zs)
        for lab, y in zip(labels, vecs.T):
            b = int(round(lab))
            if abs(lab - b) > BLOCK_TOL:
                raise CrossCheckFailure("valid-input projector is not diagonal on a reflection eigenspace")
            c = b if sign == 1 else 1 - b
            blocks.append(JordanBlock(ONE_DIM, vector=zs @ y, b=b, c=c))

    if upper.any():
        idx = np.flatnonzero(upper)
        for g in cluster_values(angles[idx], tol=1e-7):
            u = z[:, idx[g]]
            wq, _ = np.linalg.qr(pi0 @ u)
            for w in wq.T:
                t1 = pi1 @ w
                p = float(np.vdot(t1, t1).real)
                v = t1 / np.sqrt(p)
                vp = w - t1
                vp /= np.linalg.norm(vp)
                wp = t1 - pi0 @ t1
                wp /= np.linalg.norm(wp)
                blocks.append(JordanBlock(TWO_DIM, w=w, w_perp=wp, v=v, v_perp=vp,
                                          theta=float(np.arccos(np.sqrt(min(1.0, p)))), p=p))
            alpha = float(np.mean(angles[idx[g]]))
            for blk in blocks[-len(g):]:
                if abs(np.cos(alpha / 2) ** 2 - blk.p) > BLOCK_TOL:
                    raise CrossCheckFailure("block overlap disagrees with rotation angle")

    if sum(b.dimension for b in blocks) != d:
        raise CrossCheckFailure("block dimensions do not exhaust the space")
    for blk in blocks:
        blk.check(pi0, pi1)
    return blocks


def _orth(cols: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, s > tol]


def reduced_projectors(proc: VerificationProcedure, cap: int = DEFAULT_CAP):
    """Both projectors restricted to span(range P0, P1 range P0).

    Returns ``(pi0_k, pi1_k, dm)``; the first ``dm`` coordinates of the reduced
    space are the valid inputs ``|j>|0^k>`` in witness-index order.
    """
    check_cap(proc, cap)
    dm = proc.witness_dim
    n = proc.num_qubits
    mask = proc.accept_mask()
    forward = final_states(proc, np.eye(dm, dtype=complex))
    forward[~mask] = 0
    back = simcore.run_circuit(forward, n, proc.inverse_circuit())  # P1 E0
    extra = back.copy()
    extra[:dm] = 0
    q = _orth(extra)
    img_q = simcore.run_circuit(q, n, proc.circuit) if q.shape[1] else q
    img_q = img_q.copy()
    img_q[~mask] = 0
    m = np.hstack([forward[mask], img_q[mask]])
    pi1 = m.conj().T @ m
    pi1 = 0.5 * (pi1 + pi1.conj().T)
    pi0 = np.zeros_like(pi1)
    pi0[np.arange(dm), np.arange(dm)] = 1
    return pi0, pi1, dm


def spectrum(proc: VerificationProcedure, cap: int = DEFAULT_CAP) -> SpectrumReport:
    """Acceptance spectrum and eigenspaces from the block decomposition."""
    pi0, pi1, dm = reduced_projectors(proc, cap)
    blocks = jordan_decompose(pi0, pi1)
    ps, vecs = [], []
    for blk in blocks:
        if blk.kind == ONE_DIM and blk.b == 1:
            ps.append(float(blk.c))
            vecs.append(blk.vector[:dm])
        elif blk.kind == TWO_DIM:
            ps.append(blk.p)
            vecs.append(blk.w[:dm])
    if len(ps) != dm:
        raise CrossCheckFailure("blocks inside the valid-input space do not span it")
    mat = np.column_stack(vecs)
    return SpectrumReport(tuple(_entries_from_pairs(np.array(ps), mat)), "jordan", proc.witness_qubits)


def direct_spectrum(proc: VerificationProcedure, cap: int = DEFAULT_CAP) -> SpectrumReport:
    """Spectrum from a Hermitian eigendecomposition of the acceptance operator."""
    vals, vecs = acceptance_operator(proc, cap).eigh()
    return SpectrumReport(tuple(_entries_from_pairs(vals, vecs)), "direct", proc.witness_qubits)


def certify_binary_spectrum(proc: VerificationProcedure, basis: np.ndarray,
                            tol: float = 1e-9) -> SpectrumReport:
    """Exact {0, 1} spectrum from a candidate orthonormal eigenbasis.

    If every column of ``basis`` accepts with probability within ``tol`` of 0
    or 1, the acceptance operator A (0 <= A <= I) is diagonal in that basis:
    a zero diagonal entry of a positive operator kills its row, and likewise
    for I - A. This needs one simulation per column but no dense assembly,
    so it reaches registers beyond the dense cap.
    """
    from .qvp import acceptance_probabilities

    basis = np.asarray(basis, dtype=complex)
    dm = proc.witness_dim
    if basis.shape != (dm, dm):
        raise InvalidInput("candidate basis must be square over the witness space")
    if np.max(np.abs(basis.conj().T @ basis - np.eye(dm))) > BLOCK_TOL:
        raise InvalidInput("candidate basis is not orthonormal")
    probs = acceptance_probabilities(proc, basis)
    labels = np.round(probs)
    if np.max(np.abs(probs - labels)) > tol:
        raise CrossCheckFailure("candidate basis vectors do not accept with probability 0 or 1")
    return SpectrumReport(tuple(_entries_from_pairs(labels, basis)), "certified", proc.witness_qubits)


def projector_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between the projectors onto two column spans."""
    return float(np.linalg.norm(a @ a.conj().T - b @ b.conj().T))


@dataclass(frozen=True, eq=False)
class CrosscheckReport:
    passed: bool
    jordan: SpectrumReport
    direct: SpectrumReport
    value_differences: tuple[float, ...]
    distances: tuple[float, ...]
    message: str = ""


def compare_spectra(s1: SpectrumReport, s2: SpectrumReport) -> tuple[bool, list[float], list[float], str]:
    if len(s1.entries) != len(s2.entries):
        return False, [], [], f"cluster counts differ: {len(s1.entries)} vs {len(s2.entries)}"
    dv, dist = [], []
    ok, msg = True, ""
    for e1, e2 in zip(s1.entries, s2.entries):
        dv.append(abs(e1.p - e2.p))
        if e1.multiplicity != e2.multiplicity:
            ok, msg = False, f"multiplicity differs at p={e1.p:.12g}"
            dist.append(float("inf"))
            continue
        dist.append(projector_distance(e1.basis, e2.basis))
    if ok and max(dv, default=0) > CLUSTER_TOL:
        ok, msg = False, "eigenvalues differ beyond tolerance"
    if ok and max(dist, default=0) >= EIGENSPACE_TOL:
        ok, msg = False, "eigenspaces differ beyond tolerance"
    return ok, dv, dist, msg


def crosscheck_uniqueness(proc: VerificationProcedure, cap: int = DEFAULT_CAP,
                          raise_on_mismatch: bool = True) -> CrosscheckReport:
    """Compare the block-decomposition spectrum with the direct one."""
    sj = spectrum(proc, cap)
    sd = direct_spectrum(proc, cap)
    ok, dv, dist, msg = compare_spectra(sj, sd)
    report = CrosscheckReport(ok, sj, sd, tuple(dv), tuple(dist), msg)
    if not ok and raise_on_mismatch:
        raise CrossCheckFailure(msg)
    return report
