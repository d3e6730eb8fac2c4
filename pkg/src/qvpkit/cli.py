"""Command-line interface: ``qvpkit {spectrum,verify,reduce,grover,gnm}``.

Exit codes: 0 success, 2 invalid input, 3 size cap or infeasible parameters,
4 failed internal cross-check. Reports go to ``--out`` (written atomically)
or to standard output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import jordan, qvp, reductions
from .errors import CrossCheckFailure, Infeasible, InvalidInput, QVPError, SizeCapExceeded
from .instances import BUILTINS, LoadedInstance, load_instance
from .problems import groups, hamiltonians, marked, oracles
from .reports import Report, sparse_state

CAP_ENV = "QVPKIT_CAP"
COMMANDS = ("spectrum", "verify", "reduce", "grover", "gnm")
EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_CHECK = 0, 2, 3, 4
GNM_REPETITIONS = (1, 2, 4, 8)


@dataclass(frozen=True)
class RunConfig:
    command: str
    instance: str | None = None
    seed: int = 0
    bits: int | None = None
    a: Fraction | None = None
    b: Fraction | None = None
    out: str | None = None
    cap: int = qvp.DEFAULT_CAP
    z: float | None = None
    z_prime: float | None = None
    rounds: int | None = None
    tau: Fraction | None = None
    a_target: Fraction | None = None
    b_target: Fraction | None = None
    r: int = 3
    n: int | None = None
    basis_mark: bool = False
    trials: int = 200

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.cap <= 0:
            raise InvalidInput("--cap must be positive")
        if self.seed < 0:
            raise InvalidInput("--seed must be non-negative")
        if self.a is not None and self.b is not None and not self.a > self.b:
            raise InvalidInput(f"--a ({self.a}) must exceed --b ({self.b})")
        if self.a_target is not None and self.b_target is not None and not self.a_target > self.b_target:
            raise InvalidInput(f"--a2 ({self.a_target}) must exceed --b2 ({self.b_target})")
        if self.bits is not None and self.bits < 1:
            raise InvalidInput("--bits must be positive")
        if self.trials < 1:
            raise InvalidInput("--trials must be positive")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return qvp.DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise InvalidInput(f"environment variable {CAP_ENV} must be an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qvpkit", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance file or builtin:NAME (" + ", ".join(BUILTINS) + ")")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bits", type=int, help="phase-estimation precision for qlll instances")
    common.add_argument("--a", type=_rational, help="completeness bound")
    common.add_argument("--b", type=_rational, help="soundness bound")
    common.add_argument("--out", help="report path (default: standard output)")
    common.add_argument("--cap", type=int, help=f"qubit cap for dense analysis (env {CAP_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="clustered spectrum with uniqueness cross-check")
    sub.add_parser("verify", parents=[common], help="totality, gap and family contracts")
    red = sub.add_parser("reduce", parents=[common], help="build and verify a strong reduction")
    red.add_argument("--z", type=float, help="deamplification: acceptance weight when accepted")
    red.add_argument("--zp", type=float, help="deamplification: acceptance weight when rejected")
    red.add_argument("--rounds", type=int, help="amplification rounds N")
    red.add_argument("--tau", type=_rational, help="amplification threshold fraction")
    red.add_argument("--a2", type=_rational, help="retarget: new completeness bound")
    red.add_argument("--b2", type=_rational, help="retarget: new soundness bound")
    red.add_argument("--r", type=int, default=3, help="retarget: amplification error exponent")
    gro = sub.add_parser("grover", parents=[common], help="Grover search against a marked-state oracle")
    gro.add_argument("--n", type=int, required=True)
    gro.add_argument("--basis-mark", action="store_true", help="mark a computational basis state")
    gro.add_argument("--trials", type=int, default=200, help="classical baseline trials")
    sub.add_parser("gnm", parents=[common], help="group non-membership contracts")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cap = args.cap if args.cap is not None else default_cap()
    return RunConfig(
        command=args.command, instance=args.instance, seed=args.seed, bits=args.bits, a=args.a, b=args.b,
        out=args.out, cap=cap, z=getattr(args, "z", None), z_prime=getattr(args, "zp", None),
        rounds=getattr(args, "rounds", None), tau=getattr(args, "tau", None),
        a_target=getattr(args, "a2", None), b_target=getattr(args, "b2", None), r=getattr(args, "r", 3),
        n=getattr(args, "n", None), basis_mark=getattr(args, "basis_mark", False),
        trials=getattr(args, "trials", 200),
    )


# ---------------------------------------------------------------------------
# Shared report pieces


def _require_instance(config: RunConfig) -> LoadedInstance:
    if not config.instance:
        raise InvalidInput("--instance is required for this command")
    return load_instance(config.instance, precision_bits=config.bits)


def _describe(report: Report, inst: LoadedInstance) -> None:
    p = inst.procedure
    report.add("instance", name=inst.name, problem=inst.problem, witness_qubits=p.witness_qubits,
               ancilla_qubits=p.ancilla_qubits, gates=len(p.circuit))


def _add_spectrum(report: Report, spec: jordan.SpectrumReport, label: str = "spectrum") -> None:
    for e in spec.entries:
        report.add("eigenspace", spectrum=label, p=e.p, multiplicity=e.multiplicity)


def _queries(report: Report, inst: LoadedInstance) -> None:
    if inst.oracle is not None:
        report.add("queries", oracle=inst.oracle.kind, count=inst.oracle.query_count)


# ---------------------------------------------------------------------------
# Commands


def cmd_spectrum(config: RunConfig) -> Report:
    inst = _require_instance(config)
    report = Report("spectrum", config.seed)
    _describe(report, inst)
    check = jordan.crosscheck_uniqueness(inst.procedure, cap=config.cap)
    _add_spectrum(report, check.jordan)
    report.add("crosscheck", passed=check.passed, value_differences=list(check.value_differences),
               projector_distances=list(check.distances))
    _queries(report, inst)
    return report


def _witness_kind(inst: LoadedInstance, vec: np.ndarray) -> str | None:
    if inst.problem != "qsat":
        return None
    flag_one = float(np.sum(np.abs(vec[1::2]) ** 2))
    return "antisymmetric-collision" if flag_one > 0.5 else "frustration-free"


def _family_contracts(report: Report, inst: LoadedInstance, spec: jordan.SpectrumReport) -> bool:
    h = inst.hamiltonian
    top = spec.entry_near(1.0, tol=qvp.TOL_EQ)
    accepting = top.projector() if top is not None else np.zeros((inst.procedure.witness_dim,) * 2)
    ok = True
    if inst.problem == "qsat":
        dist = float(np.linalg.norm(accepting - hamiltonians.qsat_accepting_projector(h)))
        ok = dist < jordan.EIGENSPACE_TOL
        report.add("contract", name="accepting-projector-matches-construction", passed=ok, distance=dist)
    elif inst.problem == "almost_degenerate":
        ref = hamiltonians.almost_degenerate_accepting_projector(h)
        dist = float(np.linalg.norm(accepting - ref))
        ok = dist < jordan.EIGENSPACE_TOL
        report.add("contract", name="accepting-projector-matches-brute-force", passed=ok, distance=dist)
    elif inst.problem == "multicopy":
        expected = hamiltonians.multicopy_accepting_multiplicity(h, inst.extra["copies"])
        got = top.multiplicity if top is not None else 0
        ok = got == expected
        report.add("contract", name="accepting-multiplicity", passed=ok, expected=expected, observed=got)
    return ok


def cmd_verify(config: RunConfig) -> Report:
    inst = _require_instance(config)
    a = config.a if config.a is not None else Fraction(1)
    b = config.b if config.b is not None else Fraction(0)
    bounds = qvp.BoundsPair(a, b)
    report = Report("verify", config.seed)
    _describe(report, inst)
    spec = jordan.spectrum(inst.procedure, cap=config.cap)
    _add_spectrum(report, spec)
    total = qvp.check_total(inst.procedure, float(a), cap=config.cap)
    best = spec.entries[-1]
    witness = best.basis[:, 0]
    report.add("totality", bound=a, total=total.total, max_probability=total.max_probability,
               witness=sparse_state(witness), witness_kind=_witness_kind(inst, witness))
    report.add("gap", a=a, b=b, gapped=qvp.gapped_values(spec.values(), bounds))
    hi = qvp.subspace_relations(spec, float(a), qvp.GEQ)
    lo = qvp.subspace_relations(spec, float(b), qvp.LEQ)
    report.add("relations", dim_geq_a=hi.dimension, dim_leq_b=lo.dimension)
    passed = _family_contracts(report, inst, spec) if inst.hamiltonian is not None else True
    _queries(report, inst)
    if not passed:
        report.add("summary", passed=False)
        raise _ReportedFailure(report, "family contract check failed")
    report.add("summary", passed=True)
    return report


def _reduction_claim(config: RunConfig, proc: qvp.VerificationProcedure) -> reductions.StrongReductionClaim:
    if config.z is not None or config.z_prime is not None:
        if config.z is None or config.z_prime is None:
            raise InvalidInput("deamplification needs both --z and --zp")
        target = reductions.deamplify(proc, config.z, config.z_prime)
        return reductions.StrongReductionClaim(proc, target, reductions.Affine(config.z, config.z_prime))
    if config.rounds is not None or config.tau is not None:
        tau = config.tau if config.tau is not None else Fraction(1, 2)
        if config.rounds is None:
            raise InvalidInput("amplification needs --rounds")
        f = reductions.BinomialTail(config.rounds, tau)
        return reductions.StrongReductionClaim(proc, reductions.amplify(proc, config.rounds, tau), f)
    if None not in (config.a, config.b, config.a_target, config.b_target):
        return reductions.retarget_bounds(proc, config.a, config.b, config.a_target, config.b_target, config.r)
    raise InvalidInput("reduce needs --z/--zp, --rounds/--tau, or --a/--b/--a2/--b2")


def cmd_reduce(config: RunConfig) -> Report:
    inst = _require_instance(config)
    report = Report("reduce", config.seed)
    _describe(report, inst)
    claim = _reduction_claim(config, inst.procedure)
    report.add("map", f=claim.f.describe(), target_ancilla_qubits=claim.target.ancilla_qubits)
    result = reductions.verify_strong_reduction(claim, cap=config.cap)
    _add_spectrum(report, result.source_spectrum, "source")
    _add_spectrum(report, result.target_spectrum, "target")
    for c in result.checks:
        report.add("reduction_check", p=c.p, f_p=c.f_p, target_p=c.target_p, multiplicity=c.multiplicity,
                   distance=c.distance)
    report.add("summary", passed=result.passed, monotone=result.monotone, message=result.message)
    if not result.passed:
        raise _ReportedFailure(report, result.message)
    return report


def cmd_grover(config: RunConfig) -> Report:
    if config.n is None:
        raise InvalidInput("--n is required")
    oracle = oracles.marked_state_oracle(config.seed, config.n, basis_state=config.basis_mark)
    if config.n + 1 > config.cap:
        raise SizeCapExceeded(f"marked-state procedure needs {config.n + 1} qubits, cap is {config.cap}")
    report = Report("grover", config.seed)
    proc = marked.build_marked_state_procedure(oracle)
    state, used = marked.grover_search(oracle)
    success = qvp.acceptance_probability(proc, state)
    report.add("grover", n=config.n, basis_mark=config.basis_mark, iterations=marked.grover_iterations(config.n),
               queries=used, budget=marked.query_budget(config.n), success=success,
               closed_form_uniform_overlap=marked.grover_success_closed_form(config.n, used))
    base = marked.classical_baseline(oracle, trials=config.trials, seed=config.seed)
    report.add("classical_baseline", probes=base.probes, trials=base.trials, mean_success=base.mean_success,
               max_success=base.max_success, queries=base.queries)
    spec = jordan.spectrum(proc, cap=config.cap)
    _add_spectrum(report, spec)
    report.add("queries", oracle=oracle.kind, count=oracle.query_count)
    return report


def cmd_gnm(config: RunConfig) -> Report:
    inst = _require_instance(config)
    if inst.problem != "gnm":
        raise InvalidInput("gnm needs an instance with problem 'gnm'")
    gnm: groups.GNMProcedure = inst.extra["gnm"]
    oracle = inst.oracle
    report = Report("gnm", config.seed)
    _describe(report, inst)
    h_labels = groups.subgroup_labels(oracle)
    member = oracle.target_label in h_labels
    report.add("group", label_bits=oracle.n, subgroup_order=len(h_labels), target_in_subgroup=member)
    simulate = gnm.procedure.num_qubits <= config.cap
    cert = groups.find_certificate(oracle, gnm.layout.certificate_length)
    if cert is not None:
        acc = (qvp.acceptance_probabilities(gnm.procedure, gnm.certificate_witness(cert)[:, None])[0]
               if simulate else None)
        report.add("certificate", word=list(cert), acceptance=acc)
    psi_h = groups.uniform_label_state(oracle.n, h_labels)
    branch = float(groups.quantum_branch_acceptance(gnm, psi_h)[0])
    circuit = (float(qvp.acceptance_probabilities(gnm.procedure, gnm.quantum_witness(psi_h)[:, None])[0])
               if simulate else None)
    report.add("subgroup_state", acceptance=branch, circuit_acceptance=circuit)
    for t in GNM_REPETITIONS:
        g = groups.build_gnm_procedure(oracle, gnm.layout.certificate_length, t, seed=config.seed)
        report.add("decay", repetitions=t, max_flag_one_acceptance=groups.max_quantum_branch_acceptance(g))
    report.add("queries", oracle=oracle.kind, count=oracle.query_count)
    return report


COMMAND_FUNCTIONS = {"spectrum": cmd_spectrum, "verify": cmd_verify, "reduce": cmd_reduce,
                     "grover": cmd_grover, "gnm": cmd_gnm}


class _ReportedFailure(CrossCheckFailure):
    """A failed check whose partial report should still be written."""

    def __init__(self, report: Report, message: str):
        super().__init__(message)
        self.report = report


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, CrossCheckFailure):
        return EXIT_CHECK
    if isinstance(exc, (SizeCapExceeded, Infeasible)):
        return EXIT_RESOURCE
    return EXIT_INPUT


def run(config: RunConfig) -> Report:
    return COMMAND_FUNCTIONS[config.command](config)


def _emit(report: Report, config: RunConfig) -> None:
    if config.out:
        report.write(config.out)
    else:
        sys.stdout.write(report.to_text())


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
    except _ReportedFailure as exc:
        _emit(exc.report, config)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except QVPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    _emit(report, config)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
