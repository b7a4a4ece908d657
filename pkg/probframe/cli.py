"""Command-line surface: simulate, verify-set, convert and bench.

Circuit files hold one statement per line; ``#`` starts a comment::

    qubits 2
    h 0
    cnot 0 1
    rz 1 0.25
    depol 0 0.1

Qubits are numbered from 0 and angles are in radians.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import platform
import re
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy
from pydantic import ValidationError

from probframe.errors import (
    GuardExceeded,
    ParseError,
    ProbFrameError,
    RangeError,
    SearchBudgetExceeded,
    UnphysicalTensor,
)
from probframe.frame import classify
from probframe.gates import CHANNELS, GATES
from probframe.matcore import validate_density
from probframe.models import (
    BenchEntry,
    BenchReport,
    ClassificationReport,
    ConversionReport,
    PTMFile,
    ErrorReport,
    QubitMarginal,
    SetFile,
    SimulationReport,
    StateFile,
    write_document,
)
from probframe.observability import setup_observability, tracer, tracing_requested
from probframe.oracle import CircuitIR, Step, fresh_seed, random_circuit, simulate_density
from probframe.qubitframe import (
    AXIS_NAMES,
    MAX_PAULI_QUBITS,
    PauliParameterTensor,
    marginals,
    p_from_tilde,
    rho_from_tilde,
    tilde_from_p,
    tilde_from_rho,
)
from probframe.settings import Tolerances, load_tolerances
from probframe.transfer import apply_local, circuit_ptm, embed_ptm, ground_tensor, simulate_ptm, step_ptm

logger = logging.getLogger(__name__)

MAX_DENSITY_QUBITS = 10
MAX_REPORTED_PROBABILITY_QUBITS = 4
MAX_BENCH_QUBITS = 6
MAX_PTM_EXPORT_QUBITS = 6
_TOKEN = re.compile(r"\S+")


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    return [(match.group(), match.start() + 1) for match in _TOKEN.finditer(line)]


def _integer(token: str, lineno: int, column: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(lineno, column, f"expected an integer, got {token!r}") from None


def _real(token: str, lineno: int, column: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(lineno, column, f"expected a number, got {token!r}") from None
    if not math.isfinite(value):
        raise RangeError(lineno, column, f"parameter {token!r} is not finite")
    return value


def parse_circuit(text: str) -> CircuitIR:
    qubits: int | None = None
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokens(raw.split("#", 1)[0])
        if not tokens:
            continue
        (keyword, column), args = tokens[0], tokens[1:]
        keyword = keyword.lower()

        if keyword == "qubits":
            if qubits is not None:
                raise ParseError(lineno, column, "qubit count declared twice")
            if len(args) != 1:
                raise ParseError(lineno, column, "expected 'qubits <m>'")
            qubits = _integer(args[0][0], lineno, args[0][1])
            if qubits < 1:
                raise RangeError(lineno, args[0][1], f"qubit count must be at least 1, got {qubits}")
            continue

        if qubits is None:
            raise ParseError(lineno, column, "the first statement must be 'qubits <m>'")

        if keyword in GATES:
            kind, arity, count = "gate", GATES[keyword].arity, GATES[keyword].params
        elif keyword in CHANNELS:
            kind, arity, count = "channel", CHANNELS[keyword].arity, 1
        else:
            raise ParseError(lineno, column, f"unknown statement {keyword!r}")

        if len(args) != arity + count:
            end = args[-1][1] + len(args[-1][0]) if args else column + len(keyword)
            raise ParseError(lineno, end, f"{keyword!r} takes {arity} qubit(s) and {count} parameter(s)")

        targets: list[int] = []
        for token, col in args[:arity]:
            q = _integer(token, lineno, col)
            if not 0 <= q < qubits:
                raise RangeError(lineno, col, f"qubit {q} outside 0..{qubits - 1}")
            if q in targets:
                raise RangeError(lineno, col, f"qubit {q} used twice in one statement")
            targets.append(q)

        params = [_real(token, lineno, col) for token, col in args[arity:]]
        if kind == "channel":
            spec = CHANNELS[keyword]
            token_column = args[arity][1]
            if not spec.low <= params[0] <= spec.high:
                raise RangeError(lineno, token_column, f"{keyword} parameter {params[0]} outside [{spec.low}, {spec.high}]")

        steps.append(Step(kind=kind, name=keyword, params=params, targets=targets))

    if qubits is None:
        raise ParseError(1, 1, "missing 'qubits <m>' statement")
    return CircuitIR(qubits=qubits, steps=steps)


def format_circuit(circuit: CircuitIR) -> str:
    """Canonical text; parse_circuit(format_circuit(c)) == c."""
    lines = [f"qubits {circuit.qubits}"]
    for step in circuit.steps:
        fields = [step.name, *(str(q) for q in step.targets), *(repr(float(x)) for x in step.params)]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def _tolerances(overrides: Sequence[str] | None) -> Tolerances:
    base = load_tolerances()
    if not overrides:
        return base
    update = {}
    for item in overrides:
        name, _, value = item.partition("=")
        if name not in Tolerances.model_fields or not value:
            raise ValueError(f"--tolerance expects FIELD=VALUE with FIELD in {sorted(Tolerances.model_fields)}")
        update[name] = float(value)
    return Tolerances(**(base.model_dump() | update))


def _load_state(path: str) -> StateFile:
    text = Path(path).read_text()
    try:
        return ConversionReport.model_validate_json(text).document
    except ValidationError:
        return StateFile.model_validate_json(text)


def _checked_pauli(document: StateFile, tol: Tolerances) -> PauliParameterTensor:
    t = document.to_pauli()
    if not t.in_physical_range(tol):
        raise UnphysicalTensor(f"Pauli parameters outside [-1, 1] in a {t.m}-qubit tensor")
    return t


def _as_pauli(document: StateFile, policy: str, tol: Tolerances) -> PauliParameterTensor:
    if document.kind == "density":
        return tilde_from_rho(validate_density(document.to_density(), tol))
    if document.kind == "pauli":
        return _checked_pauli(document, tol)
    p = document.to_probability()
    if not p.in_physical_range(tol):
        raise UnphysicalTensor(f"probabilities outside [0, 1] in a {p.m}-qubit tensor")
    return tilde_from_p(p, policy, tol)


def _marginal_rows(t: PauliParameterTensor) -> list[QubitMarginal]:
    table = marginals(t)
    return [
        QubitMarginal(
            qubit=k,
            parameters=table.parameters[k].tolist(),
            probabilities={axis: table.probabilities[k, i].tolist() for i, axis in enumerate(AXIS_NAMES)},
        )
        for k in range(t.m)
    ]


def cmd_simulate(args: argparse.Namespace, tol: Tolerances) -> int:
    circuit = parse_circuit(Path(args.circuit).read_text())
    m = circuit.qubits
    if m > MAX_PAULI_QUBITS or (args.repr != "ptm" and m > MAX_DENSITY_QUBITS):
        raise GuardExceeded(f"{m} qubits exceed the dense ceiling for representation {args.repr!r}")
    if args.ptm_out and m > MAX_PTM_EXPORT_QUBITS:
        raise GuardExceeded(f"--ptm-out writes a dense 4**m matrix up to m={MAX_PTM_EXPORT_QUBITS}, got m={m}")

    initial = _as_pauli(_load_state(args.initial), args.policy, tol) if args.initial else None
    initial_rho = None if initial is None else validate_density(rho_from_tilde(initial), tol)

    final: PauliParameterTensor
    discrepancy = None
    if args.repr in ("ptm", "both"):
        trajectory = simulate_ptm(circuit, initial)
        final = trajectory[-1]
    if args.repr in ("density", "both"):
        densities = simulate_density(circuit, initial_rho, tol)
        oracle = [tilde_from_rho(rho) for rho in densities]
        if args.repr == "density":
            final = oracle[-1]
        else:
            discrepancy = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(trajectory, oracle))
            logger.info("ptm and density trajectories differ by at most %.3e", discrepancy)

    if args.ptm_out:
        write_document(PTMFile.from_ptm(circuit_ptm(circuit)), args.ptm_out)
        logger.info("wrote circuit PTM to %s", args.ptm_out)
    report = SimulationReport(
        seed=args.seed,
        tolerances=tol,
        qubits=m,
        steps=len(circuit.steps),
        representation=args.repr,
        pauli=final.values.tolist(),
        probabilities=p_from_tilde(final).values.tolist() if m <= MAX_REPORTED_PROBABILITY_QUBITS else None,
        marginals=_marginal_rows(final),
        discrepancy=discrepancy,
    )
    _emit(write_document(report, args.out), args.out)
    return 0


def cmd_verify_set(args: argparse.Namespace, tol: Tolerances) -> int:
    pset = SetFile.model_validate_json(Path(args.set_file).read_text()).to_projector_set(tol)
    status = 0
    try:
        result = classify(pset, search_limit=args.search_limit, node_budget=args.budget, tol=tol)
    except SearchBudgetExceeded as exc:
        logger.warning("%s; reporting the partial classification", exc)
        result, status = exc.partial, 1
    report = ClassificationReport(seed=args.seed, tolerances=tol, label=pset.label, classification=result)
    _emit(write_document(report, args.out), args.out)
    return status


def cmd_convert(args: argparse.Namespace, tol: Tolerances) -> int:
    source = _load_state(args.input)
    if source.kind == "density" and args.to == "density":
        document = StateFile.from_density(validate_density(source.to_density(), tol).data)
    else:
        t = _as_pauli(source, args.policy, tol)
        if args.to == "pauli":
            document = StateFile.from_pauli(t)
        elif args.to == "probability":
            document = StateFile.from_probability(p_from_tilde(t))
        else:
            document = StateFile.from_density(rho_from_tilde(t))
    report = ConversionReport(
        seed=args.seed,
        tolerances=tol,
        source_kind=source.kind,
        target_kind=args.to,
        policy=args.policy if source.kind == "probability" else None,
        document=document,
    )
    _emit(write_document(report, args.out), args.out)
    return 0


def _qubit_range(text: str) -> list[int]:
    low, _, high = text.partition("-")
    values = list(range(int(low), int(high or low) + 1))
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError(f"invalid qubit range {text!r}")
    return values


def environment_fingerprint() -> dict[str, str]:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "cpus": str(os.cpu_count()),
    }


def bench_one(m: int, depth: int, rng: np.random.Generator) -> BenchEntry:
    """Per-gate wall time of the local contraction against the embedded 4**m x 4**m multiply.

    Both paths are compiled before timing; each is timed as one loop.
    """
    circuit = random_circuit(m, depth, rng)
    compiled = [(step_ptm(step), step.targets) for step in circuit.steps]
    embedded = [embed_ptm(ptm, targets, m).entries for ptm, targets in compiled]
    initial = ground_tensor(m)

    local = initial
    start = time.perf_counter()
    for ptm, targets in compiled:
        local = apply_local(local, ptm, targets)
    local_time = time.perf_counter() - start

    dense_values = np.array(initial.values)
    start = time.perf_counter()
    for matrix in embedded:
        dense_values = matrix @ dense_values
    dense_time = time.perf_counter() - start

    gates = max(len(compiled), 1)
    local_per_gate = local_time / gates
    dense_per_gate = dense_time / gates
    return BenchEntry(
        qubits=m,
        gates=len(compiled),
        local_seconds_per_gate=local_per_gate,
        dense_seconds_per_gate=dense_per_gate,
        speedup=dense_per_gate / local_per_gate if local_per_gate > 0 else float("inf"),
        discrepancy=float(np.max(np.abs(local.values - dense_values))),
    )


def cmd_bench(args: argparse.Namespace, tol: Tolerances) -> int:
    qubit_counts = args.qubits
    if max(qubit_counts) > MAX_BENCH_QUBITS:
        raise GuardExceeded(f"bench builds dense 4**m matrices up to m={MAX_BENCH_QUBITS}, got m={max(qubit_counts)}")
    seed = args.seed if args.seed is not None else fresh_seed()
    rng = np.random.default_rng(seed)
    results = []
    for m in qubit_counts:
        entry = bench_one(m, args.depth, rng)
        logger.info("m=%d local %.3es/gate dense %.3es/gate speedup %.1f", m, entry.local_seconds_per_gate, entry.dense_seconds_per_gate, entry.speedup)
        results.append(entry)
    report = BenchReport(seed=seed, tolerances=tol, depth=args.depth, results=results, environment=environment_fingerprint())
    _emit(write_document(report, args.out), args.out)
    return 0


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        logger.info("wrote %s", out)


def _error_details(exc: Exception) -> dict:
    details = {}
    for name in ("line", "column", "residual", "violations", "rank", "required", "deficiency", "axes", "total"):
        if hasattr(exc, name):
            details[name] = getattr(exc, name)
    if isinstance(exc, SearchBudgetExceeded) and exc.partial is not None:
        details["partial"] = exc.partial.model_dump()
    if isinstance(exc, ValidationError):
        details["errors"] = [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()]
    return details


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probframe", description="Probabilistic quantum-state frames and transfer matrices.")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress to stderr.")
    parser.add_argument("--trace", action="store_true", help="Export OpenTelemetry spans to the console.")
    parser.add_argument("--seed", type=int, default=None, help="Seed recorded in outputs and used by bench.")
    parser.add_argument(
        "--tolerance",
        action="append",
        metavar="FIELD=VALUE",
        help="Override one tolerance constant. Repeatable.",
    )
    parser.add_argument("--out", default=None, help="Write the report to this path instead of stdout.")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Run a circuit file.")
    simulate.add_argument("circuit")
    simulate.add_argument("--repr", choices=["ptm", "density", "both"], default="ptm")
    simulate.add_argument("--initial", default=None, help="State document to start from instead of |0...0>.")
    simulate.add_argument("--policy", choices=["canonical_z", "average"], default="canonical_z")
    simulate.add_argument("--ptm-out", default=None, help="Also write the circuit's Pauli transfer matrix document here.")
    simulate.set_defaults(handler=cmd_simulate)

    verify = commands.add_parser("verify-set", help="Classify a projector set document.")
    verify.add_argument("set_file")
    verify.add_argument("--budget", type=int, default=200_000, help="Backtracking node budget.")
    verify.add_argument("--search-limit", type=int, default=64, help="Largest set searched combinatorially.")
    verify.set_defaults(handler=cmd_verify_set)

    convert = commands.add_parser("convert", help="Convert a state document to another representation.")
    convert.add_argument("input")
    convert.add_argument("--to", choices=["density", "pauli", "probability"], required=True)
    convert.add_argument("--policy", choices=["canonical_z", "average"], default="canonical_z")
    convert.set_defaults(handler=cmd_convert)

    bench = commands.add_parser("bench", help="Time local PTM updates against dense superoperators.")
    bench.add_argument("--qubits", type=_qubit_range, default=[1, 2, 3, 4, 5], help="Range such as 1-5.")
    bench.add_argument("--depth", type=int, default=20)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.trace or tracing_requested():
        setup_observability()

    tol = load_tolerances()
    try:
        tol = _tolerances(args.tolerance)
        with tracer.start_as_current_span(f"probframe.cli.{args.command}") as span:
            span.set_attribute("probframe.seed", -1 if args.seed is None else args.seed)
            return args.handler(args, tol)
    except (ProbFrameError, ValidationError, OSError, ValueError) as exc:
        report = ErrorReport(
            seed=args.seed,
            tolerances=tol,
            error=type(exc).__name__,
            message=str(exc),
            details=_error_details(exc),
        )
        print(write_document(report), file=sys.stderr)
        return 2
