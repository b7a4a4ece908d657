"""Dense density-matrix reference simulator and seeded instance generators."""

from __future__ import annotations

import logging
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from probframe.errors import QubitIndexError, ShapeError, TraceConditionViolated
from probframe.gates import CHANNELS, GATES, KrausChannel, channel, gate_matrix
from probframe.matcore import ComplexMatrix, DensityMatrix, validate_density
from probframe.observability import traced
from probframe.settings import Tolerances, resolve

logger = logging.getLogger(__name__)

StepKind = Literal["gate", "channel"]
InstanceKind = Literal["pure_state", "density", "unitary", "circuit"]


class Step(BaseModel):
    """One circuit statement: a named gate or channel on ordered target qubits."""

    kind: StepKind
    name: str
    params: list[float] = Field(default_factory=list)
    targets: list[int]

    @model_validator(mode="after")
    def _check_signature(self) -> "Step":
        if self.kind == "gate":
            if self.name not in GATES:
                raise ValueError(f"unknown gate {self.name!r}")
            arity, count = GATES[self.name].arity, GATES[self.name].params
            if len(self.params) != count:
                raise ValueError(f"gate {self.name!r} takes {count} parameters")
        else:
            if self.name not in CHANNELS:
                raise ValueError(f"unknown channel {self.name!r}")
            spec = CHANNELS[self.name]
            arity = spec.arity
            if len(self.params) != 1 or not spec.low <= self.params[0] <= spec.high:
                raise ValueError(f"channel {self.name!r} takes one parameter in [{spec.low}, {spec.high}]")
        if len(self.targets) != arity:
            raise ValueError(f"{self.name!r} acts on {arity} qubits, got targets {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"targets {self.targets} are not distinct")
        return self


class CircuitIR(BaseModel):
    qubits: int = Field(ge=1)
    steps: list[Step] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_targets(self) -> "CircuitIR":
        for position, step in enumerate(self.steps):
            if any(not 0 <= q < self.qubits for q in step.targets):
                raise ValueError(f"step {position} targets {step.targets} outside 0..{self.qubits - 1}")
        return self


def step_operator(step: Step) -> ComplexMatrix | KrausChannel:
    if step.kind == "gate":
        return gate_matrix(step.name, step.params)
    return channel(step.name, step.params[0])


def _qubits_of(rho: np.ndarray) -> int:
    n = rho.shape[0]
    m = n.bit_length() - 1
    if rho.ndim != 2 or rho.shape != (n, n) or 2**m != n or m < 1:
        raise ShapeError(f"density matrix of shape {rho.shape} does not act on qubits")
    return m


def _check_targets(targets: Sequence[int], m: int, op_dim: int) -> None:
    if len(set(targets)) != len(targets) or any(not 0 <= q < m for q in targets):
        raise QubitIndexError(f"targets {tuple(targets)} are not distinct qubits of 0..{m - 1}")
    if op_dim != 2 ** len(targets):
        raise ShapeError(f"operator of dimension {op_dim} cannot act on {len(targets)} targets")


def _apply(rho: np.ndarray, op: np.ndarray, targets: Sequence[int], m: int) -> np.ndarray:
    """op rho op^dagger, op embedded on ``targets`` (most significant first)."""
    l = len(targets)
    op_tensor = op.reshape((2,) * (2 * l))
    inputs = list(range(l, 2 * l))
    tensor = rho.reshape((2,) * (2 * m))
    tensor = np.moveaxis(np.tensordot(op_tensor, tensor, axes=(inputs, list(targets))), list(range(l)), list(targets))
    columns = [m + q for q in targets]
    tensor = np.moveaxis(np.tensordot(op_tensor.conj(), tensor, axes=(inputs, columns)), list(range(l)), columns)
    return tensor.reshape(2**m, 2**m)


def evolve_unitary(rho: DensityMatrix | ComplexMatrix, u: ComplexMatrix, targets: Sequence[int]) -> DensityMatrix:
    rho = np.asarray(rho, dtype=complex)
    u = np.asarray(u, dtype=complex)
    m = _qubits_of(rho)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f"gate matrix must be square, got shape {u.shape}")
    _check_targets(targets, m, u.shape[0])
    return DensityMatrix(_apply(rho, u, targets, m))


def evolve_channel(
    rho: DensityMatrix | ComplexMatrix,
    ch: KrausChannel,
    targets: Sequence[int],
    tol: Tolerances | None = None,
) -> DensityMatrix:
    tol = resolve(tol)
    rho = np.asarray(rho, dtype=complex)
    m = _qubits_of(rho)
    dim = 2**ch.arity
    total = sum(op.conj().T @ op for op in ch.kraus_ops)
    residual = float(np.max(np.abs(total - np.eye(dim))))
    if residual > tol.kraus:
        raise TraceConditionViolated(residual)
    _check_targets(targets, m, dim)
    return DensityMatrix(sum(_apply(rho, op, targets, m) for op in ch.kraus_ops))


def ground_state(m: int) -> DensityMatrix:
    rho = np.zeros((2**m, 2**m), dtype=complex)
    rho[0, 0] = 1.0
    return DensityMatrix(rho)


def apply_step(rho: DensityMatrix, step: Step) -> DensityMatrix:
    operator = step_operator(step)
    if isinstance(operator, KrausChannel):
        return evolve_channel(rho, operator, step.targets)
    return evolve_unitary(rho, operator, step.targets)


@traced("simulate_density")
def simulate_density(
    circuit: CircuitIR,
    initial: DensityMatrix | None = None,
    tol: Tolerances | None = None,
) -> list[DensityMatrix]:
    """Trajectory (initial, after step 1, ...); every state is validated."""
    tol = resolve(tol)
    state = ground_state(circuit.qubits) if initial is None else validate_density(initial, tol)
    if state.dim != 2**circuit.qubits:
        raise ShapeError(f"initial state has dimension {state.dim}, circuit needs {2**circuit.qubits}")
    trajectory = [state]
    for step in circuit.steps:
        state = validate_density(apply_step(state, step), tol)
        trajectory.append(state)
    logger.debug("oracle ran %d steps on %d qubits", len(circuit.steps), circuit.qubits)
    return trajectory


def fresh_seed() -> int:
    """A 63-bit seed drawn from OS entropy, for runs that must record their seed."""
    return int(np.random.SeedSequence().entropy % 2**63)


def _complex_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = _complex_normal(rng, (dim,))
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """G G^dagger / Tr, complex-normal G (full rank almost surely)."""
    g = _complex_normal(rng, (dim, dim))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_complex_normal(rng, (dim, dim)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_circuit(
    m: int,
    depth: int,
    rng: np.random.Generator,
    with_channels: bool = True,
) -> CircuitIR:
    names: list[tuple[StepKind, str]] = [("gate", name) for name, spec in GATES.items() if spec.arity <= m]
    if with_channels:
        names += [("channel", name) for name, spec in CHANNELS.items() if spec.arity <= m]
    steps = []
    for _ in range(depth):
        kind, name = names[int(rng.integers(len(names)))]
        if kind == "gate":
            spec = GATES[name]
            params = [float(rng.uniform(0.0, 2 * np.pi)) for _ in range(spec.params)]
            arity = spec.arity
        else:
            ch_spec = CHANNELS[name]
            params = [float(rng.uniform(ch_spec.low, ch_spec.high))]
            arity = ch_spec.arity
        targets = [int(q) for q in rng.choice(m, size=arity, replace=False)]
        steps.append(Step(kind=kind, name=name, params=params, targets=targets))
    return CircuitIR(qubits=m, steps=steps)


def random_instance(kind: InstanceKind, size: int, seed: int | None = None, depth: int = 20):
    """Seeded instance: ``size`` is the dimension, or the qubit count for circuits."""
    rng = np.random.default_rng(seed)
    if kind == "pure_state":
        return random_pure_state(size, rng)
    if kind == "density":
        return random_density(size, rng)
    if kind == "unitary":
        return random_unitary(size, rng)
    if kind == "circuit":
        return random_circuit(size, depth, rng)
    raise ValueError(f"unknown instance kind {kind!r}")
