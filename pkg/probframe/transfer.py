"""Real transfer matrices for gates and channels.

A gate or channel acting on ``l`` qubits becomes a 4**l x 4**l real matrix
(PTM) on Pauli parameters, with entries

    A[K, J] = 2**-l * sum_k Tr(sigma^K V_k sigma^J V_k^dagger)

so that p' = A p for p = Tr(rho sigma). On a general projector set the same
map becomes an N x N matrix on probabilities, canonical only on the image of
the forward map.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from probframe.errors import NotRepresentative, NotUnitary, QubitIndexError, ShapeError, TraceConditionViolated
from probframe.frame import ProjectorSet, RightInverse, build_forward_matrix, forward_map, rank_of_projector_span
from probframe.gates import KrausChannel
from probframe.matcore import ComplexMatrix, HermitianMatrix, coords_metric, coords_to_herm, herm_to_coords
from probframe.observability import traced
from probframe.oracle import CircuitIR, Step, step_operator
from probframe.qubitframe import (
    PauliParameterTensor,
    TO_PROBABILITY,
    ZeroAxisPolicy,
    from_probability_map,
    pauli_string,
    product_tensor,
)
from probframe.settings import Tolerances, resolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PauliTransferMatrix:
    arity: int
    entries: np.ndarray = field(repr=False)
    trace_preserving: bool = True

    def __matmul__(self, other: "PauliTransferMatrix") -> "PauliTransferMatrix":
        """``self @ other`` applies ``other`` first."""
        if self.arity != other.arity:
            raise ShapeError(f"cannot compose PTMs of arity {self.arity} and {other.arity}")
        return PauliTransferMatrix(
            arity=self.arity,
            entries=self.entries @ other.entries,
            trace_preserving=self.trace_preserving and other.trace_preserving,
        )


@dataclass(frozen=True, eq=False)
class ProbTransferMatrix:
    """A with A . forward_map(rho) = forward_map(evolved rho); unique only on the image subspace."""

    set_label: str
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class TransitionMetric:
    set_label: str
    entries: np.ndarray = field(repr=False)

    def inner(self, p: Sequence[float], q: Sequence[float]) -> float:
        return float(np.asarray(p, dtype=float) @ self.entries @ np.asarray(q, dtype=float))


@lru_cache(maxsize=None)
def _pauli_strings(l: int) -> np.ndarray:
    strings = np.array([pauli_string(index) for index in itertools.product(range(4), repeat=l)])
    strings.setflags(write=False)
    return strings


def _unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _arity_of(op: np.ndarray) -> int:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ShapeError(f"operator must be square, got shape {op.shape}")
    l = op.shape[0].bit_length() - 1
    if l < 1 or 2**l != op.shape[0]:
        raise ShapeError(f"operator dimension {op.shape[0]} is not 2**l")
    return l


def _ptm_entries(ops: Sequence[np.ndarray], l: int) -> np.ndarray:
    strings = _pauli_strings(l)
    entries = np.zeros((4**l, 4**l))
    for v in ops:
        evolved = np.einsum("ab,jbc,dc->jad", v, strings, v.conj())
        entries += np.einsum("kda,jad->kj", strings, evolved).real
    return entries / 2**l


def ptm_of_unitary(u: ComplexMatrix, l: int | None = None, tol: Tolerances | None = None) -> PauliTransferMatrix:
    tol = resolve(tol)
    u = np.asarray(u, dtype=complex)
    arity = _arity_of(u)
    if l is not None and l != arity:
        raise ShapeError(f"{u.shape[0]}x{u.shape[0]} unitary does not act on {l} qubits")
    residual = _unitarity_residual(u)
    if residual > tol.unitarity:
        raise NotUnitary(residual)
    entries = _ptm_entries([u], arity)
    entries.setflags(write=False)
    return PauliTransferMatrix(arity=arity, entries=entries, trace_preserving=True)


def ptm_of_channel(ch: KrausChannel, tol: Tolerances | None = None) -> PauliTransferMatrix:
    """Sum of the per-Kraus-operator terms; non-unitary channels may contract the Bloch block."""
    tol = resolve(tol)
    dim = 2**ch.arity
    total = sum(op.conj().T @ op for op in ch.kraus_ops)
    residual = float(np.max(np.abs(total - np.eye(dim))))
    if residual > tol.kraus:
        raise TraceConditionViolated(residual)
    entries = _ptm_entries(ch.kraus_ops, ch.arity)
    entries.setflags(write=False)
    return PauliTransferMatrix(arity=ch.arity, entries=entries, trace_preserving=True)


def _check_local_targets(targets: Sequence[int], arity: int, m: int) -> None:
    if len(targets) != arity:
        raise QubitIndexError(f"PTM of arity {arity} given {len(targets)} targets")
    if len(set(targets)) != len(targets) or any(not 0 <= q < m for q in targets):
        raise QubitIndexError(f"targets {tuple(targets)} are not distinct qubits of 0..{m - 1}")


def _contract(tensor: np.ndarray, a: PauliTransferMatrix, targets: Sequence[int]) -> np.ndarray:
    """Contract ``a`` against the target axes; every other axis is a fiber index."""
    l = a.arity
    local = a.entries.reshape((4,) * (2 * l))
    out = np.tensordot(local, tensor, axes=(list(range(l, 2 * l)), list(targets)))
    return np.moveaxis(out, list(range(l)), list(targets))


def apply_local(t: PauliParameterTensor, a: PauliTransferMatrix, targets: Sequence[int]) -> PauliParameterTensor:
    _check_local_targets(targets, a.arity, t.m)
    return PauliParameterTensor(m=t.m, values=_contract(t.as_tensor(), a, targets).ravel())


def embed_ptm(a: PauliTransferMatrix, targets: Sequence[int], m: int) -> PauliTransferMatrix:
    """The global 4**m x 4**m matrix of ``a`` acting on ``targets`` (identity elsewhere)."""
    _check_local_targets(targets, a.arity, m)
    columns = np.eye(4**m).reshape((4,) * m + (4**m,))
    entries = _contract(columns, a, targets).reshape(4**m, 4**m)
    entries.setflags(write=False)
    return PauliTransferMatrix(arity=m, entries=entries, trace_preserving=a.trace_preserving)


def _hermitian_superoperator(ops: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Real matrix of H -> sum_k V_k H V_k^dagger in HermRealCoords."""
    columns = []
    for basis_vector in np.eye(n * n):
        h = coords_to_herm(basis_vector)
        columns.append(herm_to_coords(sum(v @ h @ v.conj().T for v in ops)))
    return np.array(columns).T


def _require_representative(pset: ProjectorSet, w: RightInverse, tol: Tolerances) -> None:
    n = pset.dim
    rank = rank_of_projector_span(pset, tol)
    if rank < n * n:
        raise NotRepresentative(rank, n * n)
    if w.dim != n or w.entries.shape[1] != len(pset):
        raise ShapeError(f"right inverse for dim {w.dim} with {w.entries.shape[1]} columns does not fit set {pset.label!r}")


@traced("prob_transfer_of")
def prob_transfer_of(
    pset: ProjectorSet,
    w: RightInverse,
    source: ComplexMatrix | KrausChannel,
    tol: Tolerances | None = None,
) -> ProbTransferMatrix:
    """A = M . T . W; depends on W off the image subspace."""
    tol = resolve(tol)
    _require_representative(pset, w, tol)
    n = pset.dim
    if isinstance(source, KrausChannel):
        ops = list(source.kraus_ops)
        residual = float(np.max(np.abs(sum(op.conj().T @ op for op in ops) - np.eye(ops[0].shape[0]))))
        if residual > tol.kraus:
            raise TraceConditionViolated(residual)
    else:
        u = np.asarray(source, dtype=complex)
        if u.shape != (n, n):
            raise ShapeError(f"unitary of shape {u.shape} does not act on dimension {n}")
        residual = _unitarity_residual(u)
        if residual > tol.unitarity:
            raise NotUnitary(residual)
        ops = [u]
    if ops[0].shape != (n, n):
        raise ShapeError(f"channel acts on dimension {ops[0].shape[0]}, set on {n}")
    m = build_forward_matrix(pset).entries
    entries = m @ _hermitian_superoperator(ops, n) @ w.entries
    entries.setflags(write=False)
    return ProbTransferMatrix(set_label=pset.label, entries=entries)


def so3_of_su2(u: ComplexMatrix, tol: Tolerances | None = None) -> np.ndarray:
    """Bloch rotation R with R[K, J] = Tr(sigma^K U sigma^J U^dagger) / 2.

    Active convention: a Bloch vector r goes to R r, and R(u1 u2) = R(u1) R(u2).
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ShapeError(f"so3_of_su2 takes a 2x2 unitary, got shape {u.shape}")
    return np.array(ptm_of_unitary(u, 1, tol).entries[1:, 1:])


def transition_metric(pset: ProjectorSet, w: RightInverse, tol: Tolerances | None = None) -> TransitionMetric:
    """G = W^T K W, so p . G . q = Tr(rho_p rho_q)."""
    _require_representative(pset, w, resolve(tol))
    g = w.entries.T @ coords_metric(pset.dim) @ w.entries
    g = (g + g.T) / 2
    g.setflags(write=False)
    return TransitionMetric(set_label=pset.label, entries=g)


def expectation(
    pset: ProjectorSet,
    w: RightInverse,
    p: Sequence[float],
    x: HermitianMatrix,
    tol: Tolerances | None = None,
) -> float:
    """Tr(rho X) with rho reconstructed from ``p``."""
    _require_representative(pset, w, resolve(tol))
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=complex)
    if p.shape != (len(pset),):
        raise ShapeError(f"expected {len(pset)} probabilities, got shape {p.shape}")
    if x.shape != (pset.dim, pset.dim):
        raise ShapeError(f"observable of shape {x.shape} does not act on dimension {pset.dim}")
    rho = w.reconstruct(p)
    return float(np.real(np.sum(rho * x.T)))


def observable_probabilities(pset: ProjectorSet, x: HermitianMatrix) -> np.ndarray:
    """forward_map of a Hermitian observable, the left factor of expectation = p_X . G . p."""
    return forward_map(pset, x)


def prob_transfer_from_ptm(a: PauliTransferMatrix, zero_axis_policy: ZeroAxisPolicy = "canonical_z") -> ProbTransferMatrix:
    """6**l x 6**l matrix on six-state probability tensors, Q . A . R per qubit."""
    to_probability = np.ones((1, 1))
    to_pauli = np.ones((1, 1))
    back = from_probability_map(zero_axis_policy)
    for _ in range(a.arity):
        to_probability = np.kron(to_probability, TO_PROBABILITY)
        to_pauli = np.kron(to_pauli, back)
    entries = to_probability @ a.entries @ to_pauli
    entries.setflags(write=False)
    return ProbTransferMatrix(set_label=f"six-state-{a.arity}", entries=entries)


@lru_cache(maxsize=256)
def _cached_step_ptm(kind: str, name: str, params: tuple[float, ...], arity: int) -> PauliTransferMatrix:
    step = Step(kind=kind, name=name, params=list(params), targets=list(range(arity)))
    operator = step_operator(step)
    if isinstance(operator, KrausChannel):
        return ptm_of_channel(operator)
    return ptm_of_unitary(operator)


def step_ptm(step: Step) -> PauliTransferMatrix:
    return _cached_step_ptm(step.kind, step.name, tuple(step.params), len(step.targets))


def ground_tensor(m: int) -> PauliParameterTensor:
    """|0...0>: every z component and every z string equal to 1."""
    zero = PauliParameterTensor(m=1, values=[1.0, 0.0, 0.0, 1.0])
    return product_tensor([zero] * m)


@traced("simulate_ptm")
def simulate_ptm(circuit: CircuitIR, initial: PauliParameterTensor | None = None) -> list[PauliParameterTensor]:
    """Pauli-parameter trajectory (initial, after step 1, ...)."""
    state = ground_tensor(circuit.qubits) if initial is None else initial
    if state.m != circuit.qubits:
        raise ShapeError(f"initial tensor has m={state.m}, circuit has {circuit.qubits} qubits")
    trajectory = [state]
    for step in circuit.steps:
        state = apply_local(state, step_ptm(step), step.targets)
        trajectory.append(state)
    logger.debug("transfer ran %d steps on %d qubits", len(circuit.steps), circuit.qubits)
    return trajectory


def circuit_ptm(circuit: CircuitIR) -> PauliTransferMatrix:
    """The 4**m x 4**m PTM of a whole circuit, built by running every step on the identity columns."""
    m = circuit.qubits
    columns = np.eye(4**m).reshape((4,) * m + (4**m,))
    trace_preserving = True
    for step in circuit.steps:
        a = step_ptm(step)
        columns = _contract(columns, a, step.targets)
        trace_preserving = trace_preserving and a.trace_preserving
    entries = columns.reshape(4**m, 4**m)
    entries.setflags(write=False)
    return PauliTransferMatrix(arity=m, entries=entries, trace_preserving=trace_preserving)
