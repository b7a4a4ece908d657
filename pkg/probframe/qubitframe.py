"""Pauli machinery for m qubits.

Three representations of an m-qubit state are kept in step here:

* the 2**m x 2**m density matrix,
* the PauliParameterTensor, 4**m values Tr(rho sigma^{nu_1} x ... x sigma^{nu_m}),
* the ProbabilityTensor, 6**m transition probabilities to the composite
  six-state kets.

Both tensors are stored flat, row-major, qubit 0 most significant. A
six-state slot uses the flat index 2*(mu - 1) + theta with mu = 1, 2, 3 for
the x, y, z axes and theta = 0, 1 for the eigenvalues +1, -1.

Every conversion acts qubit by qubit with a small per-qubit matrix, so the
work is a chain of tensordot contractions rather than one dense 4**m or 6**m
matrix.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from probframe.errors import GuardExceeded, InconsistentProbabilities, QubitIndexError, ShapeError
from probframe.frame import ProjectorSet, compose_sets
from probframe.gates import I2, X, Y, Z
from probframe.matcore import ComplexMatrix, HermitianMatrix
from probframe.settings import Tolerances, resolve

ZeroAxisPolicy = Literal["canonical_z", "average"]

MAX_PROBABILITY_QUBITS = 6
MAX_PAULI_QUBITS = 10

PAULI = np.stack([I2, X, Y, Z])
PAULI.setflags(write=False)

AXIS_NAMES = ("x", "y", "z")
EIGENVALUES = (1.0, -1.0)


def six_state_index(mu: int, theta: int) -> int:
    if mu not in (1, 2, 3) or theta not in (0, 1):
        raise ValueError(f"invalid six-state slot (mu={mu}, theta={theta})")
    return 2 * (mu - 1) + theta


def six_state_slot(flat: int) -> tuple[int, int]:
    """Inverse of :func:`six_state_index`: (mu, theta)."""
    if not 0 <= flat < 6:
        raise ValueError(f"six-state index {flat} outside 0..5")
    return flat // 2 + 1, flat % 2


def pauli_string(indices: Sequence[int]) -> HermitianMatrix:
    """sigma^{nu_1} x ... x sigma^{nu_m}, first index most significant."""
    if len(indices) < 1:
        raise ShapeError("a Pauli string needs at least one index")
    result = np.ones((1, 1), dtype=complex)
    for nu in indices:
        if nu not in (0, 1, 2, 3):
            raise ValueError(f"Pauli index {nu} outside 0..3")
        result = np.kron(result, PAULI[nu])
    return result


def six_state_kets() -> np.ndarray:
    """The six single-qubit kets |theta^mu> in storage order x0, x1, y0, y1, z0, z1."""
    r = np.sqrt(0.5)
    return np.array(
        [
            [r, r],
            [r, -r],
            [r, 1j * r],
            [r, -1j * r],
            [1, 0],
            [0, 1],
        ],
        dtype=complex,
    )


def six_state_set(m: int) -> ProjectorSet:
    if m < 1:
        raise ShapeError("six-state set needs m >= 1")
    single = ProjectorSet.from_kets(six_state_kets(), label="six-state")
    result = single
    for _ in range(m - 1):
        result = compose_sets(result, single)
    return dataclasses.replace(result, label=f"six-state-{m}")


def _qubit_count(size: int, base: int) -> int:
    m = 0
    while base**m < size:
        m += 1
    if base**m != size or m < 1:
        raise ShapeError(f"{size} values do not form a {base}**m tensor")
    return m


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float).ravel()
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class PauliParameterTensor:
    """4**m Pauli parameters; the all-zero entry is Tr rho = 1."""

    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        if values.size != 4**self.m:
            raise ShapeError(f"expected {4**self.m} Pauli parameters for m={self.m}, got {values.size}")
        residual = abs(values[0] - 1.0)
        if residual > resolve(None).param_trace:
            raise ShapeError(f"leading Pauli parameter must be 1, got {values[0]!r}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> "PauliParameterTensor":
        values = np.asarray(values, dtype=float).ravel()
        return cls(m=_qubit_count(values.size, 4), values=values)

    def as_tensor(self) -> np.ndarray:
        return self.values.reshape((4,) * self.m)

    def __getitem__(self, nu: Sequence[int]) -> float:
        return float(self.as_tensor()[tuple(nu)])

    def in_physical_range(self, tol: Tolerances | None = None) -> bool:
        bound = 1.0 + resolve(tol).psd
        return bool(np.all(np.abs(self.values) <= bound))


@dataclass(frozen=True, eq=False)
class ProbabilityTensor:
    """6**m transition probabilities; see :meth:`check_normalization`."""

    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        if values.size != 6**self.m:
            raise ShapeError(f"expected {6**self.m} probabilities for m={self.m}, got {values.size}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> "ProbabilityTensor":
        values = np.asarray(values, dtype=float).ravel()
        return cls(m=_qubit_count(values.size, 6), values=values)

    def as_tensor(self) -> np.ndarray:
        return self.values.reshape((6,) * self.m)

    def group_sums(self) -> np.ndarray:
        """Sum over the 2**m outcomes for every axis assignment, shape (3,) * m."""
        split = self.values.reshape((3, 2) * self.m)
        return split.sum(axis=tuple(range(1, 2 * self.m, 2)))

    def check_normalization(self, tol: float) -> None:
        deviation = np.abs(self.group_sums() - 1.0)
        worst = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
        if deviation[worst] > tol:
            axes = tuple(int(a) + 1 for a in worst)
            raise InconsistentProbabilities(axes, float(self.group_sums()[worst]))

    def in_physical_range(self, tol: Tolerances | None = None) -> bool:
        margin = resolve(tol).psd
        return bool(np.all((self.values >= -margin) & (self.values <= 1.0 + margin)))


def _per_qubit(tensor: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Apply ``op`` (out x in) to every axis of ``tensor``."""
    for k in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(op, tensor, axes=([1], [k])), 0, k)
    return tensor


def _interleave(rho: np.ndarray, m: int) -> np.ndarray:
    """(i_1..i_m, j_1..j_m) -> (i_1 j_1, ..., i_m j_m), each pair fused to 2i + j."""
    order = [axis for k in range(m) for axis in (k, m + k)]
    return rho.reshape((2,) * (2 * m)).transpose(order).reshape((4,) * m)


def _deinterleave(tensor: np.ndarray, m: int) -> np.ndarray:
    order = list(range(0, 2 * m, 2)) + list(range(1, 2 * m, 2))
    return tensor.reshape((2,) * (2 * m)).transpose(order).reshape(2**m, 2**m)


# _TO_PAULI[nu, 2i + j] = sigma^nu[j, i], so sum_ij rho[i, j] sigma^nu[j, i] = Tr(rho sigma^nu).
_TO_PAULI = np.array([PAULI[nu].T.ravel() for nu in range(4)])
_FROM_PAULI = np.array([PAULI[nu].ravel() for nu in range(4)]).T / 2.0

TO_PROBABILITY = np.zeros((6, 4))
TO_PROBABILITY[:, 0] = 0.5
for _flat in range(6):
    _mu, _theta = six_state_slot(_flat)
    TO_PROBABILITY[_flat, _mu] = 0.5 * EIGENVALUES[_theta]


def from_probability_map(policy: ZeroAxisPolicy) -> np.ndarray:
    r = np.zeros((4, 6))
    for flat in range(6):
        mu, theta = six_state_slot(flat)
        r[mu, flat] = EIGENVALUES[theta]
    if policy == "canonical_z":
        r[0, 4:6] = 1.0
    elif policy == "average":
        r[0, :] = 1.0 / 3.0
    else:
        raise ValueError(f"unknown zero-axis policy {policy!r}")
    return r


def pauli_coefficients(rho: ComplexMatrix) -> np.ndarray:
    """Tr(rho sigma^nu) for every Pauli string, flat, with no trace condition."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    n = rho.shape[0]
    m = n.bit_length() - 1
    if n < 2 or 2**m != n:
        raise ShapeError(f"dimension {n} is not a power of two")
    return _per_qubit(_interleave(rho, m), _TO_PAULI).ravel()


def tilde_from_rho(rho: ComplexMatrix) -> PauliParameterTensor:
    coefficients = pauli_coefficients(rho)
    return PauliParameterTensor.from_values(coefficients.real)


def matrix_from_coefficients(values: np.ndarray, m: int) -> HermitianMatrix:
    """2**-m sum_nu values_nu sigma^nu."""
    tensor = np.asarray(values, dtype=complex).reshape((4,) * m)
    return _deinterleave(_per_qubit(tensor, _FROM_PAULI), m)


def rho_from_tilde(t: PauliParameterTensor) -> HermitianMatrix:
    """Hermitian, trace one; positivity is the caller's concern."""
    return matrix_from_coefficients(t.values, t.m)


def _guard_probability(m: int) -> None:
    if m > MAX_PROBABILITY_QUBITS:
        raise GuardExceeded(f"probability tensors are dense up to m={MAX_PROBABILITY_QUBITS}, got m={m}")


def p_from_tilde(t: PauliParameterTensor) -> ProbabilityTensor:
    _guard_probability(t.m)
    return ProbabilityTensor(m=t.m, values=_per_qubit(t.as_tensor(), TO_PROBABILITY).ravel())


def tilde_from_p(
    p: ProbabilityTensor,
    zero_axis_policy: ZeroAxisPolicy = "canonical_z",
    tol: Tolerances | None = None,
) -> PauliParameterTensor:
    """Invert :func:`p_from_tilde`; entries with nu_k = 0 read axes per ``zero_axis_policy``."""
    tol = resolve(tol)
    p.check_normalization(tol.normalization)
    values = _per_qubit(p.as_tensor(), from_probability_map(zero_axis_policy)).ravel()
    values[0] = 1.0
    return PauliParameterTensor(m=p.m, values=values)


@dataclass(frozen=True, eq=False)
class MarginalTable:
    """Single-qubit marginals.

    ``parameters[k]`` is (1, p_x, p_y, p_z) of qubit k and
    ``probabilities[k, mu - 1, theta]`` the probability of |theta^mu> on it.
    """

    m: int
    parameters: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)


def _table(parameters: np.ndarray) -> MarginalTable:
    signs = np.array(EIGENVALUES)
    probabilities = 0.5 * (1.0 + parameters[:, 1:, None] * signs[None, None, :])
    parameters.setflags(write=False)
    probabilities.setflags(write=False)
    return MarginalTable(m=parameters.shape[0], parameters=parameters, probabilities=probabilities)


def marginals(t: PauliParameterTensor) -> MarginalTable:
    tensor = t.as_tensor()
    parameters = np.empty((t.m, 4))
    for k in range(t.m):
        index = [0] * t.m
        for nu in range(4):
            index[k] = nu
            parameters[k, nu] = tensor[tuple(index)]
    return _table(parameters)


def _check_qubits(qubits: Sequence[int], m: int) -> None:
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < m for q in qubits):
        raise QubitIndexError(f"qubits {tuple(qubits)} are not distinct indices in 0..{m - 1}")


def reduced_tensor(t: PauliParameterTensor, keep: Sequence[int]) -> PauliParameterTensor:
    """Pauli parameters of the reduced state on ``keep``, in the given order."""
    keep = list(keep)
    if not keep:
        raise QubitIndexError("reduced tensor needs at least one qubit")
    _check_qubits(keep, t.m)
    index = tuple(slice(None) if k in keep else 0 for k in range(t.m))
    reduced = t.as_tensor()[index]
    order = sorted(keep)
    reduced = reduced.transpose([order.index(k) for k in keep])
    return PauliParameterTensor(m=len(keep), values=reduced.ravel())


def marginals_from_probabilities(
    p: ProbabilityTensor,
    k: int,
    zero_axis_policy: ZeroAxisPolicy = "canonical_z",
) -> np.ndarray:
    """(3, 2) table for qubit k summed over the other qubits' outcomes.

    The other qubits are read on the z axis, or averaged over all axis choices.
    """
    _check_qubits([k], p.m)
    split = p.values.reshape((3, 2) * p.m)
    for j in reversed(range(p.m)):
        if j == k:
            continue
        split = split.sum(axis=2 * j + 1)
        if zero_axis_policy == "canonical_z":
            split = np.take(split, 2, axis=2 * j)
        elif zero_axis_policy == "average":
            split = split.mean(axis=2 * j)
        else:
            raise ValueError(f"unknown zero-axis policy {zero_axis_policy!r}")
    return split


def product_tensor(parts: Sequence[PauliParameterTensor]) -> PauliParameterTensor:
    if not parts:
        raise ShapeError("product of zero tensors")
    values = np.ones(1)
    for part in parts:
        if part.m != 1:
            raise ShapeError(f"product_tensor takes single-qubit parts, got m={part.m}")
        values = np.multiply.outer(values, part.values).ravel()
    return PauliParameterTensor(m=len(parts), values=values)


@dataclass(frozen=True)
class Factorization:
    product: bool
    second_singular_value: float
    factors: tuple[PauliParameterTensor, PauliParameterTensor] | None = None


def is_product(t: PauliParameterTensor, cut: int, tol: float = 1e-10) -> Factorization:
    """Rank-one test of the tensor split after the first ``cut`` qubits."""
    if not 1 <= cut < t.m:
        raise QubitIndexError(f"cut {cut} must lie in 1..{t.m - 1}")
    matrix = t.values.reshape(4**cut, 4 ** (t.m - cut))
    u, s, vh = np.linalg.svd(matrix)
    second = float(s[1]) if s.size > 1 else 0.0
    if second >= tol * s[0]:
        return Factorization(product=False, second_singular_value=second)
    left = u[:, 0] / u[0, 0]
    right = vh[0] / vh[0, 0]
    factors = (
        PauliParameterTensor(m=cut, values=left),
        PauliParameterTensor(m=t.m - cut, values=right),
    )
    return Factorization(product=True, second_singular_value=second, factors=factors)
