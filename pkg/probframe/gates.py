"""Gate matrices and Kraus channel families used by circuits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from probframe.errors import ShapeError, TraceConditionViolated
from probframe.matcore import ComplexMatrix
from probframe.settings import Tolerances, resolve

SQRT_HALF = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
T = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

for _matrix in (I2, X, Y, Z, H, S, T, CNOT, CZ):
    _matrix.setflags(write=False)


def rx(theta: float) -> ComplexMatrix:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * X


def ry(theta: float) -> ComplexMatrix:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * Y


def rz(theta: float) -> ComplexMatrix:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * Z


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """rho -> sum_k V_k rho V_k^dagger on ``arity`` qubits."""

    arity: int
    kraus_ops: tuple[ComplexMatrix, ...] = field(repr=False)
    name: str = ""

    @classmethod
    def from_ops(
        cls,
        ops: Sequence[ComplexMatrix],
        name: str = "",
        tol: Tolerances | None = None,
    ) -> "KrausChannel":
        """Validate shapes and sum_k V_k^dagger V_k = I."""
        tol = resolve(tol)
        arrays = tuple(np.array(op, dtype=complex) for op in ops)
        if not arrays:
            raise ShapeError("a channel needs at least one Kraus operator")
        dim = arrays[0].shape[0]
        arity = int(round(np.log2(dim)))
        if 2**arity != dim or any(op.shape != (dim, dim) for op in arrays):
            raise ShapeError(f"Kraus operators must be square 2**l matrices, got {[op.shape for op in arrays]}")
        total = sum(op.conj().T @ op for op in arrays)
        residual = float(np.max(np.abs(total - np.eye(dim))))
        if residual > tol.kraus:
            raise TraceConditionViolated(residual)
        for op in arrays:
            op.setflags(write=False)
        return cls(arity=arity, kraus_ops=arrays, name=name)


def depolarizing(lam: float) -> KrausChannel:
    """Kraus form sqrt(1 - 3 lam/4) I, sqrt(lam/4) X, sqrt(lam/4) Y, sqrt(lam/4) Z."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing parameter {lam} outside [0, 1]")
    return KrausChannel.from_ops(
        [np.sqrt(1 - 3 * lam / 4) * I2] + [np.sqrt(lam / 4) * p for p in (X, Y, Z)],
        name="depol",
    )


def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping parameter {gamma} outside [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel.from_ops([k0, k1], name="ampdamp")


class GateSpec(NamedTuple):
    arity: int
    params: int
    build: Callable[..., ComplexMatrix]


class ChannelSpec(NamedTuple):
    arity: int
    low: float
    high: float
    build: Callable[[float], KrausChannel]


def _fixed(matrix: ComplexMatrix) -> Callable[[], ComplexMatrix]:
    return lambda: matrix


GATES: dict[str, GateSpec] = {
    "h": GateSpec(1, 0, _fixed(H)),
    "x": GateSpec(1, 0, _fixed(X)),
    "y": GateSpec(1, 0, _fixed(Y)),
    "z": GateSpec(1, 0, _fixed(Z)),
    "s": GateSpec(1, 0, _fixed(S)),
    "t": GateSpec(1, 0, _fixed(T)),
    "rx": GateSpec(1, 1, rx),
    "ry": GateSpec(1, 1, ry),
    "rz": GateSpec(1, 1, rz),
    "cnot": GateSpec(2, 0, _fixed(CNOT)),
    "cz": GateSpec(2, 0, _fixed(CZ)),
}

CHANNELS: dict[str, ChannelSpec] = {
    "depol": ChannelSpec(1, 0.0, 1.0, depolarizing),
    "ampdamp": ChannelSpec(1, 0.0, 1.0, amplitude_damping),
}


def gate_matrix(name: str, params: Sequence[float] = ()) -> ComplexMatrix:
    spec = GATES[name]
    if len(params) != spec.params:
        raise ValueError(f"gate {name!r} takes {spec.params} parameters, got {len(params)}")
    return spec.build(*params)


def channel(name: str, param: float) -> KrausChannel:
    return CHANNELS[name].build(param)
