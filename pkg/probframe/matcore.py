"""Dense complex-matrix kernel.

Projectors, Kronecker products, trace inner products, the H(n) basis built
from E_kl, density-matrix validation and the real coordinates of Hermitian
matrices that every inversion in :mod:`probframe.frame` is written against.

HermRealCoords layout for an n x n Hermitian matrix h (n**2 reals)::

    h[0,0], ..., h[n-1,n-1],  Re h[0,1], Im h[0,1],  Re h[0,2], Im h[0,2], ...

off-diagonal pairs (a, b) with a < b in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import numpy.typing as npt
import scipy.linalg

from probframe.errors import HermiticityError, NegativityError, NormError, ShapeError, TraceError
from probframe.settings import Tolerances, resolve

ComplexMatrix = npt.NDArray[np.complex128]
HermitianMatrix = npt.NDArray[np.complex128]
UnitKet = npt.NDArray[np.complex128]
HermRealCoords = npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix; build it with :func:`validate_density`."""

    data: ComplexMatrix = field(repr=False)

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


@lru_cache(maxsize=None)
def pair_indices(n: int) -> tuple[tuple[int, int], ...]:
    """Off-diagonal positions (a, b), a < b, in coordinate order."""
    return tuple((a, b) for a in range(n) for b in range(a + 1, n))


def projector_of(v: UnitKet, tol: Tolerances | None = None) -> HermitianMatrix:
    v = np.asarray(v, dtype=complex).ravel()
    residual = abs(np.linalg.norm(v) - 1.0)
    if residual > resolve(tol).unit_norm:
        raise NormError(residual)
    return np.outer(v, v.conj())


def tensor_product(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product, first factor's index most significant."""
    return np.kron(a, b)


def trace_inner(a: ComplexMatrix, b: ComplexMatrix, conjugated: bool = False) -> complex:
    """Tr(a b), or Tr(a b*) when ``conjugated``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise ShapeError(f"trace inner product of shapes {a.shape} and {b.shape}")
    if conjugated:
        return complex(np.sum(a * b.conj()))
    return complex(np.sum(a * b.T))


def hermitian_pair_basis(n: int) -> list[HermitianMatrix]:
    """The n**2 matrices H+_kk, then H+_ba, H-_ba for each pair a < b.

    H+_ba = (E_ba + E_ab)/2 and H-_ba = i(E_ba - E_ab)/2, so that
    E_ba = H+_ba - i H-_ba. The order matches the HermRealCoords layout.
    """
    if n < 1:
        raise ShapeError("dimension must be at least 1")
    basis = []
    for k in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[k, k] = 1.0
        basis.append(e)
    for a, b in pair_indices(n):
        plus = np.zeros((n, n), dtype=complex)
        plus[a, b] = plus[b, a] = 0.5
        minus = np.zeros((n, n), dtype=complex)
        minus[b, a] = 0.5j
        minus[a, b] = -0.5j
        basis.extend([plus, minus])
    return basis


def herm_to_coords(h: HermitianMatrix) -> HermRealCoords:
    h = np.asarray(h)
    n = h.shape[0]
    pairs = pair_indices(n)
    coords = np.empty(n * n)
    coords[:n] = np.diagonal(h).real
    if pairs:
        rows, cols = np.array(pairs).T
        off = h[rows, cols]
        coords[n::2] = off.real
        coords[n + 1 :: 2] = off.imag
    return coords


def coords_to_herm(c: HermRealCoords) -> HermitianMatrix:
    c = np.asarray(c, dtype=float)
    n = int(round(np.sqrt(c.size)))
    if n * n != c.size:
        raise ShapeError(f"{c.size} coordinates do not describe a square Hermitian matrix")
    h = np.diag(c[:n]).astype(complex)
    pairs = pair_indices(n)
    if pairs:
        rows, cols = np.array(pairs).T
        off = c[n::2] + 1j * c[n + 1 :: 2]
        h[rows, cols] = off
        h[cols, rows] = off.conj()
    return h


@lru_cache(maxsize=None)
def _coords_metric(n: int) -> np.ndarray:
    weights = np.full(n * n, 2.0)
    weights[:n] = 1.0
    metric = np.diag(weights)
    metric.setflags(write=False)
    return metric


def coords_metric(n: int) -> np.ndarray:
    """K with Tr(A B) = coords(A) . K . coords(B) for Hermitian A, B."""
    return _coords_metric(n)


def validate_density(m: ComplexMatrix, tol: Tolerances | None = None) -> DensityMatrix:
    """Check hermiticity, unit trace and positivity; raise on the first violation.

    The raised error lists every violated invariant in ``violations``.
    """
    tol = resolve(tol)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"density matrix must be square, got shape {m.shape}")

    scale = float(np.max(np.abs(m))) if m.size else 0.0
    herm_residual = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    trace_residual = abs(complex(np.trace(m)) - 1.0)
    min_eig = float(scipy.linalg.eigvalsh((m + m.conj().T) / 2)[0])

    found: list[tuple[type, float, str]] = []
    if herm_residual > tol.herm * max(scale, 1e-300):
        found.append((HermiticityError, herm_residual, f"hermiticity residual {herm_residual:.3e}"))
    if trace_residual > tol.trace:
        found.append((TraceError, trace_residual, f"trace deviates from 1 by {trace_residual:.3e}"))
    if min_eig < -tol.psd:
        found.append((NegativityError, min_eig, f"most negative eigenvalue {min_eig:.3e}"))
    if found:
        error_type, residual, _ = found[0]
        raise error_type(residual, [message for _, _, message in found])
    return DensityMatrix(m)
