"""Projector sets: forward map, right and affine inverses, classification, composition."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, model_validator

from probframe.errors import (
    ClosedFormUnavailable,
    NotAffineReconstructible,
    NotRepresentative,
    NormError,
    SearchBudgetExceeded,
    ShapeError,
)
from probframe.matcore import (
    ComplexMatrix,
    HermitianMatrix,
    coords_metric,
    coords_to_herm,
    herm_to_coords,
    pair_indices,
)
from probframe.observability import traced
from probframe.search import BudgetExhausted, ExactCoverSolver, NodeBudget, completions, orthogonality_graph
from probframe.settings import Tolerances, resolve

logger = logging.getLogger(__name__)

InverseKind = Literal["pseudoinverse", "closed_form"]


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size == 0:
        return v
    first = v[nonzero[0]]
    return v * (abs(first) / first)


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Ordered unit kets v_alpha in C^dim; rows of ``kets``."""

    dim: int
    kets: np.ndarray = field(repr=False)
    label: str = ""

    @classmethod
    def from_kets(cls, kets: Sequence[Sequence[complex]] | np.ndarray, label: str = "", tol: Tolerances | None = None) -> "ProjectorSet":
        tol = resolve(tol)
        array = np.atleast_2d(np.asarray(kets, dtype=complex))
        norms = np.linalg.norm(array, axis=1)
        worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if worst > tol.unit_norm:
            raise NormError(worst)
        normalized = np.array([canonical_phase(v / nv) for v, nv in zip(array, norms)])
        normalized.setflags(write=False)
        return cls(dim=array.shape[1], kets=normalized, label=label)

    def __len__(self) -> int:
        return self.kets.shape[0]

    @cached_property
    def projectors(self) -> np.ndarray:
        """|v_alpha><v_alpha| stacked, shape (N, dim, dim)."""
        projectors = np.einsum("ai,aj->aij", self.kets, self.kets.conj())
        projectors.setflags(write=False)
        return projectors

    def subset(self, indices: Sequence[int], label: str | None = None) -> "ProjectorSet":
        kets = self.kets[list(indices)].copy()
        kets.setflags(write=False)
        return ProjectorSet(dim=self.dim, kets=kets, label=self.label if label is None else label)


@dataclass(frozen=True, eq=False)
class ForwardMapMatrix:
    """Real N x n**2 matrix M with p = M . herm_to_coords(rho)."""

    set_label: str
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class RightInverse:
    """Real n**2 x N matrix W with rho = coords_to_herm(W . p)."""

    set_label: str
    dim: int
    entries: np.ndarray = field(repr=False)
    kind: Literal["pseudoinverse", "closed_form", "composed"] = "pseudoinverse"

    def reconstruct(self, p: Sequence[float] | np.ndarray) -> HermitianMatrix:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.entries.shape[1],):
            raise ShapeError(f"expected {self.entries.shape[1]} probabilities, got shape {p.shape}")
        return coords_to_herm(self.entries @ p)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """c[k, l, alpha] with rho_kl = sum_alpha c[k, l, alpha] p_alpha."""
        n = self.dim
        w = self.entries
        c = np.zeros((n, n, w.shape[1]), dtype=complex)
        for k in range(n):
            c[k, k] = w[k]
        for q, (a, b) in enumerate(pair_indices(n)):
            re, im = w[n + 2 * q], w[n + 2 * q + 1]
            c[a, b] = re + 1j * im
            c[b, a] = re - 1j * im
        return c


@dataclass(frozen=True, eq=False)
class AffineInverse:
    """rho = coords_to_herm(matrix_part . p) + offset on trace-one matrices."""

    set_label: str
    matrix_part: np.ndarray = field(repr=False)
    offset: HermitianMatrix = field(repr=False)

    def reconstruct(self, p: Sequence[float] | np.ndarray) -> HermitianMatrix:
        return coords_to_herm(self.matrix_part @ np.asarray(p, dtype=float)) + self.offset


class PerfectionWitness(BaseModel):
    """A ket with two distinct orthonormal completions inside the set."""

    ket: int
    first: list[int]
    second: list[int]


class Classification(BaseModel):
    """Classification of a projector set; ``None`` marks a field left unknown.

    Ket indices in ``basis_partition``, ``witness`` and ``completion_counts``
    refer to the input set, duplicates included.
    """

    size: int
    dim: int
    rank: int
    representative: bool
    minimal: bool
    complete: bool | None = None
    almost_perfect: bool | None = None
    perfect: bool | None = None
    basis_partition: list[list[int]] | None = None
    completion_counts: list[int] | None = None
    witness: PerfectionWitness | None = None
    duplicates_removed: int = 0

    @model_validator(mode="after")
    def _check_implications(self) -> "Classification":
        if self.perfect and self.almost_perfect is False:
            raise ValueError("perfect set must be almost perfect")
        if self.almost_perfect and self.complete is False:
            raise ValueError("almost perfect set must be complete")
        if self.minimal and not (self.representative and self.size == self.dim**2):
            raise ValueError("minimal set must be representative with n**2 kets")
        if self.representative != (self.rank == self.dim**2):
            raise ValueError("representative must coincide with full rank")
        return self


def _as_matrix(rho) -> np.ndarray:
    return np.asarray(rho, dtype=complex)


def forward_map(pset: ProjectorSet, rho) -> np.ndarray:
    """p_alpha = <v_alpha| rho |v_alpha> for any Hermitian rho."""
    rho = _as_matrix(rho)
    if rho.shape != (pset.dim, pset.dim):
        raise ShapeError(f"set acts on dimension {pset.dim}, matrix has shape {rho.shape}")
    return np.einsum("ai,ij,aj->a", pset.kets.conj(), rho, pset.kets).real


def build_forward_matrix(pset: ProjectorSet) -> ForwardMapMatrix:
    """Row alpha is K . herm_to_coords(P_alpha): off-diagonal coordinates doubled."""
    n = pset.dim
    coords = np.array([herm_to_coords(p) for p in pset.projectors])
    entries = coords @ coords_metric(n)
    entries.setflags(write=False)
    return ForwardMapMatrix(set_label=pset.label, entries=entries)


def _rank(matrix: np.ndarray, cutoff: float) -> int:
    singular = scipy.linalg.svdvals(matrix)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > cutoff * singular[0]))


def rank_of_projector_span(pset: ProjectorSet, tol: Tolerances | None = None) -> int:
    return _rank(build_forward_matrix(pset).entries, resolve(tol).rank_cutoff)


def _require_representative(pset: ProjectorSet, tol: Tolerances | None) -> np.ndarray:
    m = build_forward_matrix(pset).entries
    rank = _rank(m, resolve(tol).rank_cutoff)
    required = pset.dim**2
    if rank < required:
        raise NotRepresentative(rank, required)
    return m


def _closed_form_entries(n: int) -> np.ndarray:
    """Inverse of the standard minimal set, ordered z, x pairs, y pairs.

    Re rho_ab = p^x_ab - (p^z_a + p^z_b)/2 and Im rho_ab = (p^z_a + p^z_b)/2 - p^y_ab.
    """
    pairs = pair_indices(n)
    count = len(pairs)
    w = np.zeros((n * n, n * n))
    for k in range(n):
        w[k, k] = 1.0
    for q, (a, b) in enumerate(pairs):
        re, im = n + 2 * q, n + 2 * q + 1
        x, y = n + q, n + count + q
        w[re, x] = 1.0
        w[re, [a, b]] = -0.5
        w[im, y] = -1.0
        w[im, [a, b]] = 0.5
    return w


@traced("build_right_inverse")
def build_right_inverse(pset: ProjectorSet, kind: InverseKind = "pseudoinverse", tol: Tolerances | None = None) -> RightInverse:
    tol = resolve(tol)
    m = _require_representative(pset, tol)
    n = pset.dim
    if kind == "closed_form":
        standard = build_standard_set(n, completed=False)
        if len(pset) != n * n or not np.allclose(pset.projectors, standard.projectors, atol=tol.unit_norm):
            raise ClosedFormUnavailable(f"closed-form inverse needs the standard minimal set for n={n}")
        entries = _closed_form_entries(n)
    else:
        entries = scipy.linalg.pinv(m, rtol=tol.rank_cutoff)
    entries.setflags(write=False)
    return RightInverse(set_label=pset.label, dim=n, entries=entries, kind=kind)


def image_projector(pset: ProjectorSet, w: RightInverse) -> np.ndarray:
    """M . W; the projector onto the image subspace V of the forward map."""
    return build_forward_matrix(pset).entries @ w.entries


def decompose_in_projectors(pset: ProjectorSet, target: HermitianMatrix, tol: Tolerances | None = None) -> np.ndarray:
    """Real c with sum_alpha c_alpha P_alpha = target (minimum norm)."""
    tol = resolve(tol)
    _require_representative(pset, tol)
    target = np.asarray(target, dtype=complex)
    if target.shape != (pset.dim, pset.dim):
        raise ShapeError(f"target has shape {target.shape}, set acts on dimension {pset.dim}")
    system = np.array([herm_to_coords(p) for p in pset.projectors]).T
    coefficients, *_ = scipy.linalg.lstsq(system, herm_to_coords(target))
    return coefficients


def build_standard_set(n: int, completed: bool = False) -> ProjectorSet:
    """|a>; (|a>+|b>)/sqrt2; (|a>+i|b>)/sqrt2 for a < b, plus the minus-sign
    families when ``completed`` (2n**2 - n kets)."""
    if n < 2:
        raise ShapeError("standard set needs n >= 2")
    eye = np.eye(n, dtype=complex)
    pairs = pair_indices(n)
    families = [[eye[a] for a in range(n)]]
    signs = [(1, 1j), (-1, -1j)] if completed else [(1, 1j)]
    for real_sign, imag_sign in signs:
        families.append([(eye[a] + real_sign * eye[b]) / np.sqrt(2) for a, b in pairs])
        families.append([(eye[a] + imag_sign * eye[b]) / np.sqrt(2) for a, b in pairs])
    kets = [v for family in families for v in family]
    label = f"standard-{n}" + ("-completed" if completed else "")
    return ProjectorSet.from_kets(kets, label=label)


def _deduplicate(pset: ProjectorSet, tol: Tolerances) -> tuple[ProjectorSet, list[int], list[int]]:
    """Collapse kets equal up to phase.

    Returns the reduced set, the original index of each kept ket, and for
    every original ket the position of its kept copy.
    """
    overlaps = np.abs(pset.kets.conj() @ pset.kets.T)
    kept: list[int] = []
    owner: list[int] = []
    for alpha in range(len(pset)):
        same = [pos for pos, beta in enumerate(kept) if overlaps[alpha, beta] >= 1.0 - tol.orthogonality]
        if same:
            owner.append(same[0])
        else:
            owner.append(len(kept))
            kept.append(alpha)
    if len(kept) < len(pset):
        logger.warning(
            "collapsed %d duplicate kets in set %r before classification",
            len(pset) - len(kept),
            pset.label,
        )
        return pset.subset(kept), kept, owner
    return pset, kept, owner


def completions_of(pset: ProjectorSet, index: int, node_budget: int = 200_000, tol: Tolerances | None = None) -> list[tuple[int, ...]]:
    """Every set of n-1 kets completing ket ``index`` to an orthonormal basis."""
    tol = resolve(tol)
    adjacency = orthogonality_graph(pset.kets, tol.orthogonality)
    return completions(adjacency, index, pset.dim - 1, NodeBudget(node_budget))


@traced("classify")
def classify(
    pset: ProjectorSet,
    search_limit: int = 64,
    max_dim: int = 16,
    node_budget: int = 200_000,
    tol: Tolerances | None = None,
) -> Classification:
    """Classify as representative / minimal / complete / almost perfect / perfect.

    Raises SearchBudgetExceeded, carrying the partial classification, when the
    combinatorial phases are out of budget.
    """
    tol = resolve(tol)
    work, kept, owner = _deduplicate(pset, tol)
    n = work.dim
    rank = rank_of_projector_span(work, tol)
    representative = rank == n * n
    base = dict(
        size=len(work),
        dim=n,
        rank=rank,
        representative=representative,
        minimal=representative and len(work) == n * n,
        duplicates_removed=len(pset) - len(work),
    )

    if len(work) > search_limit or n > max_dim:
        partial = Classification(**base)
        raise SearchBudgetExceeded(
            f"{len(work)} kets in dimension {n} exceed the search limits ({search_limit} kets, dim {max_dim})",
            partial,
        )

    budget = NodeBudget(node_budget)
    adjacency = orthogonality_graph(work.kets, tol.orthogonality)
    try:
        found = [completions(adjacency, alpha, n - 1, budget) for alpha in range(len(work))]
        counts = [len(c) for c in found]
        complete = all(counts)
        bases = {frozenset((alpha, *c)) for alpha, cs in enumerate(found) for c in cs}
        partition = ExactCoverSolver(range(len(work)), bases, budget).solve() if complete else None
    except BudgetExhausted as exc:
        logger.warning("classification of %r stopped: %s", pset.label, exc)
        raise SearchBudgetExceeded(str(exc), Classification(**base)) from exc

    perfect = complete and all(c == 1 for c in counts)
    witness = None
    for alpha, cs in enumerate(found):
        if len(cs) >= 2:
            witness = PerfectionWitness(
                ket=kept[alpha],
                first=[kept[j] for j in cs[0]],
                second=[kept[j] for j in cs[1]],
            )
            break

    return Classification(
        **base,
        complete=complete,
        almost_perfect=partition is not None,
        perfect=perfect,
        basis_partition=[sorted(kept[j] for j in basis) for basis in partition] if partition else None,
        completion_counts=[counts[pos] for pos in owner],
        witness=witness,
    )


def compose_sets(s1: ProjectorSet, s2: ProjectorSet) -> ProjectorSet:
    """Kets v_alpha (x) u_beta, alpha most significant."""
    kets = np.einsum("ai,bj->abij", s1.kets, s2.kets).reshape(len(s1) * len(s2), s1.dim * s2.dim)
    kets.setflags(write=False)
    return ProjectorSet(dim=s1.dim * s2.dim, kets=kets, label=f"{s1.label}*{s2.label}")


def _entries_from_coefficients(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    w = np.empty((n * n, c.shape[2]))
    for k in range(n):
        w[k] = c[k, k].real
    for q, (a, b) in enumerate(pair_indices(n)):
        w[n + 2 * q] = c[a, b].real
        w[n + 2 * q + 1] = c[a, b].imag
    return w


def compose_right_inverse(w1: RightInverse, w2: RightInverse) -> RightInverse:
    """Right inverse of the composed set from c[(k1k2),(l1l2),(ab)] = c1[k1,l1,a] c2[k2,l2,b]."""
    c1, c2 = w1.coefficients, w2.coefficients
    n, m = w1.dim, w2.dim
    c = np.einsum("ija,klb->ikjlab", c1, c2).reshape(n * m, n * m, c1.shape[2] * c2.shape[2])
    entries = _entries_from_coefficients(c)
    entries.setflags(write=False)
    return RightInverse(set_label=f"{w1.set_label}*{w2.set_label}", dim=n * m, entries=entries, kind="composed")


@traced("build_affine_inverse")
def build_affine_inverse(pset: ProjectorSet, tol: Tolerances | None = None) -> AffineInverse:
    """Affine reconstruction from n**2 - 1 probabilities on trace-one matrices."""
    tol = resolve(tol)
    n = pset.dim
    free = n * n - 1
    if len(pset) != free:
        raise NotAffineReconstructible(
            abs(len(pset) - free), f"affine inverse needs exactly {free} kets, set has {len(pset)}"
        )
    m = build_forward_matrix(pset).entries
    trace_row = np.zeros((1, n * n))
    trace_row[0, :n] = 1.0
    traceless = scipy.linalg.null_space(trace_row)
    restricted = m @ traceless
    rank = _rank(restricted, tol.rank_cutoff)
    if rank < free:
        raise NotAffineReconstructible(free - rank)
    center = herm_to_coords(np.eye(n) / n)
    matrix_part = traceless @ np.linalg.inv(restricted)
    offset = coords_to_herm(center - matrix_part @ (m @ center))
    return AffineInverse(set_label=pset.label, matrix_part=matrix_part, offset=offset)


def decompose_complex(pset: ProjectorSet, target: ComplexMatrix, w: RightInverse) -> np.ndarray:
    """Complex c with sum_alpha c_alpha P_alpha = target, read off the coefficient tensor.

    E_lk = sum_alpha c[k, l, alpha] P_alpha, so target = sum_kl t_lk E_lk.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (pset.dim, pset.dim):
        raise ShapeError(f"target has shape {target.shape}, set acts on dimension {pset.dim}")
    return np.einsum("lk,kla->a", target, w.coefficients)
