"""Backtracking searches over the orthogonality graph of a ket set."""

from __future__ import annotations

from collections import defaultdict
from typing import AbstractSet, Collection, FrozenSet, Optional, Sequence

import numpy as np

Basis = FrozenSet[int]


class BudgetExhausted(Exception):
    """Raised internally when a search visits more nodes than allowed."""


class NodeBudget:
    def __init__(self, limit: int) -> None:
        self.limit = limit
        self.visited = 0

    def tick(self) -> None:
        self.visited += 1
        if self.visited > self.limit:
            raise BudgetExhausted(f"search visited more than {self.limit} nodes")


def orthogonality_graph(kets: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean adjacency: |<v_a|v_b>| below ``threshold``."""
    overlaps = np.abs(kets.conj() @ kets.T)
    adjacency = overlaps < threshold
    np.fill_diagonal(adjacency, False)
    return adjacency


def completions(adjacency: np.ndarray, index: int, size: int, budget: NodeBudget) -> list[tuple[int, ...]]:
    """All ``size``-subsets of neighbours of ``index`` that are pairwise orthogonal."""
    neighbours = [int(j) for j in np.flatnonzero(adjacency[index])]
    found: list[tuple[int, ...]] = []

    def extend(chosen: list[int], candidates: list[int]) -> None:
        budget.tick()
        if len(chosen) == size:
            found.append(tuple(chosen))
            return
        if len(chosen) + len(candidates) < size:
            return
        for position, j in enumerate(candidates):
            rest = [c for c in candidates[position + 1 :] if adjacency[j, c]]
            chosen.append(j)
            extend(chosen, rest)
            chosen.pop()

    extend([], neighbours)
    return found


class ExactCoverSolver:
    """Partition ``pieces`` into disjoint members of ``subsets``.

    Chooses the uncovered piece with the fewest candidate subsets first.
    """

    def __init__(self, pieces: Collection[int], subsets: AbstractSet[Basis], budget: NodeBudget):
        self.subsets = subsets
        self.budget = budget
        self.membership: dict[int, set[Basis]] = defaultdict(set)
        for subset in subsets:
            for element in subset:
                self.membership[element].add(subset)
        self.elements = frozenset(pieces)
        self.failed = not all(self.membership[elem] for elem in self.elements)

    def solve(self) -> Optional[Sequence[Basis]]:
        if self.failed:
            return None
        return self._solve(frozenset(), [])

    def _solve(self, covered: FrozenSet[int], selected: list[Basis]) -> Optional[Sequence[Basis]]:
        self.budget.tick()
        if self.elements == covered:
            return sorted(selected, key=sorted)

        uncovered = self.elements - covered
        piece = min(uncovered, key=lambda e: (sum(1 for s in self.membership[e] if covered.isdisjoint(s)), e))
        for subset in sorted(self.membership[piece], key=sorted):
            if not covered.isdisjoint(subset):
                continue
            output = self._solve(covered | subset, selected + [subset])
            if output is not None:
                return output
        return None
