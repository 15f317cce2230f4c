"""Vertex subsets and the near-balance arithmetic shared by solvers and trimmers.

The defining predicate is strict: a set with a vertices on L and b on R is
gamma-balanced when |a - gamma*(a+b)| < 1. Every helper here reduces to
integer searches against that predicate, so boundary behaviour is identical
wherever balance is consulted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError


def check_gamma(gamma: float) -> None:
    if not (0.0 < gamma <= 0.5):
        raise ParameterError(f"gamma must lie in (0, 1/2], got {gamma}")


@dataclass(frozen=True)
class VertexSubset:
    """A subset of the 2n vertices, tracked per side."""

    in_l: frozenset
    in_r: frozenset

    @staticmethod
    def of(in_l: Iterable[int] = (), in_r: Iterable[int] = ()) -> "VertexSubset":
        return VertexSubset(frozenset(int(i) for i in in_l), frozenset(int(i) for i in in_r))

    @property
    def count_l(self) -> int:
        return len(self.in_l)

    @property
    def count_r(self) -> int:
        return len(self.in_r)

    @property
    def size(self) -> int:
        return len(self.in_l) + len(self.in_r)

    def union(self, other: "VertexSubset") -> "VertexSubset":
        return VertexSubset(self.in_l | other.in_l, self.in_r | other.in_r)

    def difference(self, other: "VertexSubset") -> "VertexSubset":
        return VertexSubset(self.in_l - other.in_l, self.in_r - other.in_r)

    def intersection(self, other: "VertexSubset") -> "VertexSubset":
        return VertexSubset(self.in_l & other.in_l, self.in_r & other.in_r)

    def symmetric_difference_size(self, other: "VertexSubset") -> int:
        return len(self.in_l ^ other.in_l) + len(self.in_r ^ other.in_r)


EMPTY_SUBSET = VertexSubset(frozenset(), frozenset())


def is_balanced_counts(a: int, b: int, gamma: float) -> bool:
    """The strict balance predicate on side counts."""
    return abs(a - gamma * (a + b)) < 1.0


def is_gamma_balanced(subset: VertexSubset, gamma: float) -> bool:
    check_gamma(gamma)
    return is_balanced_counts(subset.count_l, subset.count_r, gamma)


def best_b_for_a(a: int, b_cap: int, gamma: float) -> int | None:
    """Largest b <= b_cap with (a, b) balanced, or None.

    The valid b form an open real interval of width 2/gamma around
    a*(1-gamma)/gamma; we scan a small window downward against the exact
    predicate so float rounding at the boundary can never disagree with
    ``is_balanced_counts``.
    """
    if b_cap < 0:
        return None
    upper = (a * (1.0 - gamma) + 1.0) / gamma
    lower = (a * (1.0 - gamma) - 1.0) / gamma
    start = min(b_cap, int(upper) + 2)
    stop = max(0, int(lower) - 2)
    for b in range(start, stop - 1, -1):
        if is_balanced_counts(a, b, gamma):
            return b
    return None


def best_a_for_b(b: int, a_cap: int, gamma: float) -> int | None:
    """Largest a <= a_cap with (a, b) balanced, or None."""
    if a_cap < 0:
        return None
    upper = (gamma * b + 1.0) / (1.0 - gamma)
    lower = (gamma * b - 1.0) / (1.0 - gamma)
    start = min(a_cap, int(upper) + 2)
    stop = max(0, int(lower) - 2)
    for a in range(start, stop - 1, -1):
        if is_balanced_counts(a, b, gamma):
            return a
    return None


def max_balanced_pair(a: int, b: int, gamma: float) -> tuple[int, int]:
    """Side counts of a maximum-total balanced pair dominated by (a, b).

    Any balanced (a', b') with a' <= a, b' <= b extends, one unit at a time,
    to a balanced pair with a' = a or b' = b, so only the two one-sided
    candidates need comparing. At least one always exists ((0, 0) is
    balanced), so this never fails for a, b >= 0.
    """
    check_gamma(gamma)
    if a < 0 or b < 0:
        raise ParameterError("side counts must be non-negative")
    best: tuple[int, int] | None = None
    bb = best_b_for_a(a, b, gamma)
    if bb is not None:
        best = (a, bb)
    aa = best_a_for_b(b, a, gamma)
    if aa is not None and (best is None or aa + b > best[0] + best[1]):
        best = (aa, b)
    if best is None:
        raise AssertionError(f"no balanced sub-pair found for ({a}, {b}, {gamma})")
    return best


def max_balanced_total(a_cap: int, b_cap: int, gamma: float) -> int:
    """Max total of a balanced pair within the rectangle [0,a_cap]x[0,b_cap]."""
    a2, b2 = max_balanced_pair(a_cap, b_cap, gamma)
    return a2 + b2


def independence_violation(graph, subset: VertexSubset) -> tuple[int, int] | None:
    """First edge of the graph with both endpoints inside the subset, or None."""
    if not subset.in_l or not subset.in_r:
        return None
    n = graph.n
    mask_l = np.zeros(n, dtype=bool)
    mask_l[list(subset.in_l)] = True
    mask_r = np.zeros(n, dtype=bool)
    mask_r[list(subset.in_r)] = True
    both = mask_l[graph.el] & mask_r[graph.er]
    hits = np.flatnonzero(both)
    if hits.size == 0:
        return None
    k = int(hits[0])
    return int(graph.el[k]), int(graph.er[k])


def is_independent(graph, subset: VertexSubset) -> bool:
    return independence_violation(graph, subset) is None
