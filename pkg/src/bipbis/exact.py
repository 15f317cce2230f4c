"""Exact maximum gamma-balanced independent sets on small instances.

The search space collapses from 4^n to 2^n by observing that once the L-side
trace of an independent set is fixed, the best R-side is forced: take as many
unblocked R-vertices as balance allows. Branch-and-bound explores L-traces
with an optimistic balanced-total bound; a plain ascending-mask enumeration
over the same traces serves as the in-library oracle.

Witnesses are tie-broken to the lexicographically smallest (in_l, in_r)
bitset pair, so every caller sees one deterministic answer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .balance import (VertexSubset, best_b_for_a, check_gamma,
                      is_balanced_counts, max_balanced_total)
from .errors import CapacityError
from .graph import BipartiteGraph

DEFAULT_ENUMERATION_LIMIT = 16
DEFAULT_BB_LIMIT = 32
_ENUMERATION_HARD_CAP = 20  # 2^n blocked-mask table


def _check_capacity(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise CapacityError(
            f"{what} supports n <= {limit} per side, got n = {n}; "
            f"raise the limit explicitly if you accept the cost")


def _bitset_rows(graph: BipartiteGraph) -> list[int]:
    """R-neighborhood of each L vertex as an integer bitmask."""
    rows = [0] * graph.n
    for l, r in zip(graph.el.tolist(), graph.er.tolist()):
        rows[l] |= 1 << r
    return rows


def _blocked_table(rows: list[int], n: int) -> list[int]:
    """blocked[mask] = union of R-neighborhoods over the L vertices in mask."""
    table = [0] * (1 << n)
    for mask in range(1, 1 << n):
        lsb = mask & -mask
        table[mask] = table[mask ^ lsb] | rows[lsb.bit_length() - 1]
    return table


def _lowest_bits_subset(mask: int, count: int) -> frozenset:
    out = []
    idx = 0
    while len(out) < count:
        if mask & 1:
            out.append(idx)
        mask >>= 1
        idx += 1
    return frozenset(out)


def _witness_from_trace(l_mask: int, blocked: int, b: int, n: int) -> VertexSubset:
    in_l = frozenset(i for i in range(n) if (l_mask >> i) & 1)
    unblocked = ~blocked & ((1 << n) - 1)
    return VertexSubset(in_l, _lowest_bits_subset(unblocked, b))


def enumerate_max_gamma_balanced(
    graph: BipartiteGraph, gamma: float, limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> tuple[int, VertexSubset]:
    """Ascending scan over all 2^n L-traces; the forced-R completion makes
    this equivalent to enumerating every subset of the 2n vertices."""
    check_gamma(gamma)
    n = graph.n
    _check_capacity(n, min(limit, _ENUMERATION_HARD_CAP), "enumeration")
    rows = _bitset_rows(graph)
    blocked = _blocked_table(rows, n)
    best = -1
    best_trace = (0, 0, 0)  # (l_mask, blocked, b)
    for mask in range(1 << n):
        a = mask.bit_count()
        u = n - blocked[mask].bit_count()
        b = best_b_for_a(a, u, gamma)
        if b is None:
            continue
        if a + b > best:
            best = a + b
            best_trace = (mask, blocked[mask], b)
    return best, _witness_from_trace(*best_trace, n)


def max_gamma_balanced_is(
    graph: BipartiteGraph, gamma: float, limit: int = DEFAULT_BB_LIMIT,
) -> tuple[int, VertexSubset]:
    """Branch-and-bound over L-traces; agrees with full enumeration wherever
    both run, including the lexicographic witness."""
    check_gamma(gamma)
    n = graph.n
    _check_capacity(n, limit, "branch-and-bound")
    rows = _bitset_rows(graph)
    full = (1 << n) - 1
    # prune bound cache: max balanced total inside [0, a_cap] x [0, u]
    bound_cache: dict[tuple[int, int], int] = {}

    def bound(a_cap: int, u: int) -> int:
        key = (a_cap, u)
        got = bound_cache.get(key)
        if got is None:
            got = max_balanced_total(a_cap, u, gamma)
            bound_cache[key] = got
        return got

    def trace_total(a: int, u: int) -> int:
        b = best_b_for_a(a, u, gamma)
        return -1 if b is None else a + b

    # high-degree vertices first: including them blocks the most, so both
    # branches diverge quickly and the bound bites early
    order = sorted(range(n), key=lambda i: (-rows[i].bit_count(), i))

    # greedy incumbent: grow the trace low-degree-first, score every prefix
    best = trace_total(0, n)
    asc = order[::-1]
    blocked_acc = 0
    for k, v in enumerate(asc, start=1):
        blocked_acc |= rows[v]
        t = trace_total(k, n - blocked_acc.bit_count())
        if t > best:
            best = t

    def search(i: int, a: int, blocked: int) -> None:
        nonlocal best
        u = n - blocked.bit_count()
        if bound(a + (n - i), u) <= best:
            return
        if i == n:
            t = trace_total(a, u)
            if t > best:
                best = t
            return
        v = order[i]
        search(i + 1, a + 1, blocked | rows[v])
        search(i + 1, a, blocked)

    search(0, 0, 0)
    target = best

    # Second pass: lexicographically smallest optimal witness. Decide vertices
    # from the highest index down, preferring exclusion; a choice is kept iff
    # the remaining free vertices can still complete to the optimum.
    def reachable(free: list[int], a0: int, blocked0: int) -> bool:
        free = sorted(free, key=lambda i: (-rows[i].bit_count(), i))

        def go(i: int, a: int, blocked: int) -> bool:
            u = n - blocked.bit_count()
            if bound(a + (len(free) - i), u) < target:
                return False
            if trace_total(a, u) >= target:
                return True
            if i == len(free):
                return False
            v = free[i]
            return go(i + 1, a + 1, blocked | rows[v]) or go(i + 1, a, blocked)

        return go(0, a0, blocked0)

    chosen_mask = 0
    chosen_blocked = 0
    a = 0
    undecided = list(range(n))
    for v in range(n - 1, -1, -1):
        undecided.remove(v)
        if reachable(undecided, a, chosen_blocked):
            continue  # v can stay out
        chosen_mask |= 1 << v
        chosen_blocked |= rows[v]
        a += 1
    u = n - chosen_blocked.bit_count()
    b = target - a
    assert 0 <= b <= u and is_balanced_counts(a, b, gamma)
    return target, _witness_from_trace(chosen_mask, chosen_blocked, b, n)


@dataclass(frozen=True)
class ParetoProfile:
    """For every L-side size a, the maximum R-side size b over independent
    sets, each entry witnessed."""

    entries: tuple[tuple[int, int], ...]
    witnesses: tuple[VertexSubset, ...]

    def max_b(self, a: int) -> int:
        return self.entries[a][1]


def pareto_profile(graph: BipartiteGraph, limit: int = DEFAULT_ENUMERATION_LIMIT) -> ParetoProfile:
    n = graph.n
    _check_capacity(n, min(limit, _ENUMERATION_HARD_CAP), "pareto profile")
    rows = _bitset_rows(graph)
    blocked = _blocked_table(rows, n)
    best_b = [-1] * (n + 1)
    best_mask = [0] * (n + 1)
    for mask in range(1 << n):
        a = mask.bit_count()
        u = n - blocked[mask].bit_count()
        if u > best_b[a]:
            best_b[a] = u
            best_mask[a] = mask
    entries = []
    witnesses = []
    for a in range(n + 1):
        mask = best_mask[a]
        b = best_b[a]
        entries.append((a, b))
        witnesses.append(_witness_from_trace(mask, blocked[mask], b, n))
    for a in range(1, n + 1):  # sanity: dominance forces a monotone profile
        assert entries[a][1] <= entries[a - 1][1]
    return ParetoProfile(tuple(entries), tuple(witnesses))


def max_joint_intersection(
    graph: BipartiteGraph, s: VertexSubset, limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> int:
    """Max over independent sets I of min(|I & s & L|, |I & s & R|).

    Vertices outside s neither help nor hurt, so the search restricts to the
    induced subgraph on s.
    """
    n = graph.n
    _check_capacity(n, min(limit, _ENUMERATION_HARD_CAP), "joint intersection")
    sl = sorted(s.in_l)
    sr = sorted(s.in_r)
    if not sl or not sr:
        return 0
    rpos = {r: k for k, r in enumerate(sr)}
    rows = []
    for l in sl:
        mask = 0
        for r in graph.neighbors_l(l):
            k = rpos.get(int(r))
            if k is not None:
                mask |= 1 << k
        rows.append(mask)
    nl, nr = len(sl), len(sr)
    best = 0
    blocked = _blocked_table(rows, nl)
    for mask in range(1 << nl):
        a = mask.bit_count()
        u = nr - blocked[mask].bit_count()
        v = min(a, u)
        if v > best:
            best = v
    return best
