"""Interpolation paths, single-flip stability probes, and the overlap-chain
construction and checker.

The path resamples one edge coordinate per step from Ber(d/n), sweeping the
fixed coordinate order cyclically, so the marginal law of every step is the
original random graph and any m consecutive steps refresh every coordinate.
Paths are stored as (coordinate, resampled bit) deltas; graphs are
materialized on demand.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .balance import VertexSubset, independence_violation
from .errors import ParameterError
from .exact import DEFAULT_ENUMERATION_LIMIT, pareto_profile
from .graph import BipartiteGraph, sample_bipartite_graph
from .local import LocalFunctionPair, VertexLabels, pair_decisions
from .lowdeg import check_polynomial_output
from .rng import RESAMPLE_DRAW, RandomSeed
from .stats import wilson_interval

# Counting comparisons against real thresholds get this slack; it keeps the
# greedy selector and the chain checker consistent at exact-boundary values.
COUNT_TOLERANCE = 1e-9


def coordinate_at_step(n: int, t: int) -> int:
    """Cyclic coordinate schedule over [1, n^2]: step t resamples t - k*m."""
    if t < 1:
        raise ParameterError(f"steps are numbered from 1, got {t}")
    m = n * n
    return (t - 1) % m + 1


@dataclass(frozen=True)
class InterpolationPath:
    """Base graph plus T (coordinate, resampled bit) deltas."""

    base: BipartiteGraph
    d: float
    sigmas: np.ndarray  # 1-based coordinates, shape (T,)
    bits: np.ndarray    # resampled values, shape (T,)

    @property
    def length(self) -> int:
        return int(self.sigmas.size)

    @property
    def n(self) -> int:
        return self.base.n

    def _final_coordinate_states(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """(touched coordinates 0-based, their last resampled bit) within steps 1..t."""
        touched = self.sigmas[:t][::-1]
        vals = self.bits[:t][::-1]
        uniq, first = np.unique(touched, return_index=True)
        return uniq - 1, vals[first]

    def edge_coordinates_at(self, t: int) -> np.ndarray:
        """Sorted 0-based edge coordinates of the step-t graph."""
        if not (0 <= t <= self.length):
            raise ParameterError(f"t must lie in [0, {self.length}], got {t}")
        if t == 0:
            return self.base.coords
        touched, last_bits = self._final_coordinate_states(t)
        keep_base = self.base.coords[~np.isin(self.base.coords, touched)]
        added = touched[last_bits == 1]
        return np.union1d(keep_base, added)

    def materialize(self, t: int) -> BipartiteGraph:
        if t == 0:
            return self.base
        return BipartiteGraph(self.n, self.edge_coordinates_at(t))

    def edge_count_at(self, t: int) -> int:
        return int(self.edge_coordinates_at(t).size)


def build_interpolation_path(
    base: BipartiteGraph, T: int, d: float, seed: RandomSeed,
) -> InterpolationPath:
    """Draw all T resample bits up front (a bit is drawn even when it repeats
    the current value, matching the resampling law and keeping seed
    accounting trivial)."""
    if T < 0:
        raise ParameterError(f"path length must be non-negative, got {T}")
    n = base.n
    if not (0.0 < d < n):
        raise ParameterError(f"d must satisfy 0 < d < n, got d={d}, n={n}")
    m = n * n
    sigmas = (np.arange(1, T + 1, dtype=np.int64) - 1) % m + 1
    bits = (seed.generator(RESAMPLE_DRAW).random(T) < d / n).astype(np.uint8)
    sigmas.setflags(write=False)
    bits.setflags(write=False)
    return InterpolationPath(base=base, d=d, sigmas=sigmas, bits=bits)


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityConfig:
    """Threshold bookkeeping for single-flip stability.

    ``norm_estimate`` stands in for the exact expectation E||f||^2, which is
    unavailable; reports carry the substituted value.
    """

    c: float
    gamma_steps: int
    degree: int
    norm_estimate: float

    def __post_init__(self):
        if self.c <= 0:
            raise ParameterError("c must be positive")
        if self.gamma_steps < 1:
            raise ParameterError("gamma_steps must be a positive integer")
        if self.degree < 1:
            raise ParameterError("degree must be a positive integer")
        if self.norm_estimate <= 0:
            raise ParameterError("norm_estimate must be positive")

    @property
    def badness_threshold(self) -> float:
        return self.c * self.norm_estimate

    def probability_floor(self, n: int, d: float) -> float:
        return (d / n) ** (4.0 * self.gamma_steps * self.degree / self.c)


def detect_bad_steps(
    f, path: InterpolationPath, config: StabilityConfig, force_full: bool = False,
) -> list[int]:
    """Steps t whose single-coordinate flip moves f by at least
    c * norm_estimate in squared norm. Exact, no sampling within a step.

    Uses the polynomial's O(1) flip rule when it has one; ``force_full``
    re-evaluates from materialized graphs instead (the two must agree).
    """
    threshold = config.badness_threshold
    n = path.n
    bad: list[int] = []
    incremental = hasattr(f, "norm_delta_sq_on_flip") and not force_full
    if incremental:
        state = np.zeros(n * n, dtype=np.uint8)
        state[path.base.coords] = 1
        for t in range(1, path.length + 1):
            coord = int(path.sigmas[t - 1]) - 1
            old_bit = int(state[coord])
            new_bit = int(path.bits[t - 1])
            l, r = divmod(coord, n)
            dsq = float(f.norm_delta_sq_on_flip(l, r, old_bit, new_bit))
            if dsq >= threshold:
                bad.append(t)
            state[coord] = new_bit
        return bad
    prev = check_polynomial_output(f.evaluate(path.base), n)
    for t in range(1, path.length + 1):
        cur = check_polynomial_output(f.evaluate(path.materialize(t)), n)
        diff = cur - prev
        if float(diff @ diff) >= threshold:
            bad.append(t)
        prev = cur
    return bad


@dataclass(frozen=True)
class StabilityReport:
    trials: int
    no_bad_count: int
    empirical_probability: float
    wilson_low: float
    wilson_high: float
    floor: float
    norm_estimate: float

    @property
    def above_floor(self) -> bool:
        return self.empirical_probability >= self.floor


def stability_trial(
    make_f,
    n: int,
    d: float,
    gamma_steps: int,
    c: float,
    degree: int,
    trials: int,
    seed: RandomSeed,
    norm_estimate: Optional[float] = None,
    norm_trials: int = 30,
    step_budget: int = 20_000_000,
) -> StabilityReport:
    """Empirical probability that a length gamma_steps*n^2 path has no bad
    step, against the floor (d/n)^(4*gamma_steps*degree/c).

    ``make_f`` is a factory called with the per-trial seed (coefficient
    randomness, labels of a wrapped local pair, ...). When ``norm_estimate``
    is omitted it is measured on dedicated streams first.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    total_steps = gamma_steps * n * n * trials
    if total_steps > step_budget:
        warnings.warn(
            f"stability_trial will evaluate {total_steps} path steps, above the "
            f"budget of {step_budget}; expect a long run", stacklevel=2)
    if norm_estimate is None:
        from .lowdeg import norm_second_moment

        norm_estimate, _ = norm_second_moment(
            make_f, n, d, trials=norm_trials, seed=seed.shifted(1_000_000))
    config = StabilityConfig(c=c, gamma_steps=gamma_steps, degree=degree,
                             norm_estimate=norm_estimate)
    T = gamma_steps * n * n
    good = 0
    for t in range(trials):
        trial_seed = seed.shifted(t)
        f = make_f(trial_seed) if callable(make_f) and not hasattr(make_f, "evaluate") else make_f
        base = sample_bipartite_graph(n, d, trial_seed)
        path = build_interpolation_path(base, T, d, trial_seed)
        if not detect_bad_steps(f, path, config):
            good += 1
    p = good / trials
    lo, hi = wilson_interval(good, trials)
    return StabilityReport(
        trials=trials,
        no_bad_count=good,
        empirical_probability=p,
        wilson_low=lo,
        wilson_high=hi,
        floor=config.probability_floor(n, d),
        norm_estimate=norm_estimate,
    )


@dataclass(frozen=True)
class LocalPairVectorFunction:
    """A compatible pair with frozen labels, viewed as a 0/1-valued vector
    function of the graph (for stability probes)."""

    pair: LocalFunctionPair
    labels: VertexLabels
    degree: int = 1

    @property
    def n(self) -> int:
        return self.labels.n

    def evaluate(self, graph: BipartiteGraph) -> np.ndarray:
        sel_l, sel_r = pair_decisions(graph, self.pair, self.labels)
        return np.concatenate([sel_l, sel_r]).astype(float)


# ---------------------------------------------------------------------------
# The overlap chain: greedy construction and per-condition checker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapChainParams:
    """Scale parameters for the overlap chain: epsilon, chain length K, and
    the density scale phi = (log d / d) * n.

    The probability analysis wants K >= ceil(9/epsilon^2) + 1; the mechanics
    of the constructor and checker work for any K >= 2, so that bound is
    exposed as a property rather than enforced.
    """

    epsilon: float
    K: int
    phi: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ParameterError("epsilon must be positive")
        if self.K < 2:
            raise ParameterError("K must be at least 2")
        if self.phi <= 0:
            raise ParameterError("phi must be positive")

    @staticmethod
    def for_scale(epsilon: float, K: int, n: int, d: float) -> "OverlapChainParams":
        if d <= 1:
            raise ParameterError("d must exceed 1 for a positive density scale")
        return OverlapChainParams(epsilon, K, math.log(d) / d * n)

    @property
    def new_mass_min(self) -> float:
        return self.epsilon / 4.0 * self.phi

    @property
    def new_mass_max(self) -> float:
        return self.epsilon / 2.0 * self.phi

    @property
    def density_min(self) -> float:
        return (1.0 + self.epsilon) * self.phi

    @property
    def satisfies_chain_length_bound(self) -> bool:
        return self.K >= math.ceil(9.0 / self.epsilon**2) + 1


@dataclass(frozen=True)
class GreedyChainResult:
    sets: tuple[VertexSubset, ...]
    timestamps: tuple[int, ...]
    success: bool


def greedy_overlap_chain(
    path_sets: Sequence[VertexSubset], params: OverlapChainParams,
) -> GreedyChainResult:
    """Greedy selection along the path: the first set is kept outright, then
    each next pick is the first set contributing at least (epsilon/4)*phi
    vertices outside the union so far. Succeeds iff K sets are selected."""
    if not path_sets:
        raise ParameterError("path_sets must be non-empty")
    threshold = params.new_mass_min - COUNT_TOLERANCE
    sets = [path_sets[0]]
    timestamps = [0]
    union_l = set(path_sets[0].in_l)
    union_r = set(path_sets[0].in_r)
    t = 1
    while len(sets) < params.K and t < len(path_sets):
        v = path_sets[t]
        new_mass = len(v.in_l - union_l) + len(v.in_r - union_r)
        if new_mass >= threshold:
            sets.append(v)
            timestamps.append(t)
            union_l |= v.in_l
            union_r |= v.in_r
        t += 1
    return GreedyChainResult(tuple(sets), tuple(timestamps), len(sets) == params.K)


@dataclass(frozen=True)
class OverlapChainReport:
    """Per-condition verdicts for a candidate chain.

    Condition 1: each set is independent in its timestamped graph.
    Condition 2: each set has at least (1+epsilon)*phi vertices on both sides.
    Condition 3: each later set contributes new mass in
                 [(epsilon/4)*phi, (epsilon/2)*phi].
    """

    independent_ok: tuple[bool, ...]
    independence_witnesses: tuple[Optional[tuple[int, int]], ...]
    density_ok: tuple[bool, ...]
    new_mass_ok: tuple[bool, ...]
    new_masses: tuple[int, ...]

    @property
    def condition1(self) -> bool:
        return all(self.independent_ok)

    @property
    def condition2(self) -> bool:
        return all(self.density_ok)

    @property
    def condition3(self) -> bool:
        return all(self.new_mass_ok)

    @property
    def present(self) -> bool:
        return self.condition1 and self.condition2 and self.condition3

    def conditions_bitmask(self) -> int:
        return (1 if self.condition1 else 0) | (2 if self.condition2 else 0) | (4 if self.condition3 else 0)


def check_overlap_chain(
    sets: Sequence[VertexSubset],
    timestamps: Sequence[int],
    path: InterpolationPath,
    params: OverlapChainParams,
) -> OverlapChainReport:
    """Verify the three chain conditions independently and report which fail."""
    if len(sets) != len(timestamps):
        raise ParameterError("sets and timestamps must have equal length")
    for t in timestamps:
        if not (0 <= t <= path.length):
            raise ParameterError(f"timestamp {t} outside [0, {path.length}]")
    ind_ok = []
    witnesses = []
    for s, t in zip(sets, timestamps):
        w = independence_violation(path.materialize(t), s)
        ind_ok.append(w is None)
        witnesses.append(w)
    dens_min = params.density_min - COUNT_TOLERANCE
    density_ok = [s.count_l >= dens_min and s.count_r >= dens_min for s in sets]
    new_mass_ok = [True]
    new_masses = [sets[0].size if sets else 0]
    union_l: set = set(sets[0].in_l) if sets else set()
    union_r: set = set(sets[0].in_r) if sets else set()
    for s in sets[1:]:
        mass = len(s.in_l - union_l) + len(s.in_r - union_r)
        new_masses.append(mass)
        new_mass_ok.append(
            params.new_mass_min - COUNT_TOLERANCE <= mass <= params.new_mass_max + COUNT_TOLERANCE)
        union_l |= s.in_l
        union_r |= s.in_r
    return OverlapChainReport(
        independent_ok=tuple(ind_ok),
        independence_witnesses=tuple(witnesses),
        density_ok=tuple(density_ok),
        new_mass_ok=tuple(new_mass_ok),
        new_masses=tuple(new_masses),
    )


# ---------------------------------------------------------------------------
# Pareto balance probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BalanceProbeReport:
    trials: int
    violating_graphs: int
    violation_rate: float
    wilson_low: float
    wilson_high: float


def profile_violates_balance_inequality(graph: BipartiteGraph, d: float,
                                        limit: int = DEFAULT_ENUMERATION_LIMIT) -> bool:
    """Does any Pareto-profile point of the graph, in units of (log d / d)*n,
    have sum of side densities strictly below their product?"""
    if d <= 1:
        raise ParameterError("d must exceed 1 for a positive density scale")
    scale = math.log(d) / d * graph.n
    profile = pareto_profile(graph, limit=limit)
    for a, b in profile.entries:
        al = a / scale
        ar = b / scale
        if al + ar < al * ar:
            return True
    return False


def balance_inequality_probe(
    n: int, d: float, trials: int, seed: RandomSeed,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> BalanceProbeReport:
    """Fraction of sampled graphs whose Pareto profile (which dominates every
    independent set) contains a sum-below-product point. Reported with a
    Wilson interval, never asserted: the inequality is asymptotic in d."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    violations = 0
    for t in range(trials):
        graph = sample_bipartite_graph(n, d, seed.shifted(t))
        if profile_violates_balance_inequality(graph, d, limit=limit):
            violations += 1
    lo, hi = wilson_interval(violations, trials)
    return BalanceProbeReport(
        trials=trials,
        violating_graphs=violations,
        violation_rate=violations / trials,
        wilson_low=lo,
        wilson_high=hi,
    )
