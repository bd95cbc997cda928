"""Separation invariants: scale-r Cheeger constants, (r,δ)-cuts, L1-Poincaré.

All certified values are exact fractions.  Exhaustive modes enumerate
subsets under a cap; the cut solver does iterative deepening on separator
size (so the first witness found is minimal) ordered by articulation-point
and degree heuristics, pruned from below by the Cheeger bound
cut ≥ λ·h_r(A)·|A| with λ = min(1/4, (1-δ)/2)/β_X(r).

Float arithmetic appears only in the randomized Poincaré challenger, which
can contest the two-level optimum but never certifies anything.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .window import (
    GraphWindow,
    VertexSet,
    WindowError,
    k_components,
    multi_source_distances,
    neighbourhood,
    window_growth,
)

EXHAUSTIVE_CAP = 24


@dataclass
class InvariantReport:
    """Result of an invariant computation: exact value or certified interval.

    When `exact` is present, lower == exact == upper.  The witness (a vertex
    set for cuts and Cheeger, a function table for Poincaré) achieves the
    upper bound and is re-checkable independently.
    """

    kind: str
    params: dict
    lower: Fraction
    upper: Fraction
    exact: Optional[Fraction] = None
    witness: Optional[object] = None
    method: str = "exhaustive"
    trusted: bool = True
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exact is not None and not (self.lower <= self.exact <= self.upper):
            raise ValueError("inconsistent report bounds")


# ---------------------------------------------------------------------------
# Cheeger constant h_r(A)
# ---------------------------------------------------------------------------


def _ball_masks(w: GraphWindow, members: list[str], r: int) -> list[int]:
    """For each member, the bitmask of members within distance r of it."""
    index = {v: i for i, v in enumerate(members)}
    masks = []
    for v in members:
        reached = w.reached_distances(v, limit=r)
        m = 0
        for u, _ in reached.items():
            j = index.get(u)
            if j is not None:
                m |= 1 << j
        masks.append(m)
    return masks


def _boundary_size(w: GraphWindow, members: list[str], B_mask: int, r: int,
                   masks: list[int]) -> int:
    """|∂_r B ∩ A| where A = members: members within r of B but outside B."""
    cover = 0
    m = B_mask
    while m:
        low = m & -m
        cover |= masks[low.bit_length() - 1]
        m ^= low
    return (cover & ~B_mask).bit_count()


def cheeger(w: GraphWindow, A: VertexSet, r: int, mode: str = "exhaustive",
            cap: int = EXHAUSTIVE_CAP) -> InvariantReport:
    """h_r(A) = min |∂_r B ∩ A| / |B| over B ⊆ A with 0 < |B| <= |A|/2.

    Exhaustive mode (|A| <= cap) returns the exact minimum with a minimizing
    witness; heuristic mode grows connected nuclei greedily and returns an
    upper bound.  The trivial bound h_r(A) <= β_X(r) is attached either way.
    """
    if not A.members:
        raise WindowError("Cheeger constant of an empty set")
    if r < 1:
        raise WindowError("r must be >= 1")
    members = A.sorted_members()
    n = len(members)
    masks = _ball_masks(w, members, r)
    beta = Fraction(window_growth(w, r))
    half = n // 2  # |B| <= |A|/2 with integer sizes
    if half == 0:
        # single-point sets admit no valid B; the min over an empty family
        # is the trivial upper bound
        return InvariantReport("cheeger", {"r": r}, lower=beta, upper=beta,
                               exact=beta, witness=None, method="degenerate",
                               trusted=A.trusted, notes={"beta": beta})

    if mode == "exhaustive":
        if n > cap:
            raise WindowError(f"|A|={n} exceeds exhaustive cap {cap}")
        best: Optional[Fraction] = None
        best_mask = 0
        for B_mask in range(1, 1 << n):
            size = B_mask.bit_count()
            if size > half:
                continue
            ratio = Fraction(_boundary_size(w, members, B_mask, r, masks), size)
            if best is None or ratio < best:
                best, best_mask = ratio, B_mask
        witness = VertexSet(w, frozenset(members[i] for i in range(n)
                                         if best_mask >> i & 1), A.trusted)
        value = min(best, beta)
        return InvariantReport("cheeger", {"r": r}, lower=value, upper=value,
                               exact=value, witness=witness, method="exhaustive",
                               trusted=A.trusted and all(w.trusted_at(v, r) for v in members),
                               notes={"beta": beta})

    if mode == "heuristic":
        best = beta
        best_mask = 1
        for seed in range(n):
            B_mask = 1 << seed
            current = Fraction(_boundary_size(w, members, B_mask, r, masks), 1)
            if current < best:
                best, best_mask = current, B_mask
            while B_mask.bit_count() < half:
                step_best = None
                step_mask = None
                for j in range(n):
                    if B_mask >> j & 1:
                        continue
                    cand = B_mask | (1 << j)
                    ratio = Fraction(_boundary_size(w, members, cand, r, masks),
                                     cand.bit_count())
                    if step_best is None or ratio < step_best:
                        step_best, step_mask = ratio, cand
                B_mask = step_mask
                if step_best < best:
                    best, best_mask = step_best, B_mask
        witness = VertexSet(w, frozenset(members[i] for i in range(n)
                                         if best_mask >> i & 1), A.trusted)
        return InvariantReport("cheeger", {"r": r}, lower=Fraction(0), upper=best,
                               exact=None, witness=witness, method="sweep",
                               trusted=A.trusted, notes={"beta": beta})

    raise WindowError(f"unknown cheeger mode {mode!r}")


def check_cheeger_witness(w: GraphWindow, A: VertexSet, B: VertexSet, r: int) -> Fraction:
    """Independent re-evaluation of the ratio |∂_r B ∩ A| / |B|."""
    if not B.members or not B.members <= A.members:
        raise WindowError("witness must be a nonempty subset of A")
    thick = neighbourhood(w, B, r)
    return Fraction(len((thick.members - B.members) & A.members), len(B.members))


# ---------------------------------------------------------------------------
# (r, δ)-cuts
# ---------------------------------------------------------------------------


def is_cut(w: GraphWindow, A: VertexSet, S: frozenset[str], r: int,
           delta: Fraction) -> bool:
    """Does removing S leave all r-coarse components of A∖S of size <= δ|A|?

    Computed from scratch (window BFS per member), so it serves as the
    independent re-check for witnesses found by the mask-based solver.
    """
    threshold = delta * len(A.members)
    rest = A.members - S
    if not rest:
        return True
    comps = k_components(w, VertexSet(w, rest, A.trusted), r)
    return all(len(c) <= threshold for c in comps)


def _components_small(masks: list[int], alive: int, threshold: Fraction) -> bool:
    """Are all components of the mask-closeness graph on `alive` <= threshold?"""
    remaining = alive
    while remaining:
        comp = remaining & -remaining
        frontier = comp
        while frontier:
            grow = 0
            m = frontier
            while m:
                low = m & -m
                grow |= masks[low.bit_length() - 1]
                m ^= low
            grow &= alive & ~comp
            comp |= grow
            frontier = grow
        if comp.bit_count() > threshold:
            return False
        remaining &= ~comp
    return True


def _candidate_order(w: GraphWindow, A: VertexSet, r: int) -> list[str]:
    """Members of A ordered so promising separator vertices come first.

    Articulation points of the r-closeness graph on A first, then by degree
    (descending), ties by id.  Only affects search order, never the result.
    """
    members = A.sorted_members()
    near = {v: set() for v in members}
    for v in members:
        reached = w.reached_distances(v, limit=r)
        for u in reached:
            if u in near and u != v:
                near[v].add(u)

    def components_without(skip: Optional[str]) -> int:
        seen: set[str] = set()
        count = 0
        for v in members:
            if v == skip or v in seen:
                continue
            count += 1
            stack = [v]
            seen.add(v)
            while stack:
                x = stack.pop()
                for u in near[x]:
                    if u != skip and u not in seen:
                        seen.add(u)
                        stack.append(u)
        return count

    base = components_without(None)
    articulation = {v for v in members if components_without(v) > base}
    return sorted(members,
                  key=lambda v: (v not in articulation, -len(near[v]), v))


def cut(w: GraphWindow, A: VertexSet, r: int, delta: Fraction,
        mode: str = "exact", budget: Optional[int] = None) -> InvariantReport:
    """cut^δ_r(A): minimal size of S ⊆ A whose removal leaves all r-coarse
    components of A∖S with at most δ|A| vertices.

    Exact mode: iterative deepening on |S| (first witness is minimal), with
    the Cheeger lower bound attached.  If the subset budget runs out the
    report carries the certified interval found so far (never a wrong value).
    Degenerate conventions: the empty separator is admitted when components
    are already small; if nothing smaller works, S = A always does.
    """
    delta = Fraction(delta)
    if not (0 < delta < 1):
        raise WindowError("delta must lie strictly between 0 and 1")
    if r < 1:
        raise WindowError("r must be >= 1")
    if not A.members:
        raise WindowError("cut of an empty set")
    members = A.sorted_members()
    n = len(members)
    notes: dict = {}
    lower = Fraction(0)
    if n <= EXHAUSTIVE_CAP:
        ch = cheeger(w, A, r, mode="exhaustive")
        bound = cut_lower_from_cheeger(w, A, r, delta, h_lower=ch.exact)
        lower = max(lower, bound)
        notes["cheeger_lower"] = bound
        notes["h_r"] = ch.exact

    masks = _ball_masks(w, members, r)
    index = {v: i for i, v in enumerate(members)}
    threshold = delta * n
    full = (1 << n) - 1

    if _components_small(masks, full, threshold):
        value = Fraction(0)
        return InvariantReport("cut", {"r": r, "delta": delta}, lower=value,
                               upper=value, exact=value,
                               witness=VertexSet(w, frozenset(), A.trusted),
                               method="exact", trusted=A.trusted, notes=notes)

    ordered = [index[v] for v in _candidate_order(w, A, r)]
    examined = 0
    start = max(1, -(-lower.numerator // lower.denominator) if lower > 0 else 1)
    for size in range(start, n + 1):
        for combo in itertools.combinations(ordered, size):
            examined += 1
            if budget is not None and examined > budget:
                return InvariantReport(
                    "cut", {"r": r, "delta": delta},
                    lower=max(lower, Fraction(size)), upper=Fraction(n),
                    exact=None, witness=VertexSet(w, frozenset(members), A.trusted),
                    method="budget_exceeded", trusted=A.trusted,
                    notes={**notes, "examined": examined})
            S_mask = 0
            for i in combo:
                S_mask |= 1 << i
            if _components_small(masks, full & ~S_mask, threshold):
                S = frozenset(members[i] for i in combo)
                if not is_cut(w, A, S, r, delta):
                    raise AssertionError("mask solver and re-check disagree")
                value = Fraction(size)
                return InvariantReport(
                    "cut", {"r": r, "delta": delta}, lower=min(max(lower, 0), value),
                    upper=value, exact=value,
                    witness=VertexSet(w, S, A.trusted), method="exact",
                    trusted=A.trusted, notes={**notes, "examined": examined})
    raise AssertionError("S = A is always a cut; unreachable")


def cut_bruteforce(w: GraphWindow, A: VertexSet, r: int, delta: Fraction) -> int:
    """Oracle: scan all subsets of A by increasing size; no pruning at all."""
    delta = Fraction(delta)
    members = A.sorted_members()
    for size in range(0, len(members) + 1):
        for combo in itertools.combinations(members, size):
            if is_cut(w, A, frozenset(combo), r, delta):
                return size
    raise AssertionError("unreachable")


def cut_lower_from_cheeger(w: GraphWindow, A: VertexSet, r: int,
                           delta: Fraction, h_lower: Fraction) -> Fraction:
    """Lower bound λ·h_r(A)·|A| with λ = min(1/4, (1-δ)/2) / β_X(r)."""
    delta = Fraction(delta)
    beta = window_growth(w, r)
    lam = min(Fraction(1, 4), (1 - delta) / 2) / beta
    return lam * h_lower * len(A.members)


# ---------------------------------------------------------------------------
# L1-Poincaré constant at scale k
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricMeasureSet:
    """Finite metric measure space (points, integer distances, measure ν)."""

    points: tuple[str, ...]
    dist: dict[tuple[str, str], int]
    measure: dict[str, Fraction]

    def __post_init__(self):
        for x in self.points:
            if self.measure[x] <= 0:
                raise WindowError(f"measure must be positive at {x!r}")
        for x in self.points:
            if self.dist[(x, x)] != 0:
                raise WindowError("d(x,x) must be 0")
        for x, y in itertools.combinations(self.points, 2):
            if self.dist[(x, y)] != self.dist[(y, x)] or self.dist[(x, y)] <= 0:
                raise WindowError("distances must be symmetric and positive")
        for x, y, z in itertools.permutations(self.points, 3):
            if self.dist[(x, z)] > self.dist[(x, y)] + self.dist[(y, z)]:
                raise WindowError("triangle inequality violated")

    def total(self) -> Fraction:
        return sum(self.measure[x] for x in self.points)


def metric_set_from_window(w: GraphWindow, A: VertexSet,
                           measure: Optional[dict[str, Fraction]] = None) -> MetricMeasureSet:
    """Induce the metric on A from the window; counting measure by default."""
    points = tuple(A.sorted_members())
    dist: dict[tuple[str, str], int] = {}
    for x in points:
        reached = w.reached_distances(x)
        for y in points:
            if y not in reached:
                raise WindowError(f"{x!r} and {y!r} are disconnected in the window")
            dist[(x, y)] = reached[y]
    mu = {x: Fraction(1) for x in points} if measure is None else \
        {x: Fraction(measure[x]) for x in points}
    return MetricMeasureSet(points, dist, mu)


def poincare_l1(ms: MetricMeasureSet, k: int, mode: str = "two_level",
                cap: int = 20, seed: int = 0,
                challenger_starts: int = 20) -> InvariantReport:
    """h^1_k: infimum of ||∇_k f||_1 / ||f||_1 over mean-zero f != 0, where
    |∇_k f|(x) = sup over y, y' in B(x,k) of |f(y) - f(y')|.

    Two-level mode scans all f = 1_B + c (c fixing the mean, scale immaterial
    by homogeneity) and reports the best ratio.  That value is an upper bound
    for h^1_k; the `exact` field is set only under full enumeration
    (|points| <= cap) and records the two-level optimum — whether two-valued
    functions attain the infimum is a standing assumption, challenged (never
    certified) by the sampled mode's randomized descent.
    """
    n = len(ms.points)
    if n < 2:
        raise WindowError("need at least 2 points")
    if k < 1:
        raise WindowError("k must be >= 1")
    if n > cap:
        raise WindowError(f"|points|={n} exceeds enumeration cap {cap}")
    index = {x: i for i, x in enumerate(ms.points)}
    ball_mask = [0] * n
    for x in ms.points:
        for y in ms.points:
            if ms.dist[(x, y)] <= k:
                ball_mask[index[x]] |= 1 << index[y]
    mu = [ms.measure[x] for x in ms.points]
    total = ms.total()
    full = (1 << n) - 1

    best: Optional[Fraction] = None
    best_mask = 0
    half = n // 2
    for B_mask in range(1, 1 << n):
        if B_mask.bit_count() > half:
            continue
        grad = Fraction(0)
        for i in range(n):
            bm = ball_mask[i]
            if bm & B_mask and bm & ~B_mask & full:
                grad += mu[i]
        nu_B = sum(mu[i] for i in range(n) if B_mask >> i & 1)
        norm = 2 * nu_B * (total - nu_B) / total
        ratio = grad / norm
        if best is None or ratio < best:
            best, best_mask = ratio, B_mask
    nu_B = sum(mu[i] for i in range(n) if best_mask >> i & 1)
    shift = nu_B / total
    table = {x: (Fraction(1) - shift if best_mask >> index[x] & 1 else -shift)
             for x in ms.points}
    notes: dict = {"witness_set": tuple(x for x in ms.points if best_mask >> index[x] & 1)}

    if mode == "sampled":
        challenger = _poincare_descent(ms, k, seed, challenger_starts)
        notes["challenger"] = challenger
        notes["challenged"] = challenger < float(best) - 1e-9
    elif mode != "two_level":
        raise WindowError(f"unknown poincare mode {mode!r}")

    return InvariantReport("poincare", {"k": k}, lower=Fraction(0), upper=best,
                           exact=best, witness=table, method=mode, notes=notes)


def poincare_ratio(ms: MetricMeasureSet, k: int, f: dict[str, Fraction]) -> Fraction:
    """Independent evaluation of ||∇_k f||_1 / ||f||_1 for a mean-zero table."""
    mean = sum(ms.measure[x] * f[x] for x in ms.points)
    if mean != 0:
        raise WindowError("function is not mean-zero")
    if all(f[x] == 0 for x in ms.points):
        raise WindowError("function must be nonzero")
    grad = Fraction(0)
    for x in ms.points:
        vals = [f[y] for y in ms.points if ms.dist[(x, y)] <= k]
        grad += ms.measure[x] * (max(vals) - min(vals))
    norm = sum(ms.measure[x] * abs(f[x]) for x in ms.points)
    return grad / norm


def _poincare_descent(ms: MetricMeasureSet, k: int, seed: int, starts: int) -> float:
    """Randomized mean-zero coordinate descent; a float challenger only."""
    rng = random.Random(seed)
    n = len(ms.points)
    mu = [float(ms.measure[x]) for x in ms.points]
    balls = [[j for j, y in enumerate(ms.points) if ms.dist[(ms.points[i], y)] <= k]
             for i in range(n)]

    def ratio(f: list[float]) -> float:
        norm = sum(m * abs(v) for m, v in zip(mu, f))
        if norm < 1e-12:
            return float("inf")
        grad = sum(mu[i] * (max(f[j] for j in balls[i]) - min(f[j] for j in balls[i]))
                   for i in range(n))
        return grad / norm

    def recenter(f: list[float]) -> list[float]:
        mean = sum(m * v for m, v in zip(mu, f)) / sum(mu)
        return [v - mean for v in f]

    best = float("inf")
    for _ in range(starts):
        f = recenter([rng.uniform(-1, 1) for _ in range(n)])
        current = ratio(f)
        step = 0.5
        while step > 1e-6:
            improved = False
            for i in range(n):
                for sign in (1.0, -1.0):
                    trial = list(f)
                    trial[i] += sign * step
                    trial = recenter(trial)
                    r = ratio(trial)
                    if r < current - 1e-12:
                        f, current, improved = trial, r, True
            if not improved:
                step /= 2
        best = min(best, current)
    return best


# ---------------------------------------------------------------------------
# maximally separated nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetCertificate:
    net: VertexSet
    separated: bool      # pairwise distances > eps
    covering: bool       # A ⊆ Z^{+eps}


def separated_net(w: GraphWindow, A: VertexSet, eps: int) -> NetCertificate:
    """Greedy (sorted order) maximally eps-separated net Z ⊆ A.

    Certifies both net properties: members pairwise > eps apart, and every
    point of A within eps of the net.
    """
    if eps < 1:
        raise WindowError("eps must be >= 1")
    if not A.members:
        raise WindowError("net of an empty set")
    picked: list[str] = []
    picked_set: set[str] = set()
    for a in A.sorted_members():
        near = w.reached_distances(a, limit=eps)
        if not any(z in picked_set for z in near):
            picked.append(a)
            picked_set.add(a)
    net = VertexSet(w, frozenset(picked), A.trusted)
    separated = True
    for z in picked:
        near = w.reached_distances(z, limit=eps)
        if any(u in picked_set and u != z for u in near):
            separated = False
    covered = multi_source_distances(w, picked_set, limit=eps)
    covering = all(a in covered for a in A.members)
    return NetCertificate(net, separated, covering)


def net_sandwich_holds(w: GraphWindow, A: VertexSet, Z: VertexSet,
                       B: VertexSet, eps: int) -> bool:
    """(1/α)|B| <= ν(B^{+eps} ∩ Z) <= α|B| with α = β_X(eps)."""
    if not B.members:
        return True
    alpha = window_growth(w, eps)
    hits = len(neighbourhood(w, B, eps).members & Z.members)
    size = len(B.members)
    return Fraction(size, alpha) <= hits <= alpha * size
