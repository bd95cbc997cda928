"""Persistence of set families, separation witnesses, and the path scan.

A persistent family assigns to every index point x and scale r a set
A_x(r) ⊆ B(x, 4r) of uniform size, with a guaranteed overlap fraction α on
k-adjacent index pairs.  Scanning such a family along a k-path that starts
deep inside one part of a partition and ends outside of it locates an index
where the family member meets every part in at most δ|A| points — and, when
the partition is the k-component partition of the complement of a separator
S, certifies A_z(r) ∩ S as a (k, δ)-cut of A_z(r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import generators as gen
from .invariants import is_cut
from .window import (
    GraphWindow,
    UntrustedError,
    VertexSet,
    WindowError,
    ball,
    k_components,
    multi_source_distances,
    neighbourhood,
)


@dataclass(frozen=True)
class PersistentFamily:
    """An indexed family {A_x(r)} with its claimed persistence constant.

    `make(x, r)` must produce the exact ambient set or raise UntrustedError;
    generator callbacks are responsible for their own exactness checks.
    """

    name: str
    window: GraphWindow
    make: Callable[[str, int], VertexSet]
    alpha: Fraction
    k: int = 1
    r0: int = 1

    def delta(self) -> Fraction:
        """The default cut quality δ = 1 - α/2 used by the path scan."""
        return 1 - Fraction(self.alpha) / 2


def ball_family(w: GraphWindow, alpha: Fraction, k: int = 1) -> PersistentFamily:
    """The family of balls B(x, r) on a vertex-transitive ambient graph.

    On such a graph of valency d the family is 1/(d+1)-persistent; the caller
    supplies that α.  Members are refused when the window cannot certify them.
    """

    def make(x: str, r: int) -> VertexSet:
        b = ball(w, x, r)
        if not b.trusted:
            raise UntrustedError(f"ball({x!r}, {r}) leaves the trusted region")
        return b

    return PersistentFamily("balls", w, make, Fraction(alpha), k=k)


def tree_annulus_family(tp: gen.TreeProduct) -> PersistentFamily:
    """Annuli A_x(k) in a product of two 3-regular trees (1/8-persistent)."""
    if tp.tw1.valence != 3 or tp.tw2.valence != 3:
        raise WindowError("the annulus family is stated for T3 x T3")

    def make(x: str, r: int) -> VertexSet:
        return gen.tree_annulus(tp, x, r)

    return PersistentFamily("tree-annulus", tp.window, make, Fraction(1, 8))


def dl_family(dw: gen.DLWindow) -> PersistentFamily:
    """V-set family A_x(r) in DL(2,2) (1/4-persistent)."""
    if (dw.p, dw.q) != (2, 2):
        raise WindowError("the DL family is stated for DL(2,2)")

    def make(x: str, r: int) -> VertexSet:
        return gen.dl_persistent(dw, x, r)

    return PersistentFamily("dl-vset", dw.window, make, Fraction(1, 4))


def thickened_sphere_family(w: GraphWindow, t: int, alpha: Fraction) -> PersistentFamily:
    """A_x(r) = S(x, r)^{+t} on a vertex-transitive graph (1/|B(t)|-persistent)."""

    def make(x: str, r: int) -> VertexSet:
        if r < t:
            raise WindowError("the thickened-sphere family needs r >= t")
        s = gen.thickened_sphere(w, x, r, t)
        if not s.trusted:
            raise UntrustedError(f"S({x!r},{r})^{{+{t}}} leaves the trusted region")
        return s

    return PersistentFamily("thickened-sphere", w, make, Fraction(alpha), r0=max(1, t))


# ---------------------------------------------------------------------------
# persistence verification
# ---------------------------------------------------------------------------


@dataclass
class PersistenceReport:
    family: str
    alpha_claimed: Fraction
    worst_ratio: Optional[Fraction]      # min over adjacent pairs and scales
    sizes_uniform: bool
    containment_ok: bool
    violations: list[tuple] = field(default_factory=list)

    def ok(self) -> bool:
        return (self.sizes_uniform and self.containment_ok
                and not self.violations
                and (self.worst_ratio is None or self.worst_ratio >= self.alpha_claimed))


def _containment_certificate(w: GraphWindow, x: str, A: VertexSet, radius: int) -> bool:
    """Certify A ⊆ B(x, radius) in the ambient graph via window BFS.

    Window distances upper-bound ambient distances (the window is an induced
    subgraph), so reaching every member within `radius` is a sound certificate.
    """
    reached = w.reached_distances(x, limit=radius)
    return all(v in reached for v in A.members)


def persistence_check(fam: PersistentFamily, r_range: Sequence[int],
                      probe_pairs: Sequence[tuple[str, str]]) -> PersistenceReport:
    """Verify the three persistence conditions over all probe pairs and scales.

    For every scale r: every produced set sits in B(x, 4r); all probes see
    the same size |A(r)|; every pair at index distance <= k overlaps in at
    least α|A(r)| points.  Violations carry the offending pair.
    """
    worst: Optional[Fraction] = None
    sizes_uniform = True
    containment_ok = True
    violations: list[tuple] = []
    w = fam.window
    for r in r_range:
        if r < fam.r0:
            raise WindowError(f"scale {r} below the family floor r0={fam.r0}")
        probes = sorted({x for pair in probe_pairs for x in pair})
        sets = {x: fam.make(x, r) for x in probes}
        size = None
        for x in probes:
            if not _containment_certificate(w, x, sets[x], 4 * r):
                containment_ok = False
                violations.append(("containment", r, x))
            if size is None:
                size = len(sets[x])
            elif len(sets[x]) != size:
                sizes_uniform = False
                violations.append(("size", r, x, len(sets[x]), size))
        for x, y in probe_pairs:
            d = w.distance(x, y)
            if d > fam.k:
                raise WindowError(f"probe pair ({x!r},{y!r}) is {d} > k={fam.k} apart")
            inter = len(sets[x].members & sets[y].members)
            ratio = Fraction(inter, size)
            if worst is None or ratio < worst:
                worst = ratio
            if ratio < fam.alpha:
                violations.append(("overlap", r, x, y, ratio))
    return PersistenceReport(fam.name, fam.alpha, worst, sizes_uniform,
                             containment_ok, violations)


def adjacent_probe_pairs(w: GraphWindow, centers: Sequence[str], k: int = 1
                         ) -> list[tuple[str, str]]:
    """All unordered pairs within distance k among `centers` and their neighbours."""
    probes = set()
    for c in centers:
        c = w.check_vertex(c)
        probes.add(c)
        probes.update(w.adj[c])
    probes = sorted(probes)
    pairs = []
    for i, x in enumerate(probes):
        near = w.reached_distances(x, limit=k)
        for y in probes[i + 1:]:
            if y in near:
                pairs.append((x, y))
    return pairs


# ---------------------------------------------------------------------------
# separation witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationInstance:
    window: GraphWindow
    separator: VertexSet
    k: int = 1
    L: int = 0
    D: int = 0


@dataclass
class SeparationVerdict:
    qualifying: list[VertexSet]
    all_components: list[VertexSet]
    separated: bool
    trusted: bool


def separation_witness(inst: SeparationInstance) -> SeparationVerdict:
    """Components of window ∖ S^{+L} holding points at distance >= D from S.

    The verdict is `separated` when at least two components qualify.
    Distance is measured to S itself (not to its thickening).  The trusted
    flag records whether the whole probed region stayed inside the trusted
    radius; untrusted verdicts are still computed, from window data alone.
    """
    w, S = inst.window, inst.separator
    if not S.members:
        raise WindowError("empty separator")
    thick = neighbourhood(w, S, inst.L) if inst.L > 0 else S
    rest = frozenset(w.ids) - thick.members
    dist_to_S = multi_source_distances(w, S.members)
    comps = k_components(w, VertexSet(w, rest, True), inst.k) if rest else []
    qualifying = [c for c in comps
                  if any(dist_to_S.get(v, float("inf")) >= inst.D for v in c.members)]
    trusted = all(w.trusted_at(s, inst.L + inst.D) for s in S.members)
    return SeparationVerdict(qualifying, comps, len(qualifying) >= 2, trusted)


# ---------------------------------------------------------------------------
# the path scan
# ---------------------------------------------------------------------------


@dataclass
class ScanResult:
    s_index: int
    s_vertex: str
    delta: Fraction
    family_size: int
    measurements: list[dict[int, int]]   # per path index: part -> |A_p ∩ X_i|
    all_parts_small: bool
    cut_witness: Optional[VertexSet]
    cut_certified: bool

    def threshold(self) -> Fraction:
        return self.delta * self.family_size


def geodesic_path(w: GraphWindow, a: str, b: str) -> list[str]:
    """A BFS geodesic from a to b (deterministic tie-breaking by vertex id).

    Any k-path works for the scan; geodesics are just a convenient default.
    """
    a, b = w.check_vertex(a), w.check_vertex(b)
    dist = w.reached_distances(a)
    if b not in dist:
        raise WindowError(f"{a!r} and {b!r} are disconnected")
    path = [b]
    current = b
    while current != a:
        current = min(u for u in w.adj[current] if dist.get(u, -1) == dist[current] - 1)
        path.append(current)
    return path[::-1]


def scan_for_cut(fam: PersistentFamily, path: Sequence[str],
                 partition: Sequence[VertexSet], r: int,
                 delta: Optional[Fraction] = None,
                 separator: Optional[VertexSet] = None) -> ScanResult:
    """Walk a k-path and certify a δ-cut where the overlap proportion drops.

    Requires |A_{x0}(r) ∩ X_{i0}| >= δ|A| and |A_{xm}(r) ∩ X_{i0}| < δ|A| for
    some part X_{i0}.  Returns the first index s where the proportion drops,
    verifies |A_{x_s}(r) ∩ X_i| <= δ|A| for every part, and — when the
    partition is the k-component partition of window ∖ separator — re-checks
    that A_{x_s}(r) ∩ separator is a (k, δ)-cut of A_{x_s}(r).
    """
    w = fam.window
    delta = fam.delta() if delta is None else Fraction(delta)
    path = [w.check_vertex(x) for x in path]
    if len(path) < 2:
        raise WindowError("path needs at least two points")
    for x, y in zip(path, path[1:]):
        if w.distance(x, y) > fam.k:
            raise WindowError(f"consecutive path points {x!r},{y!r} exceed k={fam.k}")
    sets = [fam.make(x, r) for x in path]
    size = len(sets[0])
    if any(len(s) != size for s in sets):
        raise WindowError("family sizes are not uniform along the path")
    threshold = delta * size
    measurements = [{i: len(s.members & part.members)
                     for i, part in enumerate(partition)} for s in sets]
    i0 = None
    for i in range(len(partition)):
        if measurements[0][i] >= threshold and measurements[-1][i] < threshold:
            i0 = i
            break
    if i0 is None:
        raise WindowError(
            "scan preconditions violated: no part is >= δ|A| at the start and "
            f"< δ|A| at the end (start {measurements[0]}, end {measurements[-1]})")
    s = next(p for p in range(1, len(path)) if measurements[p][i0] < threshold)
    all_small = all(v <= threshold for v in measurements[s].values())
    cut_witness = None
    certified = False
    if separator is not None:
        cut_witness = VertexSet(w, sets[s].members & separator.members,
                                sets[s].trusted and separator.trusted)
        certified = all_small and is_cut(w, sets[s], cut_witness.members, fam.k, delta)
    return ScanResult(s, path[s], delta, size, measurements, all_small,
                      cut_witness, certified)
