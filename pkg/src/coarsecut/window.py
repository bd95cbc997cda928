"""Finite windows of infinite graphs, and the basic coarse-geometry vocabulary.

A GraphWindow is a finite induced piece of an (implicitly infinite) graph,
stamped with a trusted radius: inside that radius around the basepoint the
window is isometric to the ambient graph, so balls, spheres and boundaries
computed here agree with the ambient ones.  Everything downstream (growth
tables, Cheeger constants, cuts, persistence checks) is built out of the
operations in this module.

Distances are exact nonnegative integers; unreachable is the explicit
sentinel INFINITY, never a large number.  Volume is the counting measure on
vertices throughout (bounded-valency convention).
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

INFINITY = float("inf")


class WindowError(ValueError):
    """Malformed window data or an unknown vertex id."""


class UntrustedError(WindowError):
    """An operation required exactness outside the trusted region."""


class GraphWindow:
    """Finite induced window of a vertex-labelled graph.

    Parameters
    ----------
    vertices : mapping id -> label (tuple of ints) or None, or iterable of ids
    edges    : iterable of unordered id pairs (symmetric, irreflexive)
    trusted_radius : graph distance from `basepoint` within which the window
        is isometric to the ambient infinite graph.  Generators are
        responsible for stamping this honestly.
    basepoint : designated vertex id.

    Windows are immutable after construction; all operations are pure reads.
    """

    __slots__ = ("ids", "labels", "adj", "trusted_radius", "basepoint",
                 "_base_dist")

    def __init__(self, vertices, edges, trusted_radius: int, basepoint: str):
        if isinstance(vertices, Mapping):
            labels = {str(v): (tuple(int(x) for x in lab) if lab is not None else None)
                      for v, lab in vertices.items()}
        else:
            vlist = [str(v) for v in vertices]
            if len(set(vlist)) != len(vlist):
                raise WindowError("duplicate vertex ids")
            labels = {v: None for v in vlist}
        if trusted_radius < 0:
            raise WindowError("trusted_radius must be >= 0")
        basepoint = str(basepoint)
        if basepoint not in labels:
            raise WindowError(f"basepoint {basepoint!r} not a vertex")
        adj: dict[str, set[str]] = {v: set() for v in labels}
        for a, b in edges:
            a, b = str(a), str(b)
            if a == b:
                raise WindowError(f"self-loop at {a!r}")
            if a not in adj or b not in adj:
                raise WindowError(f"edge ({a!r},{b!r}) has unknown endpoint")
            adj[a].add(b)
            adj[b].add(a)
        self.ids: tuple[str, ...] = tuple(sorted(labels))
        self.labels: dict[str, Optional[tuple[int, ...]]] = labels
        self.adj: dict[str, tuple[str, ...]] = {v: tuple(sorted(ns)) for v, ns in adj.items()}
        self.trusted_radius = int(trusted_radius)
        self.basepoint = basepoint
        self._base_dist: Optional[dict[str, int]] = None

    # -- basic accessors -------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, v) -> bool:
        return str(v) in self.adj

    def n_edges(self) -> int:
        return sum(len(ns) for ns in self.adj.values()) // 2

    def edges(self) -> Iterable[tuple[str, str]]:
        for v in self.ids:
            for u in self.adj[v]:
                if v < u:
                    yield (v, u)

    def check_vertex(self, v) -> str:
        v = str(v)
        if v not in self.adj:
            raise WindowError(f"unknown vertex id {v!r}")
        return v

    def base_distance(self, v) -> int | float:
        """Distance from the basepoint (cached; windows are immutable)."""
        if self._base_dist is None:
            self._base_dist = self.reached_distances(self.basepoint)
        return self._base_dist.get(self.check_vertex(v), INFINITY)

    def trusted_at(self, v, r: int) -> bool:
        """True when a radius-r computation around v cannot see the rim."""
        d = self.base_distance(v)
        return d is not INFINITY and d + r <= self.trusted_radius

    # -- BFS -------------------------------------------------------------

    def reached_distances(self, src, limit: Optional[int] = None) -> dict[str, int]:
        """Distances to all vertices reachable from src (within `limit` if given)."""
        src = self.check_vertex(src)
        dist = {src: 0}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            d = dist[v]
            if limit is not None and d >= limit:
                continue
            for u in self.adj[v]:
                if u not in dist:
                    dist[u] = d + 1
                    queue.append(u)
        return dist

    def distance(self, a, b) -> int | float:
        a, b = self.check_vertex(a), self.check_vertex(b)
        dist = self.reached_distances(a)
        return dist.get(b, INFINITY)


def bfs_distances(w: GraphWindow, src) -> dict[str, int | float]:
    """Shortest-path distances from src; unreachable vertices map to INFINITY."""
    reached = w.reached_distances(src)
    return {v: reached.get(v, INFINITY) for v in w.ids}


@dataclass(frozen=True)
class VertexSet:
    """A subset of a window's vertices; the currency for balls, separators, cuts.

    `trusted` records whether the producing operation stayed inside the
    trusted region (untrusted results may differ from the ambient graph).
    """

    window: GraphWindow
    members: frozenset[str]
    trusted: bool = True

    def __post_init__(self):
        bad = [v for v in self.members if v not in self.window]
        if bad:
            raise WindowError(f"members not in window: {sorted(bad)[:5]}")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return str(v) in self.members

    def __iter__(self):
        return iter(self.sorted_members())

    def sorted_members(self) -> list[str]:
        return sorted(self.members)

    def union(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.window, self.members | other.members,
                         self.trusted and other.trusted)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.window, self.members & other.members,
                         self.trusted and other.trusted)

    def difference(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.window, self.members - other.members,
                         self.trusted and other.trusted)


def vertex_set(w: GraphWindow, members, trusted: bool = True) -> VertexSet:
    return VertexSet(w, frozenset(w.check_vertex(v) for v in members), trusted)


def whole_window(w: GraphWindow) -> VertexSet:
    return VertexSet(w, frozenset(w.ids), True)


# -- balls, spheres, neighbourhoods, boundaries --------------------------


def ball(w: GraphWindow, x, r: int) -> VertexSet:
    """Closed ball {y : d(x,y) <= r}; flagged untrusted if it may touch the rim."""
    if r < 0:
        raise WindowError("radius must be >= 0")
    x = w.check_vertex(x)
    reached = w.reached_distances(x, limit=r)
    return VertexSet(w, frozenset(reached), trusted=w.trusted_at(x, r))


def sphere(w: GraphWindow, x, r: int) -> VertexSet:
    """Sphere {y : d(x,y) = r}."""
    if r < 0:
        raise WindowError("radius must be >= 0")
    x = w.check_vertex(x)
    reached = w.reached_distances(x, limit=r)
    return VertexSet(w, frozenset(v for v, d in reached.items() if d == r),
                     trusted=w.trusted_at(x, r))


def neighbourhood(w: GraphWindow, A: VertexSet, alpha: int) -> VertexSet:
    """Closed alpha-neighbourhood A^{+alpha} = {x : d(x, A) <= alpha}."""
    if not A.members:
        raise WindowError("neighbourhood of an empty set")
    if alpha < 0:
        raise WindowError("alpha must be >= 0")
    dist = multi_source_distances(w, A.members, limit=alpha)
    trusted = A.trusted and all(w.trusted_at(a, alpha) for a in A.members)
    return VertexSet(w, frozenset(dist), trusted=trusted)


def multi_source_distances(w: GraphWindow, sources: Iterable[str],
                           limit: Optional[int] = None) -> dict[str, int]:
    dist = {w.check_vertex(s): 0 for s in sources}
    queue = deque(dist)
    while queue:
        v = queue.popleft()
        d = dist[v]
        if limit is not None and d >= limit:
            continue
        for u in w.adj[v]:
            if u not in dist:
                dist[u] = d + 1
                queue.append(u)
    return dist


def r_boundary(w: GraphWindow, B: VertexSet, r: int) -> VertexSet:
    """r-boundary: B^{+r} minus B.  Empty B has empty boundary."""
    if not B.members:
        return VertexSet(w, frozenset(), B.trusted)
    thick = neighbourhood(w, B, r)
    return VertexSet(w, thick.members - B.members, trusted=thick.trusted)


# -- coarse components and growth ----------------------------------------


def k_components(w: GraphWindow, A: VertexSet, k: int) -> list[VertexSet]:
    """Partition of A into k-coarsely connected components.

    Classes are the equivalence classes of the transitive closure of
    "d(x,y) <= k" within A; distinct classes are pairwise > k apart.
    Returned sorted by (size desc, least member) for determinism.
    """
    if k < 1:
        raise WindowError("k must be >= 1")
    members = A.members
    parent = {v: v for v in members}

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for a in members:
        near = w.reached_distances(a, limit=k)
        for b in near:
            if b in members and b != a:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    classes: dict[str, set[str]] = {}
    for v in members:
        classes.setdefault(find(v), set()).add(v)
    out = [VertexSet(w, frozenset(c), A.trusted) for c in classes.values()]
    out.sort(key=lambda s: (-len(s), min(s.members)))
    return out


@dataclass(frozen=True)
class GrowthTable:
    """Growth function values: radii (increasing) and the sup counts at each."""

    radii: tuple[int, ...]
    values: tuple[int, ...]
    trusted: bool = True

    def __post_init__(self):
        if len(self.radii) != len(self.values):
            raise WindowError("radii/values length mismatch")
        if any(r2 <= r1 for r1, r2 in zip(self.radii, self.radii[1:])):
            raise WindowError("radii must be strictly increasing")
        if any(v2 < v1 for v1, v2 in zip(self.values, self.values[1:])):
            raise WindowError("growth values must be non-decreasing")

    def value_at(self, r: int) -> int:
        return self.values[self.radii.index(r)]


def growth(w: GraphWindow, S: VertexSet, radii: Sequence[int]) -> GrowthTable:
    """Growth of a subset: beta_S(r) = sup over s in S of |B(s,r) ∩ S|."""
    if not S.members:
        raise WindowError("growth of an empty set")
    radii = sorted(set(int(r) for r in radii))
    if radii and radii[0] < 0:
        raise WindowError("radii must be >= 0")
    rmax = radii[-1] if radii else 0
    values = [0] * len(radii)
    trusted = S.trusted
    for s in S.members:
        reached = w.reached_distances(s, limit=rmax)
        counts = [0] * len(radii)
        for v, d in reached.items():
            if v in S.members:
                for i, r in enumerate(radii):
                    if d <= r:
                        counts[i] += 1
        values = [max(a, b) for a, b in zip(values, counts)]
        if not w.trusted_at(s, rmax):
            trusted = False
    return GrowthTable(tuple(radii), tuple(values), trusted)


def family_growth(family: Sequence[VertexSet], radii: Sequence[int]) -> GrowthTable:
    """Family growth: sup over members S of the family of beta_S(r)."""
    if not family:
        raise WindowError("empty family")
    tables = [growth(S.window, S, radii) for S in family]
    values = tuple(max(t.values[i] for t in tables) for i in range(len(tables[0].radii)))
    return GrowthTable(tables[0].radii, values, all(t.trusted for t in tables))


def window_growth(w: GraphWindow, r: int, probes: Optional[Iterable[str]] = None) -> int:
    """beta_X(r) over the window: sup over probe vertices of |B(v,r)|."""
    best = 0
    for v in (probes if probes is not None else w.ids):
        best = max(best, len(w.reached_distances(v, limit=r)))
    return best


# -- cgw v1 file format ----------------------------------------------------
#
# header:  cgw v1 <n_vertices> <n_edges> <trusted_radius> <basepoint>
# then one `v <id> <label ints...>` line per vertex and one `e <id> <id>`
# line per edge, both in sorted order so files are byte-stable.


def write_cgw(w: GraphWindow) -> str:
    buf = io.StringIO()
    buf.write(f"cgw v1 {len(w.ids)} {w.n_edges()} {w.trusted_radius} {w.basepoint}\n")
    for v in w.ids:
        lab = w.labels[v]
        if lab is None:
            buf.write(f"v {v}\n")
        else:
            buf.write("v " + v + " " + " ".join(str(x) for x in lab) + "\n")
    for a, b in sorted(w.edges()):
        buf.write(f"e {a} {b}\n")
    return buf.getvalue()


def save_cgw(w: GraphWindow, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_cgw(w))


def read_cgw(text: str) -> GraphWindow:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise WindowError("empty cgw file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "cgw" or head[1] != "v1":
        raise WindowError(f"bad cgw header: {lines[0]!r}")
    n_v, n_e, radius, basepoint = int(head[2]), int(head[3]), int(head[4]), head[5]
    vertices: dict[str, Optional[tuple[int, ...]]] = {}
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "v":
            vid = parts[1]
            if vid in vertices:
                raise WindowError(f"duplicate vertex {vid!r}")
            vertices[vid] = tuple(int(x) for x in parts[2:]) if len(parts) > 2 else None
        elif parts[0] == "e":
            edges.append((parts[1], parts[2]))
        else:
            raise WindowError(f"bad cgw line: {ln!r}")
    if len(vertices) != n_v or len(edges) != n_e:
        raise WindowError("cgw header counts do not match body")
    return GraphWindow(vertices, edges, radius, basepoint)


def load_cgw(path) -> GraphWindow:
    with open(path) as fh:
        return read_cgw(fh.read())


# -- .vs vertex-set files ---------------------------------------------------


def write_vs(s: VertexSet) -> str:
    lines = [f"vs v1 {len(s)} {int(s.trusted)}"]
    lines.extend(s.sorted_members())
    return "\n".join(lines) + "\n"


def save_vs(s: VertexSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_vs(s))


def read_vs(text: str, w: GraphWindow) -> VertexSet:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("vs v1"):
        raise WindowError("bad vs header")
    head = lines[0].split()
    trusted = bool(int(head[3])) if len(head) > 3 else True
    return VertexSet(w, frozenset(w.check_vertex(v) for v in lines[1:]), trusted)


def load_vs(path, w: GraphWindow) -> VertexSet:
    with open(path) as fh:
        return read_vs(fh.read(), w)
