"""Generators for the explicit graph families under study.

Regular-tree windows carry a Busemann labelling toward a fixed end: adjacent
levels differ by one, each vertex has one neighbour above (toward the end)
and valence-1 below.  Windows of products of trees, Diestel-Leader graphs,
wreath-product Cayley balls and Z^n grids are built from these, each stamped
with the radius inside which it is isometric to the ambient infinite graph.

Tree vertices are addressed by their path from the window root with a fixed
child ordering, so every generated window serializes byte-stably.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .groups import FiniteGroup
from .window import (
    GraphWindow,
    UntrustedError,
    VertexSet,
    WindowError,
)

MAX_TREE_VALENCE = 11  # single-character child digits keep addresses sortable


# ---------------------------------------------------------------------------
# regular trees with a Busemann labelling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeWindow:
    """A window of the regular tree T_valence, labelled by a Busemann function.

    The window is the full subtree hanging below the top of the anchor ray
    (the vertex at level `b_max`), truncated at level `floor`.  The basepoint
    sits at level 0 on the anchor ray; b decreases toward the leaves.
    """

    valence: int
    b_max: int
    floor: int
    window: GraphWindow

    @property
    def branching(self) -> int:
        return self.valence - 1

    def level(self, v: str) -> int:
        return self.b_max - (len(v) - 1)

    def busemann(self) -> dict[str, int]:
        return {v: self.level(v) for v in self.window.ids}

    def parent(self, v: str) -> Optional[str]:
        v = self.window.check_vertex(v)
        return v[:-1] if len(v) > 1 else None

    def children(self, v: str) -> tuple[str, ...]:
        v = self.window.check_vertex(v)
        if self.level(v) - 1 < self.floor:
            return ()
        return tuple(v + str(d) for d in range(self.branching))

    def ancestor(self, v: str, k: int) -> str:
        """k-th ancestor toward the end; raises if it escapes the window."""
        v = self.window.check_vertex(v)
        if k < 0:
            raise WindowError("ancestor depth must be >= 0")
        if len(v) - k < 1:
            raise UntrustedError(f"{k}-th ancestor of {v!r} escapes the window")
        return v[: len(v) - k]

    def anchor_ray(self) -> tuple[str, ...]:
        """Basepoint, its parent, ... up to the window root."""
        v = self.window.basepoint
        ray = [v]
        while len(v) > 1:
            v = v[:-1]
            ray.append(v)
        return tuple(ray)

    def descendants_at_depth(self, v: str, t: int) -> tuple[str, ...]:
        v = self.window.check_vertex(v)
        if t == 0:
            return (v,)
        if self.level(v) - t < self.floor:
            raise UntrustedError(
                f"depth {t} below {v!r} leaves the window (floor {self.floor})")
        digits = "".join(str(d) for d in range(self.branching))
        return tuple(v + "".join(s) for s in itertools.product(digits, repeat=t))


def tree_window(valence: int, b_min: int, b_max: int, depth_below: int = 0) -> TreeWindow:
    """Window of T_valence spanning Busemann levels [b_min - depth_below, b_max].

    `depth_below` adds extra margin under the stated band; the basepoint is
    the anchor-ray vertex at level 0, and the trusted radius is what the band
    dimensions support.
    """
    if valence < 3:
        raise WindowError("tree windows need valence >= 3")
    if valence > MAX_TREE_VALENCE:
        raise WindowError(f"valence > {MAX_TREE_VALENCE} not supported")
    if b_max <= b_min:
        raise WindowError("b_max must exceed b_min")
    if depth_below < 0:
        raise WindowError("depth_below must be >= 0")
    floor = b_min - depth_below
    if not (floor <= 0 <= b_max):
        raise WindowError("band too small to contain the basepoint (level 0)")
    branching = valence - 1
    vertices: dict[str, tuple[int, ...]] = {}
    edges = []
    frontier = ["T"]
    vertices["T"] = (b_max,)
    for level in range(b_max - 1, floor - 1, -1):
        nxt = []
        for v in frontier:
            for d in range(branching):
                child = v + str(d)
                vertices[child] = (level,) + tuple(int(c) for c in child[1:])
                edges.append((v, child))
                nxt.append(child)
        frontier = nxt
    basepoint = "T" + "0" * b_max
    trusted = max(0, min(b_max, -floor))
    w = GraphWindow(vertices, edges, trusted, basepoint)
    return TreeWindow(valence, b_max, floor, w)


def tree_below(tw: TreeWindow, x: str, depth: Optional[int] = None) -> VertexSet:
    """The tree below x: connected component of {b <= b(x)} containing x.

    With `depth` given, only the slice down to b(x) - depth.  The result is
    flagged untrusted when the window clips the requested set (always, when
    depth is None: the ambient set is infinite).
    """
    x = tw.window.check_vertex(x)
    room = tw.level(x) - tw.floor
    if depth is None:
        depths, clipped = range(room + 1), True
    else:
        if depth < 0:
            raise WindowError("depth must be >= 0")
        clipped = depth > room
        depths = range(min(depth, room) + 1)
    members = []
    for t in depths:
        members.extend(tw.descendants_at_depth(x, t))
    return VertexSet(tw.window, frozenset(members), trusted=not clipped)


# ---------------------------------------------------------------------------
# products (L1 metric) and tree-product annuli
# ---------------------------------------------------------------------------


def pair_id(a: str, b: str) -> str:
    return f"({a}|{b})"


def split_pair(pid: str) -> tuple[str, str]:
    if not (pid.startswith("(") and pid.endswith(")")):
        raise WindowError(f"not a product vertex id: {pid!r}")
    body, depth = pid[1:-1], 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "|" and depth == 0:
            return body[:i], body[i + 1:]
    raise WindowError(f"not a product vertex id: {pid!r}")


def product_window(w1: GraphWindow, w2: GraphWindow) -> GraphWindow:
    """L1 product: edges change one coordinate by one step of its factor."""
    vertices = {}
    for a in w1.ids:
        la = w1.labels[a]
        for b in w2.ids:
            lb = w2.labels[b]
            lab = (la + lb) if (la is not None and lb is not None) else None
            vertices[pair_id(a, b)] = lab
    edges = []
    for a in w1.ids:
        for b, b2 in w2.edges():
            edges.append((pair_id(a, b), pair_id(a, b2)))
    for a, a2 in w1.edges():
        for b in w2.ids:
            edges.append((pair_id(a, b), pair_id(a2, b)))
    trusted = min(w1.trusted_radius, w2.trusted_radius)
    return GraphWindow(vertices, edges, trusted, pair_id(w1.basepoint, w2.basepoint))


@dataclass(frozen=True)
class TreeProduct:
    """Product of two tree windows, kept with its factor structure."""

    tw1: TreeWindow
    tw2: TreeWindow
    window: GraphWindow

    def coords(self, pid: str) -> tuple[str, str]:
        return split_pair(self.window.check_vertex(pid))


def tree_product(tw1: TreeWindow, tw2: TreeWindow) -> TreeProduct:
    return TreeProduct(tw1, tw2, product_window(tw1.window, tw2.window))


def tree_annulus(tp: TreeProduct, x, k: int) -> VertexSet:
    """Annulus A_x(k): (T(x1) x T(x2)) ∩ (S(x, k-1) ∪ S(x, k)).

    Inside the product of the descendant trees the L1 distance to x is
    exactly the sum of the two depths, so the set is computed by depth
    arithmetic and is the exact ambient set whenever both factors have k
    levels of room below x (otherwise UntrustedError).  By construction the
    members lie at distance <= k <= 4k from x.
    """
    if k < 1:
        raise WindowError("annulus parameter k must be >= 1")
    x1, x2 = x if isinstance(x, tuple) else split_pair(str(x))
    for tw, xi in ((tp.tw1, x1), (tp.tw2, x2)):
        if tw.level(xi) - k < tw.floor:
            raise UntrustedError(
                f"annulus k={k} at {xi!r} is clipped by the window floor")
    members = []
    for t1 in range(k + 1):
        z1s = tp.tw1.descendants_at_depth(x1, t1)
        for t2 in (k - 1 - t1, k - t1):
            if t2 < 0:
                continue
            for z1 in z1s:
                for z2 in tp.tw2.descendants_at_depth(x2, t2):
                    members.append(pair_id(z1, z2))
    return VertexSet(tp.window, frozenset(members), trusted=True)


def tree_annulus_ring(tp: TreeProduct, x, k: int, ring: int) -> VertexSet:
    """The part of A_x(k) on the sphere S(x, ring), ring in {k-1, k}."""
    if ring not in (k - 1, k):
        raise WindowError("ring must be k-1 or k")
    x1, x2 = x if isinstance(x, tuple) else split_pair(str(x))
    members = []
    for t1 in range(ring + 1):
        for z1 in tp.tw1.descendants_at_depth(x1, t1):
            for z2 in tp.tw2.descendants_at_depth(x2, ring - t1):
                members.append(pair_id(z1, z2))
    return VertexSet(tp.window, frozenset(members), trusted=True)


# ---------------------------------------------------------------------------
# Diestel-Leader windows and their V-sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DLWindow:
    """Window of DL(p,q): pairs of tree vertices with b1 + b2 = 0.

    Edges move both coordinates by one tree step (one up, the other down).
    """

    p: int
    q: int
    band: int
    tw1: TreeWindow
    tw2: TreeWindow
    window: GraphWindow

    def coords(self, pid: str) -> tuple[str, str]:
        return split_pair(self.window.check_vertex(pid))

    def levels(self, pid: str) -> tuple[int, int]:
        z1, z2 = self.coords(pid)
        return self.tw1.level(z1), self.tw2.level(z2)


def dl_window(p: int, q: int, band: int, depth: Optional[int] = None) -> DLWindow:
    """DL(p,q) window on the Busemann band [-band, band].

    Both factor trees branch fully down to `depth` levels below their window
    roots (default: the full band).  trusted_radius = min(band, depth) - 1.
    """
    if p < 2 or q < 2:
        raise WindowError("DL(p,q) needs p, q >= 2")
    if band < 1:
        raise WindowError("band must be >= 1")
    if depth is None:
        depth = 2 * band
    tw1 = tree_window(p + 1, max(-band, band - depth), band)
    tw2 = tree_window(q + 1, max(-band, band - depth), band)
    by_level1: dict[int, list[str]] = {}
    for v in tw1.window.ids:
        by_level1.setdefault(tw1.level(v), []).append(v)
    by_level2: dict[int, list[str]] = {}
    for v in tw2.window.ids:
        by_level2.setdefault(tw2.level(v), []).append(v)
    vertices = {}
    for lvl, z1s in by_level1.items():
        z2s = by_level2.get(-lvl)
        if not z2s:
            continue
        for z1 in z1s:
            lab1 = tw1.window.labels[z1]
            for z2 in z2s:
                vertices[pair_id(z1, z2)] = lab1 + tw2.window.labels[z2]
    edges = []
    for pid in vertices:
        z1, z2 = split_pair(pid)
        up1 = tw1.parent(z1)
        if up1 is not None:
            for c2 in tw2.children(z2):
                other = pair_id(up1, c2)
                if other in vertices:
                    edges.append((pid, other))
        up2 = tw2.parent(z2)
        if up2 is not None:
            for c1 in tw1.children(z1):
                other = pair_id(c1, up2)
                if other in vertices:
                    edges.append((pid, other))
    basepoint = pair_id(tw1.window.basepoint, tw2.window.basepoint)
    trusted = max(0, min(band, depth) - 1)
    w = GraphWindow(vertices, edges, trusted, basepoint)
    return DLWindow(p, q, band, tw1, tw2, w)


def dl_vset(dw: DLWindow, o1: str, o2: str, r: int) -> VertexSet:
    """V-set: pairs descending from (o1, o2) with depths summing to r.

    Requires b(o1) + b(o2) = r; the set lives on the zero-level band.
    """
    if r < 0:
        raise WindowError("r must be >= 0")
    o1 = dw.tw1.window.check_vertex(o1)
    o2 = dw.tw2.window.check_vertex(o2)
    if dw.tw1.level(o1) + dw.tw2.level(o2) != r:
        raise WindowError(
            f"Busemann precondition b(o1)+b(o2)={dw.tw1.level(o1) + dw.tw2.level(o2)} != r={r}")
    if dw.tw1.level(o1) - r < dw.tw1.floor or dw.tw2.level(o2) - r < dw.tw2.floor:
        raise UntrustedError(f"V-set of radius {r} is clipped by the window")
    members = []
    for t1 in range(r + 1):
        for z1 in dw.tw1.descendants_at_depth(o1, t1):
            for z2 in dw.tw2.descendants_at_depth(o2, r - t1):
                members.append(pair_id(z1, z2))
    return VertexSet(dw.window, frozenset(members), trusted=True)


def dl_persistent(dw: DLWindow, x, r: int) -> VertexSet:
    """Member A_x(r) of the DL persistent family: the V-set of x's r-th ancestor.

    The family is indexed by r >= 1; the containment A_x(r) ⊆ B(x, 4r) is
    asserted at construction via window BFS (window distances upper-bound the
    ambient ones, so a pass is a certificate).
    """
    if r < 1:
        raise WindowError("the DL family is indexed by r >= 1")
    x1, x2 = x if isinstance(x, tuple) else split_pair(str(x))
    o1 = dw.tw1.ancestor(x1, r)
    vset = dl_vset(dw, o1, x2, r)
    xid = pair_id(x1, x2)
    reached = dw.window.reached_distances(xid, limit=4 * r)
    missing = [v for v in vset.members if v not in reached]
    if missing:
        raise WindowError(
            f"containment A_x(r) ⊆ B(x,4r) not certified for r={r} at {xid!r}")
    return vset


# ---------------------------------------------------------------------------
# wreath-product Cayley balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WreathBallSpec:
    """Lamp group over a base: Z (base=None, generators ±1) or a finite group."""

    lamp: FiniteGroup
    base: Optional[FiniteGroup]
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise WindowError("radius must be >= 0")


def _wreath_state_id(config: tuple[tuple[int, int], ...], cursor: int) -> str:
    lamps = ",".join(f"{p}.{e}" for p, e in config)
    return f"w{cursor}:{lamps}"


def _wreath_label(config: tuple[tuple[int, int], ...], cursor: int) -> tuple[int, ...]:
    flat: list[int] = [cursor]
    for p, e in config:
        flat.extend((p, e))
    return tuple(flat)


def wreath_ball(spec: WreathBallSpec) -> GraphWindow:
    """Cayley ball of lamp ≀ base around the identity.

    Vertices are (finitely supported lamp configuration, cursor); the
    generating set is the lamp generators acting at the cursor together with
    the base generators moving it.
    """
    lamp, base, radius = spec.lamp, spec.base, spec.radius

    def lamp_moves(config: dict[int, int], cursor: int):
        for s in lamp.generators:
            new = dict(config)
            e = lamp.mul(new.get(cursor, 0), s)
            if e == 0:
                new.pop(cursor, None)
            else:
                new[cursor] = e
            yield new, cursor

    def base_moves(config: dict[int, int], cursor: int):
        if base is None:
            yield dict(config), cursor + 1
            yield dict(config), cursor - 1
        else:
            for t in base.generators:
                yield dict(config), base.mul(cursor, t)

    def freeze(config: dict[int, int], cursor: int):
        return (tuple(sorted(config.items())), cursor)

    start = ((), 0)
    layer = {start: 0}
    frontier = [start]
    for depth in range(1, radius + 1):
        nxt = []
        for config, cursor in frontier:
            cfg = dict(config)
            for moved in itertools.chain(lamp_moves(cfg, cursor), base_moves(cfg, cursor)):
                state = freeze(*moved)
                if state not in layer:
                    layer[state] = depth
                    nxt.append(state)
        frontier = nxt
    vertices = {_wreath_state_id(*s): _wreath_label(*s) for s in layer}
    edges = set()
    for config, cursor in layer:
        sid = _wreath_state_id(config, cursor)
        cfg = dict(config)
        for moved in itertools.chain(lamp_moves(cfg, cursor), base_moves(cfg, cursor)):
            state = freeze(*moved)
            if state in layer:
                tid = _wreath_state_id(*state)
                if sid != tid:
                    edges.add((min(sid, tid), max(sid, tid)))
    return GraphWindow(vertices, sorted(edges), radius, _wreath_state_id((), 0))


# ---------------------------------------------------------------------------
# grids, cycles, paths, thickened spheres
# ---------------------------------------------------------------------------


def grid_window(n: int, halfwidth: int) -> GraphWindow:
    """Z^n box [-halfwidth, halfwidth]^n with the L1 edge structure."""
    if n < 1 or halfwidth < 1:
        raise WindowError("need n >= 1 and halfwidth >= 1")
    rng = range(-halfwidth, halfwidth + 1)
    vertices = {}
    for coords in itertools.product(rng, repeat=n):
        vertices["g" + ",".join(str(c) for c in coords)] = coords
    edges = []
    for coords in itertools.product(rng, repeat=n):
        vid = "g" + ",".join(str(c) for c in coords)
        for i in range(n):
            if coords[i] + 1 <= halfwidth:
                up = coords[:i] + (coords[i] + 1,) + coords[i + 1:]
                edges.append((vid, "g" + ",".join(str(c) for c in up)))
    basepoint = "g" + ",".join("0" for _ in range(n))
    return GraphWindow(vertices, edges, halfwidth, basepoint)


def cycle_window(n: int) -> GraphWindow:
    """The n-cycle as a whole finite object (fully trusted)."""
    if n < 3:
        raise WindowError("cycle needs n >= 3")
    vertices = {f"c{i}": (i,) for i in range(n)}
    edges = [(f"c{i}", f"c{(i + 1) % n}") for i in range(n)]
    return GraphWindow(vertices, edges, n, "c0")


def path_window(n: int) -> GraphWindow:
    """The n-vertex path as a whole finite object (fully trusted)."""
    if n < 1:
        raise WindowError("path needs n >= 1")
    vertices = {f"p{i}": (i,) for i in range(n)}
    edges = [(f"p{i}", f"p{i + 1}") for i in range(n - 1)]
    return GraphWindow(vertices, edges, n, "p0")


def thickened_sphere(w: GraphWindow, x, r: int, t: int) -> VertexSet:
    """S(x, r)^{+t}; with t = 0 this is the sphere itself."""
    from .window import neighbourhood, sphere
    s = sphere(w, x, r)
    if t == 0 or not s.members:
        return s
    return neighbourhood(w, s, t)
