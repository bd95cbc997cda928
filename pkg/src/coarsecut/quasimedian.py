"""Graph products, their quasi-median Cayley balls, and pointed-clique graphs.

Elements of a graph product are held in a canonical normal form: a reduced
syllable sequence (vertex, group element) normalized to the least linear
extension of its dependence order (same-vertex or non-commuting syllables
keep their relative order; everything else is shuffled to shortlex-minimal
position).  Two words are equal in the group iff they normalize identically.

On top of the Cayley ball live the combinatorial registries: cliques are
vertex-group cosets, hyperplanes are computed both algebraically (cosets of
star subgroups, exact even near the window rim) and by union-find over
triangle / opposite-square edge generation (window-local; the two must agree
away from the rim).  Coherent clique metrics, the summed extended metric,
graphs of pointed cliques, bulkheads and partial wreath products follow.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .groups import FiniteGroup
from .window import GraphWindow, VertexSet, WindowError

Syllable = tuple[int, int]          # (vertex key, element index), element != 0
NF = tuple[Syllable, ...]


class CoherenceError(RuntimeError):
    """The metric system failed a coherence or uniqueness assertion."""


# ---------------------------------------------------------------------------
# trace normal forms (generic over a commutation relation)
# ---------------------------------------------------------------------------


def push_syllable(sylls: NF, u: int, g: int, mul: Callable[[int, int], int],
                  commutes: Callable[[int, int], bool]) -> NF:
    """Right-multiply a reduced word by one syllable, keeping it reduced."""
    if g == 0:
        return sylls
    out = list(sylls)
    for i in range(len(out) - 1, -1, -1):
        v, e = out[i]
        if v == u:
            merged = mul(e, g)
            if merged == 0:
                return tuple(out[:i] + out[i + 1:])
            out[i] = (u, merged)
            return tuple(out)
        if not commutes(v, u):
            break
    out.append((u, g))
    return tuple(out)


def lex_normal(sylls: NF, commutes: Callable[[int, int], bool]) -> NF:
    """Least linear extension of the dependence order: the canonical word."""
    n = len(sylls)
    if n < 2:
        return tuple(sylls)
    preds: list[set[int]] = [set() for _ in range(n)]
    for j in range(n):
        vj = sylls[j][0]
        for i in range(j):
            vi = sylls[i][0]
            if vi == vj or not commutes(vi, vj):
                preds[j].add(i)
    out: list[Syllable] = []
    done: set[int] = set()
    while len(done) < n:
        choice = min((i for i in range(n) if i not in done and preds[i] <= done),
                     key=lambda i: sylls[i])
        done.add(choice)
        out.append(sylls[choice])
    return tuple(out)


# ---------------------------------------------------------------------------
# graph product specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphProductSpec:
    """A finite simplicial graph with a finite group attached to each vertex."""

    vertex_names: tuple[str, ...]
    edges: frozenset[frozenset[int]]            # pairs of vertex indices
    groups: tuple[FiniteGroup, ...]

    def __post_init__(self):
        n = len(self.vertex_names)
        if len(set(self.vertex_names)) != n:
            raise WindowError("duplicate graph vertices")
        if len(self.groups) != n:
            raise WindowError("need one group per vertex")
        for e in self.edges:
            pair = sorted(e)
            if len(pair) != 2 or not all(0 <= v < n for v in pair):
                raise WindowError(f"bad edge {sorted(e)}")

    @property
    def n(self) -> int:
        return len(self.vertex_names)

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def link(self, u: int) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if self.adjacent(u, v))

    def star(self, u: int) -> tuple[int, ...]:
        return tuple(sorted(self.link(u) + (u,)))

    def star_complete(self, u: int) -> bool:
        lk = self.link(u)
        return all(self.adjacent(a, b) for a, b in itertools.combinations(lk, 2))

    def clique_number(self) -> int:
        best = 1 if self.n else 0
        for size in range(2, self.n + 1):
            for combo in itertools.combinations(range(self.n), size):
                if all(self.adjacent(a, b) for a, b in itertools.combinations(combo, 2)):
                    best = max(best, size)
        return best

    # -- normal-form plumbing over this spec --

    def nf(self, word: Iterable[tuple[int, int]]) -> NF:
        """Normal form of a word given as (vertex index, element index) pairs."""
        sylls: NF = ()
        for u, g in word:
            if not (0 <= u < self.n):
                raise WindowError(f"unknown generator vertex {u}")
            if not (0 <= g < self.groups[u].order):
                raise WindowError(f"unknown element {g} of group at vertex {u}")
            sylls = push_syllable(sylls, u, g, self.groups[u].mul, self.adjacent)
        return lex_normal(sylls, self.adjacent)

    def nf_mul(self, a: NF, b: NF) -> NF:
        sylls = a
        for u, g in b:
            sylls = push_syllable(sylls, u, g, self.groups[u].mul, self.adjacent)
        return lex_normal(sylls, self.adjacent)

    def nf_inverse(self, a: NF) -> NF:
        inv = tuple((u, self.groups[u].inverse(g)) for u, g in reversed(a))
        return lex_normal(inv, self.adjacent)

    def maximal_positions(self, sylls: NF) -> list[int]:
        """Indices of syllables that can be shuffled to the end of the word."""
        out = []
        for i in range(len(sylls)):
            vi = sylls[i][0]
            if all(sylls[j][0] != vi and self.adjacent(vi, sylls[j][0])
                   for j in range(i + 1, len(sylls))):
                out.append(i)
        return out

    def coset_rep(self, sylls: NF, u: int) -> NF:
        """Minimal-length representative of the coset g·G_u."""
        for i in self.maximal_positions(sylls):
            if sylls[i][0] == u:
                return lex_normal(sylls[:i] + sylls[i + 1:], self.adjacent)
        return sylls

    def parabolic_rep(self, sylls: NF, members: Sequence[int]) -> NF:
        """Minimal-length representative of the coset g·⟨members⟩."""
        allowed = set(members)
        current = sylls
        while True:
            stripped = None
            for i in self.maximal_positions(current):
                if current[i][0] in allowed:
                    stripped = current[:i] + current[i + 1:]
                    break
            if stripped is None:
                return lex_normal(current, self.adjacent)
            current = stripped


def nf_id(sylls: NF) -> str:
    if not sylls:
        return "q"
    return "q" + ";".join(f"{u}.{e}" for u, e in sylls)


def nf_label(sylls: NF) -> tuple[int, ...]:
    flat: list[int] = [len(sylls)]
    for u, e in sylls:
        flat.extend((u, e))
    return tuple(flat)


# ---------------------------------------------------------------------------
# quasi-median Cayley balls and their registries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Clique:
    """A vertex-group coset g·G_u: the maximal complete subgraphs."""

    key: str                     # "<u>:<rep id>"
    vtype: int
    rep: NF
    member_elt: dict[str, int]   # member id -> group element over the rep
    full: bool

    def member_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.member_elt))


@dataclass
class Hyperplane:
    key: str                     # "<u>:<parabolic rep id>"
    vtype: int
    clique_keys: tuple[str, ...]
    edge_set: frozenset[frozenset[str]]
    carrier: frozenset[str]
    partial: bool


class QMWindow:
    """Cayley ball of a graph product over the union of its vertex groups,
    with clique and hyperplane registries.

    Every vertex at distance < R from the identity has all its ambient
    neighbours in the ball, so trusted_radius = R.  Hyperplane membership of
    an edge is pure syllable combinatorics, hence exact everywhere; carriers,
    fibres and sectors are window-local and the `partial` flag marks
    hyperplanes whose ambient carrier the window clips.
    """

    def __init__(self, spec: GraphProductSpec, R: int):
        if R < 1:
            raise WindowError("radius must be >= 1")
        self.spec = spec
        self.R = R
        gens = [(u, g) for u in range(spec.n) for g in spec.groups[u].nontrivial()]
        layer: dict[NF, int] = {(): 0}
        frontier: list[NF] = [()]
        for depth in range(1, R + 1):
            nxt = []
            for v in frontier:
                for u, g in gens:
                    t = spec.nf_mul(v, ((u, g),))
                    if t not in layer:
                        layer[t] = depth
                        nxt.append(t)
            frontier = nxt
        self.nf_of: dict[str, NF] = {nf_id(v): v for v in layer}
        edges = set()
        complete = True
        for v in layer:
            vid = nf_id(v)
            for u, g in gens:
                t = spec.nf_mul(v, ((u, g),))
                if t in layer:
                    tid = nf_id(t)
                    if vid != tid:
                        edges.add((min(vid, tid), max(vid, tid)))
                else:
                    complete = False
        self.complete = complete   # ball swallowed the whole (finite) group
        vertices = {vid: nf_label(v) for vid, v in self.nf_of.items()}
        trusted = len(vertices) if complete else R
        self.window = GraphWindow(vertices, sorted(edges), trusted, "q")
        self._clique_cache: dict[str, Clique] = {}
        self._hyperplanes: Optional[dict[str, Hyperplane]] = None
        self._uf_classes: Optional[list[frozenset[frozenset[str]]]] = None

    # -- cliques -----------------------------------------------------------

    def clique_through(self, vid: str, u: int) -> Clique:
        """The clique (coset of G_u) through a ball vertex."""
        g = self.nf_of[self.window.check_vertex(vid)]
        rep = self.spec.coset_rep(g, u)
        key = f"{u}:{nf_id(rep)}"
        cached = self._clique_cache.get(key)
        if cached is not None:
            return cached
        members: dict[str, int] = {}
        order = self.spec.groups[u].order
        for h in range(order):
            m = rep if h == 0 else self.spec.nf_mul(rep, ((u, h),))
            mid = nf_id(m)
            if mid in self.nf_of:
                members[mid] = h
        clique = Clique(key, u, rep, members, full=(len(members) == order))
        self._clique_cache[key] = clique
        return clique

    def cliques_through(self, vid: str) -> list[Clique]:
        return [self.clique_through(vid, u) for u in range(self.spec.n)]

    def all_cliques(self) -> dict[str, Clique]:
        for vid in self.window.ids:
            self.cliques_through(vid)
        return dict(self._clique_cache)

    def edge_syllable(self, a: str, b: str) -> Syllable:
        """The (vertex, element) carrying the edge a—b."""
        diff = self.spec.nf_mul(self.spec.nf_inverse(self.nf_of[a]), self.nf_of[b])
        if len(diff) != 1:
            raise WindowError(f"{a!r}—{b!r} is not a Cayley edge")
        return diff[0]

    def edge_clique(self, a: str, b: str) -> Clique:
        u, _ = self.edge_syllable(a, b)
        return self.clique_through(a, u)

    # -- hyperplanes ---------------------------------------------------------

    def hyperplane_key(self, a: str, b: str) -> str:
        """Algebraic hyperplane class of an edge: exact even near the rim."""
        u, _ = self.edge_syllable(a, b)
        rep = self.spec.parabolic_rep(self.nf_of[a], self.spec.star(u))
        return f"{u}:{nf_id(rep)}"

    def hyperplanes(self) -> dict[str, Hyperplane]:
        if self._hyperplanes is not None:
            return self._hyperplanes
        spec = self.spec
        by_key: dict[str, dict] = {}
        for clique in self.all_cliques().values():
            u = clique.vtype
            rep = spec.parabolic_rep(clique.rep, spec.star(u))
            key = f"{u}:{nf_id(rep)}"
            slot = by_key.setdefault(key, {"u": u, "cliques": [], "edges": set(),
                                           "carrier": set(), "full": True})
            slot["cliques"].append(clique.key)
            slot["carrier"].update(clique.member_elt)
            slot["full"] = slot["full"] and clique.full
            ids = clique.member_ids()
            for x, y in itertools.combinations(ids, 2):
                slot["edges"].add(frozenset((x, y)))
        out = {}
        for key, slot in sorted(by_key.items()):
            u = slot["u"]
            expected = None
            if spec.star_complete(u):
                expected = 1
                for v in spec.star(u):
                    expected *= spec.groups[v].order
            complete = (slot["full"] and expected is not None
                        and len(slot["carrier"]) == expected)
            out[key] = Hyperplane(key, u, tuple(sorted(slot["cliques"])),
                                  frozenset(slot["edges"]),
                                  frozenset(slot["carrier"]),
                                  partial=not complete)
        self._hyperplanes = out
        return out

    def unionfind_classes(self) -> list[frozenset[frozenset[str]]]:
        """Edge classes by triangle / opposite-square generation (window-local)."""
        if self._uf_classes is not None:
            return self._uf_classes
        w = self.window
        parent: dict[frozenset[str], frozenset[str]] = {}

        def find(e):
            root = e
            while parent[root] != root:
                root = parent[root]
            while parent[e] != root:
                parent[e], e = root, parent[e]
            return root

        def union(e1, e2):
            r1, r2 = find(e1), find(e2)
            if r1 != r2:
                parent[max(r1, r2, key=sorted)] = min(r1, r2, key=sorted)

        for a, b in w.edges():
            parent[frozenset((a, b))] = frozenset((a, b))
        for a, b in w.edges():
            for c in set(w.adj[a]) & set(w.adj[b]):
                union(frozenset((a, b)), frozenset((a, c)))
                union(frozenset((a, b)), frozenset((b, c)))
        for v in w.ids:
            nbrs = w.adj[v]
            for x, y in itertools.combinations(nbrs, 2):
                for z in set(w.adj[x]) & set(w.adj[y]):
                    if z != v:
                        union(frozenset((v, x)), frozenset((y, z)))
                        union(frozenset((v, y)), frozenset((x, z)))
        classes: dict[frozenset[str], set] = {}
        for e in parent:
            classes.setdefault(find(e), set()).add(e)
        self._uf_classes = [frozenset(c) for c in classes.values()]
        return self._uf_classes

    # -- window-local geometry of a hyperplane --------------------------------

    def sectors(self, hyp: Hyperplane) -> dict[str, int]:
        """Component index of every vertex in window ∖∖ J."""
        w = self.window
        comp: dict[str, int] = {}
        idx = 0
        for v in w.ids:
            if v in comp:
                continue
            queue = deque([v])
            comp[v] = idx
            while queue:
                x = queue.popleft()
                for y in w.adj[x]:
                    if y not in comp and frozenset((x, y)) not in hyp.edge_set:
                        comp[y] = idx
                        queue.append(y)
            idx += 1
        return comp

    def fibres(self, hyp: Hyperplane) -> list[frozenset[str]]:
        """Components of the carrier with the hyperplane's edges removed."""
        comp: dict[str, int] = {}
        idx = 0
        carrier = hyp.carrier
        for v in sorted(carrier):
            if v in comp:
                continue
            queue = deque([v])
            comp[v] = idx
            while queue:
                x = queue.popleft()
                for y in self.window.adj[x]:
                    if (y in carrier and y not in comp
                            and frozenset((x, y)) not in hyp.edge_set):
                        comp[y] = idx
                        queue.append(y)
            idx += 1
        out: dict[int, set[str]] = {}
        for v, i in comp.items():
            out.setdefault(i, set()).add(v)
        return sorted((frozenset(s) for s in out.values()), key=sorted)

    def transverse(self, h1: Hyperplane, h2: Hyperplane) -> bool:
        """h2 has an edge in the carrier of h1 that is not an edge of h1."""
        if h1.key == h2.key:
            return False
        for e in h2.edge_set:
            a, b = tuple(e)
            if a in h1.carrier and b in h1.carrier and e not in h1.edge_set:
                return True
        return False

    # -- geodesics ------------------------------------------------------------

    def all_geodesics(self, a: str, b: str, cap: int = 20000) -> list[list[str]]:
        w = self.window
        da = w.reached_distances(a)
        db = w.reached_distances(b)
        if b not in da:
            raise WindowError("disconnected pair")
        d = da[b]
        paths: list[list[str]] = []
        stack = [[a]]
        while stack:
            path = stack.pop()
            v = path[-1]
            if v == b:
                paths.append(path)
                if len(paths) > cap:
                    raise WindowError("geodesic enumeration cap exceeded")
                continue
            for u in w.adj[v]:
                if da.get(u, -1) == da[v] + 1 and da[u] + db.get(u, 10 ** 9) == d:
                    stack.append(path + [u])
        return paths

    def crossed_hyperplane_keys(self, path: Sequence[str]) -> list[str]:
        return [self.hyperplane_key(x, y) for x, y in zip(path, path[1:])]


def qm_ball(spec: GraphProductSpec, R: int) -> QMWindow:
    return QMWindow(spec, R)


# ---------------------------------------------------------------------------
# forbidden-subgraph scan (quasi-median sanity)
# ---------------------------------------------------------------------------


def find_induced_k4_minus(w: GraphWindow) -> Optional[tuple[str, ...]]:
    """An induced K4 minus an edge (two triangles glued), if any."""
    for a, b in w.edges():
        common = sorted(set(w.adj[a]) & set(w.adj[b]))
        for x, y in itertools.combinations(common, 2):
            if y not in w.adj[x]:
                return (a, b, x, y)
    return None


def find_induced_k32(w: GraphWindow) -> Optional[tuple]:
    """An induced K_{3,2} (two squares glued along adjacent edges), if any."""
    ids = w.ids
    for x, y in itertools.combinations(ids, 2):
        if y in w.adj[x]:
            continue
        common = sorted(set(w.adj[x]) & set(w.adj[y]))
        if len(common) < 3:
            continue
        for trio in itertools.combinations(common, 3):
            if all(b not in w.adj[a] for a, b in itertools.combinations(trio, 2)):
                return (x, y) + trio
    return None


# ---------------------------------------------------------------------------
# coherent metric systems and the extended metric
# ---------------------------------------------------------------------------


class MetricSystem:
    """Per-clique word metrics δ_C and the extended metric δ = Σ_J δ_J."""

    def __init__(self, qmw: QMWindow):
        self.qmw = qmw
        self.word_lengths = tuple(g.word_lengths() for g in qmw.spec.groups)

    def delta_clique(self, clique: Clique, a: str, b: str) -> int:
        grp = self.qmw.spec.groups[clique.vtype]
        ha, hb = clique.member_elt[a], clique.member_elt[b]
        return self.word_lengths[clique.vtype][grp.mul(grp.inverse(ha), hb)]

    def project_to_clique(self, clique: Clique, x: str) -> str:
        """Gate projection: the unique distance-minimising clique vertex."""
        dist = self.qmw.window.reached_distances(x)
        ids = clique.member_ids()
        best = min(dist.get(m, float("inf")) for m in ids)
        argmins = [m for m in ids if dist.get(m, float("inf")) == best]
        if len(argmins) != 1:
            raise CoherenceError(
                f"projection of {x!r} to clique {clique.key} is not unique")
        return argmins[0]

    def check_coherence(self) -> None:
        """Projections between cliques of one hyperplane must be δ-isometries."""
        for hyp in self.qmw.hyperplanes().values():
            if hyp.partial:
                continue
            cliques = [self._clique_by_key(k) for k in hyp.clique_keys]
            for A, B in itertools.permutations(cliques, 2):
                images = {}
                for a in A.member_ids():
                    images[a] = self.project_to_clique(B, a)
                if len(set(images.values())) != len(images):
                    raise CoherenceError(
                        f"projection {A.key} -> {B.key} is not a bijection")
                for a1, a2 in itertools.combinations(A.member_ids(), 2):
                    if (self.delta_clique(A, a1, a2)
                            != self.delta_clique(B, images[a1], images[a2])):
                        raise CoherenceError(
                            f"projection {A.key} -> {B.key} is not a δ-isometry")

    def _clique_by_key(self, key: str) -> Clique:
        clique = self.qmw._clique_cache.get(key)
        if clique is None:
            raise WindowError(f"unknown clique {key!r}")
        return clique

    def delta(self, x: str, y: str) -> int:
        """Extended metric: sum of δ_J over the hyperplanes separating x, y.

        Computed along one geodesic; each crossed hyperplane contributes the
        local distance between the projections of x and y to a clique of it.
        """
        from .separation import geodesic_path
        x = self.qmw.window.check_vertex(x)
        y = self.qmw.window.check_vertex(y)
        if x == y:
            return 0
        path = geodesic_path(self.qmw.window, x, y)
        seen: dict[str, Clique] = {}
        for a, b in zip(path, path[1:]):
            key = self.qmw.hyperplane_key(a, b)
            if key not in seen:
                seen[key] = self.qmw.edge_clique(a, b)
        total = 0
        for clique in seen.values():
            px = self.project_to_clique(clique, x)
            py = self.project_to_clique(clique, y)
            total += self.delta_clique(clique, px, py)
        return total

    def delta_weighted(self, x: str, y: str) -> int:
        """Oracle for δ: least total local length over window paths (Dijkstra).

        Broken geodesics realise δ, so for trusted pairs this agrees with
        the hyperplane sum.
        """
        import heapq
        w = self.qmw.window
        x, y = w.check_vertex(x), w.check_vertex(y)
        dist = {x: 0}
        heap = [(0, x)]
        while heap:
            d, v = heapq.heappop(heap)
            if v == y:
                return d
            if d > dist.get(v, float("inf")):
                continue
            for u in w.adj[v]:
                clique = self.qmw.edge_clique(v, u)
                nd = d + self.delta_clique(clique, v, u)
                if nd < dist.get(u, float("inf")):
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        raise WindowError("disconnected pair")


def metrics(qmw: QMWindow) -> MetricSystem:
    return MetricSystem(qmw)


# ---------------------------------------------------------------------------
# graphs of pointed cliques
# ---------------------------------------------------------------------------


def pc_id(clique_key: str, member: str) -> str:
    return f"{clique_key}@{member}"


@dataclass
class PCWindow:
    """Graph of pointed cliques: vertices (clique, marked vertex); slide edges
    move the mark by one step of the clique metric, rotation edges re-choose
    the clique inside a prism."""

    qmw: QMWindow
    msys: MetricSystem
    window: GraphWindow
    kinds: dict[frozenset[str], str]
    points: dict[str, tuple[str, str]]          # pc id -> (clique key, member id)

    def clique_of(self, pid: str) -> Clique:
        key, _ = self.points[self.window.check_vertex(pid)]
        return self.qmw._clique_cache[key]

    def marked_vertex(self, pid: str) -> str:
        return self.points[self.window.check_vertex(pid)][1]


def _pc_neighbours(qmw: QMWindow, msys: MetricSystem, clique: Clique, x: str):
    for other in clique.member_ids():
        if other != x and msys.delta_clique(clique, x, other) == 1:
            yield (clique, other), "slide"
    for other_clique in qmw.cliques_through(x):
        if (other_clique.key != clique.key
                and qmw.spec.adjacent(clique.vtype, other_clique.vtype)):
            yield (other_clique, x), "rotation"


def pc_build(qmw: QMWindow, msys: MetricSystem, base: Optional[tuple[str, str]] = None,
             radius: Optional[int] = None) -> PCWindow:
    """Build the pointed-clique graph over full cliques of the window.

    With `radius`, only the PC-ball around `base` (default: the least clique
    through the Cayley basepoint, marked there) is materialized via BFS —
    enough for comparisons against partial-wreath Cayley balls.
    """
    if base is None:
        base_vertex = qmw.window.basepoint
        base_clique = min(qmw.cliques_through(base_vertex), key=lambda c: c.key)
        base = (base_clique.key, base_vertex)
    else:
        base_clique = qmw._clique_cache.get(base[0]) or qmw.clique_through(base[1], int(base[0].split(":")[0]))
    if not base_clique.full:
        raise WindowError("base clique is clipped by the window")

    points: dict[str, tuple[str, str]] = {}
    edges: set[tuple[str, str]] = set()
    kinds: dict[frozenset[str], str] = {}

    if radius is None:
        for vid in qmw.window.ids:
            for clique in qmw.cliques_through(vid):
                if clique.full:
                    points[pc_id(clique.key, vid)] = (clique.key, vid)
        for pid, (ckey, x) in points.items():
            clique = qmw._clique_cache[ckey]
            for (nc, nx), kind in _pc_neighbours(qmw, msys, clique, x):
                if not nc.full:
                    continue
                tid = pc_id(nc.key, nx)
                if tid in points and pid != tid:
                    edges.add((min(pid, tid), max(pid, tid)))
                    kinds[frozenset((pid, tid))] = kind
        trusted = max(0, qmw.R - 1)
    else:
        start = pc_id(*base)
        layer = {start: 0}
        points[start] = base
        frontier = [base]
        for depth in range(1, radius + 1):
            nxt = []
            for ckey, x in frontier:
                clique = qmw._clique_cache[ckey]
                for (nc, nx), kind in _pc_neighbours(qmw, msys, clique, x):
                    if not nc.full:
                        raise WindowError(
                            "PC ball touched a clipped clique; enlarge the Cayley ball")
                    tid = pc_id(nc.key, nx)
                    if tid not in layer:
                        layer[tid] = depth
                        points[tid] = (nc.key, nx)
                        nxt.append((nc.key, nx))
            frontier = nxt
        for pid, (ckey, x) in points.items():
            clique = qmw._clique_cache[ckey]
            for (nc, nx), kind in _pc_neighbours(qmw, msys, clique, x):
                tid = pc_id(nc.key, nx)
                if tid in points and pid != tid:
                    edges.add((min(pid, tid), max(pid, tid)))
                    kinds[frozenset((pid, tid))] = kind
        trusted = radius

    vertices = {pid: None for pid in points}
    w = GraphWindow(vertices, sorted(edges), trusted, pc_id(*base))
    return PCWindow(qmw, msys, w, kinds, points)


# -- bulkheads and zones -----------------------------------------------------


@dataclass
class BulkheadDecomposition:
    bulkhead: VertexSet
    zone_sector: VertexSet
    zone_rest: VertexSet
    fibre: frozenset[str]


def bulkhead(pcw: PCWindow, hyp_key: str, fibre_index: int = 0) -> BulkheadDecomposition:
    """The bulkhead of a fibre F of a hyperplane J, with its two zones.

    The sector zone holds pointed cliques inside the sector delimited by F;
    the other zone is the rest: cliques in other sectors together with the
    pointed cliques of J marked outside F.
    """
    qmw = pcw.qmw
    hyp = qmw.hyperplanes().get(hyp_key)
    if hyp is None:
        raise WindowError(f"unknown hyperplane {hyp_key!r}")
    if hyp.partial:
        raise WindowError(f"hyperplane {hyp_key!r} is clipped by the window")
    fibres = qmw.fibres(hyp)
    if not (0 <= fibre_index < len(fibres)):
        raise WindowError("no such fibre")
    fibre = fibres[fibre_index]
    sector_of = qmw.sectors(hyp)
    fibre_sector = sector_of[next(iter(fibre))]
    in_J = set(hyp.clique_keys)
    bulk, zone_sector, zone_rest = set(), set(), set()
    for pid, (ckey, x) in pcw.points.items():
        if ckey in in_J:
            if x in fibre:
                bulk.add(pid)
            else:
                zone_rest.add(pid)
        else:
            members = qmw._clique_cache[ckey].member_ids()
            if sector_of[members[0]] == fibre_sector:
                zone_sector.add(pid)
            else:
                zone_rest.add(pid)
    w = pcw.window
    return BulkheadDecomposition(
        VertexSet(w, frozenset(bulk)), VertexSet(w, frozenset(zone_sector)),
        VertexSet(w, frozenset(zone_rest)), fibre)


def bulkhead_separates(pcw: PCWindow, decomp: BulkheadDecomposition) -> bool:
    """No path between the two zones once the bulkhead is removed."""
    w = pcw.window
    blocked = decomp.bulkhead.members
    seen = set()
    queue = deque(v for v in decomp.zone_sector.members)
    seen.update(queue)
    while queue:
        v = queue.popleft()
        for u in w.adj[v]:
            if u not in seen and u not in blocked:
                seen.add(u)
                queue.append(u)
    return not (seen & decomp.zone_rest.members)


# -- distance comparison -----------------------------------------------------


@dataclass(frozen=True)
class PCDistanceCheck:
    delta: int
    d_pc: int | float
    lower_ok: bool
    same_hyperplane: bool
    upper_ok: Optional[bool]


def pc_distance_bounds(pcw: PCWindow, p1: str, p2: str) -> PCDistanceCheck:
    """δ(a,b) <= d_PC always; d_PC <= 3δ+1 when both cliques share a hyperplane."""
    w = pcw.window
    p1, p2 = w.check_vertex(p1), w.check_vertex(p2)
    (k1, a), (k2, b) = pcw.points[p1], pcw.points[p2]
    d_pc = w.distance(p1, p2)
    delta = pcw.msys.delta(a, b)
    spec = pcw.qmw.spec
    c1, c2 = pcw.qmw._clique_cache[k1], pcw.qmw._clique_cache[k2]
    hyp1 = f"{c1.vtype}:{nf_id(spec.parabolic_rep(c1.rep, spec.star(c1.vtype)))}"
    hyp2 = f"{c2.vtype}:{nf_id(spec.parabolic_rep(c2.rep, spec.star(c2.vtype)))}"
    same = hyp1 == hyp2
    upper = (d_pc <= 3 * delta + 1) if same else None
    return PCDistanceCheck(delta, d_pc, delta <= d_pc, same, upper)


# ---------------------------------------------------------------------------
# partial wreath products  A □_Γ B
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseGraph:
    """Γ: a Cayley-type graph on the base, governing which lamps commute.

    kind "line_z": B = Z with moves ±1, positions adjacent iff |p-q| = 1.
    kind "finite": B a finite group moving by its generators; gamma "complete"
    makes all distinct positions adjacent (recovering the full wreath
    product), gamma "edgeless" none (the free-product truncation).
    """

    kind: str
    group: Optional[FiniteGroup] = None
    gamma: str = "complete"

    def __post_init__(self):
        if self.kind not in ("line_z", "finite"):
            raise WindowError(f"unknown base kind {self.kind!r}")
        if self.kind == "finite" and self.group is None:
            raise WindowError("finite base needs a group")
        if self.gamma not in ("complete", "edgeless", "line"):
            raise WindowError(f"unknown gamma {self.gamma!r}")

    def adjacent(self, p: int, q: int) -> bool:
        if p == q:
            return False
        if self.kind == "line_z":
            return abs(p - q) == 1
        return self.gamma == "complete"

    def moves(self, cursor: int) -> tuple[int, ...]:
        if self.kind == "line_z":
            return (cursor + 1, cursor - 1)
        return tuple(self.group.mul(cursor, t) for t in self.group.generators)


def line_z_base() -> BaseGraph:
    return BaseGraph("line_z", None, "line")


def complete_base(group: FiniteGroup) -> BaseGraph:
    return BaseGraph("finite", group, "complete")


def edgeless_base(group: FiniteGroup) -> BaseGraph:
    return BaseGraph("finite", group, "edgeless")


def pw_id(sylls: NF, cursor: int) -> str:
    lamps = ";".join(f"{p}.{e}" for p, e in sylls)
    return f"pw{cursor}:{lamps}"


@dataclass
class PartialWreathBall:
    lamp: FiniteGroup
    base: BaseGraph
    radius: int
    window: GraphWindow
    states: dict[str, tuple[NF, int]]


def partial_wreath_ball(lamp: FiniteGroup, base: BaseGraph, R: int) -> PartialWreathBall:
    """Cayley ball of A □_Γ B = ΓA ⋊ B around the identity.

    States are (reduced lamp word, cursor); lamp generators act at the
    cursor, base generators move it.  Only Γ-adjacent positions commute.
    """
    if R < 0:
        raise WindowError("radius must be >= 0")

    def lamp_push(sylls: NF, pos: int, g: int) -> NF:
        out = push_syllable(sylls, pos, g, lamp.mul, base.adjacent)
        return lex_normal(out, base.adjacent)

    start = ((), 0)
    layer = {start: 0}
    frontier = [start]
    for depth in range(1, R + 1):
        nxt = []
        for sylls, cursor in frontier:
            targets = [(lamp_push(sylls, cursor, s), cursor) for s in lamp.generators]
            targets.extend((sylls, c) for c in base.moves(cursor))
            for state in targets:
                if state not in layer:
                    layer[state] = depth
                    nxt.append(state)
        frontier = nxt
    states = {pw_id(*s): s for s in layer}
    edges = set()
    for sylls, cursor in layer:
        sid = pw_id(sylls, cursor)
        targets = [(lamp_push(sylls, cursor, s), cursor) for s in lamp.generators]
        targets.extend((sylls, c) for c in base.moves(cursor))
        for state in targets:
            if state in layer:
                tid = pw_id(*state)
                if sid != tid:
                    edges.add((min(sid, tid), max(sid, tid)))
    vertices = {}
    for sid, (sylls, cursor) in states.items():
        flat = [cursor]
        for p, e in sylls:
            flat.extend((p, e))
        vertices[sid] = tuple(flat)
    w = GraphWindow(vertices, sorted(edges), R, pw_id((), 0))
    return PartialWreathBall(lamp, base, R, w, states)


def dagger(lamp: FiniteGroup, sylls: NF) -> tuple[tuple[int, int], ...]:
    """Collapse a lamp word to its finitely-supported configuration."""
    config: dict[int, int] = {}
    for p, e in sylls:
        v = lamp.mul(config.get(p, 0), e)
        if v == 0:
            config.pop(p, None)
        else:
            config[p] = v
    return tuple(sorted(config.items()))


def project_to_wreath(pw: PartialWreathBall, sid: str) -> str:
    """π_Γ: (g, b) -> (g†, b), as a wreath-ball vertex id."""
    from .generators import _wreath_state_id
    sylls, cursor = pw.states[sid]
    return _wreath_state_id(dagger(pw.lamp, sylls), cursor)


# -- the structural integration check ---------------------------------------


@dataclass
class IsoReport:
    ok: bool
    size: int
    detail: str = ""


def pw_qm_spec(lamp: FiniteGroup, base: BaseGraph, R: int) -> tuple[GraphProductSpec, dict[int, int]]:
    """Finite graph-product spec seen by a radius-R ball of A □_Γ B.

    For B = Z only positions within R+1 of the origin can be touched, so the
    infinite line is truncated there; finite bases are used whole.  Returns
    the spec and the position -> spec-vertex-index map.
    """
    if base.kind == "line_z":
        M = R + 1
        positions = list(range(-M, M + 1))
    else:
        positions = list(range(base.group.order))
    index = {p: i for i, p in enumerate(positions)}
    edges = set()
    for p, q in itertools.combinations(positions, 2):
        if base.adjacent(p, q):
            edges.add(frozenset((index[p], index[q])))
    spec = GraphProductSpec(tuple(str(p) for p in positions), frozenset(edges),
                            tuple(lamp for _ in positions))
    return spec, index


def pc_iso_check(lamp: FiniteGroup, base: BaseGraph, R: int) -> IsoReport:
    """Verify the basepoint-preserving isomorphism between the Cayley ball of
    A □_Γ B and the pointed-clique ball of QM(Γ, A) with its word metrics.

    The element (g, b) corresponds to the pointed clique (g⟨b⟩, g); lamp
    moves slide the mark inside the clique, base moves rotate the clique
    within a prism.  A mismatch signals a construction bug.
    """
    pw = partial_wreath_ball(lamp, base, R)
    spec, index = pw_qm_spec(lamp, base, R)
    qmw = qm_ball(spec, R + 1)
    msys = metrics(qmw)
    base_clique = qmw.clique_through("q", index[0])
    pcw = pc_build(qmw, msys, base=(base_clique.key, "q"), radius=R)

    mapping: dict[str, str] = {}
    for sid, (sylls, cursor) in pw.states.items():
        qm_nf = spec.nf([(index[p], e) for p, e in sylls])
        vid = nf_id(qm_nf)
        if vid not in qmw.nf_of:
            return IsoReport(False, len(pw.states), f"marked vertex {vid!r} missing")
        clique = qmw.clique_through(vid, index[cursor])
        mapping[sid] = pc_id(clique.key, vid)

    if len(set(mapping.values())) != len(mapping):
        return IsoReport(False, len(pw.states), "correspondence is not injective")
    if set(mapping.values()) != set(pcw.window.ids):
        return IsoReport(False, len(pw.states),
                         f"image has {len(set(mapping.values()))} of {len(pcw.window.ids)} PC vertices")
    if mapping[pw.window.basepoint] != pcw.window.basepoint:
        return IsoReport(False, len(pw.states), "basepoint not preserved")
    pw_edges = {frozenset((mapping[a], mapping[b])) for a, b in pw.window.edges()}
    pc_edges = {frozenset((a, b)) for a, b in pcw.window.edges()}
    if pw_edges != pc_edges:
        return IsoReport(False, len(pw.states),
                         f"edge sets differ ({len(pw_edges)} vs {len(pc_edges)})")
    return IsoReport(True, len(pw.states))


# ---------------------------------------------------------------------------
# the separating subsets ℬ(E, c) of wreath products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BSet:
    """{(f, x) : x ∈ E, f agrees with the colouring c outside E}."""

    E: frozenset[int]
    colouring: tuple[tuple[int, int], ...]
    members: VertexSet


def bset(E: Iterable[int], colouring: dict[int, int], wreath_window: GraphWindow) -> BSet:
    """Materialize ℬ(E, c) inside a wreath-product ball window.

    Wreath vertices carry labels (cursor, pos, lamp, pos, lamp, ...); a
    vertex belongs iff its cursor is in E and its configuration matches c at
    every position outside E.
    """
    E = frozenset(int(x) for x in E)
    c = {int(p): int(e) for p, e in colouring.items() if int(e) != 0}
    outside = {p: e for p, e in c.items() if p not in E}
    members = []
    for vid in wreath_window.ids:
        label = wreath_window.labels[vid]
        cursor = label[0]
        if cursor not in E:
            continue
        config = {label[i]: label[i + 1] for i in range(1, len(label), 2)}
        config_outside = {p: e for p, e in config.items() if p not in E}
        if config_outside == outside:
            members.append(vid)
    return BSet(E, tuple(sorted(c.items())),
                VertexSet(wreath_window, frozenset(members)))
