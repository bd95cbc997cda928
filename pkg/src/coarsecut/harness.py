"""Experiment registry, window cache, CSV reports and verdicts.

Each registered experiment reproduces one of the package's desk-scale
claims: it writes one CSV of certified values (byte-stable: same spec and
seed give identical bytes), renders a figure from that CSV where a growth
curve exists, and returns pass / fail / inconclusive verdicts.  Budget
exhaustion is always `inconclusive`, never a silent fail.

Windows are cached content-addressed: objects are cgw files named by their
sha256, with a name index so deterministic builders can be skipped on a hit.
Window construction takes no randomness, so specs differing only in their
seed share cache entries.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import os
import platform
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from . import generators as gen
from . import invariants as inv
from . import quasimedian as qm
from . import separation as sep
from .groups import cyclic_group
from .window import (
    GraphWindow,
    VertexSet,
    WindowError,
    k_components,
    load_cgw,
    read_cgw,
    vertex_set,
    whole_window,
    write_cgw,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


# ---------------------------------------------------------------------------
# window cache
# ---------------------------------------------------------------------------

CACHE_ENV = "COARSE_CUT_CACHE"


class CacheError(WindowError):
    pass


class WindowCache:
    """Content-addressed store of cgw files with a builder-name index."""

    def __init__(self, root: Optional[Path] = None):
        if root is None:
            root = Path(os.environ.get(CACHE_ENV, ".coarse-cut-cache"))
        self.root = Path(root)
        (self.root / "objects").mkdir(parents=True, exist_ok=True)
        (self.root / "names").mkdir(parents=True, exist_ok=True)

    def put(self, w: GraphWindow) -> str:
        text = write_cgw(w)
        digest = hashlib.sha256(text.encode()).hexdigest()
        path = self.root / "objects" / f"{digest}.cgw"
        if not path.exists():
            path.write_text(text)
        return digest

    def load(self, digest: str) -> GraphWindow:
        path = self.root / "objects" / f"{digest}.cgw"
        if not path.exists():
            raise CacheError(f"no cached object {digest}")
        text = path.read_text()
        actual = hashlib.sha256(text.encode()).hexdigest()
        if actual != digest:
            raise CacheError(f"cache object {digest} is corrupt (hash {actual})")
        return read_cgw(text)

    def get_or_build(self, name: str, builder: Callable[[], GraphWindow]
                     ) -> tuple[GraphWindow, bool]:
        """Return (window, came_from_cache)."""
        index = self.root / "names" / name
        if index.exists():
            digest = index.read_text().strip()
            try:
                return self.load(digest), True
            except CacheError:
                pass
        w = builder()
        index.write_text(self.put(w))
        return w, False


# ---------------------------------------------------------------------------
# experiment plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    params: dict
    seed: int = 0
    outdir: Path = Path("out")

    def key(self) -> str:
        blob = self.name + "|" + "|".join(
            f"{k}={self.params[k]}" for k in sorted(self.params)) + f"|seed={self.seed}"
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    spec: ExperimentSpec
    columns: list[str]
    rows: list[dict]
    verdicts: list[tuple[str, str, str]]     # (check, status, detail)
    runtime: float
    environment: dict

    def status(self) -> str:
        statuses = [s for _, s, _ in self.verdicts]
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        return PASS

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row.get(c, "")) for c in self.columns])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _environment() -> dict:
    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "package": __version__,
    }


# plot declarations: x column, y columns, log-scale flag
PLOTS: dict[str, tuple[str, tuple[str, ...], bool]] = {
    "tree-annulus": ("k", ("ring_size", "annulus_size"), True),
    "dl-vset": ("r", ("size",), True),
    "cut-growth": ("k", ("cut", "cheeger_bound"), False),
    "poincare-annulus": ("k", ("value", "bound"), False),
    "separation-demo": ("r", ("cut_size",), False),
}


def run(spec: ExperimentSpec, cache: Optional[WindowCache] = None) -> RunRecord:
    """Execute a registered experiment; persist CSV, figure, and verdicts."""
    runner = EXPERIMENTS.get(spec.name)
    if runner is None:
        raise WindowError(f"unknown experiment {spec.name!r} "
                          f"(known: {', '.join(sorted(EXPERIMENTS))})")
    if cache is None:
        cache = WindowCache(Path(spec.outdir) / "cache")
    t0 = time.time()
    columns, rows, verdicts = runner(spec, cache)
    record = RunRecord(spec, columns, rows, verdicts, time.time() - t0, _environment())
    outdir = Path(spec.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{spec.name}.csv"
    csv_path.write_text(record.csv_text())
    if spec.name in PLOTS:
        from .plots import render_series
        x, ys, logy = PLOTS[spec.name]
        render_series(csv_path, outdir / f"{spec.name}.svg", x, ys, logy=logy,
                      title=spec.name)
    summary = [f"experiment: {spec.name}",
               f"spec-key: {spec.key()}",
               f"seed: {spec.seed}",
               f"runtime-seconds: {record.runtime:.2f}"]
    summary += [f"env-{k}: {v}" for k, v in sorted(record.environment.items())]
    summary += [f"verdict {name}: {status}" + (f" ({detail})" if detail else "")
                for name, status, detail in verdicts]
    summary.append(f"overall: {record.status()}")
    (outdir / f"{spec.name}.verdict.txt").write_text("\n".join(summary) + "\n")
    return record


# ---------------------------------------------------------------------------
# the experiments
# ---------------------------------------------------------------------------


def _annulus_fixture(cache: WindowCache, b_max: int, floor: int) -> gen.TreeProduct:
    tw1 = gen.tree_window(3, floor, b_max)
    tw2 = gen.tree_window(3, floor, b_max)
    return gen.tree_product(tw1, tw2)


def run_tree_annulus(spec: ExperimentSpec, cache: WindowCache):
    """Ring sizes (k+1)·2^k, containment in B(x,4k), persistence >= 1/8."""
    k_max = int(spec.params.get("k_max", 6))
    persist_k_max = int(spec.params.get("persist_k_max", 4))
    tp = _annulus_fixture(cache, 0, -k_max)
    x = (tp.tw1.window.basepoint, tp.tw2.window.basepoint)
    xid = gen.pair_id(*x)
    rows = []
    sizes_ok = True
    containment_ok = True
    for k in range(1, k_max + 1):
        ring = gen.tree_annulus_ring(tp, x, k, k)
        annulus = gen.tree_annulus(tp, x, k)
        expected = (k + 1) * 2 ** k
        reached = tp.window.reached_distances(xid, limit=4 * k)
        contained = all(v in reached for v in annulus.members)
        sizes_ok = sizes_ok and len(ring) == expected
        containment_ok = containment_ok and contained
        rows.append({"k": k, "ring_size": len(ring), "expected": expected,
                     "annulus_size": len(annulus), "contained_4k": contained,
                     "worst_ratio": ""})
    tpp = _annulus_fixture(cache, 1, -(persist_k_max + 1))
    fam = sep.tree_annulus_family(tpp)
    pairs = sep.adjacent_probe_pairs(tpp.window, [tpp.window.basepoint], k=1)
    ratio_ok = True
    for k in range(1, persist_k_max + 1):
        rep = sep.persistence_check(fam, [k], pairs)
        if k <= k_max:
            rows[k - 1]["worst_ratio"] = rep.worst_ratio
        ratio_ok = ratio_ok and rep.ok() and rep.worst_ratio >= Fraction(1, 8)
    verdicts = [
        ("ring-size-(k+1)2^k", PASS if sizes_ok else FAIL, f"k=1..{k_max}"),
        ("containment-B(x,4k)", PASS if containment_ok else FAIL, ""),
        ("persistence>=1/8", PASS if ratio_ok else FAIL, f"k=1..{persist_k_max}"),
    ]
    cols = ["k", "ring_size", "expected", "annulus_size", "contained_4k", "worst_ratio"]
    return cols, rows, verdicts


def run_dl_vset(spec: ExperimentSpec, cache: WindowCache):
    """V-set sizes (r+1)·2^r and persistence >= 1/4 in DL(2,2)."""
    r_max = int(spec.params.get("r_max", 6))
    persist_r_max = int(spec.params.get("persist_r_max", 4))
    dlw = gen.dl_window(2, 2, band=r_max)
    x = gen.split_pair(dlw.window.basepoint)
    rows = []
    sizes_ok = True
    for r in range(1, r_max + 1):
        A = gen.dl_persistent(dlw, x, r)
        expected = (r + 1) * 2 ** r
        sizes_ok = sizes_ok and len(A) == expected
        rows.append({"r": r, "size": len(A), "expected": expected, "worst_ratio": ""})
    dlp = gen.dl_window(2, 2, band=persist_r_max + 1)
    fam = sep.dl_family(dlp)
    pairs = sep.adjacent_probe_pairs(dlp.window, [dlp.window.basepoint], k=1)
    ratio_ok = True
    for r in range(1, persist_r_max + 1):
        rep = sep.persistence_check(fam, [r], pairs)
        if r <= r_max:
            rows[r - 1]["worst_ratio"] = rep.worst_ratio
        ratio_ok = ratio_ok and rep.ok() and rep.worst_ratio >= Fraction(1, 4)
    verdicts = [
        ("size-(r+1)2^r", PASS if sizes_ok else FAIL, f"r=1..{r_max}"),
        ("persistence>=1/4", PASS if ratio_ok else FAIL, f"r=1..{persist_r_max}"),
    ]
    return ["r", "size", "expected", "worst_ratio"], rows, verdicts


def run_cut_growth(spec: ExperimentSpec, cache: WindowCache):
    """Exact cut^{15/16}_1 of tree annuli vs the Cheeger lower bound."""
    k_max = int(spec.params.get("k_max", 2))
    budget = spec.params.get("budget")
    budget = int(budget) if budget else None
    delta = Fraction(15, 16)
    tp = _annulus_fixture(cache, 0, -(k_max + 1))
    x = (tp.tw1.window.basepoint, tp.tw2.window.basepoint)
    rows = []
    values = []
    bound_ok = True
    inconclusive = False
    for k in range(1, k_max + 1):
        A = gen.tree_annulus(tp, x, k)
        rep = inv.cut(tp.window, A, 1, delta, budget=budget)
        if rep.exact is None:
            inconclusive = True
            rows.append({"k": k, "size": len(A), "cut": "", "lower": rep.lower,
                         "upper": rep.upper, "h_1": rep.notes.get("h_r", ""),
                         "cheeger_bound": rep.notes.get("cheeger_lower", "")})
            continue
        bound = rep.notes["cheeger_lower"]
        bound_ok = bound_ok and rep.exact >= bound
        values.append(rep.exact)
        rows.append({"k": k, "size": len(A), "cut": rep.exact, "lower": rep.lower,
                     "upper": rep.upper, "h_1": rep.notes["h_r"],
                     "cheeger_bound": bound})
    strict = all(a < b for a, b in zip(values, values[1:])) and not inconclusive
    verdicts = []
    if inconclusive:
        verdicts.append(("exact-values", INCONCLUSIVE, "budget exhausted"))
    else:
        verdicts.append(("cheeger-lower-bound", PASS if bound_ok else FAIL, ""))
        verdicts.append(("strictly-increasing", PASS if strict else FAIL,
                         "values " + ",".join(str(v) for v in values)))
    cols = ["k", "size", "cut", "lower", "upper", "h_1", "cheeger_bound"]
    return cols, rows, verdicts


def run_poincare_annulus(spec: ExperimentSpec, cache: WindowCache):
    """Two-level h^1 of the k=2 annulus against the 3/(4(k+2)) bound."""
    k = int(spec.params.get("k", 2))
    tp = _annulus_fixture(cache, 0, -(k + 1))
    x = (tp.tw1.window.basepoint, tp.tw2.window.basepoint)
    A = gen.tree_annulus(tp, x, k)
    ms = inv.metric_set_from_window(tp.window, A)
    rep = inv.poincare_l1(ms, 1, mode="two_level", cap=24)
    bound = Fraction(3, 4 * (k + 2))
    ok = rep.exact >= bound
    rows = [{"k": k, "n": len(A), "value": rep.exact, "bound": bound,
             "holds": ok}]
    verdicts = [("two-level>=3/(4(k+2))", PASS if ok else FAIL,
                 f"value {rep.exact} vs bound {bound}")]
    return ["k", "n", "value", "bound", "holds"], rows, verdicts


def random_test_window(rng: random.Random) -> GraphWindow:
    """A small deterministic-from-seed window of varied shape."""
    kind = rng.choice(["cycle", "path", "grid", "tree", "cycle_product"])
    if kind == "cycle":
        return gen.cycle_window(rng.randint(5, 10))
    if kind == "path":
        return gen.path_window(rng.randint(6, 12))
    if kind == "grid":
        return gen.grid_window(2, rng.randint(2, 3))
    if kind == "tree":
        return gen.tree_window(3, -rng.randint(2, 3), rng.randint(1, 2)).window
    c1 = gen.cycle_window(rng.randint(3, 5))
    c2 = gen.cycle_window(rng.randint(3, 5))
    return gen.product_window(c1, c2)


def run_oracle_equivalence(spec: ExperimentSpec, cache: WindowCache):
    """Solver cut == brute-force cut on random subsets; net sandwich holds."""
    trials = int(spec.params.get("trials", 50))
    rng = random.Random(spec.seed)
    rows = []
    cut_violations = 0
    net_violations = 0
    for trial in range(trials):
        w = random_test_window(rng)
        size = rng.randint(4, 12)
        members = rng.sample(list(w.ids), min(size, len(w.ids)))
        A = vertex_set(w, members)
        r = rng.choice([1, 2])
        delta = rng.choice([Fraction(1, 2), Fraction(3, 4), Fraction(15, 16)])
        solver = inv.cut(w, A, r, delta).exact
        brute = inv.cut_bruteforce(w, A, r, delta)
        if int(solver) != brute:
            cut_violations += 1
        eps = rng.choice([1, 2])
        cert = inv.separated_net(w, A, eps)
        B = vertex_set(w, rng.sample(sorted(A.members), rng.randint(1, len(A))))
        sandwich = inv.net_sandwich_holds(w, A, cert.net, B, eps)
        net_ok = cert.separated and cert.covering and sandwich
        if not net_ok:
            net_violations += 1
        rows.append({"trial": trial, "n": len(A), "r": r, "delta": delta,
                     "cut": solver, "brute": brute, "eps": eps,
                     "net_size": len(cert.net), "net_ok": net_ok})
    verdicts = [
        ("cut-equals-bruteforce", PASS if cut_violations == 0 else FAIL,
         f"{trials} trials"),
        ("net-sandwich", PASS if net_violations == 0 else FAIL, f"{trials} trials"),
    ]
    cols = ["trial", "n", "r", "delta", "cut", "brute", "eps", "net_size", "net_ok"]
    return cols, rows, verdicts


def qm_fixtures() -> list[tuple[str, qm.GraphProductSpec, int]]:
    z2, z3 = cyclic_group(2), cyclic_group(3)
    tri = frozenset({frozenset((0, 1)), frozenset((0, 2)), frozenset((1, 2))})
    path = frozenset({frozenset((0, 1)), frozenset((1, 2))})
    return [
        ("K3-Z3", qm.GraphProductSpec(("a", "b", "c"), tri, (z3, z3, z3)), 3),
        ("edge-Z2", qm.GraphProductSpec(("u", "v"), frozenset({frozenset((0, 1))}),
                                        (z2, z2)), 2),
        ("P3-Z2", qm.GraphProductSpec(("u", "v", "w"), path, (z2, z2, z2)), 3),
    ]


def trusted_pairs(qmw: qm.QMWindow) -> list[tuple[str, str]]:
    """Pairs whose geodesics provably stay inside the ball."""
    w = qmw.window
    if qmw.complete:
        ids = list(w.ids)
        return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
    out = []
    for i, a in enumerate(w.ids):
        la = w.base_distance(a)
        da = w.reached_distances(a)
        for b in w.ids[i + 1:]:
            d = da.get(b)
            if d is None:
                continue
            if la + d <= qmw.R and w.base_distance(b) + d <= qmw.R:
                out.append((a, b))
    return out


def check_qm_window(name: str, spec: qm.GraphProductSpec, R: int,
                    max_geodesic: int = 5) -> list[dict]:
    """Structural checks for one Cayley-ball fixture; one row per check."""
    qmw = qm.qm_ball(spec, R)
    w = qmw.window
    rows = []

    def row(check: str, violations: int, detail: str = ""):
        rows.append({"fixture": name, "vertices": len(w), "check": check,
                     "violations": violations, "detail": detail})

    row("induced-K4minus", int(qm.find_induced_k4_minus(w) is not None))
    row("induced-K32", int(qm.find_induced_k32(w) is not None))

    cliques = qmw.all_cliques()
    shared = 0
    for c1, c2 in __import__("itertools").combinations(cliques.values(), 2):
        if len(set(c1.member_ids()) & set(c2.member_ids())) >= 2:
            shared += 1
    row("cliques-share-two-vertices", shared)

    edge_cover = 0
    for a, b in w.edges():
        clique = qmw.edge_clique(a, b)
        if a not in clique.member_elt or b not in clique.member_elt:
            edge_cover += 1
    row("edge-in-its-clique", edge_cover)

    hyps = qmw.hyperplanes()
    uf = {frozenset(c) for c in qmw.unionfind_classes()}
    alg_by_edge = {}
    for h in hyps.values():
        for e in h.edge_set:
            alg_by_edge[e] = h.key
    refine = sum(1 for c in uf if len({alg_by_edge[e] for e in c}) != 1)
    exact = sum(1 for h in hyps.values()
                if not h.partial and frozenset(h.edge_set) not in uf)
    row("unionfind-refines-algebraic", refine)
    row("unionfind-exact-on-complete", exact)

    pairs = trusted_pairs(qmw)
    cross_twice = 0
    distance_mismatch = 0
    separation_mismatch = 0
    for a, b in pairs:
        d = w.distance(a, b)
        if d > max_geodesic:
            continue
        geodesics = qmw.all_geodesics(a, b)
        crossed_sets = []
        for g in geodesics:
            keys = qmw.crossed_hyperplane_keys(g)
            if len(set(keys)) != len(keys):
                cross_twice += 1
            crossed_sets.append(frozenset(keys))
        if any(len(c) != d for c in crossed_sets) or len(set(crossed_sets)) != 1:
            distance_mismatch += 1
            continue
        crossed = crossed_sets[0]
        for key, h in hyps.items():
            if h.partial:
                continue
            sectors = qmw.sectors(h)
            separates = sectors[a] != sectors[b]
            if separates != (key in crossed):
                separation_mismatch += 1
    row("geodesic-crosses-hyperplane-twice", cross_twice,
        f"{len(pairs)} trusted pairs")
    row("distance-equals-crossing-count", distance_mismatch)
    row("separating-iff-crossed", separation_mismatch)

    dim = spec.clique_number()
    cubdist = 0
    for a, b in pairs:
        d = w.distance(a, b)
        if d > max_geodesic:
            continue
        crossed = sorted(set(qmw.crossed_hyperplane_keys(
            sep.geodesic_path(w, a, b))))
        antichain = _max_pairwise_nontransverse(qmw, crossed)
        if d > dim * antichain:
            cubdist += 1
    row("cubical-distance-bound", cubdist, f"dim={dim}")
    return rows


def _max_pairwise_nontransverse(qmw: qm.QMWindow, keys: Sequence[str]) -> int:
    hyps = qmw.hyperplanes()
    best = 0
    items = list(keys)
    for size in range(len(items), 0, -1):
        for combo in __import__("itertools").combinations(items, size):
            if all(not qmw.transverse(hyps[a], hyps[b])
                   for a, b in __import__("itertools").combinations(combo, 2)):
                return size
    return best


def run_qm_structure(spec: ExperimentSpec, cache: WindowCache):
    rows = []
    for name, gp, R in qm_fixtures():
        rows.extend(check_qm_window(name, gp, R))
    bad = [r for r in rows if r["violations"]]
    verdicts = [("zero-violations", PASS if not bad else FAIL,
                 f"{len(rows)} checks")]
    return ["fixture", "vertices", "check", "violations", "detail"], rows, verdicts


def run_pc_bulkhead(spec: ExperimentSpec, cache: WindowCache):
    """PC distance sandwich and bulkhead separation on the QM fixtures."""
    rows = []
    for name, gp, R in qm_fixtures():
        qmw = qm.qm_ball(gp, R)
        msys = qm.metrics(qmw)
        msys.check_coherence()
        pcw = qm.pc_build(qmw, msys)
        pairs = _trusted_pc_pairs(pcw)
        lower_bad = upper_bad = 0
        same_hyp_pairs = 0
        for p1, p2 in pairs:
            chk = qm.pc_distance_bounds(pcw, p1, p2)
            if not chk.lower_ok:
                lower_bad += 1
            if chk.same_hyperplane:
                same_hyp_pairs += 1
                if chk.upper_ok is False:
                    upper_bad += 1
        rows.append({"fixture": name, "check": "delta<=d_PC", "pairs": len(pairs),
                     "violations": lower_bad, "detail": ""})
        rows.append({"fixture": name, "check": "d_PC<=3delta+1",
                     "pairs": same_hyp_pairs, "violations": upper_bad,
                     "detail": "same-hyperplane pairs"})
        bulk_bad = bulk_total = 0
        for key in sorted(qmw.hyperplanes()):
            h = qmw.hyperplanes()[key]
            if h.partial:
                continue
            for i in range(len(qmw.fibres(h))):
                dec = qm.bulkhead(pcw, key, i)
                if not dec.zone_sector.members or not dec.zone_rest.members:
                    continue
                bulk_total += 1
                if not qm.bulkhead_separates(pcw, dec):
                    bulk_bad += 1
        rows.append({"fixture": name, "check": "bulkhead-separates",
                     "pairs": bulk_total, "violations": bulk_bad, "detail": ""})
    bad = [r for r in rows if r["violations"]]
    verdicts = [("zero-violations", PASS if not bad else FAIL, f"{len(rows)} checks")]
    return ["fixture", "check", "pairs", "violations", "detail"], rows, verdicts


def _trusted_pc_pairs(pcw: qm.PCWindow) -> list[tuple[str, str]]:
    """PC pairs whose ambient PC-distance the window resolves exactly."""
    w = pcw.window
    qmw = pcw.qmw
    ids = list(w.ids)
    if qmw.complete:
        return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
    out = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            xa, xb = pcw.marked_vertex(a), pcw.marked_vertex(b)
            la, lb = qmw.window.base_distance(xa), qmw.window.base_distance(xb)
            delta = pcw.msys.delta(xa, xb)
            # a PC geodesic (length <= 3δ+1 when comparable) keeps its marked
            # vertex within that many Cayley steps of the endpoints
            if max(la, lb) + 3 * delta + 2 <= qmw.R:
                out.append((a, b))
    return out


def run_partial_wreath(spec: ExperimentSpec, cache: WindowCache):
    """pc_iso_check fixtures and the wreath/free-product ball comparisons."""
    R = int(spec.params.get("radius", 3))
    z2, z3 = cyclic_group(2), cyclic_group(3)
    rows = []

    iso = qm.pc_iso_check(z2, qm.line_z_base(), R)
    rows.append({"case": "Z2-over-line-Z", "check": "pc-isomorphism",
                 "value": iso.size, "ok": iso.ok, "detail": iso.detail})

    pw = qm.partial_wreath_ball(z2, qm.complete_base(z3), R)
    wb = gen.wreath_ball(gen.WreathBallSpec(z2, z3, R))
    mapped = {qm.project_to_wreath(pw, sid) for sid in pw.window.ids}
    vertices_match = mapped == set(wb.ids)
    pw_edges = {frozenset((qm.project_to_wreath(pw, a), qm.project_to_wreath(pw, b)))
                for a, b in pw.window.edges()}
    edges_match = pw_edges == {frozenset(e) for e in wb.edges()}
    rows.append({"case": "Z2-over-complete-Z3", "check": "equals-wreath-ball",
                 "value": len(pw.window), "ok": vertices_match and edges_match,
                 "detail": f"wreath {len(wb)}"})

    free = qm.partial_wreath_ball(z2, qm.edgeless_base(z3), R + 1)
    full = qm.partial_wreath_ball(z2, qm.complete_base(z3), R + 1)
    rows.append({"case": "Z2-over-edgeless-Z3", "check": "free-ball-at-least-wreath",
                 "value": len(free.window), "ok": len(free.window) >= len(full.window),
                 "detail": f"free {len(free.window)} vs wreath {len(full.window)}"})

    surj_ok = True
    pwz = qm.partial_wreath_ball(z2, qm.line_z_base(), 4)
    wz = gen.wreath_ball(gen.WreathBallSpec(z2, None, 4))
    image = {}
    for sid in pwz.window.ids:
        image.setdefault(qm.project_to_wreath(pwz, sid), []).append(sid)
    surj_ok = set(wz.ids) <= set(image)
    monotone_ok = all(
        min(pwz.window.base_distance(s) for s in sids) >= wz.base_distance(t)
        for t, sids in image.items() if t in wz.adj)
    rows.append({"case": "Z2-over-line-Z", "check": "projection-surjective-on-balls",
                 "value": len(wz), "ok": surj_ok, "detail": ""})
    rows.append({"case": "Z2-over-line-Z", "check": "projection-distance-nonincreasing",
                 "value": len(pwz.window), "ok": monotone_ok, "detail": ""})

    bad = [r for r in rows if not r["ok"]]
    verdicts = [("all-checks", PASS if not bad else FAIL,
                 "; ".join(r["check"] for r in bad))]
    return ["case", "check", "value", "ok", "detail"], rows, verdicts


def run_separation_demo(spec: ExperimentSpec, cache: WindowCache):
    """Scan ball families across the vertical axis of a Z^2 window."""
    halfwidth = int(spec.params.get("halfwidth", 12))
    r_values = [int(x) for x in str(spec.params.get("r_values", "2,3,4,5")).split(",")]
    g, _ = cache.get_or_build(f"grid-2-{halfwidth}",
                              lambda: gen.grid_window(2, halfwidth))
    axis = vertex_set(g, [f"g0,{y}" for y in range(-halfwidth, halfwidth + 1)])
    inst = sep.SeparationInstance(g, axis, k=1, L=0, D=8)
    verdict_sep = sep.separation_witness(inst)
    fam = sep.ball_family(g, Fraction(1, 5))
    parts = k_components(g, VertexSet(g, frozenset(g.ids) - axis.members), 1)
    path = sep.geodesic_path(g, f"g-{halfwidth // 2},0", f"g{halfwidth // 2},0")
    rows = []
    ok = verdict_sep.separated
    for r in r_values:
        res = sep.scan_for_cut(fam, path, parts, r, separator=axis)
        good = res.cut_certified and len(res.cut_witness) >= r
        ok = ok and good
        rows.append({"r": r, "s_index": res.s_index, "s_vertex": res.s_vertex,
                     "cut_size": len(res.cut_witness), "certified": res.cut_certified,
                     "size_ge_r": len(res.cut_witness) >= r})
    verdicts = [
        ("two-qualifying-components", PASS if verdict_sep.separated else FAIL,
         f"{len(verdict_sep.qualifying)} found"),
        ("certified-cut-size>=r", PASS if ok else FAIL, f"r in {r_values}"),
    ]
    cols = ["r", "s_index", "s_vertex", "cut_size", "certified", "size_ge_r"]
    return cols, rows, verdicts


EXPERIMENTS: dict[str, Callable] = {
    "tree-annulus": run_tree_annulus,
    "dl-vset": run_dl_vset,
    "cut-growth": run_cut_growth,
    "poincare-annulus": run_poincare_annulus,
    "oracle-equivalence": run_oracle_equivalence,
    "qm-structure": run_qm_structure,
    "pc-bulkhead": run_pc_bulkhead,
    "partial-wreath": run_partial_wreath,
    "separation-demo": run_separation_demo,
}
