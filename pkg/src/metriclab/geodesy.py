"""Distance fields, face distances, homotopy-class loops, systoles, radii.

All distances are exact shortest paths on the weighted stencil graph (edge
weights from MetricField.edge_lengths), computed with scipy's Dijkstra.
Metrication against the continuum is bounded by the stencil distortion
(about 2.75 percent for the 16-neighbor stencil).

Noncontractible loops on torus2/cylinder are found by lifting to a window of
fundamental-domain copies: the shortest loop through a base vertex v in deck
class c equals the lifted distance from v to its translate by c.  Any loop
with a nonzero first winding must pass through one of the two lattice columns
next to the seam (stencil moves span at most two columns), so minimizing over
those base vertices is exact; symmetrically for the second axis.  On rp2,
noncontractible loops lift to antipodal paths on the sphere double cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .fields import MetricField, polyline_length
from .grid import GridError


class GeodesyError(ValueError):
    pass


_NO_PRED = -9999


@dataclass
class DistanceField:
    """Multi-source shortest-path distances with predecessors."""

    field: MetricField
    sources: np.ndarray
    dist: np.ndarray
    parent: np.ndarray
    source_of: np.ndarray

    def path_to(self, v: int) -> np.ndarray:
        """Unwrapped chart polyline from the nearest source to v."""
        chain = [v]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        chain.reverse()
        return _unwrap_chain(self.field.grid, chain)


def _unwrap_chain(grid, chain) -> np.ndarray:
    disp = _edge_disp_lookup(grid)
    pts = np.empty((len(chain), grid.n))
    pts[0] = grid.coords[chain[0]]
    for i in range(1, len(chain)):
        pts[i] = pts[i - 1] + disp[(chain[i - 1], chain[i])]
    return pts


def _edge_disp_lookup(grid) -> dict:
    cache = getattr(grid, "_disp_lookup", None)
    if cache is None:
        cache = {}
        e, d = grid.edges, grid.edge_disp
        for i in range(len(e)):
            a, b = int(e[i, 0]), int(e[i, 1])
            cache[(a, b)] = d[i]
            cache[(b, a)] = -d[i]
        grid._disp_lookup = cache
    return cache


def distance_field(field: MetricField, sources, quotient: bool = True) -> DistanceField:
    """Exact multi-source distances; on rp2 (quotient=True) sources are
    augmented with their antipodes so distances live in the quotient."""
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    if len(sources) == 0:
        raise GeodesyError("sources must be nonempty")
    g = field.grid
    if quotient and g.topology.kind == "rp2":
        sources = np.unique(np.concatenate([sources, g.antipode_map[sources]]))
    dist, pred, src = dijkstra(
        field.graph(), directed=True, indices=sources, min_only=True,
        return_predecessors=True,
    )
    return DistanceField(field, sources, dist, pred, src)


def distance_matrix(field: MetricField, sources, limit=np.inf) -> np.ndarray:
    """(len(sources), V) matrix of exact distances."""
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    return dijkstra(field.graph(), directed=True, indices=sources, limit=limit)


def face_distance(field: MetricField, face_a: str, face_b: str) -> float:
    """g-distance between two opposite boundary faces."""
    g = field.grid
    top = g.topology
    if top.opposite_face(face_a) != face_b:
        raise GridError(f"faces {face_a!r} and {face_b!r} are not an opposite pair")
    from .grid import face_vertices

    va = face_vertices(g, face_a)
    vb = face_vertices(g, face_b)
    d = distance_field(field, va, quotient=False)
    return float(d.dist[vb].min())


# ---------------------------------------------------------------------------
# radii


@dataclass
class RadiusResult:
    value: float
    center: int
    connected: bool
    per_component: list = dataclass_field(default_factory=list)


def radius(field: MetricField, quotient: bool = True) -> RadiusResult:
    """Exact min-max radius via all-pairs distances (moderate resolutions)."""
    g = field.grid
    D = distance_matrix(field, np.arange(g.num_vertices))
    if quotient and g.topology.kind == "rp2":
        D = np.minimum(D, D[:, g.antipode_map])
    if np.isinf(D).any():
        ncomp, labels = connected_components(field.graph(), directed=False)
        per = []
        worst = (0.0, 0)
        for c in range(ncomp):
            verts = np.where(labels == c)[0]
            sub = D[np.ix_(verts, verts)]
            ecc = sub.max(axis=1)
            k = int(np.argmin(ecc))
            per.append((float(ecc[k]), int(verts[k])))
            if ecc[k] > worst[0]:
                worst = (float(ecc[k]), int(verts[k]))
        return RadiusResult(worst[0], worst[1], False, per)
    ecc = D.max(axis=1)
    c = int(np.argmin(ecc))
    return RadiusResult(float(ecc[c]), c, True)


def set_radius_exact(field: MetricField, subset) -> tuple[float, int]:
    """Exact radius of a vertex subset (center anywhere in the space)."""
    subset = np.asarray(subset, dtype=np.int64)
    D = distance_matrix(field, subset)
    ecc = D.max(axis=0)
    c = int(np.argmin(ecc))
    return float(ecc[c]), c


def set_radius_upper(field: MetricField, subset, rounds: int = 3,
                     within=None) -> tuple[float, int]:
    """Sound upper bound on the radius of a subset via farthest-point centers.

    Returns (ecc, center) with ecc = max over subset of d(center, .), computed
    with one Dijkstra per round.  `within` optionally restricts candidate
    centers to a vertex set (default: anywhere).
    """
    subset = np.asarray(subset, dtype=np.int64)
    d0 = distance_matrix(field, subset[:1])[0]
    far = int(subset[np.argmax(d0[subset])])
    d1 = distance_matrix(field, [far])[0]
    best = (float(d1[subset].max()), far)
    d2 = distance_matrix(field, [int(subset[np.argmax(d1[subset])])])[0]
    cand_scores = np.maximum(d1, d2)
    if within is not None:
        mask = np.full(len(cand_scores), np.inf)
        mask[np.asarray(within, dtype=np.int64)] = 0.0
        cand_scores = cand_scores + mask
    for _ in range(rounds):
        c = int(np.argmin(cand_scores))
        dc = distance_matrix(field, [c])[0]
        ecc = float(dc[subset].max())
        if ecc < best[0]:
            best = (ecc, c)
        cand_scores[c] = np.inf
    return best


# ---------------------------------------------------------------------------
# loops and systoles


@dataclass
class LoopWitness:
    """A closed noncontractible loop: deck class, base vertex, polyline, length.

    points are unwrapped chart coordinates; the endpoint equals the start
    translated by the deck class (or by the antipodal map for rp2, where
    cls is the string "antipodal")."""

    cls: object
    base_vertex: int
    points: np.ndarray
    length: float

    def check_length(self, field: MetricField, tol: float = 1e-12) -> bool:
        return abs(polyline_length(field, self.points) - self.length) <= max(
            tol, 1e-12 * (1 + abs(self.length))
        )


def _loop_base_vertices(grid, cls):
    """Base vertices every class-cls loop must visit (two lattice lines)."""
    vid = grid.lattice_vid
    if cls[0] != 0:
        lines = [vid[0, ...].ravel(), vid[1, ...].ravel()]
    else:
        lines = [vid[:, 0].ravel(), vid[:, 1].ravel()]
    out = np.unique(np.concatenate(lines))
    return out[out >= 0]


def _straight_upper_bound(field, base, cls) -> float:
    g = field.grid
    h = min(g.spacing)
    cls = np.asarray(cls, dtype=float)
    m = max(2, int(np.ceil(np.abs(cls).max() / h)))
    t = np.linspace(0.0, 1.0, m + 1)
    best = np.inf
    step = max(1, len(base) // 16)
    for v in base[::step]:
        pts = g.coords[v] + t[:, None] * cls
        best = min(best, polyline_length(field, pts))
    return float(best)


def _lifted_graph(field, kx_range, ky_range):
    """CSR over window copies of the fundamental domain; vertex id = c*V + v."""
    g = field.grid
    V = g.num_vertices
    e, w = g.edges, g.edge_wrap
    wt = field.edge_lengths()
    kxs = list(kx_range)
    kys = list(ky_range)
    index = {}
    copies = []
    for kx in kxs:
        for ky in kys:
            index[(kx, ky)] = len(copies)
            copies.append((kx, ky))
    rows, cols, data = [], [], []
    wx = w[:, 0].astype(np.int64)
    wy = w[:, 1].astype(np.int64) if g.n > 1 else np.zeros(len(e), dtype=np.int64)
    for ci, (kx, ky) in enumerate(copies):
        tgt = np.array(
            [index.get((kx + int(a), ky + int(b)), -1) for a, b in zip(wx, wy)]
        )
        ok = tgt >= 0
        src_ids = ci * V + e[ok, 0]
        dst_ids = tgt[ok] * V + e[ok, 1]
        rows += [src_ids, dst_ids]
        cols += [dst_ids, src_ids]
        data += [wt[ok], wt[ok]]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    nverts = len(copies) * V
    return csr_matrix((data, (rows, cols)), shape=(nverts, nverts)), index, copies


def shortest_loop_in_class(field: MetricField, cls, upper: float = np.inf,
                           prunable: bool = False):
    """Shortest closed loop in a deck-transformation class (torus2/cylinder).

    `upper` prunes the search: with prunable=True, classes whose minimum
    exceeds it return None instead of raising (systole enumeration).  The
    internal bound pads the straight-chart-path length by the stencil factor
    and doubles on retry, since no grid path follows the straight line.
    """
    g = field.grid
    kind = g.topology.kind
    if kind == "torus2":
        p, q = int(cls[0]), int(cls[1])
        if p == 0 and q == 0:
            raise GeodesyError("trivial deck class")
    elif kind == "cylinder":
        p = int(np.atleast_1d(cls)[0])
        q = 0
        if p == 0:
            raise GeodesyError("trivial deck class")
    else:
        raise GeodesyError(f"{kind} has no free abelian deck group")

    base = _loop_base_vertices(g, (p, q))
    straight = _straight_upper_bound(field, base,
                                     (p, q) if kind == "torus2" else (p, 0.0))
    pad = 0.05 * straight + 4 * max(g.spacing) * math.sqrt(field.lambda_max())
    best = (np.inf, -1)
    for attempt in range(3):
        ub = min(straight + pad * 2 ** attempt, upper)
        if not np.isfinite(ub):
            raise GeodesyError("unbounded loop search")
        best = _loop_search(field, base, p, q, kind, ub)
        if np.isfinite(best[0]) or ub >= upper:
            break
    if not np.isfinite(best[0]):
        if prunable:
            return None
        raise GeodesyError(f"no loop found in class {cls} within bound {upper}")

    v = best[1]
    lifted, index, copies = _loop_window(field, p, q, kind, best[0])
    V = g.num_vertices
    c0 = index[(0, 0)]
    ct = index[(p, q)]
    dist, pred = dijkstra(
        lifted, directed=True, indices=c0 * V + v, limit=best[0] * (1 + 1e-9) + 1e-9,
        return_predecessors=True,
    )
    chain = [ct * V + v]
    while pred[chain[-1]] >= 0:
        chain.append(int(pred[chain[-1]]))
    chain.reverse()
    pts = np.array([g.coords[c % V] + np.array(copies[c // V]) for c in chain])
    return LoopWitness((p, q) if kind == "torus2" else p, v, pts, best[0])


def _loop_window(field, p, q, kind, bound):
    g = field.grid
    lam = math.sqrt(field.lambda_min())
    margin = bound / (2.0 * lam) + 2 * max(g.spacing)
    kx_range = range(math.floor(min(0, p) - margin), math.ceil(max(0, p) + margin))
    if kind == "torus2":
        ky_range = range(math.floor(min(0, q) - margin), math.ceil(max(0, q) + margin))
    else:
        ky_range = [0]
    return _lifted_graph(field, kx_range, ky_range)


def _loop_search(field, base, p, q, kind, ub):
    g = field.grid
    V = g.num_vertices
    lifted, index, _ = _loop_window(field, p, q, kind, ub)
    c0 = index[(0, 0)]
    ct = index[(p, q)]
    incumbent = ub * (1 + 1e-12) + 1e-12
    best = (np.inf, -1)
    chunk = 64
    for k0 in range(0, len(base), chunk):
        sub = base[k0:k0 + chunk]
        D = dijkstra(lifted, directed=True, indices=c0 * V + sub, limit=incumbent)
        vals = D[np.arange(len(sub)), ct * V + sub]
        j = int(np.argmin(vals))
        if vals[j] < best[0]:
            best = (float(vals[j]), int(sub[j]))
            incumbent = min(incumbent, best[0] * (1 + 1e-12) + 1e-12)
    return best


def _primitive_classes(window: int):
    out = []
    for p in range(0, window + 1):
        for q in range(-window, window + 1):
            if p == 0 and q <= 0:
                continue
            if math.gcd(p, abs(q)) != 1:
                continue
            out.append((p, q))
    out.sort(key=lambda c: (c[0] ** 2 + c[1] ** 2, c))
    return out


def systole(field: MetricField) -> LoopWitness:
    """Shortest noncontractible loop (torus2, cylinder, rp2)."""
    g = field.grid
    kind = g.topology.kind
    if kind == "cylinder":
        return shortest_loop_in_class(field, 1)
    if kind == "rp2":
        return _systole_rp2(field)
    if kind != "torus2":
        raise GeodesyError(f"{kind} is simply connected or unsupported")

    lam = math.sqrt(field.lambda_min())
    best = None
    window = 2
    while True:
        classes = [c for c in _primitive_classes(window)
                   if max(abs(c[0]), abs(c[1])) <= window]
        for c in classes:
            lb = lam * math.hypot(c[0], c[1])
            if best is not None and lb >= best.length:
                continue
            w = shortest_loop_in_class(field, c,
                                       upper=np.inf if best is None else best.length,
                                       prunable=best is not None)
            if w is not None and (best is None or w.length < best.length - 1e-15):
                best = w
        nxt = window + 1
        ring = [c for c in _primitive_classes(nxt) if max(abs(c[0]), abs(c[1])) == nxt]
        if all(lam * math.hypot(c[0], c[1]) >= best.length for c in ring):
            return best
        window = nxt


def _systole_rp2(field: MetricField) -> LoopWitness:
    g = field.grid
    anti = g.antipode_map
    half = np.where(g.coords[:, 1] <= 0.5 + 1e-12)[0]
    D = distance_matrix(field, half)
    vals = D[np.arange(len(half)), anti[half]]
    j = int(np.argmin(vals))
    v = int(half[j])
    length = float(vals[j])
    dist, pred, _ = dijkstra(
        field.graph(), directed=True, indices=[v], min_only=True,
        return_predecessors=True,
    )
    chain = [int(anti[v])]
    while pred[chain[-1]] >= 0:
        chain.append(int(pred[chain[-1]]))
    chain.reverse()
    pts = _unwrap_chain(g, chain)
    return LoopWitness("antipodal", v, pts, length)
