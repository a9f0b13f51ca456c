"""Gridded parameter domains with boundary faces and quotient identifications.

A Grid discretizes one of the supported domains on a regular lattice of chart
coordinates in [0,1]^n and carries everything downstream modules need:

* vertices with chart coordinates (masked domains only keep active vertices),
* stencil edges with unwrapped chart displacements and per-axis wrap counters,
* quadrature cells (2^n lattice corners, local unwrapped corner coordinates,
  clipped chart volume for masked domains),
* labeled boundary face vertex sets,
* the antipodal involution for sphere2 / rp2.

Supported kinds: interval, square, cube3, cube4, hexagon (regular or tripod
mask), cylinder (axis 0 periodic), torus2, sphere2, rp2.  Periodic axes use
spacing 1/N; bounded axes use 1/(N-1).  The sphere is a latitude-longitude
lattice with each pole row collapsed to a single vertex; rp2 is the sphere
grid plus the antipodal involution, and rp2 quantities are computed on this
double cover.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

FACE_LETTERS = "ABCD"

CUBE_KINDS = {"interval", "square", "cube3", "cube4"}
PERIODIC_KINDS = {"cylinder", "torus2"}
SPHERE_KINDS = {"sphere2", "rp2"}


class GridError(ValueError):
    """Raised for invalid domain descriptors or grid parameters."""


@dataclass(frozen=True)
class DomainTopology:
    """Domain kind plus boundary-face labels and identification rules.

    identifications lists rule descriptors: ("wrap", axis) for periodic axes
    and ("antipodal",) for sphere2/rp2.  The antipodal rule is an involution
    on grid vertices; wrap rules act on edges (see Grid.edge_wrap), since the
    quotient representation stores no duplicated seam vertices.
    """

    kind: str
    dim: int
    periodic: tuple[bool, ...]
    boundary_faces: tuple[str, ...]
    identifications: tuple[tuple, ...] = ()
    mask_name: str = ""

    @property
    def closed(self) -> bool:
        return len(self.boundary_faces) == 0

    def opposite_face(self, face: str) -> str:
        if face not in self.boundary_faces:
            raise GridError(f"unknown face label {face!r} for {self.kind}")
        if self.kind == "hexagon":
            k = int(face[1:])
            return f"S{(k + 3) % 6}"
        return face[:-1] if face.endswith("'") else face + "'"

    def face_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for f in self.boundary_faces:
            if not f.endswith("'") and (self.kind != "hexagon" or int(f[1:]) < 3):
                pairs.append((f, self.opposite_face(f)))
        return pairs

    def descriptor(self) -> str:
        return self.kind if not self.mask_name else f"{self.kind}:{self.mask_name}"


def _axis_faces(axes: list[int]) -> tuple[str, ...]:
    out = []
    for k in axes:
        out += [FACE_LETTERS[k], FACE_LETTERS[k] + "'"]
    return tuple(out)


def interval() -> DomainTopology:
    return DomainTopology("interval", 1, (False,), _axis_faces([0]))


def square() -> DomainTopology:
    return DomainTopology("square", 2, (False, False), _axis_faces([0, 1]))


def cube(n: int) -> DomainTopology:
    if n not in (3, 4):
        raise GridError("cube(n) supports n = 3 or 4; use square/interval below that")
    return DomainTopology(f"cube{n}", n, (False,) * n, _axis_faces(list(range(n))))


def hexagon(mask: str = "regular") -> DomainTopology:
    _parse_hexagon_mask(mask)
    faces = tuple(f"S{k}" for k in range(6))
    return DomainTopology("hexagon", 2, (False, False), faces, mask_name=mask)


def cylinder() -> DomainTopology:
    return DomainTopology(
        "cylinder", 2, (True, False), ("B", "B'"), identifications=(("wrap", 0),)
    )


def torus2() -> DomainTopology:
    return DomainTopology(
        "torus2", 2, (True, True), (), identifications=(("wrap", 0), ("wrap", 1))
    )


def sphere2() -> DomainTopology:
    return DomainTopology(
        "sphere2", 2, (True, False), (), identifications=(("wrap", 0), ("antipodal",))
    )


def rp2() -> DomainTopology:
    return DomainTopology(
        "rp2", 2, (True, False), (), identifications=(("wrap", 0), ("antipodal",))
    )


def topology_from_name(name: str) -> DomainTopology:
    """Parse a textual domain descriptor, e.g. "square", "cube:3", "hexagon:tripod:0.46:0.024"."""
    parts = name.strip().split(":")
    kind = parts[0]
    if kind in ("interval", "square", "cylinder", "torus2", "sphere2", "rp2"):
        if len(parts) > 1:
            raise GridError(f"{kind} takes no mask parameters")
        return {
            "interval": interval,
            "square": square,
            "cylinder": cylinder,
            "torus2": torus2,
            "sphere2": sphere2,
            "rp2": rp2,
        }[kind]()
    if kind == "cube":
        return cube(int(parts[1]))
    if kind in ("cube3", "cube4"):
        return cube(int(kind[4:]))
    if kind == "hexagon":
        mask = ":".join(parts[1:]) if len(parts) > 1 else "regular"
        return hexagon(mask)
    raise GridError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# stencils


def stencil_offsets(n: int, order: int) -> np.ndarray:
    """Half set of neighbor offsets (each edge generated once).

    order 1: axis steps; order 2: adds all diagonal steps in {-1,0,1}^n;
    order 3: adds knight moves (permutations of (+-1, +-2, 0, ...)).
    """
    if order not in (1, 2, 3):
        raise GridError("stencil_order must be 1, 2, or 3")
    offs = []
    for o in itertools.product((-1, 0, 1), repeat=n):
        if any(o):
            offs.append(o)
    if order >= 3:
        base = [1, 2] + [0] * (n - 2)
        seen = set()
        for perm in itertools.permutations(range(n)):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    o = [0] * n
                    o[perm[0]] = s1
                    o[perm[1]] = 2 * s2
                    seen.add(tuple(o))
        offs += sorted(seen)
    if order == 1:
        offs = [o for o in offs if sum(abs(c) for c in o) == 1]
    half = [o for o in offs if next(c for c in o if c) > 0]
    return np.array(sorted(set(half)), dtype=np.int64)


# ---------------------------------------------------------------------------
# masks (hexagon)


def _parse_hexagon_mask(mask: str):
    parts = mask.split(":")
    if parts[0] == "regular" and len(parts) == 1:
        return ("regular",)
    if parts[0] == "tripod":
        if len(parts) != 3:
            raise GridError("tripod mask is 'tripod:<leg_length>:<leg_width>'")
        ell, w = float(parts[1]), float(parts[2])
        if not (0 < w < ell <= 0.5):
            raise GridError("tripod mask needs 0 < width < length <= 0.5")
        return ("tripod", ell, w)
    raise GridError(f"unknown hexagon mask {mask!r}")


_HEX_VERTS = np.array(
    [
        [0.5 + 0.5 * math.cos(math.radians(90 + 60 * k)),
         0.5 + 0.5 * math.sin(math.radians(90 + 60 * k))]
        for k in range(6)
    ]
)

_TRIPOD_ANGLES = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3])


def _tripod_frames(ell: float, w: float):
    c = np.array([0.5, 0.5])
    u = np.stack([np.cos(_TRIPOD_ANGLES), np.sin(_TRIPOD_ANGLES)], axis=1)
    nrm = np.stack([-np.sin(_TRIPOD_ANGLES), np.cos(_TRIPOD_ANGLES)], axis=1)
    return c, u, nrm


def _tripod_coords(points: np.ndarray, ell: float, w: float):
    """Per-leg (along, across) coordinates, shape (npts, 3)."""
    c, u, nrm = _tripod_frames(ell, w)
    rel = points - c
    s = rel @ u.T
    t = rel @ nrm.T
    return s, t


def _mask_inside(points: np.ndarray, mask_spec) -> np.ndarray:
    pts = np.atleast_2d(points)
    if mask_spec[0] == "regular":
        inside = np.ones(len(pts), dtype=bool)
        for k in range(6):
            a, b = _HEX_VERTS[k], _HEX_VERTS[(k + 1) % 6]
            cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
            inside &= cross >= -1e-12
        return inside
    _, ell, w = mask_spec
    s, t = _tripod_coords(pts, ell, w)
    in_leg = (s >= -w / 2 - 1e-12) & (s <= ell + 1e-12) & (np.abs(t) <= w / 2 + 1e-12)
    return in_leg.any(axis=1)


def _hexagon_polygons(mask_spec) -> list[np.ndarray]:
    """Convex polygons whose union is the masked domain (for exact cell clipping)."""
    if mask_spec[0] == "regular":
        return [_HEX_VERTS.copy()]
    _, ell, w = mask_spec
    c, u, nrm = _tripod_frames(ell, w)
    polys = []
    for i in range(3):
        a = c + u[i] * (-w / 2)
        b = c + u[i] * ell
        polys.append(
            np.array(
                [a - nrm[i] * w / 2, b - nrm[i] * w / 2, b + nrm[i] * w / 2, a + nrm[i] * w / 2]
            )
        )
    return polys


def _clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a convex polygon (CCW)."""
    poly = subject
    m = len(clip)
    for k in range(m):
        if len(poly) == 0:
            return poly
        a, b = clip[k], clip[(k + 1) % m]
        ex, ey = b[0] - a[0], b[1] - a[1]
        side = ex * (poly[:, 1] - a[1]) - ey * (poly[:, 0] - a[0])
        keep = side >= -1e-14
        out = []
        npts = len(poly)
        for i in range(npts):
            j = (i + 1) % npts
            if keep[i]:
                out.append(poly[i])
            if keep[i] != keep[j]:
                denom = side[i] - side[j]
                alpha = side[i] / denom if denom != 0 else 0.5
                out.append(poly[i] + alpha * (poly[j] - poly[i]))
        poly = np.array(out) if out else np.empty((0, 2))
    return poly


def _poly_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clipped_cell_area(cell_poly: np.ndarray, polys: list[np.ndarray]) -> float:
    """Area of cell intersected with a union of convex polygons (inclusion-exclusion)."""
    k = len(polys)
    total = 0.0
    for r in range(1, k + 1):
        for combo in itertools.combinations(range(k), r):
            piece = cell_poly
            for idx in combo:
                piece = _clip_convex(piece, polys[idx])
                if len(piece) == 0:
                    break
            area = _poly_area(piece)
            total += area if r % 2 == 1 else -area
    return total


# ---------------------------------------------------------------------------
# Grid


class Grid:
    """Immutable discrete domain; see module docstring for the data layout."""

    def __init__(self, topology, resolution, stencil_order, coords, edges, edge_disp,
                 edge_wrap, cells, cell_corner_xy, cell_chart_vol, face_sets,
                 spacing, lattice_vid, lattice_shape, antipode_map=None,
                 chart_degenerate=None, quotient_volume_factor=1.0):
        self.topology = topology
        self.resolution = resolution
        self.stencil_order = stencil_order
        self.n = topology.dim
        self.coords = coords
        self.edges = edges
        self.edge_disp = edge_disp
        self.edge_wrap = edge_wrap
        self.cells = cells
        self.cell_corner_xy = cell_corner_xy
        self.cell_chart_vol = cell_chart_vol
        self.face_sets = face_sets
        self.spacing = spacing
        self.lattice_vid = lattice_vid
        self.lattice_shape = lattice_shape
        self.antipode_map = antipode_map
        self.chart_degenerate = (
            chart_degenerate if chart_degenerate is not None
            else np.zeros(len(coords), dtype=bool)
        )
        self.quotient_volume_factor = quotient_volume_factor
        self._neighbor_cache = None

    @property
    def num_vertices(self) -> int:
        return len(self.coords)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def neighbors(self, v: int) -> np.ndarray:
        if self._neighbor_cache is None:
            order = np.argsort(
                np.concatenate([self.edges[:, 0], self.edges[:, 1]]), kind="stable"
            )
            heads = np.concatenate([self.edges[:, 0], self.edges[:, 1]])[order]
            tails = np.concatenate([self.edges[:, 1], self.edges[:, 0]])[order]
            starts = np.searchsorted(heads, np.arange(self.num_vertices + 1))
            self._neighbor_cache = (starts, tails)
        starts, tails = self._neighbor_cache
        return tails[starts[v]:starts[v + 1]]

    def vertex_at(self, lattice_index: tuple[int, ...]) -> int:
        v = int(self.lattice_vid[tuple(lattice_index)])
        if v < 0:
            raise GridError(f"lattice index {lattice_index} is masked out")
        return v

    def descriptor_lines(self) -> list[str]:
        return [
            f"kind = {self.topology.kind}",
            f"resolution = {self.resolution}",
            f"stencil_order = {self.stencil_order}",
            f"mask = {self.topology.mask_name}",
        ]


def build_grid(topology: DomainTopology, resolution: int, stencil_order: int = 3) -> Grid:
    """Build the discrete grid for a domain.

    resolution counts vertices per axis (bounded axes get spacing 1/(N-1),
    periodic axes 1/N).  sphere2/rp2 require an even resolution so that the
    antipodal involution is exact on grid vertices.
    """
    if resolution < 4:
        raise GridError("resolution must be at least 4")
    if stencil_order not in (1, 2, 3):
        raise GridError("stencil_order must be 1, 2, or 3")
    kind = topology.kind
    if kind in CUBE_KINDS or kind == "hexagon":
        return _build_cubelike(topology, resolution, stencil_order)
    if kind in PERIODIC_KINDS:
        return _build_cubelike(topology, resolution, stencil_order)
    if kind in SPHERE_KINDS:
        if resolution % 2:
            raise GridError("sphere2/rp2 need an even resolution for the antipodal map")
        return _build_sphere(topology, resolution, stencil_order)
    raise GridError(f"unsupported topology kind {kind!r}")


def _lattice_coords(shape, spacing):
    grids = np.meshgrid(*[np.arange(nk) * hk for nk, hk in zip(shape, spacing)], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _build_lattice_edges(shape, periodic, spacing, offsets, active_flat, coords_all,
                         edge_ok=None):
    """Edges on a (possibly periodic) lattice; returns (pairs, disp, wrap) arrays."""
    n = len(shape)
    total = int(np.prod(shape))
    idx = np.arange(total).reshape(shape)
    pairs, disps, wraps = [], [], []
    for o in offsets:
        dst = idx
        wrap_axes = []
        src_sl = [slice(None)] * n
        dst_sl = [slice(None)] * n
        valid = True
        for k in range(n):
            if o[k] == 0:
                continue
            if periodic[k]:
                dst = np.roll(dst, -int(o[k]), axis=k)
                wrap_axes.append(k)
            else:
                lo = max(0, -int(o[k]))
                hi = shape[k] - max(0, int(o[k]))
                if lo >= hi:
                    valid = False
                    break
                src_sl[k] = slice(lo, hi)
                dst_sl[k] = slice(lo + int(o[k]), hi + int(o[k]))
        if not valid:
            continue
        s = idx[tuple(src_sl)].ravel()
        d = dst[tuple(dst_sl)].ravel()
        keep = active_flat[s] & active_flat[d]
        disp = np.array([o[k] * spacing[k] for k in range(n)])
        if edge_ok is not None:
            keep = keep.copy()
            cand = np.where(keep)[0]
            if len(cand):
                a = coords_all[s[cand]]
                ok = np.ones(len(cand), dtype=bool)
                for frac in (0.25, 0.5, 0.75):
                    ok &= edge_ok(a + frac * disp)
                keep[cand[~ok]] = False
        s, d = s[keep], d[keep]
        if not len(s):
            continue
        wrap = np.zeros((len(s), n), dtype=np.int8)
        if wrap_axes:
            multi = np.unravel_index(s, shape)
            for k in wrap_axes:
                wrap[:, k] = (multi[k] + int(o[k])) // shape[k]
        pairs.append(np.stack([s, d], axis=1))
        disps.append(np.broadcast_to(disp, (len(s), n)).copy())
        wraps.append(wrap)
    if pairs:
        return np.concatenate(pairs), np.concatenate(disps), np.concatenate(wraps)
    return (np.empty((0, 2), dtype=np.int64), np.empty((0, n)), np.empty((0, n), dtype=np.int8))


def _lattice_cells(shape, periodic, spacing, coords_all):
    """Cell corner lattice ids (bit order over axes) plus local unwrapped corner coords."""
    n = len(shape)
    total = int(np.prod(shape))
    idx = np.arange(total).reshape(shape)
    base_sl = tuple(slice(None) if periodic[k] else slice(0, shape[k] - 1) for k in range(n))
    base = idx[base_sl].ravel()
    nbits = 2 ** n
    corners = np.empty((len(base), nbits), dtype=np.int64)
    corner_xy = np.empty((len(base), nbits, n))
    base_coords = coords_all[base]
    for bit in range(nbits):
        offs = [(bit >> k) & 1 for k in range(n)]
        rolled = idx
        for k in range(n):
            if offs[k]:
                if periodic[k]:
                    rolled = np.roll(rolled, -1, axis=k)
                else:
                    rolled = np.take(rolled, np.arange(1, shape[k]), axis=k)
            elif not periodic[k]:
                rolled = np.take(rolled, np.arange(shape[k] - 1), axis=k)
        corners[:, bit] = rolled.ravel()
        corner_xy[:, bit, :] = base_coords + np.array(
            [offs[k] * spacing[k] for k in range(n)]
        )
    vol = float(np.prod(spacing))
    return base, corners, corner_xy, np.full(len(base), vol)


def _build_cubelike(topology, N, stencil_order):
    n = topology.dim
    periodic = topology.periodic
    shape = tuple(N for _ in range(n))
    spacing = tuple(1.0 / N if periodic[k] else 1.0 / (N - 1) for k in range(n))
    coords_all = _lattice_coords(shape, spacing)
    total = len(coords_all)

    mask_spec = None
    edge_ok = None
    if topology.kind == "hexagon":
        mask_spec = _parse_hexagon_mask(topology.mask_name)
        active_flat = _mask_inside(coords_all, mask_spec)
        if not active_flat.any():
            raise GridError("hexagon mask selects no vertices at this resolution")
        edge_ok = lambda pts: _mask_inside(pts, mask_spec)
    else:
        active_flat = np.ones(total, dtype=bool)

    offsets = stencil_offsets(n, stencil_order)
    pairs, disp, wrap = _build_lattice_edges(
        shape, periodic, spacing, offsets, active_flat, coords_all, edge_ok
    )

    vid_flat = -np.ones(total, dtype=np.int64)
    vid_flat[active_flat] = np.arange(int(active_flat.sum()))
    coords = coords_all[active_flat]
    pairs = vid_flat[pairs]

    _, corners, corner_xy, cell_vol = _lattice_cells(shape, periodic, spacing, coords_all)
    corner_active = active_flat[corners]
    keep_cells = corner_active.any(axis=1)
    corners, corner_xy, cell_vol = corners[keep_cells], corner_xy[keep_cells], cell_vol[keep_cells]
    corner_active = corner_active[keep_cells]
    if mask_spec is not None:
        polys = _hexagon_polygons(mask_spec)
        areas = np.array(
            [
                _clipped_cell_area(
                    np.array([xy[0], xy[1], xy[3], xy[2]]), polys  # bit order -> CCW quad
                )
                for xy in corner_xy
            ]
        )
        keep2 = areas > 1e-15
        corners, corner_xy, corner_active = corners[keep2], corner_xy[keep2], corner_active[keep2]
        cell_vol = areas[keep2]
    cells = np.where(corner_active, vid_flat[corners], -1)

    face_sets = _cubelike_faces(topology, coords, mask_spec, vid_flat, shape, spacing)

    return Grid(
        topology, N, stencil_order, coords, pairs, disp, wrap, cells, corner_xy,
        cell_vol, face_sets, spacing, vid_flat.reshape(shape), shape,
    )


def _cubelike_faces(topology, coords, mask_spec, vid_flat, shape, spacing):
    face_sets = {}
    if topology.kind == "hexagon":
        boundary = _hexagon_boundary_vertices(coords, mask_spec, vid_flat, shape, spacing)
        labels = _hexagon_face_labels(coords[boundary], mask_spec)
        for k in range(6):
            face_sets[f"S{k}"] = boundary[labels == k]
        return face_sets
    for k, face in enumerate(topology.boundary_faces):
        axis = FACE_LETTERS.index(face[0])
        target = 1.0 if face.endswith("'") else 0.0
        face_sets[face] = np.where(np.abs(coords[:, axis] - target) < 1e-12)[0]
    return face_sets


def _hexagon_boundary_vertices(coords, mask_spec, vid_flat, shape, spacing):
    vid = vid_flat.reshape(shape)
    active = vid >= 0
    on_edge = np.zeros(shape, dtype=bool)
    for axis in (0, 1):
        pad_lo = np.take(active, [0], axis=axis)
        pad_hi = np.take(active, [-1], axis=axis)
        lo = np.concatenate([pad_lo, np.take(active, np.arange(shape[axis] - 1), axis=axis)], axis=axis)
        hi = np.concatenate([np.take(active, np.arange(1, shape[axis]), axis=axis), pad_hi], axis=axis)
        on_edge |= active & (~lo | ~hi)
    border = np.zeros(shape, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    on_edge |= active & border
    return np.sort(vid[on_edge & active])


def _hexagon_face_labels(pts, mask_spec):
    if mask_spec[0] == "regular":
        dists = np.empty((len(pts), 6))
        for k in range(6):
            a, b = _HEX_VERTS[k], _HEX_VERTS[(k + 1) % 6]
            ab = b - a
            tpar = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
            proj = a + tpar[:, None] * ab
            dists[:, k] = np.linalg.norm(pts - proj, axis=1)
        return np.argmin(dists, axis=1)
    _, ell, w = mask_spec
    s, t = _tripod_coords(pts, ell, w)
    in_leg = (s >= -w / 2 - 1e-12) & (np.abs(t) <= w / 2 + 1e-12)
    s_masked = np.where(in_leg, s, -np.inf)
    leg = np.argmax(s_masked, axis=1)
    s_leg = s_masked[np.arange(len(pts)), leg]
    t_leg = t[np.arange(len(pts)), leg]
    labels = np.empty(len(pts), dtype=np.int64)
    cap = s_leg >= ell - w
    labels[cap] = 2 * leg[cap]
    side_pos = ~cap & (t_leg > 0)
    labels[side_pos] = (2 * leg[side_pos] + 1) % 6
    side_neg = ~cap & (t_leg <= 0)
    labels[side_neg] = (2 * leg[side_neg] - 1) % 6
    return labels


def _build_sphere(topology, N, stencil_order):
    """Latitude-longitude grid; pole rows collapsed to single vertices.

    N longitudes (periodic, spacing 1/N) and N+1 latitude rows (spacing 1/N,
    so an exact equator row exists and both axes step uniformly).
    """
    M = N + 1  # latitude rows including poles
    shape = (N, M)
    spacing = (1.0 / N, 1.0 / (M - 1))
    coords_all = _lattice_coords(shape, spacing)
    active_flat = np.ones(N * M, dtype=bool)
    offsets = stencil_offsets(2, stencil_order)
    pairs, disp, wrap = _build_lattice_edges(
        shape, (True, False), spacing, offsets, active_flat, coords_all
    )

    # collapse pole rows j = 0 and j = M-1
    lat_j = np.arange(N * M) % M
    remap = np.empty(N * M, dtype=np.int64)
    south, north = 0, 1
    is_pole_row = (lat_j == 0) | (lat_j == M - 1)
    remap[lat_j == 0] = south
    remap[lat_j == M - 1] = north
    inner = ~is_pole_row
    remap[inner] = 2 + np.arange(int(inner.sum()))
    V = 2 + int(inner.sum())
    coords = np.empty((V, 2))
    coords[south] = (0.0, 0.0)
    coords[north] = (0.0, 1.0)
    coords[remap[inner]] = coords_all[inner]

    p = remap[pairs]
    keep = p[:, 0] != p[:, 1]
    p, disp, wrap = p[keep], disp[keep].copy(), wrap[keep]
    pole_edge = (p[:, 0] < 2) | (p[:, 1] < 2)
    disp[pole_edge, 0] = 0.0
    # dedupe collapsed parallel edges; keep the shortest meridian step per pair
    swap = p[:, 0] > p[:, 1]
    p_sorted = p.copy()
    p_sorted[swap] = p[swap][:, ::-1]
    disp_sorted = disp.copy()
    disp_sorted[swap] *= -1
    wrap_sorted = wrap.copy()
    wrap_sorted[swap] *= -1
    order = np.lexsort((np.abs(disp_sorted[:, 1]), p_sorted[:, 1], p_sorted[:, 0]))
    p_sorted, disp_sorted, wrap_sorted = p_sorted[order], disp_sorted[order], wrap_sorted[order]
    _, first = np.unique(p_sorted, axis=0, return_index=True)
    pairs, disp, wrap = p_sorted[first], disp_sorted[first], wrap_sorted[first]

    _, corners, corner_xy, cell_vol = _lattice_cells(shape, (True, False), spacing, coords_all)
    cells = remap[corners]

    anti = np.empty(V, dtype=np.int64)
    anti[south] = north
    anti[north] = south
    lon_idx = np.arange(N)
    vid = remap.reshape(shape)
    for j in range(1, M - 1):
        anti[vid[:, j]] = vid[(lon_idx + N // 2) % N, M - 1 - j]

    degenerate = np.zeros(V, dtype=bool)
    degenerate[[south, north]] = True

    qvol = 0.5 if topology.kind == "rp2" else 1.0
    return Grid(
        topology, N, stencil_order, coords, pairs, disp, wrap, cells, corner_xy,
        cell_vol, {}, spacing, vid, shape, antipode_map=anti,
        chart_degenerate=degenerate, quotient_volume_factor=qvol,
    )


# ---------------------------------------------------------------------------
# operations


def face_vertices(grid: Grid, face: str) -> np.ndarray:
    """Vertex set of a declared boundary face."""
    if grid.topology.closed:
        raise GridError(f"{grid.topology.kind} is closed: no boundary faces")
    if face not in grid.face_sets:
        raise GridError(f"unknown face label {face!r}")
    verts = grid.face_sets[face]
    if len(verts) == 0:
        raise GridError(f"face {face!r} has no vertices at this resolution")
    return verts


def deck_translate(grid: Grid, v: int, cls) -> np.ndarray:
    """Chart coordinate of v translated by cls fundamental-domain periods."""
    kind = grid.topology.kind
    if kind == "torus2":
        cls = np.asarray(cls, dtype=float)
        if cls.shape != (2,):
            raise GridError("torus2 deck class is an integer pair")
        return grid.coords[v] + cls
    if kind == "cylinder":
        k = float(np.atleast_1d(cls)[0])
        return grid.coords[v] + np.array([k, 0.0])
    raise GridError(f"{kind} has no free abelian deck group")


def antipode(grid: Grid, v: int) -> int:
    if grid.antipode_map is None:
        raise GridError(f"{grid.topology.kind} has no antipodal structure")
    return int(grid.antipode_map[v])
