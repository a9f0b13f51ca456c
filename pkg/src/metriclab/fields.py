"""Per-vertex SPD metric tensors and g-lengths of edges and polylines.

A MetricField stores one symmetric positive definite n x n tensor per grid
vertex (chart units: squared length per squared chart unit).  Edge lengths use
the arithmetic mean of the endpoint tensors, sqrt(dx^T g dx); the same rule
measures polyline segments, with tensors at non-vertex points obtained by
multilinear interpolation on the lattice.

Sphere grids are the one sanctioned exception to strict positive definiteness:
the collapsed pole vertices carry the chart-degenerate round tensor (zero
longitude component), flagged by grid.chart_degenerate, and pole-incident
edges store pure meridian displacements so lengths stay exact.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .grid import Grid, GridError


class FieldError(ValueError):
    """Raised for invalid metric constructions."""


class MetricField:
    """Immutable per-vertex tensor field over a Grid."""

    def __init__(self, grid: Grid, tensors: np.ndarray, validate: bool = True):
        tensors = np.asarray(tensors, dtype=float)
        if tensors.shape != (grid.num_vertices, grid.n, grid.n):
            raise FieldError(f"tensors must have shape (V, n, n), got {tensors.shape}")
        self.grid = grid
        self.tensors = tensors
        self._edge_lengths = None
        self._csr = None
        self._lambda_min = None
        if validate:
            _check_spd(self)
            _check_quotient_invariance(self)

    # -- cached geometry ---------------------------------------------------

    def edge_lengths(self) -> np.ndarray:
        if self._edge_lengths is None:
            e, d = self.grid.edges, self.grid.edge_disp
            gbar = 0.5 * (self.tensors[e[:, 0]] + self.tensors[e[:, 1]])
            q = np.einsum("ei,eij,ej->e", d, gbar, d)
            self._edge_lengths = np.sqrt(np.maximum(q, 0.0))
        return self._edge_lengths

    def graph(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency (both edge directions stored)."""
        if self._csr is None:
            e = self.grid.edges
            w = self.edge_lengths()
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            data = np.concatenate([w, w])
            self._csr = sp.csr_matrix(
                (data, (rows, cols)), shape=(self.grid.num_vertices,) * 2
            )
        return self._csr

    def lambda_min(self) -> float:
        """Smallest tensor eigenvalue over non-degenerate vertices."""
        if self._lambda_min is None:
            keep = ~self.grid.chart_degenerate
            ev = np.linalg.eigvalsh(self.tensors[keep])
            self._lambda_min = float(ev.min())
            self._lambda_max = float(ev.max())
        return self._lambda_min

    def lambda_max(self) -> float:
        self.lambda_min()
        return self._lambda_max

    def tensor_at(self, points: np.ndarray) -> np.ndarray:
        """Multilinear interpolation of the tensor field at chart points.

        Points may be unwrapped (outside [0,1) on periodic axes); masked lattice
        corners are dropped from the interpolation weights.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        g = self.grid
        n = g.n
        shape = g.lattice_shape
        hs = np.asarray(g.spacing)
        x = pts / hs
        base = np.floor(x).astype(np.int64)
        frac = x - base
        at_top = []
        for k in range(n):
            if g.topology.periodic[k]:
                base[:, k] %= shape[k]
            else:
                hi = base[:, k] >= shape[k] - 1
                base[:, k] = np.clip(base[:, k], 0, shape[k] - 2)
                frac[:, k] = np.where(hi, 1.0, frac[:, k])
        out = np.zeros((len(pts), n, n))
        wsum = np.zeros(len(pts))
        for bit in range(2 ** n):
            idx = base.copy()
            wgt = np.ones(len(pts))
            for k in range(n):
                if (bit >> k) & 1:
                    idx[:, k] += 1
                    if g.topology.periodic[k]:
                        idx[:, k] %= shape[k]
                    wgt *= frac[:, k]
                else:
                    wgt *= 1.0 - frac[:, k]
            vid = g.lattice_vid[tuple(idx.T)]
            ok = vid >= 0
            wgt = np.where(ok, wgt, 0.0)
            out += wgt[:, None, None] * self.tensors[np.where(ok, vid, 0)]
            wsum += wgt
        if np.any(wsum <= 0):
            raise FieldError("point lies outside the active mask")
        out /= wsum[:, None, None]
        return out

    def scaled(self, factor: float) -> "MetricField":
        """Field with tensors multiplied by factor (lengths scale by sqrt(factor))."""
        if factor <= 0:
            raise FieldError("scale factor must be positive")
        return MetricField(self.grid, self.tensors * factor, validate=False)


def _check_spd(field: MetricField):
    keep = ~field.grid.chart_degenerate
    t = field.tensors[keep]
    if not np.allclose(t, np.swapaxes(t, 1, 2), atol=1e-12):
        raise FieldError("tensors must be symmetric")
    if len(t) and np.linalg.eigvalsh(t).min() <= 0:
        raise FieldError("tensors must be positive definite")


def _check_quotient_invariance(field: MetricField, tol: float = 1e-9):
    """rp2 fields must be invariant under the antipodal pushforward."""
    g = field.grid
    if g.topology.kind != "rp2":
        return
    anti = g.antipode_map
    flip = np.diag([1.0, -1.0])
    pushed = flip @ field.tensors @ flip
    if not np.allclose(field.tensors[anti], pushed, atol=tol):
        raise FieldError("field is not invariant under the antipodal identification")


# ---------------------------------------------------------------------------
# constructors


def flat_metric(grid: Grid) -> MetricField:
    """Constant identity tensor (the Euclidean chart metric)."""
    t = np.broadcast_to(np.eye(grid.n), (grid.num_vertices, grid.n, grid.n)).copy()
    if grid.antipode_map is not None:
        raise FieldError("flat chart metric is not defined on sphere2/rp2; "
                         "use round_sphere_metric")
    return MetricField(grid, t, validate=False)


def constant_metric(grid: Grid, G) -> MetricField:
    """Constant tensor G at every vertex (e.g. a torus Gram matrix)."""
    G = np.asarray(G, dtype=float)
    if G.shape != (grid.n, grid.n):
        raise FieldError(f"G must be {grid.n} x {grid.n}")
    if not np.allclose(G, G.T, atol=1e-12) or np.linalg.eigvalsh(G).min() <= 0:
        raise FieldError("G must be symmetric positive definite")
    if grid.antipode_map is not None:
        raise FieldError("constant chart tensors are not antipodally invariant on the sphere")
    t = np.broadcast_to(G, (grid.num_vertices, grid.n, grid.n)).copy()
    return MetricField(grid, t, validate=False)


def conformal_metric(grid: Grid, u: np.ndarray) -> MetricField:
    """Tensor e^{2 u(v)} * identity at each vertex."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.num_vertices,):
        raise FieldError("u must be a per-vertex scalar field")
    if not np.all(np.isfinite(u)):
        raise FieldError("u must be finite")
    if grid.antipode_map is not None:
        raise FieldError("use conformal_rescale(round_sphere_metric(...), u) on the sphere")
    t = np.exp(2.0 * u)[:, None, None] * np.eye(grid.n)
    return MetricField(grid, t, validate=False)


def conformal_rescale(field: MetricField, u: np.ndarray) -> MetricField:
    """Field with tensors multiplied pointwise by e^{2u}; checks rp2 invariance."""
    u = np.asarray(u, dtype=float)
    if u.shape != (field.grid.num_vertices,):
        raise FieldError("u must be a per-vertex scalar field")
    g = field.grid
    if g.topology.kind == "rp2" and not np.allclose(u[g.antipode_map], u, atol=1e-9):
        raise FieldError("u violates the antipodal identification")
    return MetricField(g, np.exp(2.0 * u)[:, None, None] * field.tensors, validate=False)


def round_sphere_metric(grid: Grid, radius: float = 1.0) -> MetricField:
    """Round metric of the given radius in the latitude-longitude chart.

    Chart axes are (longitude u in [0,1), latitude v in [0,1]); the tensor is
    diag((2 pi r cos(lat))^2, (pi r)^2), with lat = pi (v - 1/2).  Pole
    vertices carry the degenerate limit tensor.
    """
    if grid.topology.kind not in ("sphere2", "rp2"):
        raise FieldError("round metric needs sphere2 or rp2 topology")
    if radius <= 0:
        raise FieldError("radius must be positive")
    lat = math.pi * (grid.coords[:, 1] - 0.5)
    t = np.zeros((grid.num_vertices, 2, 2))
    t[:, 0, 0] = (2.0 * math.pi * radius * np.cos(lat)) ** 2
    t[:, 1, 1] = (math.pi * radius) ** 2
    return MetricField(grid, t, validate=False)


def random_spd_metric(grid: Grid, seed: int, eig_range=(0.5, 2.0)) -> MetricField:
    """Smooth random tensor field with per-vertex eigenvalues inside eig_range.

    A truncated trigonometric mixture (integer frequencies, at most 4 harmonics
    per axis) drives two eigenvalue fields and a rotation angle, so the field
    is periodic on wrap topologies by construction and deterministic in seed.
    """
    lo, hi = float(eig_range[0]), float(eig_range[1])
    if not (0 < lo <= hi):
        raise FieldError("eig_range must satisfy 0 < lo <= hi")
    if grid.topology.kind in ("sphere2", "rp2"):
        raise FieldError("random SPD fields are not defined on the sphere chart; "
                         "use conformal_rescale of the round metric")
    rng = np.random.default_rng(seed)
    n = grid.n
    xy = grid.coords

    def trig_field():
        out = np.zeros(grid.num_vertices)
        for _ in range(4):
            freq = rng.integers(1, 3, size=n)
            phase = rng.uniform(0, 2 * math.pi, size=n)
            amp = 0.45 * rng.normal()
            term = amp * np.ones(grid.num_vertices)
            for k in range(n):
                term = term * np.cos(2 * math.pi * freq[k] * xy[:, k] + phase[k])
            out += term
        return out

    # log-uniform eigenvalue mapping keeps the relative tensor gradient bounded
    log_lo, log_hi = math.log(lo), math.log(hi)
    lams = []
    for _ in range(n):
        s = trig_field()
        lams.append(np.exp(log_lo + (log_hi - log_lo) * 0.5 * (1.0 + np.sin(s))))
    if n == 1:
        t = np.array(lams[0])[:, None, None]
        return MetricField(grid, t, validate=False)
    theta = trig_field()
    c, s = np.cos(theta), np.sin(theta)
    if n == 2:
        rot = np.empty((grid.num_vertices, 2, 2))
        rot[:, 0, 0], rot[:, 0, 1] = c, -s
        rot[:, 1, 0], rot[:, 1, 1] = s, c
    else:
        rot = np.broadcast_to(np.eye(n), (grid.num_vertices, n, n)).copy()
        rot[:, 0, 0], rot[:, 0, 1] = c, -s
        rot[:, 1, 0], rot[:, 1, 1] = s, c
    lam = np.stack(lams, axis=1)
    t = np.einsum("vij,vj,vkj->vik", rot, lam, rot)
    t = 0.5 * (t + np.swapaxes(t, 1, 2))  # exactly symmetric for export round-trips
    return MetricField(grid, t, validate=False)


def piecewise_metric(grid: Grid, region, g1: MetricField, g2: MetricField) -> MetricField:
    """Tensor of g1 inside region (per-vertex bool), g2 outside."""
    if g1.grid is not grid or g2.grid is not grid:
        raise FieldError("piecewise parts must live on the same grid")
    region = np.asarray(region, dtype=bool)
    if region.shape != (grid.num_vertices,):
        raise FieldError("region must be a per-vertex predicate")
    t = np.where(region[:, None, None], g1.tensors, g2.tensors)
    return MetricField(grid, t, validate=False)


# ---------------------------------------------------------------------------
# lengths


def edge_length(field: MetricField, v: int, w: int) -> float:
    """g-length of a grid edge (mean endpoint tensor, one midpoint sample)."""
    g = field.grid
    e = g.edges
    hit = np.where(((e[:, 0] == v) & (e[:, 1] == w)) | ((e[:, 0] == w) & (e[:, 1] == v)))[0]
    if len(hit) == 0:
        raise GridError(f"({v}, {w}) is not a grid edge")
    return float(field.edge_lengths()[hit[0]])


def polyline_length(field: MetricField, points) -> float:
    """Sum of per-segment lengths sqrt(dx^T gbar dx), gbar = mean endpoint tensor.

    Points are unwrapped chart coordinates (integer parts encode seam wraps).
    Consecutive points must stay within stencil reach (2 lattice cells per
    axis); additivity under concatenation is exact.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, field.grid.n)
    if len(pts) < 2:
        return 0.0
    hs = np.asarray(field.grid.spacing)
    span = np.abs(np.diff(pts, axis=0))
    if np.any(span > 2 * hs + 1e-9):
        raise FieldError("malformed polyline: segment exceeds stencil reach")
    wrapped = pts.copy()
    for k in range(field.grid.n):
        if field.grid.topology.periodic[k]:
            wrapped[:, k] = pts[:, k] % 1.0
    tens = field.tensor_at(wrapped)
    gbar = 0.5 * (tens[:-1] + tens[1:])
    d = np.diff(pts, axis=0)
    q = np.einsum("si,sij,sj->s", d, gbar, d)
    return float(np.sqrt(np.maximum(q, 0.0)).sum())
