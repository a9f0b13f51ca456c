"""Separating cuts, width certificates, and the sys/width/volume cross-checks.

The cut engine follows the volume-profile recursion specialized to surfaces:
while some complement component has certified radius >= R, build the distance
field from that component's farthest-point center, scan a uniform ladder of
levels inside (r0, r1), keep the level whose curve is shortest (the discrete
pigeonhole surrogate: some level in the band is no longer than
vol(B(p, r1)) / (r1 - r0)), remove every component-internal edge straddling
the level, and recompute components.  Cut curves become one-ring vertex sets
(endpoints of straddled edges), optionally thickened by one tenth of their
separation from other curves, and are appended to the complement components
as cover sets.  Certificates store per-set centers so an independent
validator can recheck every radius with fresh distance fields.

All certified radii are strict upper bounds measured from stored centers;
an engine failure is an honest "no certificate", never a false one.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import measure
from .covers import Cover
from .fields import MetricField
from .geodesy import (
    distance_field,
    distance_matrix,
    set_radius_exact,
    set_radius_upper,
    systole,
)


class WidthError(ValueError):
    pass


def field_hash(field: MetricField) -> str:
    h = hashlib.sha256()
    h.update(field.grid.topology.descriptor().encode())
    h.update(np.int64(field.grid.resolution).tobytes())
    h.update(np.int64(field.grid.stencil_order).tobytes())
    h.update(np.ascontiguousarray(field.tensors).tobytes())
    return h.hexdigest()


@dataclass
class CutCurve:
    level: float
    center: int
    length: float
    ball_bound: float          # vol(B(center, r1)) / (r1 - r0) at cut time
    removed_edges: np.ndarray  # edge ids straddled by this level
    crossing_keys: np.ndarray  # (S, 2) sorted vertex pairs of crossed cell edges
    points: np.ndarray         # segment midpoints, for reports and figures


@dataclass
class SeparatingCut:
    R: float
    r0: float
    r1: float
    curves: list
    removed_mask: np.ndarray
    components: list
    component_radii: list      # (radius_upper_bound, center) per component
    valid: bool
    iterations: int
    reasons: list
    total_length: float = 0.0


def _kept_components(field: MetricField, removed_mask: np.ndarray):
    g = field.grid
    e = g.edges[~removed_mask]
    m = sp.csr_matrix(
        (np.ones(2 * len(e)), (np.concatenate([e[:, 0], e[:, 1]]),
                               np.concatenate([e[:, 1], e[:, 0]]))),
        shape=(g.num_vertices,) * 2,
    )
    ncomp, labels = connected_components(m, directed=False)
    comps = [np.where(labels == c)[0] for c in range(ncomp)]
    comps.sort(key=lambda a: int(a[0]))
    return comps


def separating_cut(field: MetricField, R: float, r0: float = None, r1: float = None,
                   budget: int = 32, level_count: int = 256,
                   radius_rounds: int = 4) -> SeparatingCut:
    """Cut level curves until every complement component has radius < R."""
    g = field.grid
    if g.n != 2 or g.topology.kind == "rp2":
        raise WidthError("separating cuts are implemented for plain 2-D fields")
    if R <= 0:
        raise WidthError("R must be positive")
    n = g.n
    if r1 is None:
        r1 = R
    if r0 is None:
        r0 = (n - 1) / n * R
    if not (0 < r0 < r1 <= R):
        raise WidthError("need 0 < r0 < r1 <= R")

    E = g.num_edges
    removed = np.zeros(E, dtype=bool)
    curves = []
    reasons = []
    fvals_all = None
    comps = _kept_components(field, removed)
    radii = {}

    def comp_key(comp):
        return (len(comp), hash(comp.tobytes()))

    iterations = 0
    while iterations < budget:
        todo = None
        for ci, comp in enumerate(comps):
            key = comp_key(comp)
            if key not in radii:
                radii[key] = set_radius_upper(field, comp, rounds=radius_rounds,
                                              within=comp)
            if radii[key][0] >= R:
                todo = (ci, comp, radii[key])
                break
        if todo is None:
            comp_radii = [radii[comp_key(c)] for c in comps]
            total = float(sum(c.length for c in curves))
            return SeparatingCut(R, r0, r1, curves, removed, comps, comp_radii,
                                 True, iterations, reasons, total)

        iterations += 1
        ci, comp, (rad_ub, center) = todo
        in_comp = np.zeros(g.num_vertices, dtype=bool)
        in_comp[comp] = True
        fvals_all = distance_field(field, [center], quotient=False).dist
        fvals = np.where(np.isfinite(fvals_all), fvals_all, 1e300)
        cells_ok = (g.cells >= 0).all(axis=1) & in_comp[np.where(g.cells >= 0, g.cells, 0)].all(axis=1)
        e = g.edges
        edge_candidate = in_comp[e[:, 0]] & in_comp[e[:, 1]] & ~removed
        fu, fv = fvals[e[:, 0]], fvals[e[:, 1]]

        step = (r1 - r0) / level_count
        best = None
        for k in range(level_count):
            t = r0 + step * (k + 0.5)
            if np.abs(fvals[comp] - t).min() < 1e-13:
                t += step * 1e-6
            cut_edges = edge_candidate & ((fu - t) * (fv - t) < 0)
            ncut = int(cut_edges.sum())
            if ncut == 0:
                continue
            segs = measure._marching_segments(field, fvals, t, cell_mask=cells_ok)
            length = float(segs.lengths.sum())
            if best is None or length < best[0] - 1e-15:
                best = (length, t, cut_edges, segs)
        if best is None:
            reasons.append(f"no level in ({r0:.4g}, {r1:.4g}) separates component "
                           f"with radius {rad_ub:.4g}")
            break
        length, t, cut_edges, segs = best
        bound = measure.ball_volume(field, center, r1, dist=fvals_all) / (r1 - r0)
        removed |= cut_edges
        mids = 0.5 * (segs.points_a + segs.points_b)
        keys = np.unique(np.concatenate([segs.keys_a, segs.keys_b]), axis=0)
        curves.append(CutCurve(t, center, length, bound,
                               np.where(cut_edges)[0], keys, mids))
        comps = _kept_components(field, removed)

    if iterations >= budget:
        reasons.append(f"iteration budget {budget} exhausted")
    comp_radii = []
    for c in comps:
        key = comp_key(c)
        if key not in radii:
            radii[key] = set_radius_upper(field, c, rounds=radius_rounds, within=c)
        comp_radii.append(radii[key])
    total = float(sum(c.length for c in curves))
    return SeparatingCut(R, r0, r1, curves, removed, comps, comp_radii,
                         False, iterations, reasons, total)


# ---------------------------------------------------------------------------
# cut graph -> cover sets


def _curve_ring_groups(field: MetricField, cut: SeparatingCut):
    """Connected one-ring vertex groups of the cut graph Q."""
    g = field.grid
    ring_edges = np.where(cut.removed_mask)[0]
    if len(ring_edges) == 0:
        return []
    ring_verts = np.unique(g.edges[ring_edges].ravel())
    in_ring = np.zeros(g.num_vertices, dtype=bool)
    in_ring[ring_verts] = True
    e = g.edges
    local = in_ring[e[:, 0]] & in_ring[e[:, 1]]
    le = e[local]
    m = sp.csr_matrix(
        (np.ones(2 * len(le)), (np.concatenate([le[:, 0], le[:, 1]]),
                                np.concatenate([le[:, 1], le[:, 0]]))),
        shape=(g.num_vertices,) * 2,
    )
    ncomp, labels = connected_components(m, directed=False)
    groups = []
    for c in np.unique(labels[ring_verts]):
        groups.append(ring_verts[labels[ring_verts] == c])
    groups.sort(key=lambda a: int(a[0]))
    return groups


def _thicken_group(field: MetricField, group: np.ndarray, others: list,
                   R: float, rad: float) -> np.ndarray:
    """Grow a Q-set by the one-tenth separation rule, capped to protect R."""
    if not others:
        return group
    d = distance_field(field, group, quotient=False).dist
    sep = min(float(d[o].min()) for o in others)
    cap = max(0.0, (R - rad) / 2.0)
    r_x = min(sep / 10.0, cap)
    if r_x <= 0:
        return group
    return np.where(d < r_x)[0]


@dataclass
class WidthCertificate:
    n_width: int
    R: float
    cover: Cover
    valid: bool
    reasons: list
    multiplicity: int
    field_hash: str
    curves: list = dataclass_field(default_factory=list)
    r0: float = float("nan")
    r1: float = float("nan")

    def curve_summary(self):
        return [(c.length, c.ball_bound) for c in self.curves]


def width_upper_bound(field: MetricField, R: float, r0: float = None,
                      r1: float = None, budget: int = 32) -> WidthCertificate:
    """Certificate that width_1 < R (multiplicity <= 3 cover, radii < R).

    Tries the default band ((n-1)/n R, R) and one fallback band; emits an
    invalid certificate with reasons when no attempt produces a cover that
    survives the checks.  No false certificate is possible: validity is
    determined by direct radius / multiplicity / union re-checks.
    """
    attempts = [(r0, r1)] if (r0 is not None or r1 is not None) else [
        (None, None), (0.6 * R, 0.9 * R)
    ]
    fh = field_hash(field)
    last_reasons = []
    for (a0, a1) in attempts:
        cut = separating_cut(field, R, a0, a1, budget=budget)
        if not cut.valid:
            last_reasons = cut.reasons
            continue
        sets, centers, radii = [], [], []
        for comp, (rad, center) in zip(cut.components, cut.component_radii):
            sets.append(comp)
            centers.append(center)
            radii.append(rad)
        groups = _curve_ring_groups(field, cut)
        ok = True
        reasons = []
        for gi, grp in enumerate(groups):
            others = [o for j, o in enumerate(groups) if j != gi]
            rad, center = set_radius_exact(field, grp)
            if rad >= R:
                ok = False
                reasons.append(f"cut-graph component radius {rad:.4g} >= R")
                break
            thick = _thicken_group(field, grp, others, R, rad)
            rad2, center2 = set_radius_exact(field, thick)
            if rad2 >= R:
                thick, rad2, center2 = grp, rad, center
            sets.append(thick)
            centers.append(center2)
            radii.append(rad2)
        if not ok:
            last_reasons = reasons
            continue
        cover = Cover(sets, centers, radii)
        mult = cover.multiplicity(field.grid.num_vertices)
        if mult > field.grid.n + 1:
            last_reasons = [f"multiplicity {mult} exceeds n+1"]
            continue
        if not cover.covers_everything(field.grid.num_vertices):
            last_reasons = ["cover union misses vertices"]
            continue
        cert = WidthCertificate(
            n_width=max(mult - 1, 1), R=R, cover=cover, valid=True, reasons=[],
            multiplicity=mult, field_hash=fh, curves=cut.curves,
            r0=cut.r0, r1=cut.r1,
        )
        return cert
    return WidthCertificate(
        n_width=field.grid.n - 1, R=R, cover=Cover([], [], []), valid=False,
        reasons=last_reasons or ["no valid attempt"], multiplicity=0, field_hash=fh,
    )


def validate_certificate(field: MetricField, cert: WidthCertificate):
    """Independent recheck: hash, union, multiplicity, fresh radius measurements."""
    reasons = []
    if field_hash(field) != cert.field_hash:
        reasons.append("field hash mismatch")
    if not cert.valid:
        reasons.append("certificate is marked invalid")
    cover = cert.cover
    V = field.grid.num_vertices
    if not cover.covers_everything(V):
        reasons.append("cover union misses vertices")
    mult = cover.multiplicity(V) if cover.sets else 0
    if mult != cert.multiplicity:
        reasons.append(f"multiplicity mismatch: {mult} != {cert.multiplicity}")
    if mult > field.grid.n + 1:
        reasons.append("multiplicity exceeds n+1")
    for s, center in zip(cover.sets, cover.centers):
        d = distance_field(field, [int(center)], quotient=False).dist
        ecc = float(d[np.asarray(s)].max())
        if not ecc < cert.R:
            reasons.append(f"set radius {ecc:.6g} not below R = {cert.R:.6g}")
    return len(reasons) == 0, reasons


# ---------------------------------------------------------------------------
# theorem cross-checks


@dataclass
class WidthVolumeReport:
    vol: float
    R_star: float
    refined_bound: float       # c_2 * sqrt(vol) with c_2 = 1
    certificate: WidthCertificate
    slack_certificate: WidthCertificate
    success: bool


def check_width_volume(field: MetricField) -> WidthVolumeReport:
    """Attempt the width <= n * vol^(1/n) certificate (n = 2) plus a 5% slack run.

    Failure here means discretization shortfall, never a refutation.
    """
    vol = measure.volume(field)
    n = field.grid.n
    R_star = n * vol ** (1.0 / n)
    cert = width_upper_bound(field, R_star)
    cert_slack = width_upper_bound(field, 1.05 * R_star)
    return WidthVolumeReport(
        vol=vol, R_star=R_star, refined_bound=math.sqrt(vol),
        certificate=cert, slack_certificate=cert_slack,
        success=cert.valid or cert_slack.valid,
    )


@dataclass
class SysWidthReport:
    sys: float
    sys_class: object
    vol: float
    bound_4n: float
    ok_4n: bool
    cert_rows: list   # (R_cert, sys <= 6 R, sys <= 4 R) per valid certificate


def check_sys_width(field: MetricField, certificates=()) -> SysWidthReport:
    """Gross inequality checks: sys <= 4 n vol^(1/n); sys <= 6 R per certificate."""
    w = systole(field)
    vol = measure.volume(field)
    n = field.grid.n
    bound = 4.0 * n * vol ** (1.0 / n)
    rows = []
    for cert in certificates:
        if cert is not None and cert.valid:
            rows.append((cert.R, w.length <= 6.0 * cert.R, w.length <= 4.0 * cert.R))
    return SysWidthReport(
        sys=w.length, sys_class=w.cls, vol=vol, bound_4n=bound,
        ok_4n=bool(w.length <= bound), cert_rows=rows,
    )
