"""Canonical experiments, the experiment runner, and refinement studies.

Every acceptance-style computation is packaged as a named gallery item: a
domain descriptor, a metric builder, an operation, resolutions, and reference
values with provenance tags.  The runner executes an item at each resolution,
emits ReportRows (PASS/FAIL/INFO) plus optional SVG figures, and is fully
deterministic for a fixed config and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import besicovitch as B
from . import covers as C
from . import fields as F
from . import geodesy as geo
from . import io as mio
from . import measure as M
from . import width as W
from .grid import build_grid, face_vertices, topology_from_name

LOEWNER = math.sqrt(2.0) / 3.0 ** 0.25          # optimal torus systolic ratio
PU = math.sqrt(math.pi / 2.0)                    # optimal rp2 systolic ratio
HEX_GRAM = ((1.0, 0.5), (0.5, 1.0))

TRIPOD_MASK = "tripod:0.46:0.024"
TRIPOD_SCALE2 = 5.76  # conformal factor c^2; c = 2.4 sized to push distances past 1


class GalleryError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment_id: str
    domain: str
    metric: str
    operation: str
    resolutions: list
    stencil_order: int = 3
    metric_params: dict = dataclass_field(default_factory=dict)
    operation_params: dict = dataclass_field(default_factory=dict)
    seed: int = None
    tolerance_overrides: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        res = list(self.resolutions)
        if any(b <= a for a, b in zip(res, res[1:])):
            raise GalleryError("resolutions must be strictly increasing")
        if self.metric in ("random_spd", "conformal_bumps") and self.seed is None:
            raise GalleryError(f"metric {self.metric!r} requires a seed")

    def tol(self, quantity: str, default: float) -> float:
        return float(self.tolerance_overrides.get(quantity, default))


# ---------------------------------------------------------------------------
# metric builders


def _bump_field(grid, seed, amplitude=0.25):
    rng = np.random.default_rng(seed)
    xy = grid.coords
    u = np.zeros(grid.num_vertices)
    for _ in range(3):
        fr = rng.integers(1, 3, size=2)
        ph = rng.uniform(0, 2 * math.pi, size=2)
        u += rng.normal() * np.cos(2 * math.pi * fr[0] * xy[:, 0] + ph[0]) * np.cos(
            2 * math.pi * fr[1] * xy[:, 1] + ph[1])
    u = amplitude * u / max(np.abs(u).max(), 1e-12)
    return u - u.mean()


def build_metric(config: ExperimentConfig, grid) -> F.MetricField:
    name = config.metric
    p = config.metric_params
    if name == "flat":
        return F.flat_metric(grid)
    if name == "constant":
        return F.constant_metric(grid, np.asarray(p["g"], dtype=float).reshape(grid.n, grid.n))
    if name == "hexagonal":
        return F.constant_metric(grid, np.asarray(HEX_GRAM))
    if name == "round_sphere":
        return F.round_sphere_metric(grid, float(p.get("radius", 1.0)))
    if name == "random_spd":
        return F.random_spd_metric(grid, int(config.seed),
                                   (float(p.get("eig_lo", 0.25)), float(p.get("eig_hi", 4.0))))
    if name == "conformal_bump":
        u = _bump_field(grid, int(config.seed or 0), float(p.get("amplitude", 0.25)))
        base = p.get("base", "flat")
        if base == "hexagonal":
            return F.MetricField(
                grid, np.exp(2 * u)[:, None, None] * np.asarray(HEX_GRAM), validate=False)
        return F.conformal_metric(grid, u)
    if name == "scaled_flat":
        return F.flat_metric(grid).scaled(float(p.get("factor", 1.0)))
    if name == "piecewise_disk":
        center = np.asarray(p.get("center", (0.5, 0.5)))
        rad = float(p.get("radius", 0.3))
        inside = np.linalg.norm(grid.coords - center, axis=1) < rad
        g1 = F.constant_metric(grid, np.asarray(p.get("g_inside", ((4.0, 0.0), (0.0, 4.0)))))
        g2 = F.flat_metric(grid)
        return F.piecewise_metric(grid, inside, g1, g2)
    raise GalleryError(f"unknown metric builder {name!r}")


# ---------------------------------------------------------------------------
# operations; each returns (rows, figures) for one resolution


def _op_volume(config, field, N):
    ref = float(config.operation_params["reference"])
    tol = config.tol("volume", 0.01)
    return [mio.make_row(config.experiment_id, N, "volume", M.volume(field), ref,
                         config.operation_params.get("provenance", "derived"), tol)], {}


def _op_systolic_ratio(config, field, N):
    w = geo.systole(field)
    vol = M.volume(field)
    ratio = w.length / math.sqrt(vol)
    ref = float(config.operation_params["reference"])
    tol = config.tol("systolic_ratio", 0.02)
    rows = [
        mio.make_row(config.experiment_id, N, "systole", w.length,
                     float(config.operation_params.get("sys_reference", w.length)),
                     "derived", config.tol("systole", 0.02)),
        mio.make_row(config.experiment_id, N, "systolic_ratio", ratio, ref,
                     config.operation_params.get("provenance", "paper"), tol),
    ]
    return rows, {"loops": [(w.points, "#ffffff")], "witness": w}


def _op_besicovitch(config, field, N):
    rel_tol = config.tol("slack", 0.01)
    rep = B.verify_besicovitch(field, rel_tol=rel_tol)
    eid = config.experiment_id
    rows = [
        mio.make_row(eid, N, "slack_over_product", rep.slack / max(rep.product, 1e-300),
                     0.0, "derived", rel_tol, mode="ge"),
        mio.make_row(eid, N, "degree", 1.0 if rep.degree_ok else 0.0, 1.0, "derived", 0.0),
        mio.make_row(eid, N, "verdict_pass", 1.0 if rep.passed else 0.0, 1.0, "derived", 0.0),
        mio.make_row(eid, N, "jac_max", rep.jac_max, 1.0, "derived", 0.0, mode="info"),
    ]
    for i, (dref, di) in enumerate(zip(config.operation_params.get("d_reference", rep.d), rep.d)):
        rows.append(mio.make_row(eid, N, f"d{i}", di, float(dref), "derived",
                                 config.tol("face_distance", 0.01)))
    if "vol_reference" in config.operation_params:
        rows.append(mio.make_row(eid, N, "vol", rep.vol,
                                 float(config.operation_params["vol_reference"]),
                                 "derived", config.tol("volume", 0.01)))
    return rows, {"report": mio.besicovitch_text(rep)}


def _op_besicovitch_sweep(config, field, N):
    eid = config.experiment_id
    seeds = range(1, int(config.operation_params.get("count", 20)) + 1)
    rel_tol = config.tol("slack", 0.01)
    worst = math.inf
    npass = 0
    for seed in seeds:
        f = F.random_spd_metric(field.grid, seed,
                                (float(config.operation_params.get("eig_lo", 0.25)),
                                 float(config.operation_params.get("eig_hi", 4.0))))
        rep = B.verify_besicovitch(f, rel_tol=rel_tol)
        worst = min(worst, rep.slack / rep.product)
        npass += rep.passed
    rows = [
        mio.make_row(eid, N, "sweep_all_pass", float(npass), float(len(list(seeds))),
                     "derived", 0.0),
        mio.make_row(eid, N, "worst_slack_over_product", worst, 0.0, "derived",
                     rel_tol, mode="ge"),
    ]
    return rows, {}


def _op_hexagon_faces(config, field, N):
    eid = config.experiment_id
    rows = []
    for k in range(3):
        d = geo.face_distance(field, f"S{k}", f"S{k + 3}")
        rows.append(mio.make_row(eid, N, f"pair_distance_S{k}_S{k + 3}", d, 1.0,
                                 "derived", 0.0, mode="ge"))
    area = M.volume(field)
    rows.append(mio.make_row(eid, N, "area", area, 0.2, "derived", 0.0, mode="le"))
    return rows, {}


def _op_cylinder(config, field, N):
    rep = B.cylinder_check(field, tol=config.tol("cylinder", 0.01))
    eid = config.experiment_id
    rows = [
        mio.make_row(eid, N, "hypothesis_ok", float(rep.hypothesis_ok), 1.0, "derived", 0.0),
        mio.make_row(eid, N, "area", rep.area,
                     float(config.operation_params.get("area_reference", 1.0)),
                     "paper", config.tol("volume", 0.01)),
        mio.make_row(eid, N, "coarea_total", rep.coarea_total, 1.0, "paper",
                     config.tol("coarea", 0.01), mode="ge"),
        mio.make_row(eid, N, "min_interior_level", rep.min_interior_level, 1.0,
                     "paper", config.tol("coarea", 0.01), mode="ge"),
    ]
    return rows, {}


def _op_coarea(config, field, N):
    src = face_vertices(field.grid, config.operation_params.get("face", "A"))
    f = geo.distance_field(field, src).dist
    prof = M.coarea_profile(field, f, int(config.operation_params.get("t_count", 256)))
    eid = config.experiment_id
    rows = [
        mio.make_row(eid, N, "coarea_total", prof.total, prof.volume, "derived",
                     config.tol("coarea", 0.01)),
        mio.make_row(eid, N, "coarea_defect_nonneg", prof.defect, 0.0, "derived",
                     config.tol("coarea_defect", 0.02), mode="ge"),
    ]
    return rows, {"profile": mio.profile_text(prof.t_grid, prof.a)}


def _op_pu(config, field, N):
    w = geo.systole(field)
    vol = M.volume(field)
    ratio = w.length / math.sqrt(vol)
    eid = config.experiment_id
    rows = [
        mio.make_row(eid, N, "systole", w.length, math.pi, "derived", 0.02),
        mio.make_row(eid, N, "volume", vol, 2 * math.pi, "derived", 0.01),
        mio.make_row(eid, N, "systolic_ratio", ratio, PU, "paper", 0.02),
    ]
    return rows, {}


def _op_involution(config, field, N):
    g = field.grid
    anti = g.antipode_map
    half = np.where(g.coords[:, 1] <= 0.5 + 1e-12)[0]
    D = geo.distance_matrix(field, half)
    sep = float(D[np.arange(len(half)), anti[half]].min())
    area = M.volume(field)
    eid = config.experiment_id
    rows = [
        mio.make_row(eid, N, "min_antipodal_distance", sep, 1.0, "derived", 0.02),
        mio.make_row(eid, N, "area_lower_half", area, 0.5, "paper", 0.0, mode="ge"),
        mio.make_row(eid, N, "area_vs_conjectured_4_over_pi", area, 4 / math.pi,
                     "paper", 0.02, mode="info"),
    ]
    return rows, {}


def _op_gadograph(config, field, N):
    center = np.asarray(config.operation_params.get("center", (0.5, 0.5)))
    rad = float(config.operation_params.get("radius", 0.3))
    inside = np.linalg.norm(field.grid.coords - center, axis=1) < rad
    vol_g = M.region_volume(field, inside)
    vol_e = M.region_volume(F.flat_metric(field.grid), inside)
    eid = config.experiment_id
    boundary = np.where(inside & (np.linalg.norm(field.grid.coords - center, axis=1)
                                  > rad - 2.5 * max(field.grid.spacing)))[0]
    probes = boundary[:: max(1, len(boundary) // 8)][:8]
    hyp_ok = True
    for p in probes:
        d = geo.distance_field(field, [int(p)]).dist
        eu = np.linalg.norm(field.grid.coords[boundary] - field.grid.coords[p], axis=1)
        hyp_ok &= bool((d[boundary] >= eu - 1e-9).all())
    rows = [
        mio.make_row(eid, N, "boundary_hypothesis", float(hyp_ok), 1.0, "derived", 0.0),
        mio.make_row(eid, N, "region_volume_vs_euclidean", vol_g, vol_e, "paper",
                     0.0, mode="ge"),
    ]
    return rows, {}


def _op_loewner_bumps(config, field, N):
    eid = config.experiment_id
    count = int(config.operation_params.get("count", 20))
    bound = 2.0 / math.sqrt(3.0)
    tol = config.tol("loewner", 0.02)
    worst = 0.0
    rows = []
    for k in range(count):
        base = "hexagonal" if k % 2 else "flat"
        cfg = ExperimentConfig(eid, config.domain, "conformal_bump", "noop", [N],
                               seed=int(config.seed) + k,
                               metric_params={"base": base, "amplitude": 0.25})
        f = build_metric(cfg, field.grid)
        w = geo.systole(f)
        ratio = w.length ** 2 / M.volume(f)
        worst = max(worst, ratio)
    rows.append(mio.make_row(eid, N, "max_sys2_over_vol", worst, bound, "paper",
                             tol, mode="le"))
    hexratio = geo.systole(field).length ** 2 / M.volume(field)
    rows.append(mio.make_row(eid, N, "hexagonal_equality_case", hexratio, bound,
                             "paper", tol))
    return rows, {}


def _op_width_square(config, field, N):
    eid = config.experiment_id
    R_ok = float(config.operation_params.get("r_valid", 0.55))
    R_bad = float(config.operation_params.get("r_invalid", 0.2))
    cert = W.width_upper_bound(field, R_ok)
    ok, _ = W.validate_certificate(field, cert)
    bad = W.width_upper_bound(field, R_bad, budget=int(config.operation_params.get("budget", 24)))
    rows = [
        mio.make_row(eid, N, f"certificate_valid_at_{R_ok}", float(cert.valid and ok),
                     1.0, "derived", 0.0),
        mio.make_row(eid, N, "certificate_multiplicity", float(cert.multiplicity),
                     2.0, "derived", 0.0, mode="le"),
        mio.make_row(eid, N, f"honest_failure_at_{R_bad}", float(not bad.valid), 1.0,
                     "derived", 0.0),
    ]
    figures = {"certificate": cert}
    if cert.curves:
        figures["curves"] = [(c.points, "#000000") for c in cert.curves]
    return rows, figures


def _op_width_volume(config, field, N):
    eid = config.experiment_id
    rep = W.check_width_volume(field)
    rows = [
        mio.make_row(eid, N, "width_volume_certificate", float(rep.certificate.valid
                                                               or rep.slack_certificate.valid),
                     1.0, "paper", 0.0),
        mio.make_row(eid, N, "R_star", rep.R_star, 2 * math.sqrt(rep.vol), "paper", 1e-12),
    ]
    force_R = config.operation_params.get("force_R")
    if force_R is not None:
        cut = W.separating_cut(field, float(force_R))
        prof_r1 = cut.r1
        volpro = M.volume_profile(field, [prof_r1], center_sample=64)
        vp = volpro.volpro[0]
        for c in cut.curves:
            vp = max(vp, M.ball_volume(field, c.center, prof_r1))
        bound = vp / (cut.r1 - cut.r0)
        worst = max((c.length for c in cut.curves), default=0.0)
        rows.append(mio.make_row(eid, N, "forced_cut_valid", float(cut.valid), 1.0,
                                 "derived", 0.0))
        rows.append(mio.make_row(eid, N, "max_cut_length_vs_pigeonhole", worst,
                                 bound, "paper", 0.05, mode="le"))
    return rows, {}


def _op_sys_width(config, field, N):
    eid = config.experiment_id
    certs = []
    if field.grid.topology.kind == "torus2":
        certs.append(W.check_width_volume(field).certificate)
    rep = W.check_sys_width(field, certs)
    rows = [
        mio.make_row(eid, N, "sys_le_4n_volroot", rep.sys, rep.bound_4n, "paper",
                     0.0, mode="le"),
    ]
    for (Rc, ok6, ok4) in rep.cert_rows:
        rows.append(mio.make_row(eid, N, "sys_le_6R_cert", rep.sys, 6.0 * Rc,
                                 "paper", 0.0, mode="le"))
        rows.append(mio.make_row(eid, N, "sys_vs_4R_cert", rep.sys, 4.0 * Rc,
                                 "paper", 0.0, mode="info"))
    return rows, {}


_OPERATIONS = {
    "volume": _op_volume,
    "systolic_ratio": _op_systolic_ratio,
    "besicovitch": _op_besicovitch,
    "besicovitch_sweep": _op_besicovitch_sweep,
    "hexagon_faces": _op_hexagon_faces,
    "cylinder": _op_cylinder,
    "coarea": _op_coarea,
    "pu": _op_pu,
    "involution": _op_involution,
    "gadograph": _op_gadograph,
    "loewner_bumps": _op_loewner_bumps,
    "width_square": _op_width_square,
    "width_volume": _op_width_volume,
    "sys_width": _op_sys_width,
}


# ---------------------------------------------------------------------------
# runner


def run_config(config: ExperimentConfig, out_dir=None, resolution=None, seed=None,
               figures=False, threads=1):
    """Execute an experiment at each resolution; returns all ReportRows.

    Deterministic for fixed config and seed; `threads` is accepted for
    interface compatibility (execution is sequential either way).
    """
    del threads
    if config.operation not in _OPERATIONS:
        raise GalleryError(f"unknown operation {config.operation!r}")
    if seed is not None:
        config = ExperimentConfig(
            config.experiment_id, config.domain, config.metric, config.operation,
            config.resolutions, config.stencil_order, dict(config.metric_params),
            dict(config.operation_params), int(seed), dict(config.tolerance_overrides),
        )
    resolutions = [int(resolution)] if resolution else config.resolutions
    top = topology_from_name(config.domain)
    all_rows = []
    artifacts = {}
    for N in resolutions:
        grid = build_grid(top, N, config.stencil_order)
        field = build_metric(config, grid)
        rows, figs = _OPERATIONS[config.operation](config, field, N)
        all_rows.extend(rows)
        if out_dir is not None:
            _write_artifacts(config, field, N, figs, out_dir, figures)
        artifacts[N] = figs
    if out_dir is not None:
        import os

        path = os.path.join(str(out_dir), f"{config.experiment_id}.csv")
        with open(path, "w", newline="\n") as fh:
            fh.write(mio.report_csv(all_rows))
    return all_rows


def _write_artifacts(config, field, N, figs, out_dir, figures):
    import os

    base = os.path.join(str(out_dir), f"{config.experiment_id}-N{N}")
    if "report" in figs:
        with open(base + "-besicovitch.txt", "w", newline="\n") as fh:
            fh.write(figs["report"])
    if "profile" in figs:
        with open(base + "-profile.txt", "w", newline="\n") as fh:
            fh.write(figs["profile"])
    if "witness" in figs:
        with open(base + "-witness.txt", "w", newline="\n") as fh:
            fh.write(mio.witness_text(figs["witness"], field.grid))
    if "certificate" in figs:
        mio.write_field(field, base + "-field.txt")
        with open(base + "-certificate.txt", "w", newline="\n") as fh:
            fh.write(mio.certificate_text(figs["certificate"], field.grid,
                                          os.path.basename(base + "-field.txt")))
    if figures and field.grid.n == 2 and field.grid.topology.kind != "rp2":
        try:
            src = [0]
            vals = geo.distance_field(field, src, quotient=False).dist
            overlays = figs.get("curves", []) + figs.get("loops", [])
            svg = mio.svg_heatmap(field.grid, vals, curves=overlays)
            with open(base + ".svg", "w", newline="\n") as fh:
                fh.write(svg)
        except Exception:
            pass


def refine(config: ExperimentConfig, quantity: str, out_dir=None):
    """Richardson-style empirical convergence order against the reference value.

    Returns rows of (resolution, computed, error, order); order is nan where
    the error sequence is non-monotone or vanishes.
    """
    if len(config.resolutions) < 3:
        raise GalleryError("refinement needs at least 3 resolutions")
    rows = run_config(config, out_dir=None)
    table = []
    for N in config.resolutions:
        match = [r for r in rows if r.resolution == N and r.quantity == quantity]
        if not match:
            raise GalleryError(f"quantity {quantity!r} not produced at N = {N}")
        r = match[0]
        err = abs(r.computed - r.reference)
        table.append([N, r.computed, err, float("nan")])
    for k in range(1, len(table)):
        e0, e1 = table[k - 1][2], table[k][2]
        if e0 > e1 > 0:
            table[k][3] = math.log(e0 / e1) / math.log(table[k][0] / table[k - 1][0])
    return table


# ---------------------------------------------------------------------------
# the canonical gallery


def gallery() -> list:
    """Deterministic list of named canonical experiments."""
    items = [
        ExperimentConfig("besicovitch-flat", "square", "flat", "besicovitch",
                         [32, 64], operation_params={"d_reference": (1.0, 1.0),
                                                     "vol_reference": 1.0}),
        ExperimentConfig("besicovitch-anisotropic", "square", "constant", "besicovitch",
                         [48], metric_params={"g": ((4.0, 0.0), (0.0, 1.0))},
                         operation_params={"d_reference": (2.0, 1.0), "vol_reference": 2.0}),
        ExperimentConfig("besicovitch-random-sweep", "square", "flat", "besicovitch_sweep",
                         [64], seed=1, operation_params={"count": 20}),
        ExperimentConfig("hexagon-thin", f"hexagon:{TRIPOD_MASK}", "scaled_flat",
                         "hexagon_faces", [192],
                         metric_params={"factor": TRIPOD_SCALE2}),
        ExperimentConfig("cylinder-coarea", "cylinder", "flat", "cylinder", [96],
                         operation_params={"area_reference": 1.0}),
        ExperimentConfig("coarea-flat-square", "square", "flat", "coarea", [64]),
        ExperimentConfig("loewner-hexagonal", "torus2", "hexagonal", "systolic_ratio",
                         [32, 64, 128],
                         operation_params={"reference": LOEWNER, "sys_reference": 1.0,
                                           "provenance": "paper"}),
        ExperimentConfig("loewner-strictness", "torus2", "hexagonal", "loewner_bumps",
                         [48], seed=100, operation_params={"count": 20}),
        ExperimentConfig("pu-rp2", "rp2", "round_sphere", "pu", [64]),
        ExperimentConfig("involution-sphere", "sphere2", "round_sphere", "involution",
                         [48], metric_params={"radius": 1.0 / math.pi}),
        ExperimentConfig("gadograph-disk", "square", "piecewise_disk", "gadograph", [64]),
        ExperimentConfig("width-square", "square", "flat", "width_square", [65]),
        ExperimentConfig("width-volume-tori-flat", "torus2", "flat", "width_volume",
                         [48], operation_params={"force_R": 0.5}),
        ExperimentConfig("width-volume-tori-hexagonal", "torus2", "hexagonal",
                         "width_volume", [48], operation_params={"force_R": 0.5}),
        ExperimentConfig("sys-width-flat-torus", "torus2", "flat", "sys_width", [48]),
        ExperimentConfig("sys-width-rp2", "rp2", "round_sphere", "sys_width", [48]),
        ExperimentConfig("sphere-volume", "sphere2", "round_sphere", "volume",
                         [24, 48, 96],
                         operation_params={"reference": 4 * math.pi, "provenance": "derived"}),
        ExperimentConfig("flat-torus-systole", "torus2", "flat", "systolic_ratio",
                         [16, 32, 64],
                         operation_params={"reference": 1.0, "sys_reference": 1.0,
                                           "provenance": "derived"}),
    ]
    return items


def gallery_item(name: str) -> ExperimentConfig:
    for item in gallery():
        if item.experiment_id == name:
            return item
    raise GalleryError(f"unknown gallery item {name!r}")


def config_from_sections(sections: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed INI sections."""
    dom = sections.get("domain", {})
    met = sections.get("metric", {})
    exp = sections.get("experiment", {})
    if "kind" not in dom or "operation" not in exp:
        raise GalleryError("config needs [domain] kind and [experiment] operation")
    metric_params = {k: _parse_value(v) for k, v in met.items() if k != "builder"}
    op_params = {k: _parse_value(v) for k, v in exp.items()
                 if k not in ("id", "operation", "resolutions", "seed", "tolerances")}
    tol = {}
    for part in exp.get("tolerances", "").split(","):
        if "=" in part:
            k, v = part.split("=")
            tol[k.strip()] = float(v)
    return ExperimentConfig(
        experiment_id=exp.get("id", "experiment"),
        domain=dom["kind"] if not dom.get("mask") else f"{dom['kind']}:{dom['mask']}",
        metric=met.get("builder", "flat"),
        operation=exp["operation"],
        resolutions=[int(x) for x in str(exp.get("resolutions", "32")).split(",")],
        stencil_order=int(dom.get("stencil_order", 3)),
        metric_params=metric_params,
        operation_params=op_params,
        seed=int(exp["seed"]) if "seed" in exp else None,
        tolerance_overrides=tol,
    )


def config_sections(config: ExperimentConfig) -> dict:
    kind, _, mask = config.domain.partition(":")
    sections = {
        "domain": {"kind": kind, "mask": mask, "stencil_order": config.stencil_order},
        "metric": {"builder": config.metric,
                   **{k: _dump_value(v) for k, v in config.metric_params.items()}},
        "experiment": {
            "id": config.experiment_id,
            "operation": config.operation,
            "resolutions": ",".join(str(n) for n in config.resolutions),
            **{k: _dump_value(v) for k, v in config.operation_params.items()},
        },
    }
    if config.seed is not None:
        sections["experiment"]["seed"] = str(config.seed)
    if config.tolerance_overrides:
        sections["experiment"]["tolerances"] = ",".join(
            f"{k}={v}" for k, v in config.tolerance_overrides.items())
    return sections


def _parse_value(text):
    text = str(text).strip()
    if ";" in text or ("," in text):
        rows = [r for r in text.split(";") if r.strip()]
        vals = [[float(x) for x in r.split(",") if x.strip()] for r in rows]
        return vals if len(vals) > 1 else vals[0]
    try:
        return float(text)
    except ValueError:
        return text


def _dump_value(v):
    if isinstance(v, (list, tuple)) and v and isinstance(v[0], (list, tuple)):
        return ";".join(",".join(mio.fmt(x) for x in row) for row in v)
    if isinstance(v, (list, tuple)):
        return ",".join(mio.fmt(x) for x in v)
    if isinstance(v, float):
        return mio.fmt(v)
    return str(v)
