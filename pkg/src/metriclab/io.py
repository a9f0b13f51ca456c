"""Plain-text serialization: fields, witnesses, profiles, certificates, reports.

Formats are deliberately simple and diffable:

* domain descriptors and certificates: flat key = value lines in [section] blocks,
* metric fields: one row per vertex (index, chart coordinates, upper-triangle
  tensor entries), 17 significant digits,
* witness loops and profiles: small tabular text files,
* experiment reports: comma-separated with a header row, LF endings,
* optional figures: self-contained SVG (heatmap cells plus polylines).
"""

from __future__ import annotations

import configparser
import io as _io
import math
from dataclasses import dataclass

import numpy as np

from .fields import MetricField
from .grid import Grid, GridError, build_grid, topology_from_name

FMT = "%.17g"


def fmt(x) -> str:
    return FMT % float(x)


# ---------------------------------------------------------------------------
# domain + field


def domain_text(grid: Grid) -> str:
    return "[domain]\n" + "\n".join(grid.descriptor_lines()) + "\n"


def grid_from_descriptor(lines) -> Grid:
    kv = {}
    for ln in lines:
        ln = ln.strip()
        if not ln or ln.startswith("[") or ln.startswith("#"):
            continue
        k, _, v = ln.partition("=")
        kv[k.strip()] = v.strip()
    kind = kv["kind"]
    if kv.get("mask"):
        kind = f"{kind}:{kv['mask']}"
    top = topology_from_name(kind)
    return build_grid(top, int(kv["resolution"]), int(kv.get("stencil_order", 3)))


def field_table(field: MetricField) -> str:
    g = field.grid
    n = g.n
    cols = ["index"] + [f"x{k}" for k in range(n)]
    for i in range(n):
        for j in range(i, n):
            cols.append(f"g{i}{j}")
    out = ["# " + " ".join(cols)]
    for v in range(g.num_vertices):
        row = [str(v)] + [fmt(c) for c in g.coords[v]]
        for i in range(n):
            for j in range(i, n):
                row.append(fmt(field.tensors[v, i, j]))
        out.append(" ".join(row))
    return "\n".join(out) + "\n"


def write_field(field: MetricField, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(domain_text(field.grid))
        fh.write("[tensors]\n")
        fh.write(field_table(field))


def read_field(path) -> MetricField:
    with open(path) as fh:
        lines = fh.read().splitlines()
    try:
        split = lines.index("[tensors]")
    except ValueError:
        raise GridError("field file is missing the [tensors] section")
    grid = grid_from_descriptor(lines[:split])
    n = grid.n
    ntri = n * (n + 1) // 2
    tensors = np.empty((grid.num_vertices, n, n))
    seen = 0
    for ln in lines[split + 1:]:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        v = int(parts[0])
        vals = [float(x) for x in parts[1 + n:1 + n + ntri]]
        k = 0
        for i in range(n):
            for j in range(i, n):
                tensors[v, i, j] = tensors[v, j, i] = vals[k]
                k += 1
        seen += 1
    if seen != grid.num_vertices:
        raise GridError(f"field file has {seen} rows, expected {grid.num_vertices}")
    return MetricField(grid, tensors, validate=False)


# ---------------------------------------------------------------------------
# witnesses and profiles


def witness_text(witness, grid: Grid) -> str:
    out = [f"# class = {witness.cls}",
           f"# length = {fmt(witness.length)}",
           "# " + " ".join([f"x{k}" for k in range(grid.n)]
                           + [f"wrap{k}" for k in range(grid.n)])]
    for p in witness.points:
        wraps = [int(math.floor(p[k])) if grid.topology.periodic[k] else 0
                 for k in range(grid.n)]
        coords = [p[k] - wraps[k] for k in range(grid.n)]
        out.append(" ".join([fmt(c) for c in coords] + [str(w) for w in wraps]))
    return "\n".join(out) + "\n"


def profile_text(xs, ys, labels=("t", "a")) -> str:
    out = [f"# {labels[0]} {labels[1]}"]
    for x, y in zip(xs, ys):
        out.append(f"{fmt(x)} {fmt(y)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# besicovitch report


def besicovitch_text(report) -> str:
    lines = ["[besicovitch]"]
    for i, di in enumerate(report.d):
        lines.append(f"d{i} = {fmt(di)}")
    for key in ("vol", "product", "slack", "jac_max", "row_norm_max", "flatness"):
        lines.append(f"{key} = {fmt(getattr(report, key))}")
    for key in ("jac_ok", "degree_ok", "degree_checked", "face_containment_ok", "passed"):
        lines.append(f"{key} = {str(getattr(report, key)).lower()}")
    lines.append(f"rel_tol = {fmt(report.rel_tol)}")
    edges, counts = report.jac_histogram(16)
    lines.append("")
    lines.append("[jac_histogram]")
    lines.append("# bin_lo bin_hi count")
    for k in range(len(counts)):
        lines.append(f"{fmt(edges[k])} {fmt(edges[k + 1])} {int(counts[k])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# vertex runs + certificates


def encode_runs(indices) -> str:
    idx = np.sort(np.asarray(indices, dtype=np.int64))
    if len(idx) == 0:
        return ""
    parts = []
    start = prev = int(idx[0])
    for v in idx[1:]:
        v = int(v)
        if v == prev + 1:
            prev = v
            continue
        parts.append(f"{start}-{prev}" if prev > start else str(start))
        start = prev = v
    parts.append(f"{start}-{prev}" if prev > start else str(start))
    return ",".join(parts)


def decode_runs(text: str) -> np.ndarray:
    out = []
    text = text.strip()
    if not text:
        return np.empty(0, dtype=np.int64)
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return np.asarray(out, dtype=np.int64)


def certificate_text(cert, grid: Grid, field_path: str = "") -> str:
    lines = [domain_text(grid).rstrip("\n"), ""]
    lines.append("[field]")
    lines.append(f"path = {field_path}")
    lines.append(f"hash = {cert.field_hash}")
    lines.append("")
    lines.append("[certificate]")
    lines.append(f"n_width = {cert.n_width}")
    lines.append(f"R = {fmt(cert.R)}")
    lines.append(f"r0 = {fmt(cert.r0)}")
    lines.append(f"r1 = {fmt(cert.r1)}")
    lines.append(f"multiplicity = {cert.multiplicity}")
    lines.append(f"valid = {str(cert.valid).lower()}")
    lines.append(f"reasons = {'; '.join(cert.reasons)}")
    lines.append(f"num_sets = {len(cert.cover.sets)}")
    for i, (s, c, r) in enumerate(zip(cert.cover.sets, cert.cover.centers,
                                      cert.cover.radii)):
        lines.append("")
        lines.append(f"[set {i}]")
        lines.append(f"center = {int(c)}")
        lines.append(f"radius = {fmt(r)}")
        lines.append(f"vertices = {encode_runs(s)}")
    return "\n".join(lines) + "\n"


def parse_certificate(text: str):
    """Returns (domain_lines, field_path, field_hash, certificate-like dict)."""
    from .covers import Cover
    from .width import WidthCertificate

    sections = {}
    current = None
    domain_lines = []
    for ln in text.splitlines():
        s = ln.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1]
            sections[current] = {}
            continue
        if current is None or not s or s.startswith("#"):
            continue
        k, _, v = s.partition("=")
        sections[current][k.strip()] = v.strip()
        if current == "domain":
            domain_lines.append(s)
    cert_kv = sections.get("certificate", {})
    nsets = int(cert_kv.get("num_sets", 0))
    sets, centers, radii = [], [], []
    for i in range(nsets):
        kv = sections[f"set {i}"]
        sets.append(decode_runs(kv["vertices"]))
        centers.append(int(kv["center"]))
        radii.append(float(kv["radius"]))
    cert = WidthCertificate(
        n_width=int(cert_kv["n_width"]), R=float(cert_kv["R"]),
        cover=Cover(sets, centers, radii),
        valid=cert_kv.get("valid", "false") == "true",
        reasons=[r for r in cert_kv.get("reasons", "").split("; ") if r],
        multiplicity=int(cert_kv["multiplicity"]),
        field_hash=sections.get("field", {}).get("hash", ""),
        r0=float(cert_kv.get("r0", "nan")), r1=float(cert_kv.get("r1", "nan")),
    )
    return domain_lines, sections.get("field", {}).get("path", ""), cert


# ---------------------------------------------------------------------------
# experiment reports


@dataclass
class ReportRow:
    experiment: str
    resolution: int
    quantity: str
    computed: float
    reference: float
    provenance: str
    rel_error: float
    verdict: str  # PASS | FAIL | INFO


REPORT_HEADER = "experiment,resolution,quantity,computed,reference,provenance,rel_error,verdict"


def report_csv(rows) -> str:
    out = [REPORT_HEADER]
    for r in rows:
        out.append(",".join([
            r.experiment, str(r.resolution), r.quantity, fmt(r.computed),
            fmt(r.reference), r.provenance, fmt(r.rel_error), r.verdict,
        ]))
    return "\n".join(out) + "\n"


def make_row(experiment, resolution, quantity, computed, reference, provenance,
             tolerance, mode="abs") -> ReportRow:
    scale = abs(reference) if reference != 0 else 1.0
    rel = (computed - reference) / scale
    if mode == "abs":
        ok = abs(rel) <= tolerance
    elif mode == "ge":
        ok = rel >= -tolerance
    elif mode == "le":
        ok = rel <= tolerance
    elif mode == "info":
        ok = None
    else:
        raise ValueError(f"unknown verdict mode {mode!r}")
    verdict = "INFO" if ok is None else ("PASS" if ok else "FAIL")
    return ReportRow(experiment, resolution, quantity, computed, reference,
                     provenance, rel, verdict)


# ---------------------------------------------------------------------------
# config files (flat INI, one nesting level)


def parse_config(path):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    return {sec: dict(cp.items(sec)) for sec in cp.sections()}


def config_text(sections: dict) -> str:
    buf = _io.StringIO()
    cp = configparser.ConfigParser()
    for sec, kv in sections.items():
        cp[sec] = {k: str(v) for k, v in kv.items()}
    cp.write(buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# figures (plain SVG)


def _color(v: float) -> str:
    v = min(max(v, 0.0), 1.0)
    r = int(255 * min(1.0, 0.2 + 1.2 * v))
    g = int(255 * min(1.0, 1.4 * v * (1.0 - 0.4 * v)))
    b = int(255 * max(0.0, 0.9 - 1.1 * v))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(grid: Grid, values, curves=(), loops=(), size: int = 480) -> str:
    """Vertex-value heatmap with optional polyline overlays (chart space)."""
    vals = np.asarray(values, dtype=float)
    finite = np.isfinite(vals)
    lo, hi = vals[finite].min(), vals[finite].max()
    span = hi - lo if hi > lo else 1.0
    h = min(grid.spacing)
    px = size * h
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    for v in range(grid.num_vertices):
        if not finite[v]:
            continue
        x, y = grid.coords[v][0], grid.coords[v][-1] if grid.n > 1 else 0.5
        c = _color((vals[v] - lo) / span)
        parts.append(f'<rect x="{size * x - px / 2:.1f}" y="{size * (1 - y) - px / 2:.1f}" '
                     f'width="{px:.1f}" height="{px:.1f}" fill="{c}"/>')
    for pts, color in list(curves) + list(loops):
        chain = " ".join(f"{size * p[0]:.1f},{size * (1 - p[-1]):.1f}" for p in pts)
        parts.append(f'<polyline points="{chain}" fill="none" stroke="{color}" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts)
