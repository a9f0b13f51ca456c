import math

import numpy as np
import pytest

from metriclab import fields as F
from metriclab import geodesy as geo
from metriclab import grid as G
from metriclab import covers as C

HEX = np.array([[1.0, 0.5], [0.5, 1.0]])


def test_distance_to_face_is_coordinate_exact():
    g = G.build_grid(G.square(), 64, 3)
    f = F.flat_metric(g)
    d = geo.distance_field(f, G.face_vertices(g, "A"))
    assert np.allclose(d.dist, g.coords[:, 0], atol=1e-12)
    assert (d.dist[G.face_vertices(g, "A")] == 0).all()


def test_edge_relaxation_invariant():
    g = G.build_grid(G.torus2(), 24, 3)
    f = F.random_spd_metric(g, 5, (0.5, 2.0))
    d = geo.distance_field(f, [0])
    e, w = g.edges, f.edge_lengths()
    gap = d.dist[e[:, 1]] - d.dist[e[:, 0]]
    assert (np.abs(gap) <= w + 1e-12).all()


def test_corner_distance_within_stencil_distortion():
    g = G.build_grid(G.square(), 64, 3)
    f = F.flat_metric(g)
    d = geo.distance_field(f, [g.vertex_at((0, 0))])
    ratio = d.dist[g.vertex_at((63, 63))] / math.sqrt(2)
    assert 1.0 - 1e-12 <= ratio <= 1.028


def test_stencil_distortion_on_random_pairs():
    g = G.build_grid(G.square(), 48, 3)
    f = F.flat_metric(g)
    rng = np.random.default_rng(0)
    sources = rng.integers(0, g.num_vertices, size=100)
    D = geo.distance_matrix(f, sources)
    targets = rng.integers(0, g.num_vertices, size=100)
    graph = D[np.arange(100), targets]
    euclid = np.linalg.norm(g.coords[sources] - g.coords[targets], axis=1)
    keep = euclid > 0.05
    ratio = graph[keep] / euclid[keep]
    assert (ratio >= 1.0 - 1e-9).all()
    assert (ratio <= 1.028).all()


def test_sphere_pole_to_pole():
    g = G.build_grid(G.sphere2(), 64, 3)
    f = F.round_sphere_metric(g, 1.0)
    south = np.where(g.coords[:, 1] == 0.0)[0][0]
    north = np.where(g.coords[:, 1] == 1.0)[0][0]
    d = geo.distance_field(f, [south], quotient=False)
    assert d.dist[north] == pytest.approx(math.pi, rel=0.02)


def test_empty_sources_error():
    g = G.build_grid(G.square(), 8, 1)
    with pytest.raises(geo.GeodesyError):
        geo.distance_field(F.flat_metric(g), [])


def test_face_distance_values_and_symmetry():
    g = G.build_grid(G.square(), 32, 3)
    f = F.flat_metric(g)
    assert geo.face_distance(f, "A", "A'") == pytest.approx(1.0, abs=1e-12)
    f4 = F.constant_metric(g, [[4.0, 0.0], [0.0, 1.0]])
    assert geo.face_distance(f4, "A", "A'") == pytest.approx(2.0, abs=1e-12)
    assert abs(geo.face_distance(f4, "A", "A'") - geo.face_distance(f4, "A'", "A")) <= 1e-12
    with pytest.raises(G.GridError):
        geo.face_distance(f, "A", "B")


def test_shortest_loops_flat_and_hex():
    g = G.build_grid(G.torus2(), 64, 3)
    f = F.flat_metric(g)
    assert geo.shortest_loop_in_class(f, (1, 0)).length == pytest.approx(1.0, rel=0.01)
    assert geo.shortest_loop_in_class(f, (2, 0)).length == pytest.approx(2.0, rel=0.01)
    fh = F.constant_metric(g, HEX)
    v = np.array([1.0, -1.0])
    oracle = math.sqrt(v @ HEX @ v)
    assert geo.shortest_loop_in_class(fh, (1, -1)).length == pytest.approx(oracle, rel=1e-9)
    with pytest.raises(geo.GeodesyError):
        geo.shortest_loop_in_class(f, (0, 0))


def test_loop_witness_closes_and_length_matches():
    g = G.build_grid(G.torus2(), 32, 3)
    f = F.random_spd_metric(g, 11, (0.5, 2.0))
    w = geo.shortest_loop_in_class(f, (1, 0))
    assert np.allclose(w.points[-1] - w.points[0], [1.0, 0.0], atol=1e-12)
    assert w.check_length(f)


def test_systole_flat_hex_rp2():
    g = G.build_grid(G.torus2(), 64, 3)
    assert geo.systole(F.flat_metric(g)).length == pytest.approx(1.0, rel=0.01)
    wh = geo.systole(F.constant_metric(g, HEX))
    assert wh.length == pytest.approx(1.0, rel=1e-9)
    grp = G.build_grid(G.rp2(), 32, 3)
    wr = geo.systole(F.round_sphere_metric(grp, 1.0))
    assert wr.length == pytest.approx(math.pi, rel=0.02)
    assert wr.cls == "antipodal"
    gs = G.build_grid(G.square(), 8, 1)
    with pytest.raises(geo.GeodesyError):
        geo.systole(F.flat_metric(gs))


def test_cylinder_systole_and_iterate_monotonicity():
    g = G.build_grid(G.cylinder(), 32, 3)
    f = F.flat_metric(g)
    w1 = geo.systole(f)
    assert w1.length == pytest.approx(1.0, rel=0.01)
    w2 = geo.shortest_loop_in_class(f, 2)
    assert w2.length >= w1.length - 1e-12
    f2 = F.constant_metric(g, [[4.0, 0.0], [0.0, 1.0]])
    assert geo.systole(f2).length == pytest.approx(2.0, rel=0.01)


def test_systole_scaling_covariance():
    g = G.build_grid(G.torus2(), 24, 3)
    f = F.random_spd_metric(g, 4, (0.5, 2.0))
    base = geo.systole(f)
    scaled = geo.systole(f.scaled(2.25))
    assert scaled.length == pytest.approx(1.5 * base.length, rel=1e-9)
    assert scaled.cls == base.cls


def test_radius_interval_square_circle():
    gi = G.build_grid(G.interval(), 33, 1)
    ri = geo.radius(F.flat_metric(gi))
    assert ri.value == pytest.approx(0.5, abs=1e-12)
    assert gi.coords[ri.center, 0] == pytest.approx(0.5)
    gs = G.build_grid(G.square(), 33, 3)
    rs = geo.radius(F.flat_metric(gs))
    assert math.sqrt(2) / 2 - 1e-12 <= rs.value <= math.sqrt(2) / 2 * 1.028
    circle = C.circle_graph(1.0, 64)
    assert circle.vertex_radius() == pytest.approx(0.5, abs=1e-12)


def test_triangle_inequality_random_triples():
    g = G.build_grid(G.torus2(), 24, 3)
    f = F.random_spd_metric(g, 9, (0.25, 4.0))
    rng = np.random.default_rng(1)
    sources = rng.integers(0, g.num_vertices, size=50)
    D = geo.distance_matrix(f, sources)
    p = rng.integers(0, 50, size=10000)
    q = rng.integers(0, 50, size=10000)
    r = rng.integers(0, g.num_vertices, size=10000)
    lhs = D[p, r]
    rhs = D[p, sources[q]] + D[q, r]
    assert (lhs <= rhs + 1e-9).all()


def test_source_monotonicity():
    g = G.build_grid(G.square(), 24, 3)
    f = F.random_spd_metric(g, 2, (0.5, 2.0))
    small = geo.distance_field(f, [0]).dist
    large = geo.distance_field(f, [0, g.num_vertices // 2]).dist
    assert (large <= small + 1e-12).all()


def test_rp2_equivariance():
    g = G.build_grid(G.rp2(), 24, 3)
    f = F.round_sphere_metric(g, 1.0)
    anti = g.antipode_map
    for x in (2, 17, 101):
        dx = geo.distance_field(f, [x], quotient=False).dist
        dax = geo.distance_field(f, [int(anti[x])], quotient=False).dist
        assert np.allclose(dx[anti], dax, atol=1e-9)


def test_path_extraction_matches_distance():
    g = G.build_grid(G.square(), 24, 3)
    f = F.random_spd_metric(g, 8, (0.5, 2.0))
    d = geo.distance_field(f, [0])
    target = g.num_vertices - 1
    pts = d.path_to(target)
    assert F.polyline_length(f, pts) == pytest.approx(d.dist[target], abs=1e-10)


def test_radius_disconnected_is_flagged():
    # a needle-thin tripod mask leaves isolated leg fragments
    g = G.build_grid(G.hexagon("tripod:0.46:0.004"), 33, 3)
    f = F.MetricField(g, np.broadcast_to(np.eye(2), (g.num_vertices, 2, 2)).copy(),
                      validate=False)
    r = geo.radius(f)
    assert not r.connected
    assert len(r.per_component) >= 2
    assert r.value == pytest.approx(max(v for v, _ in r.per_component))
