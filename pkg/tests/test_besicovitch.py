import math

import numpy as np
import pytest

from metriclab import besicovitch as B
from metriclab import fields as F
from metriclab import grid as G
from metriclab import measure as M


def test_flat_square_equality_case():
    g = G.build_grid(G.square(), 64, 3)
    f = F.flat_metric(g)
    rep = B.verify_besicovitch(f)
    assert rep.d[0] == pytest.approx(1.0, abs=1e-12)
    assert rep.d[1] == pytest.approx(1.0, abs=1e-12)
    assert rep.vol == pytest.approx(1.0, abs=1e-12)
    assert abs(rep.slack) <= 1e-12
    assert rep.jac_max == pytest.approx(1.0, abs=1e-9)
    assert rep.degree_ok and rep.degree_checked
    assert rep.passed
    assert rep.flatness <= 1e-24


def test_flat_map_is_identity_chart():
    g = G.build_grid(G.square(), 32, 3)
    fmap, d = B.face_distance_map(F.flat_metric(g))
    assert np.allclose(fmap, g.coords, atol=1e-12)
    assert d == pytest.approx((1.0, 1.0), abs=1e-12)


def test_stretched_map_and_flatness():
    g = G.build_grid(G.square(), 32, 3)
    f = F.constant_metric(g, [[4.0, 0.0], [0.0, 1.0]])
    fmap, d = B.face_distance_map(f)
    assert d == pytest.approx((2.0, 1.0), abs=1e-12)
    assert np.allclose(fmap, g.coords * np.array([2.0, 1.0]), atol=1e-12)
    rep = B.verify_besicovitch(f)
    assert rep.passed
    assert rep.flatness <= 1e-24


def test_face_containment_exact_and_lipschitz():
    g = G.build_grid(G.square(), 48, 3)
    f = F.random_spd_metric(g, 13, (0.25, 4.0))
    fmap, d = B.face_distance_map(f)
    assert B.check_face_containment(f, fmap, d)
    e, w = g.edges, f.edge_lengths()
    for i in range(2):
        df = np.abs(fmap[e[:, 0], i] - fmap[e[:, 1], i])
        assert (df <= w + 1e-12).all()


def test_hadamard_consistency():
    g = G.build_grid(G.square(), 48, 3)
    f = F.random_spd_metric(g, 14, (0.25, 4.0))
    fmap, _ = B.face_distance_map(f)
    jac_max, per_cell, row_max = B.jacobian_bound_check(f, fmap)
    assert per_cell.max() == pytest.approx(jac_max)
    assert row_max >= 1.0 - 1e-9  # distance rows saturate the unit bound


def test_degree_flat_one_and_zero_map():
    g = G.build_grid(G.square(), 32, 3)
    fmap, d = B.face_distance_map(F.flat_metric(g))
    assert B.boundary_degree(fmap, g, d) == 1
    assert B.boundary_degree(np.zeros((g.num_vertices, 2)), g, (1.0, 1.0)) == 0


def test_degree_random_fields_always_one():
    g = G.build_grid(G.square(), 32, 3)
    for seed in range(1, 21):
        f = F.random_spd_metric(g, seed, (0.25, 4.0))
        fmap, d = B.face_distance_map(f)
        assert B.boundary_degree(fmap, g, d) == 1


def test_jacobian_small_for_conformal_fields_and_shrinks():
    vals = []
    for N in (48, 96):
        g = G.build_grid(G.square(), N, 3)
        u = 0.3 * np.sin(2 * math.pi * g.coords[:, 0]) * np.cos(2 * math.pi * g.coords[:, 1])
        f = F.conformal_metric(g, u)
        fmap, _ = B.face_distance_map(f)
        jac_max, _, _ = B.jacobian_bound_check(f, fmap)
        vals.append(jac_max)
        assert jac_max <= 1.05
    assert vals[1] <= vals[0] + 0.01


def test_jacobian_anisotropic_envelope():
    # shadow-wedge inflation: persistent, bounded by the measured envelope
    g = G.build_grid(G.square(), 128, 3)
    f = F.random_spd_metric(g, 7, (0.25, 4.0))
    rep = B.verify_besicovitch(f)
    assert rep.jac_max <= 1.10
    assert rep.passed


def test_random_fields_pass():
    g = G.build_grid(G.square(), 48, 3)
    for seed in range(1, 11):
        rep = B.verify_besicovitch(F.random_spd_metric(g, seed, (0.25, 4.0)))
        assert rep.passed
        assert rep.slack >= -0.01 * rep.product


def test_pass_is_scale_invariant():
    g = G.build_grid(G.square(), 32, 3)
    f = F.random_spd_metric(g, 5, (0.5, 2.0))
    rep = B.verify_besicovitch(f)
    rep_scaled = B.verify_besicovitch(f.scaled(2.25))
    assert rep.passed == rep_scaled.passed
    assert rep_scaled.slack == pytest.approx(2.25 * rep.slack, rel=1e-9, abs=1e-12)


def test_equality_flatness_diagnostic():
    g = G.build_grid(G.square(), 32, 3)
    u = 0.4 * np.exp(-30 * ((g.coords - 0.5) ** 2).sum(axis=1))
    f = F.conformal_metric(g, u)
    rep = B.verify_besicovitch(f)
    assert rep.slack > 0
    assert rep.flatness > 0


def test_hexagon_is_not_cube_like():
    g = G.build_grid(G.hexagon(), 32, 3)
    f = F.MetricField(g, np.broadcast_to(np.eye(2), (g.num_vertices, 2, 2)).copy(),
                      validate=False)
    with pytest.raises(B.BesicovitchError):
        B.verify_besicovitch(f)


def test_cube3_flat():
    g = G.build_grid(G.cube(3), 8, 2)
    rep = B.verify_besicovitch(F.flat_metric(g))
    assert rep.d == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)
    assert rep.vol == pytest.approx(1.0, abs=1e-12)
    assert rep.degree_ok and rep.degree_checked
    assert rep.jac_max == pytest.approx(1.0, abs=1e-9)
    assert rep.passed


def test_cube4_flat_degree_skipped():
    g = G.build_grid(G.cube(4), 5, 1)
    rep = B.verify_besicovitch(F.flat_metric(g))
    assert not rep.degree_checked
    assert rep.degree_ok  # exact face containment stands in
    assert rep.vol == pytest.approx(1.0, abs=1e-12)
    assert rep.passed


def test_jac_histogram_shape():
    g = G.build_grid(G.square(), 24, 3)
    rep = B.verify_besicovitch(F.flat_metric(g))
    edges, counts = rep.jac_histogram(16)
    assert len(edges) == 17 and len(counts) == 16
    assert counts.sum() == len(rep.per_cell_jac)


def test_cylinder_check_cases():
    g = G.build_grid(G.cylinder(), 96, 3)
    flat = B.cylinder_check(F.flat_metric(g))
    assert flat.applicable and flat.hypothesis_ok
    assert flat.area == pytest.approx(1.0, abs=1e-12)
    assert flat.coarea_total >= 0.99
    assert flat.min_interior_level >= 0.99
    assert flat.passed

    wide = B.cylinder_check(F.constant_metric(g, [[4.0, 0.0], [0.0, 1.0]]))
    assert wide.applicable and wide.passed
    assert wide.area == pytest.approx(2.0, abs=1e-12)

    short = B.cylinder_check(F.constant_metric(g, [[1.0, 0.0], [0.0, 0.25]]))
    assert not short.applicable
    assert short.boundary_distance == pytest.approx(0.5, abs=1e-9)
