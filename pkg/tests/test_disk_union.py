"""Disk-union arrangement against hand-derived configurations and an
independent polygonal (shapely) oracle."""

import numpy as np
import pytest
from shapely.geometry import MultiPolygon, Point
from shapely.ops import unary_union

from fractalcurv.disk_union import disk_union_curvatures, sweep_curvatures
from fractalcurv.errors import AccuracyGuardError, DegenerateArrangementError

TWO_PI = 2.0 * np.pi


def shapely_union(centers, r, quad_segs=256):
    disks = [Point(*c).buffer(r, quad_segs=quad_segs) for c in centers]
    return unary_union(disks)


def shapely_topology(geom):
    polys = list(geom.geoms) if isinstance(geom, MultiPolygon) else [geom]
    components = len(polys)
    holes = sum(len(p.interiors) for p in polys)
    return components, holes


def test_single_disk():
    out = disk_union_curvatures([[0.3, -1.2]], 0.7)
    assert out.c0 == 1 and out.components == 1 and out.holes == 0
    assert abs(out.c0var - 1.0) <= 1e-12
    assert abs(out.c1 - np.pi * 0.7) <= 1e-12
    assert abs(out.c2 - np.pi * 0.49) <= 1e-12


def test_two_disjoint_disks():
    out = disk_union_curvatures([[0.0, 0.0], [5.0, 0.0]], 1.0)
    assert out.c0 == 2 and out.components == 2 and out.holes == 0
    assert abs(out.c0var - 2.0) <= 1e-12
    assert abs(out.c1 - 2 * np.pi) <= 1e-12
    assert abs(out.c2 - 2 * np.pi) <= 1e-12


def test_two_crossing_disks_frozen():
    # unit disks at distance 1: beta = pi/3, each boundary arc 4pi/3,
    # two corners of turning -pi/3
    out = disk_union_curvatures([[0.0, 0.0], [1.0, 0.0]], 1.0)
    assert out.c0 == 1 and out.holes == 0
    assert abs(out.c0var - 5.0 / 3.0) <= 1e-12
    assert abs(out.c1 - 4.0 * np.pi / 3.0) <= 1e-12
    # area = 2 pi r^2 - lens; lens = 2 r^2 arccos(d/2r) - (d/2) sqrt(4r^2-d^2)
    lens = 2 * np.arccos(0.5) - 0.5 * np.sqrt(3.0)
    assert abs(out.c2 - (2 * np.pi - lens)) <= 1e-12
    assert out.arc_count == 2
    np.testing.assert_allclose(np.abs(out.loop_closures), TWO_PI, atol=1e-12)


def test_three_disk_ring_with_hole_frozen():
    # equilateral triangle side 1, r = 0.53 < circumradius 0.577: a hole.
    # every crossing turns -(pi - 2 beta), beta = arccos(1/(2r)):
    # c0var = 6 - 12 beta / pi, boundary angle total = 6 pi - 12 beta
    r = 0.53
    beta = np.arccos(1.0 / (2.0 * r))
    centers = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]]
    out = disk_union_curvatures(centers, r)
    assert out.c0 == 0 and out.components == 1 and out.holes == 1
    assert abs(out.c0var - (6 - 12 * beta / np.pi)) <= 1e-12
    assert abs(out.c1 - 0.5 * r * (6 * np.pi - 12 * beta)) <= 1e-12
    # inclusion-exclusion: no triple overlap, three equal lenses
    lens = 2 * r * r * np.arccos(1 / (2 * r)) - 0.5 * np.sqrt(4 * r * r - 1)
    assert abs(out.c2 - (3 * np.pi * r * r - 3 * lens)) <= 1e-12
    closures = np.sort(out.loop_closures)
    np.testing.assert_allclose(closures, [-TWO_PI, TWO_PI], atol=1e-9)


def test_chain_of_three_frozen():
    # collinear centers 0, 0.8, 1.6 with r = 0.5: c0var = 5 - 8 beta / pi
    r, d = 0.5, 0.8
    beta = np.arccos(d / (2 * r))
    out = disk_union_curvatures([[0.0, 0.0], [d, 0.0], [2 * d, 0.0]], r)
    assert out.c0 == 1 and out.holes == 0
    assert abs(out.c0var - (5 - 8 * beta / np.pi)) <= 1e-12
    assert abs(out.c1 - 0.5 * r * (6 * np.pi - 8 * beta)) <= 1e-12


def test_disk_nested_in_hole():
    # 12 disks of radius 0.4 on the unit circle (side 0.518 < 0.8: a ring
    # with a hole) plus one disk at the origin (distance 1 > 0.8: isolated,
    # sitting inside the hole): chi = (1 - 1) + 1 = 1
    angles = np.linspace(0.0, TWO_PI, 12, endpoint=False)
    ring = np.column_stack([np.cos(angles), np.sin(angles)])
    centers = np.vstack([ring, [[0.0, 0.0]]])
    out = disk_union_curvatures(centers, 0.4)
    assert out.components == 2
    assert out.holes == 1
    assert out.c0 == 1


def test_matches_shapely_on_random_unions():
    rng = np.random.default_rng(1234)
    for trial in range(50):
        n = int(rng.integers(2, 13))
        centers = rng.uniform(0, 4, size=(n, 2))
        r = float(rng.uniform(0.2, 1.2))
        out = disk_union_curvatures(centers, r)
        geom = shapely_union(centers, r)
        components, holes = shapely_topology(geom)
        assert out.components == components, f"trial {trial}"
        assert out.holes == holes, f"trial {trial}"
        assert out.c0 == components - holes
        assert abs(out.c2 - geom.area) <= 2e-3 * geom.area
        assert abs(out.c1 - 0.5 * geom.length) <= 2e-3 * geom.length
        # every loop closes to +-2pi
        np.testing.assert_allclose(np.abs(out.loop_closures), TWO_PI,
                                   atol=1e-9)
        assert out.c0var >= abs(out.c0) - 1e-12
        assert out.c0var >= out.components - 1e-12


def test_euclidean_invariance():
    rng = np.random.default_rng(55)
    centers = rng.uniform(0, 2, size=(8, 2))
    r = 0.5
    base = disk_union_curvatures(centers, r)
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    moved = centers @ rot.T + np.array([3.0, -4.0])
    out = disk_union_curvatures(moved, r)
    assert out.c0 == base.c0
    assert abs(out.c0var - base.c0var) <= 1e-9
    assert abs(out.c1 - base.c1) <= 1e-9
    assert abs(out.c2 - base.c2) <= 1e-9


def test_scaling_covariance():
    rng = np.random.default_rng(56)
    centers = rng.uniform(0, 2, size=(8, 2))
    r, lam = 0.5, 3.7
    base = disk_union_curvatures(centers, r)
    out = disk_union_curvatures(lam * centers, lam * r)
    assert abs(out.c0var - base.c0var) <= 1e-9
    assert abs(out.c1 - lam * base.c1) <= 1e-9 * lam
    assert abs(out.c2 - lam ** 2 * base.c2) <= 1e-9 * lam ** 2


def test_duplicate_centers_are_merged():
    out = disk_union_curvatures([[0.0, 0.0], [0.0, 0.0], [1e-14, 0.0]], 1.0)
    assert out.c0 == 1
    assert abs(out.c2 - np.pi) <= 1e-12


def test_tangent_pair_resolved_by_perturbation():
    # exactly tangent disks: retried with r(1 + 1e-9), which merges them
    out = disk_union_curvatures([[0.0, 0.0], [2.0, 0.0]], 1.0)
    assert out.c0 == 1
    assert out.components == 1


def test_near_coincident_pair_raises():
    with pytest.raises(DegenerateArrangementError):
        disk_union_curvatures([[0.0, 0.0], [5e-10, 0.0]], 1.0)


def test_sweep_guard_and_order():
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    rows = sweep_curvatures(pts, [0.4, 0.2, 0.6], resolution=0.01)
    assert [e for e, _ in rows] == [0.4, 0.2, 0.6]
    with pytest.raises(AccuracyGuardError):
        sweep_curvatures(pts, [0.05], resolution=0.01)


def test_sweep_threads_match_serial():
    rng = np.random.default_rng(77)
    pts = rng.uniform(0, 3, size=(40, 2))
    eps = [0.6, 0.45, 0.3, 0.21]
    serial = sweep_curvatures(pts, eps)
    threaded = sweep_curvatures(pts, eps, threads=4)
    for (e1, a), (e2, b) in zip(serial, threaded):
        assert e1 == e2
        assert a.c0 == b.c0
        assert a.c0var == b.c0var and a.c1 == b.c1 and a.c2 == b.c2


def test_collinear_grid_is_not_degenerate():
    # equally spaced collinear equal disks: a regular but valid input
    xs = np.arange(30) * 0.1
    pts = np.column_stack([xs, np.zeros_like(xs)])
    r = 0.35
    out = disk_union_curvatures(pts, r)
    assert out.c0 == 1 and out.holes == 0
    # scalloped capsule: boundary vertices come from adjacent pairs, each
    # junction turning -(pi - 2 beta) with beta = arccos(0.05 / r)
    beta = np.arccos(0.05 / r)
    expected_var = 1.0 + 58 * (np.pi - 2 * beta) / np.pi
    assert abs(out.c0var - expected_var) <= 1e-8
    capsule_half_len = 2.9 + np.pi * r
    assert capsule_half_len - 1e-12 <= out.c1 <= capsule_half_len + 0.02
    capsule_area = 2.9 * 2 * r + np.pi * r * r
    assert capsule_area - 0.02 <= out.c2 <= capsule_area + 1e-12
    np.testing.assert_allclose(np.abs(out.loop_closures), TWO_PI, atol=1e-9)
