"""Similarity algebra, Moran dimension, hulls, attractor sampling, JSON I/O."""

import json

import numpy as np
import pytest

from fractalcurv.errors import SampleBudgetError, SchemaError
from fractalcurv.ifs import (
    IFS,
    Similarity,
    cylinder_hulls,
    cylinder_maps,
    diameter,
    embed_in_plane,
    hull_ball,
    hull_interval,
    ifs_from_dict,
    ifs_to_dict,
    load_ifs,
    moran_dimension,
    sample_attractor,
)

LOG = np.log


def cantor_ifs():
    return IFS((Similarity(1 / 3, (0.0,)), Similarity(1 / 3, (2 / 3,))))


def gasket_ifs():
    top = (0.5, np.sqrt(3) / 4)
    return IFS((
        Similarity(0.5, (0.0, 0.0)),
        Similarity(0.5, (0.5, 0.0)),
        Similarity(0.5, top),
    ))


def test_similarity_rotation_oracle():
    # frozen by hand: 0.5 * Rot(pi/2) @ (1, 0) + (1, 0) = (1, 0.5)
    s = Similarity(0.5, (1.0, 0.0), rotation=np.pi / 2)
    out = s.apply(np.array([1.0, 0.0]))
    assert np.allclose(out, [1.0, 0.5], atol=1e-15)


def test_similarity_reflection_oracle():
    # reflection flips y before rotating: diag(1,-1) then Rot(0)
    s = Similarity(0.5, (0.0, 0.0), rotation=0.0, reflection=True)
    out = s.apply(np.array([2.0, 4.0]))
    assert np.allclose(out, [1.0, -2.0], atol=1e-15)


def test_similarity_rejects_bad_ratio():
    with pytest.raises(ValueError):
        Similarity(1.0, (0.0,))
    with pytest.raises(ValueError):
        Similarity(0.0, (0.0, 0.0))
    with pytest.raises(ValueError):
        Similarity(0.5, (0.0,), rotation=0.1)  # no rotations on the line


def test_compose_matches_sequential_application():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = Similarity(rng.uniform(0.2, 0.9), tuple(rng.normal(size=2)),
                       rng.uniform(-np.pi, np.pi), bool(rng.integers(2)))
        b = Similarity(rng.uniform(0.2, 0.9), tuple(rng.normal(size=2)),
                       rng.uniform(-np.pi, np.pi), bool(rng.integers(2)))
        pts = rng.normal(size=(5, 2))
        direct = a.apply(b.apply(pts))
        composed = a.compose(b).apply(pts)
        assert np.allclose(direct, composed, atol=1e-12)
        assert np.isclose(a.compose(b).ratio, a.ratio * b.ratio, rtol=1e-15)


def test_compose_matches_sequential_application_1d():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = Similarity(rng.uniform(0.2, 0.9), tuple(rng.normal(size=1)),
                       reflection=bool(rng.integers(2)))
        b = Similarity(rng.uniform(0.2, 0.9), tuple(rng.normal(size=1)),
                       reflection=bool(rng.integers(2)))
        pts = rng.normal(size=(5, 1))
        assert np.allclose(a.apply(b.apply(pts)), a.compose(b).apply(pts),
                           atol=1e-12)


def test_fixed_point_is_fixed():
    rng = np.random.default_rng(9)
    for _ in range(100):
        s = Similarity(rng.uniform(0.2, 0.95), tuple(rng.normal(size=2)),
                       rng.uniform(-np.pi, np.pi), bool(rng.integers(2)))
        fp = s.fixed_point()
        assert np.allclose(s.apply(fp), fp, atol=1e-10)


def test_moran_dimension_closed_forms():
    # frozen closed forms: log m / log(1/r) for m equal ratios r
    cases = [
        ([1 / 3, 1 / 3], LOG(2) / LOG(3)),
        ([1 / 3] * 4, LOG(4) / LOG(3)),
        ([1 / 2] * 3, LOG(3) / LOG(2)),
        ([1 / 2] * 4, 2.0),
        ([1 / 2, 1 / 4, 1 / 4], 1.0),  # 1/2 + 1/4 + 1/4 = 1
        ([0.5], 0.0),
    ]
    for ratios, expected in cases:
        assert abs(moran_dimension(ratios) - expected) <= 1e-12


def test_moran_dimension_residual_randomized():
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        ratios = rng.uniform(0.05, 0.7, size=n)
        s = moran_dimension(ratios)
        residual = np.power(ratios, s).sum() - 1.0
        assert abs(residual) <= 1e-12
        assert s >= 0.0


def test_moran_dimension_accepts_ifs():
    assert abs(moran_dimension(cantor_ifs()) - LOG(2) / LOG(3)) <= 1e-12


def test_hull_interval_cantor():
    a, b = hull_interval(cantor_ifs())
    assert abs(a - 0.0) <= 1e-12 and abs(b - 1.0) <= 1e-12


def test_hull_interval_shifted():
    # x/2 + 1 alone: attractor is the fixed point {2}
    one = IFS((Similarity(0.5, (1.0,)),))
    a, b = hull_interval(one)
    assert abs(a - 2.0) <= 1e-12 and abs(b - 2.0) <= 1e-12


def test_hull_ball_contains_sample():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        maps = tuple(
            Similarity(rng.uniform(0.2, 0.6), tuple(rng.normal(size=2)),
                       rng.uniform(-np.pi, np.pi), bool(rng.integers(2)))
            for _ in range(n))
        ifs = IFS(maps)
        center, radius = hull_ball(ifs)
        sample = sample_attractor(ifs, 0.05 * diameter(ifs), budget=200000)
        dist = np.linalg.norm(sample.points - center, axis=1)
        assert dist.max() <= radius + 1e-9


def test_cylinder_hulls_cantor_depth1():
    boxes = cylinder_hulls(cantor_ifs(), 1)
    assert boxes[0][0] == (0,)
    np.testing.assert_allclose(boxes[0][1][0], [0.0], atol=1e-15)
    np.testing.assert_allclose(boxes[0][1][1], [1 / 3], atol=1e-15)
    np.testing.assert_allclose(boxes[1][1][0], [2 / 3], atol=1e-15)
    np.testing.assert_allclose(boxes[1][1][1], [1.0], atol=1e-15)


def test_cylinder_maps_depth2_cantor():
    # S_0 = x/3, S_1 = x/3 + 2/3; frozen composed offsets
    expected = {(0, 0): 0.0, (0, 1): 2 / 9, (1, 0): 2 / 3, (1, 1): 8 / 9}
    for word, sim in cylinder_maps(cantor_ifs(), 2):
        assert abs(sim.ratio - 1 / 9) <= 1e-15
        assert abs(sim.translation[0] - expected[word]) <= 1e-15


def test_sample_gasket_count():
    ifs = gasket_ifs()
    diam = diameter(ifs)
    sample = sample_attractor(ifs, diam * 0.5 ** 5)
    # uniform ratio 1/2: every word terminates exactly at depth 5
    assert sample.points.shape == (3 ** 5, 2)


def test_sample_cantor_soundness():
    ifs = cantor_ifs()
    delta = 3.0 ** -6
    sample = sample_attractor(ifs, delta)
    pts = np.sort(sample.points[:, 0])
    # every sample point is a finite ternary point using digits {0, 2}
    depth = 12
    scaled = pts * 3 ** depth
    digits_ok = np.abs(scaled - np.round(scaled)) <= 1e-6
    assert digits_ok.all()
    rounded = np.round(scaled).astype(int)
    for value in rounded:
        for _ in range(depth):
            assert value % 3 in (0, 2)
            value //= 3
    # coverage: every depth-6 left endpoint is within delta of a sample
    endpoints = np.array([
        sum(2 * ((i >> k) & 1) * 3.0 ** -(k + 1) for k in range(6))
        for i in range(2 ** 6)])
    gaps = np.abs(endpoints[:, None] - pts[None, :]).min(axis=1)
    assert gaps.max() <= delta + 1e-12


def test_sample_coarse_resolution_single_point():
    sample = sample_attractor(cantor_ifs(), 2.0)
    assert sample.points.shape == (1, 1)


def test_sample_budget_guard():
    with pytest.raises(SampleBudgetError):
        sample_attractor(cantor_ifs(), 1e-9, budget=1000)


def test_embed_in_plane_agrees_with_line():
    line = IFS((Similarity(1 / 3, (0.0,)),
                Similarity(1 / 3, (1.0,), reflection=True)))
    plane = embed_in_plane(line)
    rng = np.random.default_rng(4)
    xs = rng.uniform(-2, 2, size=50)
    for m1, m2 in zip(line.maps, plane.maps):
        out1 = m1.apply(xs[:, None])
        out2 = m2.apply(np.column_stack([xs, np.zeros_like(xs)]))
        assert np.allclose(out2[:, 0], out1[:, 0], atol=1e-12)
        assert np.allclose(out2[:, 1], 0.0, atol=1e-12)


def test_json_round_trip(tmp_path):
    ifs = gasket_ifs()
    doc = ifs_to_dict(ifs)
    again = ifs_from_dict(json.loads(json.dumps(doc)))
    assert again == ifs
    path = tmp_path / "gasket.json"
    path.write_text(json.dumps(doc))
    assert load_ifs(path) == ifs


def test_json_rejects_unknown_and_missing_fields():
    good = {"dim": 1, "maps": [{"r": 1 / 3, "t": [0.0]}]}
    ifs_from_dict(good)  # sanity
    bad_cases = [
        {**good, "extra": 1},
        {"dim": 1},
        {"dim": 3, "maps": good["maps"]},
        {"dim": 1, "maps": []},
        {"dim": 1, "maps": [{"r": 1 / 3}]},
        {"dim": 1, "maps": [{"r": 1 / 3, "t": [0.0], "weird": 0}]},
        {"dim": 1, "maps": [{"r": 1 / 3, "t": [0.0], "theta": 0.5}]},
        {"dim": 1, "maps": [{"r": 1 / 3, "t": [0.0, 0.0]}]},
        {"dim": 2, "maps": [{"r": 1 / 3, "t": [0.0, 0.0], "reflect": "yes"}]},
        {"dim": 1, "maps": [{"r": 2.0, "t": [0.0]}]},
    ]
    for doc in bad_cases:
        with pytest.raises(SchemaError):
            ifs_from_dict(doc)


def test_load_ifs_rejects_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_ifs(path)
