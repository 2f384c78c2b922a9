"""Gap-string evaluators against hand-frozen values and a second
straight-line implementation."""

import json
import math

import numpy as np
import pytest

from fractalcurv.errors import SchemaError
from fractalcurv.fractal_string import (
    c0var_dd_upper,
    c0var_line,
    c0var_plane,
    c1var_product,
    component_count,
    load_string,
    make_string,
    parallel_length_line,
    string_from_dict,
    string_from_ifs,
    string_from_points,
    string_to_dict,
)
from fractalcurv.ifs import IFS, Similarity


def cantor_ifs():
    return IFS((Similarity(1 / 3, (0.0,)), Similarity(1 / 3, (2 / 3,))))


def cantor_gaps(levels):
    """Explicit Cantor gap list: 2^(j-1) gaps of length 3^-j per level j."""
    out = []
    for j in range(1, levels + 1):
        out.extend([3.0 ** -j] * 2 ** (j - 1))
    return out


def test_c0var_line_frozen_cantor_values():
    s = make_string(cantor_gaps(10))
    # 2 eps = 0.4: no gap bigger, one component
    assert c0var_line(s, 0.2) == 1.0
    # 2 eps = 0.12: only 1/3 is bigger
    assert c0var_line(s, 0.06) == 2.0
    # 2 eps = 0.08: 1/3 and both 1/9 gaps are bigger
    assert c0var_line(s, 0.04) == 4.0
    # 2 eps = 0.03: 1/27 gaps (0.037) count too: 1 + 1 + 2 + 4
    assert c0var_line(s, 0.015) == 8.0


def test_gap_exactly_two_eps_takes_arcsin_branch():
    s = make_string([0.1])
    # l == 2 eps: arcsin(1) = pi/2, so c0var_plane = 1 + (4/pi)(pi/2) = 3
    assert abs(c0var_plane(s, 0.05) - 3.0) <= 1e-12
    # ... and the component count stays 1
    assert component_count(s, 0.05) == 1
    # slightly larger gap splits into two components: 2 + 0 arc terms
    assert abs(c0var_plane(s, 0.04) - 2.0) <= 1e-12


def test_parallel_length_line_frozen():
    # interval of measure 1, no gaps
    interval = make_string([], total_measure=1.0)
    assert abs(parallel_length_line(interval, 0.25) - 1.5) <= 1e-15
    # depth-2 Cantor prefractal: gaps {1/3, 1/9, 1/9}, measure 4/9;
    # at eps = 0.01 all gaps stay open: 4 intervals each grown by 2 eps
    s = make_string([1 / 3, 1 / 9, 1 / 9], total_measure=4 / 9)
    expected = 4 * (1 / 9 + 0.02)
    assert abs(parallel_length_line(s, 0.01) - expected) <= 1e-14


def test_c0var_dd_upper_frozen():
    s = make_string([0.1])
    # d = 3: c_3 = 3/2, closed gap sum 0.1, eps 0.05 -> 1 + 1.5 * 2 = 4
    assert abs(c0var_dd_upper(s, 0.05, 3) - 4.0) <= 1e-12
    # d = 2: c_2 = 4/pi -> 1 + 8/pi
    assert abs(c0var_dd_upper(s, 0.05, 2) - (1 + 8 / np.pi)) <= 1e-12
    # d = 1: c_1 = 1 -> 1 + 2
    assert abs(c0var_dd_upper(s, 0.05, 1) - 3.0) <= 1e-12


def test_c1var_product_frozen():
    # K = [0, 1]: the product is the unit square, half perimeter 2 + pi eps
    square = make_string([], total_measure=1.0)
    assert abs(c1var_product(square, 0.1) - (2 + 0.1 * np.pi)) <= 1e-14
    # K = {0}: the product is a unit segment, half perimeter 1 + pi eps
    point = make_string([], total_measure=0.0)
    assert abs(c1var_product(point, 0.1) - (1 + 0.1 * np.pi)) <= 1e-14
    # K = {0, 1}, eps = 0.6: gap 1 <= 2 eps merges, one notched block
    two = make_string([1.0])
    expected = 1 + 0.6 * np.pi + 2 * 0.6 * math.asin(1 / 1.2)
    assert abs(c1var_product(two, 0.6) - expected) <= 1e-14
    # same set, eps = 0.2: two disjoint stadia
    assert abs(c1var_product(two, 0.2) - 2 * (1 + 0.2 * np.pi)) <= 1e-14


def test_against_straight_line_reimplementation():
    rng = np.random.default_rng(31)
    for _ in range(50):
        gaps = rng.uniform(0.001, 1.0, size=int(rng.integers(1, 40)))
        measure = float(rng.uniform(0.0, 2.0))
        s = make_string(gaps, total_measure=measure)
        eps = float(rng.uniform(0.005, 0.8))
        big = [l for l in gaps if l > 2 * eps]
        small = [l for l in gaps if l <= 2 * eps]
        n = 1 + len(big)
        assert c0var_line(s, eps) == n
        ref_len = 2 * eps * n + sum(small) + measure
        assert abs(parallel_length_line(s, eps) - ref_len) <= 1e-12
        ref_plane = n + (4 / math.pi) * sum(
            math.asin(l / (2 * eps)) for l in small)
        assert abs(c0var_plane(s, eps) - ref_plane) <= 1e-10
        ref_prod = n * (1 + math.pi * eps) + 2 * eps * sum(
            math.asin(l / (2 * eps)) for l in small) + measure
        assert abs(c1var_product(s, eps) - ref_prod) <= 1e-10


def test_bound_sandwich():
    # c0var_line <= c0var_plane <= c0var_dd_upper(d=2) on random strings
    rng = np.random.default_rng(32)
    for _ in range(200):
        gaps = rng.uniform(1e-4, 1.0, size=int(rng.integers(1, 30)))
        s = make_string(gaps)
        eps = float(rng.uniform(1e-3, 1.0))
        lo = c0var_line(s, eps)
        mid = c0var_plane(s, eps)
        hi = c0var_dd_upper(s, eps, 2)
        assert lo <= mid + 1e-12
        assert mid <= hi + 1e-12


def test_c0var_monotone_in_eps():
    # component count never increases as eps grows
    s = make_string(cantor_gaps(8))
    eps_grid = np.geomspace(1e-4, 1.0, 80)
    values = [component_count(s, e) for e in eps_grid]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_string_from_ifs_cantor_depth2():
    s = string_from_ifs(cantor_ifs(), 2)
    # frozen: gaps {1/3 x1, 1/9 x2}, prefractal measure 4/9
    expanded = np.sort(np.repeat(s.lengths, s.counts))
    np.testing.assert_allclose(expanded, [1 / 9, 1 / 9, 1 / 3], atol=1e-12)
    assert abs(s.total_measure - 4 / 9) <= 1e-12


def test_string_from_ifs_deep_cantor_matches_enumeration():
    s = string_from_ifs(cantor_ifs(), 10)
    ref = make_string(cantor_gaps(10))
    assert s.gap_count == ref.gap_count
    assert abs(s.gap_measure - ref.gap_measure) <= 1e-12
    assert abs(s.total_measure - (2 / 3) ** 10) <= 1e-12
    for eps in (0.2, 0.05, 0.01, 1e-3, 1e-4):
        assert c0var_line(s, eps) == c0var_line(ref, eps)
        assert abs(c0var_plane(s, eps) - c0var_plane(ref, eps)) <= 1e-9


def test_string_from_ifs_full_interval_has_no_gaps():
    # 1/2 + 1/4 + 1/4 = 1: the attractor is [0, 1], cylinders touch
    ifs = IFS((Similarity(1 / 2, (0.0,)),
               Similarity(1 / 4, (1 / 2,)),
               Similarity(1 / 4, (3 / 4,))))
    s = string_from_ifs(ifs, 3)
    assert s.gap_count == 0
    assert abs(s.total_measure - 1.0) <= 1e-10


def test_string_from_points():
    s = string_from_points([0.0, 0.1, 0.1, 0.7, 1.0])
    np.testing.assert_allclose(s.lengths, [0.1, 0.3, 0.6], atol=1e-15)
    assert s.total_measure == 0.0
    assert s.gap_count == 3


def test_string_json_round_trip(tmp_path):
    s = make_string([0.5, 0.25, 0.25], total_measure=0.125)
    doc = string_to_dict(s)
    again = string_from_dict(json.loads(json.dumps(doc)))
    np.testing.assert_allclose(again.lengths, s.lengths)
    np.testing.assert_allclose(again.counts, s.counts)
    assert again.total_measure == s.total_measure
    path = tmp_path / "string.json"
    path.write_text(json.dumps(doc))
    loaded = load_string(path)
    assert loaded.gap_count == 3


def test_string_json_rejects_bad_documents():
    bad = [
        {"lengths": [0.1], "bogus": 1},
        {"counts": [1]},
        {"lengths": "nope"},
        {"lengths": [0.1], "counts": [1, 2]},
        {"lengths": [0.1], "counts": [1.5]},
        {"lengths": [-0.1]},
        {"lengths": [0.1], "total_measure": -1.0},
        {"lengths": [0.1], "total_measure": "x"},
    ]
    for doc in bad:
        with pytest.raises(SchemaError):
            string_from_dict(doc)


def test_make_string_merges_duplicates():
    s = make_string([0.25, 0.5, 0.25])
    np.testing.assert_allclose(s.lengths, [0.25, 0.5])
    assert list(s.counts) == [2, 1]


def test_eps_must_be_positive():
    s = make_string([0.1])
    with pytest.raises(ValueError):
        c0var_line(s, 0.0)
