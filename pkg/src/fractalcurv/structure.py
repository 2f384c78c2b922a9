"""Structural analysis of self-similar sets.

Certified, sample-based answers to qualitative questions about an
attractor:

* ``clusters``      group the depth-n cylinder sets into contact
                    clusters and bound their mutual separation from
                    below
* ``bounded_complement_component``  find a bounded hole of the
                    complement at a given probe scale
* ``flatness_test`` does the set, inside a window, factor as
                    (projection) x (full interval) along an axis
* ``tiling_generator`` / ``tiling_compatible``  the open-set tiling
                    generator, its tiles, and whether the generator
                    boundary lies on the attractor

Every geometric claim is made at an explicit scale: distances certified
by point samples carry the sampling slack, rasters carry their pitch,
and resolutions too coarse for the request raise AccuracyGuardError
instead of silently guessing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import shapely
from scipy import ndimage
from scipy.spatial import cKDTree
from shapely import affinity
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union
from shapely.validation import make_valid

from .errors import (
    AccuracyGuardError,
    GridMemoryError,
    SampleBudgetError,
    SchemaError,
)
from .ifs import (
    PointSample,
    cylinder_hulls,
    cylinder_maps,
    diameter,
    sample_attractor,
)

_CELL_BUDGET = 40_000_000
_TILE_OVERLAP_REL = 1e-9


@dataclass(frozen=True, eq=False)
class ClusterReport:
    level: int
    count: int
    assignments: tuple  # (word, cluster_id) per cylinder, word order
    separation: float | None  # certified lower bound between clusters
    contact_tol: float


@dataclass(frozen=True)
class ComplementRegion:
    point: tuple
    cell_count: int
    probe_resolution: float
    dilation: float
    pitch: float


@dataclass(frozen=True)
class FlatnessReport:
    flat_axes: tuple
    axis_tol: float

    @property
    def is_flat(self):
        return len(self.flat_axes) > 0


@dataclass(frozen=True)
class TilingReport:
    compatible: bool
    max_boundary_distance: float
    generator_boundary_samples: int
    tolerance: float


def _box_distances(los, his):
    """Pairwise distances between axis-aligned boxes, (n, n) matrix."""
    gap = np.maximum(los[:, None, :] - his[None, :, :],
                     los[None, :, :] - his[:, None, :])
    gap = np.maximum(gap, 0.0)
    return np.sqrt((gap ** 2).sum(axis=2))


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def clusters(ifs, level, contact_tol=None, budget=5_000_000):
    """Contact clusters of the depth-`level` cylinder sets.

    Two cylinders are joined when their distance cannot be certified to
    exceed ``contact_tol`` (default: 1e-3 times the hull diameter), so
    the decision errs toward joining inside the sampling slack band of
    half a tolerance around the threshold.  The returned separation is
    a certified lower bound on the distance between distinct clusters
    (None when there is a single cluster).
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    diam = diameter(ifs)
    if contact_tol is None:
        contact_tol = 1e-3 * diam
    if contact_tol <= 0.0:
        raise ValueError("contact_tol must be positive")
    rmax = float(ifs.ratios.max())
    # cylinder samples then resolve contact_tol / 4, so each pair's
    # certified slack is at most contact_tol / 2
    delta_base = contact_tol / (4.0 * rmax ** level)
    try:
        base = sample_attractor(ifs, delta_base, budget=budget)
    except SampleBudgetError as exc:
        raise SampleBudgetError(
            f"contact_tol {contact_tol:g} needs a base sample finer than "
            f"the {budget}-point budget allows at level {level}") from exc

    cyl = cylinder_maps(ifs, level)
    hulls = cylinder_hulls(ifs, level)
    words = [w for w, _ in cyl]
    n = len(cyl)
    los = np.stack([lo for _, (lo, hi) in hulls])
    his = np.stack([hi for _, (lo, hi) in hulls])
    if level == 0:
        return ClusterReport(level=0, count=1,
                             assignments=((words[0], 0),),
                             separation=None, contact_tol=float(contact_tol))

    points = [sim.apply(base.points) for _, sim in cyl]
    res = np.array([sim.ratio * base.resolution for _, sim in cyl])
    trees = [None] * n

    def tree(i):
        if trees[i] is None:
            trees[i] = cKDTree(points[i])
        return trees[i]

    def sample_dist(i, j, upper=np.inf):
        d, _ = tree(j).query(points[i], k=1, distance_upper_bound=upper)
        return float(d.min())

    box = _box_distances(los, his)
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if box[i, j] > contact_tol:
                continue
            slack = res[i] + res[j]
            ds = sample_dist(i, j, upper=contact_tol + slack + res[i])
            if max(box[i, j], ds - slack) <= contact_tol:
                uf.union(i, j)

    roots = [uf.find(i) for i in range(n)]
    order = {}
    labels = []
    for r in roots:
        if r not in order:
            order[r] = len(order)
        labels.append(order[r])
    count = len(order)

    separation = None
    if count > 1:
        pairs = [(box[i, j], i, j)
                 for i in range(n) for j in range(i + 1, n)
                 if labels[i] != labels[j]]
        pairs.sort()
        best = np.inf
        for bd, i, j in pairs:
            if bd >= best:
                break
            lb = max(bd, sample_dist(i, j) - (res[i] + res[j]))
            best = min(best, lb)
        separation = float(max(best, 0.0))

    assignments = tuple(zip(words, labels))
    return ClusterReport(level=int(level), count=int(count),
                         assignments=assignments, separation=separation,
                         contact_tol=float(contact_tol))


def bounded_complement_component(sample, probe_resolution,
                                 cell_budget=_CELL_BUDGET):
    """Largest bounded complement component at the probe scale.

    The sample is rasterized at the probe pitch and dilated by three
    pitches (which certifiably covers the attractor, since the sample
    resolution is required to be at most the probe).  Bounded connected
    components of the free cells are holes of the dilated set; the
    deepest cell of the largest one is returned as a witness, or None
    when no bounded component exists at this scale.
    """
    if not isinstance(sample, PointSample):
        raise TypeError("sample must be a PointSample")
    pts = sample.points
    if pts.shape[1] != 2:
        raise ValueError("bounded_complement_component needs a planar sample")
    probe = float(probe_resolution)
    if probe <= 0.0:
        raise ValueError("probe_resolution must be positive")
    if sample.resolution > probe:
        raise AccuracyGuardError(
            f"sample resolution {sample.resolution:g} is coarser than the "
            f"probe {probe:g}; refine the sample")
    h = probe
    dilation = 3.0 * h
    margin = dilation + 2.0 * h
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    shape = np.ceil((hi - lo) / h).astype(int) + 1
    if int(shape[0]) * int(shape[1]) > cell_budget:
        raise GridMemoryError(
            f"occupancy raster {shape[0]} x {shape[1]} exceeds the "
            f"{cell_budget}-cell budget; coarsen the probe")
    occupied = np.zeros(shape, dtype=bool)
    idx = np.floor((pts - lo) / h).astype(int)
    occupied[idx[:, 0], idx[:, 1]] = True
    dist = ndimage.distance_transform_edt(~occupied, sampling=h)
    free = dist > dilation
    labels, n_labels = ndimage.label(free)
    if n_labels == 0:
        return None
    border = np.unique(np.concatenate([
        labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]))
    unbounded = set(border.tolist()) - {0}
    sizes = np.bincount(labels.ravel(), minlength=n_labels + 1)
    candidates = [(sizes[k], k) for k in range(1, n_labels + 1)
                  if k not in unbounded]
    if not candidates:
        return None
    _, label = max(candidates)
    masked = np.where(labels == label, dist, -np.inf)
    flat = int(np.argmax(masked))
    cell = np.unravel_index(flat, labels.shape)
    point = lo + (np.array(cell) + 0.5) * h
    return ComplementRegion(point=tuple(float(x) for x in point),
                            cell_count=int(sizes[label]),
                            probe_resolution=probe,
                            dilation=dilation, pitch=h)


def flatness_test(sample, window, axis_tol):
    """Axes along which the windowed sample factors as a full interval.

    Axis a qualifies when, bucketing the windowed points by the other
    coordinate at width axis_tol, every nonempty bucket's a-projection
    is within axis_tol/2 (one-sided Hausdorff) of the union of all
    projections, and that union is axis_tol-dense across the window.
    """
    if not isinstance(sample, PointSample):
        raise TypeError("sample must be a PointSample")
    pts = sample.points
    if pts.shape[1] != 2:
        raise ValueError("flatness_test needs a planar sample")
    axis_tol = float(axis_tol)
    if axis_tol < 4.0 * sample.resolution:
        raise AccuracyGuardError(
            f"axis_tol {axis_tol:g} is below 4 x sample resolution "
            f"({4.0 * sample.resolution:g})")
    (x0, x1), (y0, y1) = window
    if not (x0 < x1 and y0 < y1):
        raise ValueError("window must have positive extent on both axes")
    inside = ((pts[:, 0] >= x0) & (pts[:, 0] <= x1)
              & (pts[:, 1] >= y0) & (pts[:, 1] <= y1))
    if not inside.any():
        raise ValueError("window contains no sample points")
    pts = pts[inside]
    bounds = ((x0, x1), (y0, y1))

    flat = []
    for axis in (0, 1):
        other = 1 - axis
        a_lo, a_hi = bounds[axis]
        ref = np.unique(pts[:, axis])
        # the union of projections must fill the window at tol density
        fence = np.concatenate([[a_lo], ref, [a_hi]])
        if np.diff(fence).max() > axis_tol:
            continue
        bins = np.floor((pts[:, other] - bounds[other][0]) / axis_tol)
        ok = True
        for b in np.unique(bins):
            proj = np.unique(pts[bins == b, axis])
            # proj is a subset of ref: only the directed distance
            # ref -> proj can be positive
            pos = np.searchsorted(proj, ref)
            left = np.abs(ref - proj[np.clip(pos - 1, 0, proj.size - 1)])
            right = np.abs(ref - proj[np.clip(pos, 0, proj.size - 1)])
            if np.minimum(left, right).max() > axis_tol / 2.0:
                ok = False
                break
        if ok:
            flat.append(axis)
    return FlatnessReport(flat_axes=tuple(flat), axis_tol=axis_tol)


def _interval_difference(base, cuts):
    """Open interval minus closed intervals, as a list of open pieces."""
    a, b = base
    pieces = []
    cursor = a
    for lo, hi in sorted(cuts):
        if hi <= cursor:
            continue
        if lo > cursor:
            pieces.append((cursor, min(lo, b)))
        cursor = max(cursor, hi)
        if cursor >= b:
            break
    if cursor < b:
        pieces.append((cursor, b))
    return [(lo, hi) for lo, hi in pieces if hi - lo > 0.0]


def _apply_to_polygon(sim, geom):
    m = sim.matrix
    t = sim.translation
    return affinity.affine_transform(
        geom, [m[0, 0], m[0, 1], m[1, 0], m[1, 1], t[0], t[1]])


def _apply_to_interval(sim, piece):
    lo, hi = piece
    slope = sim.matrix[0, 0]
    off = sim.translation[0]
    e1, e2 = slope * lo + off, slope * hi + off
    return (min(e1, e2), max(e1, e2))


def tiling_generator(ifs, open_set, depth):
    """Tiles S_w(G), |w| <= depth, of the open-set generator
    G = O minus the union of the S_i(closure(O)).

    Returns [(word, piece)] where a piece is an interval (lo, hi) in
    dimension 1 and a shapely polygon in dimension 2; the empty list
    when the generator is empty.  Raises ValueError when the produced
    tiles overlap (the open set does not induce a tiling).
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if ifs.dim == 1:
        a, b = float(open_set[0]), float(open_set[1])
        if not a < b:
            raise ValueError("interval open set must have positive length")
        cuts = [_apply_to_interval(sim, (a, b)) for sim in ifs.maps]
        pieces = _interval_difference((a, b), cuts)
        if not pieces:
            return []
        tiles = []
        for word, sim in _words_upto(ifs, depth):
            for piece in pieces:
                tiles.append((word, piece if sim is None
                              else _apply_to_interval(sim, piece)))
        _assert_intervals_disjoint([t for _, t in tiles])
        return tiles

    if not isinstance(open_set, Polygon):
        raise TypeError("planar open set must be a shapely Polygon")
    gen = _generator_region(ifs, open_set)
    floor = 1e-12 * open_set.area
    if gen.is_empty or gen.area <= floor:
        return []
    pieces = [orient(g, 1.0) for g in _polygon_parts(gen) if g.area > floor]
    tiles = []
    for word, sim in _words_upto(ifs, depth):
        for piece in pieces:
            tiles.append((word, piece if sim is None
                          else _apply_to_polygon(sim, piece)))
    _assert_polygons_disjoint([t for _, t in tiles])
    return tiles


def _polygon_parts(geom):
    """Polygonal pieces of a shapely geometry (lines and points dropped)."""
    if geom.geom_type == "Polygon":
        return [geom]
    if geom.geom_type in ("MultiPolygon", "GeometryCollection"):
        return [g for part in geom.geoms for g in _polygon_parts(part)]
    return []


def _generator_region(ifs, open_set):
    """O minus the union of the map images of its closure, cleaned.

    The difference can come back pinched (zero-width lobes where an
    image edge runs along the open-set edge, simple only by a 1e-17
    rounding); snap-rounding collapses those before any further
    geometry is attempted on the pieces.
    """
    images = [_apply_to_polygon(sim, open_set) for sim in ifs.maps]
    gen = make_valid(open_set.difference(unary_union(images)))
    if gen.is_empty:
        return gen
    x0, y0, x1, y1 = open_set.bounds
    return shapely.set_precision(gen, 1e-13 * max(x1 - x0, y1 - y0))


def _words_upto(ifs, depth):
    yield (), None
    for d in range(1, depth + 1):
        yield from cylinder_maps(ifs, d)


def _assert_intervals_disjoint(pieces):
    arr = sorted(pieces)
    scale = max(hi - lo for lo, hi in arr)
    for (lo1, hi1), (lo2, hi2) in zip(arr, arr[1:]):
        if lo2 < hi1 - _TILE_OVERLAP_REL * scale:
            raise ValueError(
                f"tiles overlap: ({lo1:g}, {hi1:g}) and ({lo2:g}, {hi2:g}); "
                "the open set does not induce a tiling")


def _assert_polygons_disjoint(pieces):
    boxes = np.array([p.bounds for p in pieces])
    los, his = boxes[:, :2], boxes[:, 2:]
    dist = _box_distances(los, his)
    n = len(pieces)
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] > 0.0:
                continue
            inter = pieces[i].intersection(pieces[j]).area
            limit = _TILE_OVERLAP_REL * min(pieces[i].area, pieces[j].area)
            if inter > limit:
                raise ValueError(
                    f"tiles {i} and {j} overlap (area {inter:g}); the open "
                    "set does not induce a tiling")


def _sample_ring(coords, spacing):
    """Points along a closed polyline at most `spacing` apart."""
    coords = np.asarray(coords, dtype=float)
    out = []
    for p, q in zip(coords[:-1], coords[1:]):
        seg = np.linalg.norm(q - p)
        steps = max(int(np.ceil(seg / spacing)), 1)
        t = np.arange(steps) / steps
        out.append(p[None, :] + t[:, None] * (q - p)[None, :])
    return np.concatenate(out, axis=0)


def generator_boundary_points(ifs, open_set, spacing):
    """Sample of the generator boundary at the given spacing."""
    if ifs.dim == 1:
        a, b = float(open_set[0]), float(open_set[1])
        cuts = [_apply_to_interval(sim, (a, b)) for sim in ifs.maps]
        pieces = _interval_difference((a, b), cuts)
        ends = sorted({e for piece in pieces for e in piece})
        return np.array(ends, dtype=float)[:, None]
    gen = _generator_region(ifs, open_set)
    floor = 1e-12 * open_set.area
    if gen.is_empty or gen.area <= floor:
        return np.empty((0, 2))
    rings = []
    for poly in (g for g in _polygon_parts(gen) if g.area > floor):
        rings.append(_sample_ring(poly.exterior.coords, spacing))
        for interior in poly.interiors:
            rings.append(_sample_ring(interior.coords, spacing))
    return np.concatenate(rings, axis=0)


def tiling_compatible(ifs, open_set, tol, budget=5_000_000):
    """Does the generator boundary lie on the attractor, within tol?

    Both the generator boundary and the attractor are sampled at tol/10;
    compatibility holds when every boundary sample is within tol of an
    attractor sample.  An empty generator is vacuously compatible.
    """
    tol = float(tol)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    boundary = generator_boundary_points(ifs, open_set, tol / 10.0)
    if boundary.shape[0] == 0:
        return TilingReport(compatible=True, max_boundary_distance=0.0,
                            generator_boundary_samples=0, tolerance=tol)
    attractor = sample_attractor(ifs, tol / 10.0, budget=budget)
    dist, _ = cKDTree(attractor.points).query(boundary, k=1)
    worst = float(dist.max())
    return TilingReport(compatible=bool(worst <= tol),
                        max_boundary_distance=worst,
                        generator_boundary_samples=int(boundary.shape[0]),
                        tolerance=tol)


_OPEN_SET_KEYS = {"type", "bounds", "vertices"}


def open_set_from_dict(doc):
    """Parse {"type": "interval", "bounds": [a, b]} or
    {"type": "polygon", "vertices": [[x, y], ...]}."""
    if not isinstance(doc, dict):
        raise SchemaError("open set document must be an object")
    extra = set(doc) - _OPEN_SET_KEYS
    if extra:
        raise SchemaError(f"unknown keys: {sorted(extra)}")
    kind = doc.get("type")
    if kind == "interval":
        bounds = doc.get("bounds")
        if (not isinstance(bounds, list) or len(bounds) != 2
                or not all(isinstance(x, (int, float))
                           and not isinstance(x, bool) for x in bounds)
                or "vertices" in doc):
            raise SchemaError('"interval" needs "bounds": [a, b]')
        if not bounds[0] < bounds[1]:
            raise SchemaError("interval bounds must satisfy a < b")
        return (float(bounds[0]), float(bounds[1]))
    if kind == "polygon":
        verts = doc.get("vertices")
        if (not isinstance(verts, list) or len(verts) < 3 or "bounds" in doc
                or not all(isinstance(v, list) and len(v) == 2
                           and all(isinstance(x, (int, float))
                                   and not isinstance(x, bool) for x in v)
                           for v in verts)):
            raise SchemaError('"polygon" needs "vertices": [[x, y], ...]')
        poly = Polygon([(float(x), float(y)) for x, y in verts])
        if not poly.is_valid or poly.area <= 0.0:
            raise SchemaError("polygon vertices do not bound a valid region")
        return orient(poly, 1.0)
    raise SchemaError('"type" must be "interval" or "polygon"')


def load_open_set(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return open_set_from_dict(doc)
