"""Curvature data of unions of equal closed disks in the plane.

The boundary of a union of equal disks is a set of closed loops made of
circular arcs meeting at crossing vertices.  For each loop the Gauss
map decomposes into positive arc curvature (arc angular extent) and
negative corner turning, and the loop total is +2pi for an outer
boundary and -2pi for a hole.  From a single sweep over the arrangement
this module returns

* ``c0``      Euler characteristic, components - holes (exact integer)
* ``c0var``   total curvature variation, (sum extents + sum |turns|)/2pi
* ``c1``      half boundary length (its positive part; they coincide)
* ``c2``      area, by Green's theorem over the boundary arcs
* per-loop closure sums, for auditing the +-2pi identity

Equal radii keep the combinatorics simple: two distinct circles are
disjoint or cross in two points, never internally tangent or nested.
Near-degenerate inputs (almost tangent pairs, almost coincident
centers, almost coinciding arrangement vertices) are retried once with
the radius inflated by 1e-9 relatively; if the retry stays degenerate a
DegenerateArrangementError names the offenders.  A retry perturbs c1
and c2 at the same 1e-9 relative level.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import AccuracyGuardError, DegenerateArrangementError

_TWO_PI = 2.0 * np.pi
_DEDUPE_REL = 1e-12     # centers closer than this (times r) are one point
_COINCIDENT_REL = 1e-9  # closer than this (times r) but not deduped: degenerate
_TANGENT_REL = 1e-10    # |d - 2r| below this (times 2r): degenerate
_ANGLE_TOL = 1e-10      # same-circle event angles closer than this: degenerate
_CLOSURE_TOL = 1e-6     # loop closure must hit +-2pi this tightly


@dataclass(frozen=True, eq=False)
class DiskUnionCurvatures:
    c0: int
    c0var: float
    c1: float
    c2: float
    components: int
    holes: int
    loop_closures: np.ndarray
    arc_count: int


class _Degenerate(Exception):
    """Internal: arrangement needs the perturbation retry."""


def _dedupe(centers, tol):
    if centers.shape[0] < 2:
        return centers
    pairs = cKDTree(centers).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return centers
    parent = np.arange(centers.shape[0])

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(centers.shape[0])])
    return centers[np.unique(roots)]


def disk_union_curvatures(centers, radius):
    """Curvature data of the union of closed disks B(center_i, radius)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.ndim != 2 or centers.shape[1] != 2 or centers.shape[0] == 0:
        raise ValueError("centers must be a nonempty (n, 2) array")
    if not np.all(np.isfinite(centers)):
        raise ValueError("centers must be finite")
    radius = float(radius)
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    centers = _dedupe(centers, _DEDUPE_REL * radius)
    try:
        return _arrangement(centers, radius)
    except _Degenerate as first:
        try:
            return _arrangement(centers, radius * (1.0 + 1e-9))
        except _Degenerate as second:
            raise DegenerateArrangementError(
                f"arrangement stayed degenerate after radius perturbation: "
                f"{second} (first failure: {first})") from second


def _arrangement(centers, r):
    n = centers.shape[0]
    pairs = cKDTree(centers).query_pairs(
        2.0 * r * (1.0 + 2.0 * _TANGENT_REL), output_type="ndarray")
    if pairs.size:
        diff = centers[pairs[:, 1]] - centers[pairs[:, 0]]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        bad = dist <= _COINCIDENT_REL * r
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise _Degenerate(
                f"near-coincident disks {pairs[k, 0]} and {pairs[k, 1]} "
                f"(distance {dist[k]:.3e})")
        tangent = np.abs(dist - 2.0 * r) <= _TANGENT_REL * 2.0 * r
        if tangent.any():
            k = int(np.flatnonzero(tangent)[0])
            raise _Degenerate(
                f"near-tangent disks {pairs[k, 0]} and {pairs[k, 1]} "
                f"(distance {dist[k]:.12e}, 2r = {2 * r:.12e})")
        keep = dist < 2.0 * r
        pairs, diff, dist = pairs[keep], diff[keep], dist[keep]
    if pairs.size == 0:
        # n isolated disks
        closures = np.full(n, _TWO_PI)
        return DiskUnionCurvatures(
            c0=n, c0var=float(n), c1=n * np.pi * r,
            c2=n * np.pi * r * r, components=n, holes=0,
            loop_closures=closures, arc_count=0)

    p = pairs.shape[0]
    pi_, pj = pairs[:, 0], pairs[:, 1]
    phi = np.arctan2(diff[:, 1], diff[:, 0])
    beta = np.arccos(np.clip(dist / (2.0 * r), -1.0, 1.0))

    # vertex ids: v_plus = 2p at angle phi+beta from i, v_minus = 2p+1 at
    # phi-beta from i; seen from j those swap (phi_ji = phi + pi)
    circ = np.concatenate([pi_, pi_, pj, pj])
    ang = np.mod(np.concatenate([phi - beta, phi + beta,
                                 phi + np.pi - beta, phi + np.pi + beta]),
                 _TWO_PI)
    delta = np.concatenate([np.ones(p, dtype=np.int64),
                            -np.ones(p, dtype=np.int64)] * 2)
    idx = np.arange(p, dtype=np.int64)
    vert = np.concatenate([2 * idx + 1, 2 * idx, 2 * idx, 2 * idx + 1])

    # initial coverage at angle 0 on each circle: intervals wrapping 2pi
    init = np.zeros(n, dtype=np.int64)
    lo_i = np.mod(phi - beta, _TWO_PI)
    hi_i = np.mod(phi + beta, _TWO_PI)
    np.add.at(init, pi_[lo_i > hi_i], 1)
    lo_j = np.mod(phi + np.pi - beta, _TWO_PI)
    hi_j = np.mod(phi + np.pi + beta, _TWO_PI)
    np.add.at(init, pj[lo_j > hi_j], 1)

    order = np.lexsort((ang, circ))
    circ, ang, delta, vert = circ[order], ang[order], delta[order], vert[order]
    m = circ.size

    block_first = np.empty(m, dtype=bool)
    block_first[0] = True
    block_first[1:] = circ[1:] != circ[:-1]
    starts = np.flatnonzero(block_first)
    block_id = np.cumsum(block_first) - 1

    # same-circle angle collisions (including the cyclic gap)
    gap_next = np.empty(m)
    gap_next[:-1] = ang[1:] - ang[:-1]
    gap_next[-1] = np.inf
    ends = np.roll(block_first, -1)  # last event of each block
    last_of_block = np.flatnonzero(ends)
    first_of_block = starts
    gap_next[last_of_block] = (ang[first_of_block] + _TWO_PI
                               - ang[last_of_block])
    collide = gap_next < _ANGLE_TOL
    if collide.any():
        k = int(np.flatnonzero(collide)[0])
        raise _Degenerate(
            f"coinciding arrangement vertices on circle {circ[k]} "
            f"(angle gap {gap_next[k]:.3e})")

    cs = np.cumsum(delta)
    base = np.concatenate([[0], cs[starts[1:] - 1]])
    cov = init[circ] + cs - base[block_id]
    if np.any(cov < 0):
        k = int(np.flatnonzero(cov < 0)[0])
        raise _Degenerate(f"negative coverage on circle {circ[k]}")
    if np.any(cov[last_of_block] != init[circ[last_of_block]]):
        k = int(np.flatnonzero(cov[last_of_block]
                               != init[circ[last_of_block]])[0])
        raise _Degenerate(
            f"cyclically inconsistent coverage on circle {circ[last_of_block[k]]}")

    # boundary arcs: free stretches where coverage drops to zero
    nxt = np.arange(1, m + 1)
    nxt[last_of_block] = first_of_block
    is_gap = cov == 0
    gap_idx = np.flatnonzero(is_gap)
    if gap_idx.size and np.any(delta[gap_idx] != -1):
        raise _Degenerate("zero coverage after a start event")
    arc_circle = circ[gap_idx]
    arc_t0 = ang[gap_idx]
    arc_ext = gap_next[gap_idx]
    arc_from = vert[gap_idx]
    arc_to = vert[nxt[gap_idx]]
    if gap_idx.size and np.any(delta[nxt[gap_idx]] != 1):
        raise _Degenerate("boundary arc not ended by a start event")

    full_mask = np.ones(n, dtype=bool)
    full_mask[circ] = False
    n_full = int(full_mask.sum())

    n_arcs = gap_idx.size
    start_of = np.full(2 * p, -1, dtype=np.int64)
    if n_arcs:
        if np.unique(arc_from).size != n_arcs or np.unique(arc_to).size != n_arcs:
            raise _Degenerate("vertex with multiple boundary arcs")
        start_of[arc_from] = np.arange(n_arcs)
        follow = start_of[arc_to]
        if np.any(follow < 0):
            k = int(np.flatnonzero(follow < 0)[0])
            raise _Degenerate(f"unmatched boundary vertex {arc_to[k]}")
    else:
        follow = np.empty(0, dtype=np.int64)

    arc_t1 = arc_t0 + arc_ext
    turn = np.empty(n_arcs)
    if n_arcs:
        raw = arc_t0[follow] - arc_t1  # tangent rotation at the junction
        turn = np.mod(raw, _TWO_PI)
        turn[turn > np.pi] -= _TWO_PI

    closures = []
    hole_count = 0
    outer_count = 0
    seen = np.zeros(n_arcs, dtype=bool)
    for a0 in range(n_arcs):
        if seen[a0]:
            continue
        total = 0.0
        a = a0
        while not seen[a]:
            seen[a] = True
            total += arc_ext[a] + turn[a]
            a = int(follow[a])
        if a != a0:
            raise _Degenerate("boundary walk did not close into a loop")
        if abs(total - _TWO_PI) <= _CLOSURE_TOL:
            outer_count += 1
        elif abs(total + _TWO_PI) <= _CLOSURE_TOL:
            hole_count += 1
        else:
            raise _Degenerate(f"loop closure {total:.9f} is not +-2pi")
        closures.append(total)
    closures.extend([_TWO_PI] * n_full)
    outer_count += n_full

    ext_total = float(arc_ext.sum()) + _TWO_PI * n_full
    turn_abs = float(np.abs(turn).sum())
    cx = centers[arc_circle, 0]
    cy = centers[arc_circle, 1]
    area = 0.5 * float(np.sum(
        r * cx * (np.sin(arc_t1) - np.sin(arc_t0))
        + r * cy * (np.cos(arc_t0) - np.cos(arc_t1))
        + r * r * arc_ext))
    area += np.pi * r * r * n_full

    return DiskUnionCurvatures(
        c0=outer_count - hole_count,
        c0var=(ext_total + turn_abs) / _TWO_PI,
        c1=0.5 * r * ext_total,
        c2=area,
        components=outer_count,
        holes=hole_count,
        loop_closures=np.array(closures),
        arc_count=int(n_arcs),
    )


def sweep_curvatures(points, eps_values, resolution=0.0, threads=None):
    """Disk-union curvature data of a point sample at several radii.

    ``resolution`` is the sample's covering radius; each requested eps
    must be at least 10 times it, otherwise the thickened sample is not
    a trustworthy stand-in for the thickened set and an
    AccuracyGuardError is raised.  Returns [(eps, DiskUnionCurvatures)]
    in the order requested; with ``threads`` the grid is evaluated in a
    thread pool, results still ordered.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eps_values = [float(e) for e in np.asarray(eps_values, dtype=float).ravel()]
    if not eps_values:
        raise ValueError("need at least one eps")
    if resolution < 0.0:
        raise ValueError("resolution must be nonnegative")
    lo = min(eps_values)
    if resolution > 0.0 and lo < 10.0 * resolution:
        raise AccuracyGuardError(
            f"eps = {lo:g} is below 10 x sample resolution "
            f"({10.0 * resolution:g}); refine the sample or raise eps")
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(
                lambda e: disk_union_curvatures(points, e), eps_values))
    else:
        results = [disk_union_curvatures(points, e) for e in eps_values]
    return list(zip(eps_values, results))
