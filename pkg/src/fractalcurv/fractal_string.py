"""Fractal strings: gap-length data of compact subsets of the line.

A compact set K in R^1 with convex hull [a, b] is described up to
isometry of its parallel sets by the multiset of bounded complementary
gap lengths {l_j} together with its Lebesgue measure.  This module keeps
that data compressed (unique lengths with multiplicities) and evaluates
closed-form curvature quantities of the parallel sets K_eps:

* ``c0var_line``        total variation of the Euler index on the line,
                        1 + #{l_j > 2 eps}
* ``parallel_length_line``  lambda_1(K_eps)
* ``c0var_plane``       the same set viewed in R^2 (disk thickening);
                        each closed small gap contributes the turning
                        (4/pi) arcsin(l / (2 eps))
* ``c0var_dd_upper``    an upper bound valid in R^d
* ``c1var_product``     half boundary length of (K x [0, 1])_eps in R^2

Strings built from a one-dimensional IFS are truncated at a finite
depth; they then describe the depth-n prefractal (a finite union of
intervals) exactly, with ``total_measure`` equal to its length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .errors import SchemaError
from .ifs import hull_interval

_GAP_TOL = 1e-12  # relative: gaps below this fraction of the hull are noise


@dataclass(frozen=True, eq=False)
class FractalString:
    """Compressed gap data: unique lengths ascending, multiplicities,
    and the Lebesgue measure of the set itself."""

    lengths: np.ndarray
    counts: np.ndarray
    total_measure: float

    @property
    def gap_count(self):
        return int(self.counts.sum())

    @property
    def gap_measure(self):
        return float(self.lengths @ self.counts)


def make_string(lengths, counts=None, total_measure=0.0):
    """Build a FractalString from raw gap lengths.

    ``lengths`` may contain repeats (counts omitted) or be unique with a
    parallel ``counts`` vector.  Equal lengths are merged.
    """
    lengths = np.asarray(lengths, dtype=float).ravel()
    if counts is None:
        counts = np.ones(lengths.size, dtype=np.int64)
    else:
        counts = np.asarray(counts).ravel()
        if counts.shape != lengths.shape:
            raise ValueError("counts must match lengths")
        if np.any(counts != np.asarray(counts, dtype=np.int64)) or np.any(counts < 0):
            raise ValueError("counts must be nonnegative integers")
        counts = np.asarray(counts, dtype=np.int64)
    if np.any(lengths <= 0.0):
        raise ValueError("gap lengths must be positive")
    if total_measure < 0.0:
        raise ValueError("total_measure must be nonnegative")
    keep = counts > 0
    lengths, counts = lengths[keep], counts[keep]
    uniq, inverse = np.unique(lengths, return_inverse=True)
    merged = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(merged, inverse, counts)
    return FractalString(uniq, merged, float(total_measure))


def _split_small(string, eps):
    """Index splitting lengths into small (l <= 2 eps) and big (l > 2 eps)."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return int(np.searchsorted(string.lengths, 2.0 * eps, side="right"))


def component_count(string, eps):
    """Number of connected components of K_eps: 1 + #{l_j > 2 eps}."""
    i = _split_small(string, eps)
    return 1 + int(string.counts[i:].sum())


def c0var_line(string, eps):
    """C_0^var(K_eps) on the line: every component contributes +1."""
    return float(component_count(string, eps))


def parallel_length_line(string, eps):
    """lambda_1(K_eps) = 2 eps N(eps) + sum of closed gaps + measure(K)."""
    i = _split_small(string, eps)
    n = component_count(string, eps)
    closed = float(string.lengths[:i] @ string.counts[:i])
    return 2.0 * eps * n + closed + string.total_measure


def c0var_plane(string, eps):
    """C_0^var(K_eps) for K embedded in R^2 and thickened by disks.

    Components contribute +1 each; a gap of length l <= 2 eps survives as
    a pair of boundary notches with total turning 4 arcsin(l / (2 eps)),
    i.e. (4/pi) arcsin(l / (2 eps)) in Euler-index units.  A gap with
    l == 2 eps takes the arcsin branch (the continuous limit, arcsin 1).
    """
    i = _split_small(string, eps)
    n = component_count(string, eps)
    small = np.arcsin(string.lengths[:i] / (2.0 * eps))
    return float(n + (4.0 / np.pi) * (small @ string.counts[:i]))


def _ball_volume(d):
    return np.pi ** (d / 2.0) / gamma(d / 2.0 + 1.0)


def c0var_dd_upper(string, eps, d):
    """Upper bound for C_0^var(K_eps) with K embedded in R^d, d >= 1.

    1 + #big + c_d eps^{-1} sum of closed gap lengths, where
    c_d = 2 alpha_{d-1} / alpha_d (alpha_n the unit n-ball volume);
    c_1 = 1, c_2 = 4/pi, c_3 = 3/2.
    """
    if d < 1:
        raise ValueError("ambient dimension must be >= 1")
    i = _split_small(string, eps)
    n = component_count(string, eps)
    c_d = 2.0 * _ball_volume(d - 1) / _ball_volume(d)
    closed = float(string.lengths[:i] @ string.counts[:i])
    return float(n + c_d * closed / eps)


def c1var_product(string, eps):
    """C_1^var((K x [0, 1])_eps) in R^2, i.e. half its boundary length.

    Each of the N(eps) merged blocks contributes a stadium-like outer
    boundary of half-length 1 + pi eps; each closed gap keeps two
    boundary notches of half-length 2 eps arcsin(l / (2 eps)); interior
    segments of K add its measure.
    """
    i = _split_small(string, eps)
    n = component_count(string, eps)
    small = np.arcsin(string.lengths[:i] / (2.0 * eps))
    notches = 2.0 * eps * float(small @ string.counts[:i])
    return n * (1.0 + np.pi * eps) + notches + string.total_measure


def string_from_ifs(ifs, depth):
    """Exact string of the depth-n prefractal of a one-dimensional IFS.

    The prefractal is the union of the depth-n cylinder intervals of the
    hull; its gaps and Lebesgue measure are returned exactly (touching
    intervals merge, overlaps are tolerated and absorbed).
    """
    if ifs.dim != 1:
        raise ValueError("string_from_ifs needs a one-dimensional system")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    a, b = hull_interval(ifs)
    slopes = np.array([m.matrix[0, 0] for m in ifs.maps])
    offs = np.array([m.translation[0] for m in ifs.maps])
    slope = np.ones(1)
    off = np.zeros(1)
    for _ in range(depth):
        noff = (slope[:, None] * offs[None, :] + off[:, None]).ravel()
        slope = (slope[:, None] * slopes[None, :]).ravel()
        off = noff
    e1 = slope * a + off
    e2 = slope * b + off
    lo = np.minimum(e1, e2)
    hi = np.maximum(e1, e2)
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    gaps = lo[1:] - reach[:-1]
    gaps = gaps[gaps > _GAP_TOL * (b - a)]
    measure = (b - a) - float(gaps.sum())
    if gaps.size == 0:
        return FractalString(np.empty(0), np.empty(0, dtype=np.int64),
                             float(measure))
    return make_string(gaps, total_measure=measure)


def string_from_points(xs):
    """String of a finite point set on the line: gaps are the positive
    consecutive differences, measure is zero."""
    xs = np.unique(np.asarray(xs, dtype=float).ravel())
    if xs.size == 0:
        raise ValueError("need at least one point")
    gaps = np.diff(xs)
    gaps = gaps[gaps > 0.0]
    if gaps.size == 0:
        return FractalString(np.empty(0), np.empty(0, dtype=np.int64), 0.0)
    return make_string(gaps, total_measure=0.0)


_STRING_KEYS = {"lengths", "counts", "total_measure"}


def string_from_dict(doc):
    """Parse {"lengths": [...], "counts": [...]?, "total_measure": x?}."""
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    extra = set(doc) - _STRING_KEYS
    if extra:
        raise SchemaError(f"unknown keys: {sorted(extra)}")
    if "lengths" not in doc:
        raise SchemaError('missing "lengths"')
    lengths = doc["lengths"]
    if not isinstance(lengths, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool)
            for x in lengths):
        raise SchemaError('"lengths" must be a list of numbers')
    counts = doc.get("counts")
    if counts is not None:
        if (not isinstance(counts, list) or len(counts) != len(lengths)
                or not all(isinstance(c, int) and not isinstance(c, bool)
                           for c in counts)):
            raise SchemaError('"counts" must be a list of integers '
                              'matching "lengths"')
    measure = doc.get("total_measure", 0.0)
    if not isinstance(measure, (int, float)) or isinstance(measure, bool):
        raise SchemaError('"total_measure" must be a number')
    try:
        return make_string(lengths, counts, float(measure))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def string_to_dict(string):
    return {
        "lengths": [float(x) for x in string.lengths],
        "counts": [int(c) for c in string.counts],
        "total_measure": float(string.total_measure),
    }


def load_string(path):
    """Read a fractal-string JSON document from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return string_from_dict(doc)
