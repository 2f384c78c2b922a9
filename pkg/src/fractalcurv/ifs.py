"""Iterated function systems of contracting similarities in R^1 and R^2.

A similarity is x -> r * O * x + t with 0 < r < 1 and O orthogonal.  In
R^2 the orthogonal part is a rotation optionally composed with a
reflection across the x-axis; in R^1 it is +-1 (reflection only).  The
module provides the similarity algebra (compose, fixed point), the Moran
dimension of a system, certified hull enclosures, attractor point
sampling at a prescribed resolution, and a strict JSON interchange
format.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import SampleBudgetError, SchemaError

Word = tuple  # tuple of map indices, root word is ()

_MORAN_TOL = 1e-12


@dataclass(frozen=True)
class Similarity:
    """Contracting similarity map of R^1 or R^2.

    The linear part is ratio * Rot(rotation) * diag(1, -1)^reflection in
    R^2 and ratio * (-1)^reflection in R^1 (rotation must be 0 there).
    """

    ratio: float
    translation: tuple
    rotation: float = 0.0
    reflection: bool = False

    def __post_init__(self):
        object.__setattr__(self, "translation",
                           tuple(float(x) for x in self.translation))
        object.__setattr__(self, "ratio", float(self.ratio))
        object.__setattr__(self, "rotation", float(self.rotation))
        object.__setattr__(self, "reflection", bool(self.reflection))
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"contraction ratio must be in (0, 1), got {self.ratio}")
        if self.dim not in (1, 2):
            raise ValueError(f"only R^1 and R^2 are supported, got dim {self.dim}")
        if self.dim == 1 and self.rotation != 0.0:
            raise ValueError("rotation is undefined for maps of R^1")

    @property
    def dim(self):
        return len(self.translation)

    @property
    def matrix(self):
        """Linear part as a (dim, dim) array."""
        if self.dim == 1:
            sign = -1.0 if self.reflection else 1.0
            return np.array([[self.ratio * sign]])
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        if self.reflection:
            rot = rot @ np.diag([1.0, -1.0])
        return self.ratio * rot

    def apply(self, points):
        """Apply to an (n, dim) array or a single (dim,) point."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def compose(self, other):
        """Return self o other (apply other first)."""
        if self.dim != other.dim:
            raise ValueError("cannot compose maps of different dimensions")
        ratio = self.ratio * other.ratio
        reflection = self.reflection != other.reflection
        if self.dim == 1:
            rotation = 0.0
        else:
            # Rot(a) D^e Rot(b) D^f = Rot(a + (-1)^e b) D^(e xor f)
            sign = -1.0 if self.reflection else 1.0
            rotation = self.rotation + sign * other.rotation
        translation = tuple(self.apply(np.asarray(other.translation)))
        return Similarity(ratio, translation, rotation, reflection)

    def fixed_point(self):
        """Unique fixed point, as a (dim,) array."""
        d = self.dim
        lhs = np.eye(d) - self.matrix
        return np.linalg.solve(lhs, np.asarray(self.translation))


@dataclass(frozen=True)
class IFS:
    """Finite system of contracting similarities sharing one ambient dimension."""

    maps: tuple

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        dims = {m.dim for m in self.maps}
        if len(dims) != 1:
            raise ValueError(f"maps mix ambient dimensions {sorted(dims)}")

    @property
    def dim(self):
        return self.maps[0].dim

    @property
    def ratios(self):
        return np.array([m.ratio for m in self.maps])


@dataclass(frozen=True, eq=False)
class PointSample:
    """Point cloud on an attractor: every attractor point lies within
    `resolution` of some sample point, and every sample point lies on the
    attractor exactly."""

    points: np.ndarray
    resolution: float


def moran_dimension(system):
    """Similarity dimension D solving sum_i r_i^D = 1.

    Accepts an IFS or a sequence of ratios.  The residual of the returned
    root is below 1e-12.
    """
    if isinstance(system, IFS):
        ratios = system.ratios
    else:
        ratios = np.asarray(list(system), dtype=float)
    if ratios.size == 0:
        raise ValueError("need at least one contraction ratio")
    if np.any(ratios <= 0.0) or np.any(ratios >= 1.0):
        raise ValueError("ratios must lie in (0, 1)")
    n = ratios.size
    if n == 1:
        return 0.0

    def f(s):
        return np.power(ratios, s).sum() - 1.0

    def fprime(s):
        powers = np.power(ratios, s)
        return float(powers @ np.log(ratios))

    # f is strictly decreasing; f(0) = n - 1 > 0 and the root is at most
    # log n / log(1/max r) with equality for equal ratios, so pad the
    # bracket slightly to keep a sign change under roundoff.
    hi = np.log(n) / np.log(1.0 / ratios.max()) * (1.0 + 1e-9) + 1e-12
    s = brentq(f, 0.0, hi, xtol=1e-14, rtol=8.9e-16)
    for _ in range(3):  # Newton polish to the residual target
        s = s - f(s) / fprime(s)
    if abs(f(s)) > _MORAN_TOL:
        raise ArithmeticError(f"Moran root residual {f(s):.3e} above 1e-12")
    return float(s)


def hull_interval(ifs):
    """Exact convex hull [a, b] of a one-dimensional attractor.

    The hull is the unique fixed interval of J -> hull(U_i S_i(J)); the
    iteration contracts with factor max r_i, so it is run to floating
    point stationarity.
    """
    if ifs.dim != 1:
        raise ValueError("hull_interval needs a one-dimensional system")
    slopes = np.array([m.matrix[0, 0] for m in ifs.maps])
    offs = np.array([m.translation[0] for m in ifs.maps])
    fps = offs / (1.0 - slopes)
    a, b = float(fps.min()), float(fps.max())
    for _ in range(100000):
        ia = slopes * a + offs
        ib = slopes * b + offs
        na = float(min(ia.min(), ib.min()))
        nb = float(max(ia.max(), ib.max()))
        if na == a and nb == b:
            break
        a, b = na, nb
    return a, b


def hull_ball(ifs):
    """Certified enclosing ball (center, radius) of a planar attractor.

    Every attractor point x satisfies |x - c| <= max_i |S_i(c) - c| / (1 - max r),
    for any c; the centroid of the map fixed points keeps the bound tight.
    """
    if ifs.dim != 2:
        raise ValueError("hull_ball needs a two-dimensional system")
    fps = np.stack([m.fixed_point() for m in ifs.maps])
    center = fps.mean(axis=0)
    moved = np.stack([m.apply(center) for m in ifs.maps])
    step = np.linalg.norm(moved - center, axis=1).max()
    rmax = ifs.ratios.max()
    return center, float(step / (1.0 - rmax))


def diameter(ifs):
    """Diameter of the certified hull enclosure (exact in R^1)."""
    if ifs.dim == 1:
        a, b = hull_interval(ifs)
        return b - a
    _, radius = hull_ball(ifs)
    return 2.0 * radius


def sample_attractor(ifs, delta, budget=5_000_000):
    """Sample the attractor to resolution delta.

    Words are expanded breadth first and a word omega terminates once
    r_omega * diam <= delta; the representative point S_omega(p0) with p0
    the fixed point of the first map lies on the attractor, and the
    terminal cylinder around it has diameter <= delta.  Raises
    SampleBudgetError when the final sample size provably exceeds budget.
    """
    if delta <= 0.0:
        raise ValueError("resolution delta must be positive")
    d = ifs.dim
    diam = diameter(ifs)
    p0 = ifs.maps[0].fixed_point()
    if diam <= delta:
        return PointSample(p0[None, :].copy(), float(delta))

    lin = np.stack([m.matrix for m in ifs.maps])
    off = np.stack([np.asarray(m.translation, dtype=float) for m in ifs.maps])
    rat = ifs.ratios
    n_maps = len(ifs.maps)

    mats = np.eye(d)[None, :, :]
    trans = np.zeros((1, d))
    scales = np.ones(1)
    chunks = []
    emitted = 0
    while scales.size:
        done = scales * diam <= delta
        if done.any():
            pts = mats[done] @ p0 + trans[done]
            chunks.append(pts)
            emitted += pts.shape[0]
            keep = ~done
            mats, trans, scales = mats[keep], trans[keep], scales[keep]
        if not scales.size:
            break
        # every active word yields at least one terminal descendant, so
        # emitted + N * active is a lower bound on the final sample size
        if emitted + scales.size * n_maps > budget:
            raise SampleBudgetError(
                f"sampling at resolution {delta:g} exceeds the "
                f"{budget}-point budget")
        trans = (np.einsum("nij,kj->nki", mats, off)
                 + trans[:, None, :]).reshape(-1, d)
        mats = np.einsum("nij,kjl->nkil", mats, lin).reshape(-1, d, d)
        scales = (scales[:, None] * rat[None, :]).reshape(-1)
    return PointSample(np.concatenate(chunks, axis=0), float(delta))


def cylinder_maps(ifs, depth):
    """All composed maps S_omega for |omega| == depth, with their words.

    Returns a list of (word, Similarity) in lexicographic word order.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    out = []
    for word in itertools.product(range(len(ifs.maps)), repeat=depth):
        sim = None
        for idx in word:
            sim = ifs.maps[idx] if sim is None else sim.compose(ifs.maps[idx])
        out.append((word, sim))
    return out


def cylinder_hulls(ifs, depth):
    """Axis-aligned boxes enclosing each depth-`depth` cylinder S_omega(A).

    In R^1 the boxes are the exact hull intervals; in R^2 they enclose
    the certified hull ball and carry its slack.  Returns a list of
    (word, (lo, hi)) with lo/hi arrays of shape (dim,).
    """
    out = []
    if ifs.dim == 1:
        a, b = hull_interval(ifs)
        for word, sim in cylinder_maps(ifs, depth):
            if sim is None:  # depth == 0
                lo, hi = a, b
            else:
                ea, eb = sim.apply(np.array([a]))[0], sim.apply(np.array([b]))[0]
                lo, hi = min(ea, eb), max(ea, eb)
            out.append((word, (np.array([lo]), np.array([hi]))))
        return out
    center, radius = hull_ball(ifs)
    for word, sim in cylinder_maps(ifs, depth):
        if sim is None:
            c, r = center, radius
        else:
            c, r = sim.apply(center), sim.ratio * radius
        out.append((word, (c - r, c + r)))
    return out


def embed_in_plane(ifs):
    """Embed a one-dimensional system on the x-axis of R^2.

    x -> -r x + t becomes rotation pi composed with the x-axis
    reflection, which restricts to the x-axis as x -> -x.
    """
    if ifs.dim != 1:
        raise ValueError("embed_in_plane expects a one-dimensional system")
    maps = []
    for m in ifs.maps:
        if m.reflection:
            maps.append(Similarity(m.ratio, (m.translation[0], 0.0),
                                   rotation=np.pi, reflection=True))
        else:
            maps.append(Similarity(m.ratio, (m.translation[0], 0.0)))
    return IFS(tuple(maps))


_TOP_KEYS = {"dim", "maps"}
_MAP_KEYS = {"r", "theta", "reflect", "t"}


def ifs_from_dict(doc):
    """Parse the strict JSON form {"dim": 1|2, "maps": [{...}]}.

    Each map needs "r" and "t"; "theta" and "reflect" are optional and
    default to 0 and false.  Unknown keys are rejected.
    """
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise SchemaError(f"unknown top-level keys: {sorted(extra)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise SchemaError(f"missing top-level keys: {sorted(missing)}")
    dim = doc["dim"]
    if dim not in (1, 2):
        raise SchemaError(f'"dim" must be 1 or 2, got {dim!r}')
    raw_maps = doc["maps"]
    if not isinstance(raw_maps, list) or not raw_maps:
        raise SchemaError('"maps" must be a non-empty list')
    maps = []
    for i, entry in enumerate(raw_maps):
        if not isinstance(entry, dict):
            raise SchemaError(f"maps[{i}] must be an object")
        extra = set(entry) - _MAP_KEYS
        if extra:
            raise SchemaError(f"maps[{i}] has unknown keys: {sorted(extra)}")
        for key in ("r", "t"):
            if key not in entry:
                raise SchemaError(f'maps[{i}] is missing "{key}"')
        r = entry["r"]
        if not isinstance(r, (int, float)) or isinstance(r, bool):
            raise SchemaError(f'maps[{i}]["r"] must be a number')
        t = entry["t"]
        if (not isinstance(t, list) or len(t) != dim
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                           for x in t)):
            raise SchemaError(f'maps[{i}]["t"] must be a list of {dim} numbers')
        theta = entry.get("theta", 0.0)
        if not isinstance(theta, (int, float)) or isinstance(theta, bool):
            raise SchemaError(f'maps[{i}]["theta"] must be a number')
        if dim == 1 and theta != 0:
            raise SchemaError(f'maps[{i}]["theta"] must be 0 in dimension 1')
        reflect = entry.get("reflect", False)
        if not isinstance(reflect, bool):
            raise SchemaError(f'maps[{i}]["reflect"] must be a boolean')
        try:
            maps.append(Similarity(float(r), tuple(float(x) for x in t),
                                   float(theta), reflect))
        except ValueError as exc:
            raise SchemaError(f"maps[{i}]: {exc}") from exc
    return IFS(tuple(maps))


def ifs_to_dict(ifs):
    """Inverse of ifs_from_dict (defaults are written explicitly)."""
    return {
        "dim": ifs.dim,
        "maps": [
            {"r": m.ratio, "theta": m.rotation, "reflect": m.reflection,
             "t": list(m.translation)}
            for m in ifs.maps
        ],
    }


def load_ifs(path):
    """Read an IFS JSON document from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return ifs_from_dict(doc)
