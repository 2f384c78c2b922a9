"""Built-in sets with known geometry.

Three kinds of entries:

* the classical sets (Cantor thirds, Cantor dust, Sierpinski gasket,
  Koch curve, filled square), each with its customary open set for
  tiling work,
* the digit-set family: numbers in [0, 1] whose base-n digits stay
  below m, together with its plane product with a full interval,
* the prescribed-exponent family: a square partitioned into a Cantor
  arrangement of full-height columns, each column cut into stacked
  open rectangular cells.  The parallel-set curvatures of the limit
  net have closed forms on every scale rung, with scaling exponents
  a (boundary components) and b (boundary length) chosen freely in
  0 < a <= b, 1 < b < 2, b <= a + 1.

The closed forms here are exact, which makes the family the reference
target for exponent-estimation checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon

from .errors import SampleBudgetError, ScaleRangeError
from .fractal_string import string_from_ifs
from .ifs import IFS, Similarity

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    ifs: IFS
    open_set: object  # interval tuple in R^1, shapely polygon in R^2


def _cantor():
    return IFS([Similarity(1.0 / 3.0, (0.0,)),
                Similarity(1.0 / 3.0, (2.0 / 3.0,))])


def _dust():
    corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    return IFS([Similarity(1.0 / 3.0, (2.0 * x / 3.0, 2.0 * y / 3.0))
                for x, y in corners])


def _gasket():
    corners = [(0.0, 0.0), (1.0, 0.0), (0.5, _SQRT3 / 2.0)]
    return IFS([Similarity(0.5, (x / 2.0, y / 2.0)) for x, y in corners])


def _koch():
    return IFS([
        Similarity(1.0 / 3.0, (0.0, 0.0)),
        Similarity(1.0 / 3.0, (1.0 / 3.0, 0.0), rotation=math.pi / 3.0),
        Similarity(1.0 / 3.0, (0.5, _SQRT3 / 6.0), rotation=-math.pi / 3.0),
        Similarity(1.0 / 3.0, (2.0 / 3.0, 0.0)),
    ])


def _square():
    return IFS([Similarity(0.5, t) for t in
                [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]])


_BUILDERS = {
    "cantor": (_cantor, lambda: (0.0, 1.0)),
    "dust": (_dust, lambda: Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])),
    "gasket": (_gasket,
               lambda: Polygon([(0, 0), (1, 0), (0.5, _SQRT3 / 2.0)])),
    "koch": (_koch,
             lambda: Polygon([(0, 0), (1, 0), (0.5, _SQRT3 / 6.0)])),
    "square": (_square, lambda: Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])),
}


def standard_names():
    return tuple(sorted(_BUILDERS))


def standard_set(name):
    try:
        ifs_builder, open_builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown set {name!r}; choose from {standard_names()}") from None
    return CatalogEntry(name=name, ifs=ifs_builder(), open_set=open_builder())


def square_parallel_curvatures(eps):
    """Exact parallel-set curvatures of the filled unit square.

    The parallel body is the square grown by eps with quarter-disc
    corners, so everything is elementary and convex.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    c1 = 2.0 + math.pi * eps
    return {
        "c0": 1.0, "c0var": 1.0,
        "c1": c1, "c1var": c1,
        "c2": 1.0 + 4.0 * eps + math.pi * eps * eps,
    }


@dataclass(frozen=True, eq=False)
class DigitSetFamily:
    """Numbers in [0, 1] whose base-n digits all lie below m."""
    n: int
    m: int
    ifs: IFS = field(repr=False)
    product_ifs: IFS = field(repr=False)
    dimension: float

    @property
    def expected_exponents(self):
        # the plane product with a unit interval adds one to each
        # curvature scaling exponent
        return {"s0": self.dimension,
                "s1": 1.0 + self.dimension,
                "s2": 1.0 + self.dimension}

    def string(self, depth):
        return string_from_ifs(self.ifs, depth)


def digit_set(n, m):
    if not (isinstance(n, int) and isinstance(m, int)):
        raise ValueError("n and m must be integers")
    if n < 2 or not 1 <= m <= n:
        raise ValueError("digit sets need n >= 2 and 1 <= m <= n")
    base = IFS([Similarity(1.0 / n, (k / n,)) for k in range(m)])
    product = IFS([Similarity(1.0 / n, (i / n, j / n))
                   for i in range(m) for j in range(n)])
    dim = 0.0 if m == 1 else math.log(m) / math.log(n)
    return DigitSetFamily(n=n, m=m, ifs=base, product_ifs=product,
                          dimension=dim)


def block_family_dimension(k, m):
    """Similarity dimension log(2^k + 8m) / log(2^k) of the square
    block family: 2^k + 8m blocks retained at ratio 2^-k, with m
    limited so the retained blocks fit."""
    if not (isinstance(k, int) and isinstance(m, int)):
        raise ValueError("k and m must be integers")
    if k < 2:
        raise ValueError("the block family needs k >= 2")
    top = 2 * 4 ** (k - 2) - 2 ** k + 1
    if not 0 <= m <= top:
        raise ValueError(f"m must lie in [0, {top}] for k = {k}")
    return math.log(2 ** k + 8 * m) / math.log(2 ** k)


class PrescribedExponentFamily:
    """Square carved into a Cantor curtain of stacked rectangular cells.

    The unit square splits recursively: a block of width q^g holds a
    central full-height column of width (1 - 2q) q^g flanked by two
    blocks of width q^(g+1).  The generation-g column is divided into
    t_g congruent open cells; the limit net (square minus all cells)
    has measure zero, and for eps on rung n, i.e. between half the
    cell widths of generations n+1 and n, its parallel set has

      C0var  = 1 + sum_{g <= n} 2^g t_g
      C1var  = 2 + pi eps + sum 2^g (1 + t_g w_g) - 4 eps sum 2^g t_g
      C2     = (1 + 2 eps)-square area minus the eroded open cells

    exactly, because each open cell erodes to a sharp rectangle
    independently of its neighbours.  The counts t_g are chosen so the
    exponents come out at s0 = a and s1 = s2 = b.
    """

    def __init__(self, a, b, max_generation=120):
        a, b = float(a), float(b)
        if not a > 0.0:
            raise ValueError("a must be positive")
        if not 1.0 < b < 2.0:
            raise ValueError("b must lie strictly between 1 and 2")
        if not a <= b:
            raise ValueError("the family needs a <= b")
        if not b <= a + 1.0:
            raise ValueError("the family needs b <= a + 1")
        self.a = a
        self.b = b
        self.q = 2.0 ** (-1.0 / (b - 1.0))
        self.max_generation = int(max_generation)

    def __repr__(self):
        return (f"PrescribedExponentFamily(a={self.a:g}, b={self.b:g}, "
                f"q={self.q:.6g})")

    @property
    def expected_exponents(self):
        return {"s0": self.a, "s1": self.b, "s2": self.b}

    @property
    def params(self):
        return {"a": self.a, "b": self.b, "q": self.q}

    def hole_width(self, g):
        return self.q ** g * (1.0 - 2.0 * self.q)

    def hole_count(self, g):
        x = (self.q ** ((self.b - self.a - 1.0) * g)
             / (1.0 - 2.0 * self.q))
        t = int(math.floor(x))
        if t < 1:
            raise ArithmeticError(
                f"generation {g} would hold no cells; parameters "
                f"a={self.a:g}, b={self.b:g} degenerate here")
        return t

    def rung_scale(self, n):
        """eps_n: generation n cells open exactly for eps < eps_n."""
        return 0.5 * self.hole_width(n)

    def _rung(self, eps):
        """Deepest open generation at eps, -1 when none is open."""
        eps = float(eps)
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        if eps >= self.rung_scale(0):
            return -1
        guess = math.log(2.0 * eps / (1.0 - 2.0 * self.q)) / math.log(self.q)
        n = max(int(math.floor(guess)), 0)
        while n > 0 and eps >= self.rung_scale(n):
            n -= 1
        while eps < self.rung_scale(n + 1):
            n += 1
        if n > self.max_generation:
            raise ScaleRangeError(
                f"eps {eps:g} lies below generation "
                f"{self.max_generation}; raise max_generation")
        return n

    def c0var(self, eps):
        n = self._rung(eps)
        if n < 0:
            return 1.0
        return 1.0 + float(sum(2 ** g * self.hole_count(g)
                               for g in range(n + 1)))

    def c1var(self, eps):
        eps = float(eps)
        n = self._rung(eps)
        base = 2.0 + math.pi * eps
        if n < 0:
            return base
        walls = sum(2 ** g * (1.0 + self.hole_count(g) * self.hole_width(g))
                    for g in range(n + 1))
        teeth = sum(2 ** g * self.hole_count(g) for g in range(n + 1))
        return base + walls - 4.0 * eps * float(teeth)

    def c2(self, eps):
        eps = float(eps)
        n = self._rung(eps)
        area = 1.0 + 4.0 * eps + math.pi * eps * eps
        for g in range(n + 1):
            t = self.hole_count(g)
            area -= (2 ** g * (self.hole_width(g) - 2.0 * eps)
                     * (1.0 - 2.0 * eps * t))
        return area

    def truncation_covered(self, eps, cutoff):
        """Whether the uncut blocks past `cutoff` vanish inside the
        eps-parallel set, making segment geometry exact at eps."""
        return self.q ** (cutoff + 1) <= 2.0 * float(eps)

    def segments(self, cutoff, budget=5_000_000):
        """Wall segments (x0, y0, x1, y1) of the net truncated after
        generation `cutoff`: the outer square, both edges of every
        column, and the floors between stacked cells."""
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        total = 4 + sum(2 ** g * (self.hole_count(g) + 1)
                        for g in range(cutoff + 1))
        if total > budget:
            raise SampleBudgetError(
                f"{total} wall segments exceed the {budget} budget")
        segs = [(0.0, 0.0, 1.0, 0.0), (1.0, 0.0, 1.0, 1.0),
                (1.0, 1.0, 0.0, 1.0), (0.0, 1.0, 0.0, 0.0)]
        stack = [(0, 0.0)]
        while stack:
            g, x0 = stack.pop()
            if g > cutoff:
                continue
            xa = x0 + self.q ** (g + 1)
            xb = xa + self.hole_width(g)
            segs.append((xa, 0.0, xa, 1.0))
            segs.append((xb, 0.0, xb, 1.0))
            t = self.hole_count(g)
            for j in range(1, t):
                y = j / t
                segs.append((xa, y, xb, y))
            stack.append((g + 1, x0))
            stack.append((g + 1, xb))
        return np.array(segs, dtype=float)

    def sample_points(self, cutoff, pitch, budget=5_000_000):
        """Points along the truncated net at most `pitch` apart."""
        if pitch <= 0.0:
            raise ValueError("pitch must be positive")
        segs = self.segments(cutoff, budget=budget)
        lengths = np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1])
        steps = np.maximum(np.ceil(lengths / pitch).astype(int), 1)
        if int(steps.sum()) + len(segs) > budget:
            raise SampleBudgetError(
                f"net sampling at pitch {pitch:g} exceeds {budget} points")
        out = []
        for (x0, y0, x1, y1), k in zip(segs, steps):
            t = np.linspace(0.0, 1.0, k + 1)
            out.append(np.column_stack((x0 + t * (x1 - x0),
                                        y0 + t * (y1 - y0))))
        return np.concatenate(out, axis=0)


def prescribed_exponent_family(a, b, max_generation=120):
    return PrescribedExponentFamily(a, b, max_generation=max_generation)


def catalog_entry(ref):
    """Resolve a catalog reference.

    Accepts a standard name ("gasket"), "digits:n=4,m=3" for the
    digit-set family, or "prescribed:a=1.2,b=1.7" for the
    prescribed-exponent family.
    """
    if ref in _BUILDERS:
        return standard_set(ref)
    kind, sep, rest = ref.partition(":")
    if not sep:
        raise ValueError(
            f"unknown catalog reference {ref!r}; use one of "
            f"{standard_names()}, digits:n=..,m=.., or prescribed:a=..,b=..")
    params = {}
    for item in rest.split(","):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq or not key or key in params:
            raise ValueError(f"malformed catalog parameters in {ref!r}")
        params[key] = value.strip()
    if kind == "digits":
        if set(params) != {"n", "m"}:
            raise ValueError('"digits" takes exactly n=.. and m=..')
        try:
            n, m = int(params["n"]), int(params["m"])
        except ValueError:
            raise ValueError("digit-set parameters must be integers") from None
        return digit_set(n, m)
    if kind == "prescribed":
        if set(params) != {"a", "b"}:
            raise ValueError('"prescribed" takes exactly a=.. and b=..')
        try:
            a, b = float(params["a"]), float(params["b"])
        except ValueError:
            raise ValueError(
                "prescribed-family parameters must be numbers") from None
        return prescribed_exponent_family(a, b)
    raise ValueError(f"unknown catalog family {kind!r}")
