"""Curvature scaling exponents from sampled parallel-set data.

Given samples (eps_i, v_i) of a curvature quantity v(eps) ~ eps^(k - s)
of order k, ``fit_exponent`` estimates the scaling exponent s by an OLS
fit in log-log coordinates and reports the residual oscillation
amplitude, and ``fit_average_exponent`` estimates the averaged exponent
a <= s defined through the Cesaro integral

    A(s, delta) = (1 / ln(eps_max / delta))
                  * integral_delta^eps_max eps^(s - k - 1) v(eps) d eps,

namely the s at which A(s, delta) neither decays nor grows as delta -> 0.
``fractal_curvature`` evaluates the (average) limit value itself at a
given s.  The integrand is interpolated piecewise as a power law, which
makes every integral closed form and the estimators exact on pure power
laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScaleRangeError

_MIN_ROWS = 8
_MIN_DECADES = 2.0
_Q_TOL = 1e-12


@dataclass(frozen=True)
class ExponentFit:
    k: int
    s_hat: float
    stderr: float
    oscillation: float
    rows_used: int


@dataclass(frozen=True)
class AverageExponentFit:
    k: int
    a_hat: float
    rows_used: int


def _clean(eps, values):
    """Sort by eps descending and keep rows with eps > 0, v > 0."""
    eps = np.asarray(eps, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if eps.shape != values.shape:
        raise ValueError("eps and values must have equal length")
    keep = (eps > 0.0) & (values > 0.0) & np.isfinite(eps) & np.isfinite(values)
    eps, values = eps[keep], values[keep]
    order = np.argsort(eps)[::-1]
    return eps[order], values[order]


def _guard(eps):
    if eps.size < _MIN_ROWS:
        raise ScaleRangeError(
            f"insufficient scale range: only {eps.size} positive rows, "
            f"need at least {_MIN_ROWS}")
    decades = np.log10(eps.max() / eps.min())
    if decades < _MIN_DECADES:
        raise ScaleRangeError(
            f"insufficient scale range: {decades:.2f} decades of eps, "
            f"need at least {_MIN_DECADES:.0f}")


def _ols(x, y):
    """Slope, intercept, classic slope standard error, residuals."""
    n = x.size
    xbar, ybar = x.mean(), y.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float((x - xbar) @ (y - ybar) / sxx)
    intercept = ybar - slope * xbar
    resid = y - (slope * x + intercept)
    if n > 2:
        stderr = float(np.sqrt((resid @ resid) / (n - 2) / sxx))
    else:
        stderr = 0.0
    return slope, intercept, stderr, resid


def fit_exponent(eps, values, k):
    """Estimate the order-k scaling exponent s from v(eps) ~ eps^(k - s).

    Nonpositive rows are dropped before the log-log OLS fit; at least 8
    positive rows spanning two decades of eps are required.  The
    oscillation field is the maximum absolute log-residual, a gauge of
    how far the data is from a clean power law.
    """
    eps, values = _clean(eps, values)
    _guard(eps)
    slope, _, stderr, resid = _ols(np.log(eps), np.log(values))
    return ExponentFit(
        k=int(k),
        s_hat=float(k - slope),
        stderr=stderr,
        oscillation=float(np.abs(resid).max()),
        rows_used=int(eps.size),
    )


def _piece_integrals(eps, values, k, s):
    """Closed-form integral_eps2^eps1 eps^(s-k-1) v(eps) d eps per gap.

    v is interpolated as v1 (eps/eps1)^p on each [eps2, eps1]; the piece
    integral is v1 eps1^(s-k) (1 - rho^q) / q with rho = eps2/eps1 and
    q = s - k + p, continued logarithmically across q = 0.
    """
    e1, e2 = eps[:-1], eps[1:]
    v1, v2 = values[:-1], values[1:]
    rho = e2 / e1
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(rho < 1.0, np.log(v2 / v1) / np.log(rho), 0.0)
    q = (s - k) + p
    lead = v1 * np.power(e1, s - k)
    small = np.abs(q) < _Q_TOL
    out = np.empty_like(lead)
    qs = np.where(small, 1.0, q)
    out = lead * (1.0 - np.power(rho, qs)) / qs
    out[small] = (lead * -np.log(rho))[small]
    return out


def cesaro_average(eps, values, k, s, delta=None):
    """A(s, delta) down to delta (default: the smallest sampled eps)."""
    eps, values = _clean(eps, values)
    if eps.size < 2:
        raise ScaleRangeError("insufficient scale range: need at least 2 "
                              "positive rows for the averaged integral")
    if delta is None:
        delta = float(eps.min())
    if not eps.min() <= delta < eps.max():
        raise ValueError("delta must lie inside the sampled eps range")
    pieces = _piece_integrals(eps, values, k, s)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    # integral down to an arbitrary delta: whole pieces above it plus a
    # partial piece, evaluated by the same closed form
    j = int(np.searchsorted(-eps, -delta, side="left"))  # eps[j] <= delta
    total = cum[j - 1] if j > 0 else 0.0
    if eps[j] < delta:  # partial piece from eps[j-1] down to delta
        sub_eps = np.array([eps[j - 1], delta])
        frac = (np.log(delta) - np.log(eps[j - 1])) / (np.log(eps[j])
                                                       - np.log(eps[j - 1]))
        sub_val = np.array([values[j - 1],
                            values[j - 1] * (values[j] / values[j - 1]) ** frac])
        total += float(_piece_integrals(sub_eps, sub_val, k, s)[0])
    else:
        total = cum[j]
    return float(total / np.log(eps.max() / delta))


def _window_slope(eps, values, k, s):
    """OLS slope of log A(s, delta) against log delta over the smallest
    sampled deltas (the lowest decade, at least 4 rows)."""
    pieces = _piece_integrals(eps, values, k, s)
    integrals = np.cumsum(pieces)
    deltas = eps[1:]
    avg = integrals / np.log(eps.max() / deltas)
    in_low_decade = deltas < 10.0 * deltas.min()
    if in_low_decade.sum() >= 4:
        sel = in_low_decade
    else:
        sel = np.zeros(deltas.size, dtype=bool)
        sel[-max(4, deltas.size // 3):] = True
    x = np.log(deltas[sel])
    y = np.log(avg[sel])
    slope, _, _, _ = _ols(x, y)
    return slope


def fit_average_exponent(eps, values, k, tol=1e-9):
    """Estimate the averaged exponent a_k by bisection on s.

    For s below the critical value A(s, delta) blows up as delta -> 0
    (log-log slope about s - a), above it the slope is positive but
    tends to zero; the root of the windowed slope is the estimate.  The
    result is clamped at 0.
    """
    eps, values = _clean(eps, values)
    _guard(eps)
    lo = 0.0
    if _window_slope(eps, values, k, lo) >= 0.0:
        return AverageExponentFit(k=int(k), a_hat=0.0, rows_used=int(eps.size))
    # an upper bracket: start a bit above the OLS estimate and widen
    slope, _, _, _ = _ols(np.log(eps), np.log(values))
    hi = max(k - slope, 0.0) + 0.5
    for _ in range(60):
        if _window_slope(eps, values, k, hi) > 0.0:
            break
        hi += 1.0
    else:
        raise ScaleRangeError("averaged exponent bracket not found; the "
                              "data decays faster than any power law here")
    for _ in range(80):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _window_slope(eps, values, k, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return AverageExponentFit(k=int(k), a_hat=float(0.5 * (lo + hi)),
                              rows_used=int(eps.size))


def fractal_curvature(eps, values, k, s, averaged=False):
    """Limit value of eps^(s-k) v(eps): the order-k fractal curvature.

    Direct mode averages eps^(s-k) v over the lowest sampled decade;
    averaged mode returns the Cesaro average A(s, delta_min).  Both are
    exact when v is a pure power law of exponent k - s.
    """
    if averaged:
        return cesaro_average(eps, values, k, s)
    eps, values = _clean(eps, values)
    if eps.size == 0:
        raise ScaleRangeError("insufficient scale range: no positive rows")
    low = eps < 10.0 * eps.min()
    scaled = np.power(eps[low], s - k) * values[low]
    return float(scaled.mean())
