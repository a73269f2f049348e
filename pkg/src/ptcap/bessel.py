"""J0 by its ascending series, its first zero, and the moment weights delta_n."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

J0_TERMS = 40
DELTA_MAX_N = 200


def _series_coeffs(order: int, terms: int = J0_TERMS) -> np.ndarray:
    """Coefficients of J_order(x) = sum_k c_k (x/2)^(2k + order)."""
    k = np.arange(terms)
    lg = np.array([math.lgamma(kk + 1) + math.lgamma(kk + order + 1) for kk in k])
    return (-1.0) ** k * np.exp(-lg)


_J0C = _series_coeffs(0)
_J1C = _series_coeffs(1)


def _ascending(c, x, order):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 12.0):
        raise ValueError("the ascending series is used for |x| <= 12 only")
    u = (x / 2.0) ** 2
    acc = np.zeros_like(u)
    for ck in c[::-1]:
        acc = acc * u + ck
    return acc * (x / 2.0) ** order


def j0_series(x):
    """Bessel J0 from its ascending series (|x| <= 12)."""
    return _ascending(_J0C, x, 0)


def j1_series(x):
    return _ascending(_J1C, x, 1)


@lru_cache(maxsize=None)
def j0_zero() -> float:
    """First positive zero of J0, bisection on [2, 3] down to adjacent floats."""
    lo, hi = 2.0, 3.0
    f_lo = float(j0_series(lo))
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = float(j0_series(mid))
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo if abs(float(j0_series(lo))) <= abs(float(j0_series(hi))) else hi


def _integrand(r, p):
    j = j0_zero()
    return j0_series(j * r) ** 2 * r ** p


@lru_cache(maxsize=None)
def _moment(p: int) -> float:
    val, _ = integrate.quad(_integrand, 0.0, 1.0, args=(p,), epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def moment_midpoint(p: int, n_points: int = 1_000_000) -> float:
    """The same moment by the composite midpoint rule (an independent check)."""
    r = (np.arange(n_points) + 0.5) / n_points
    return float(np.sum(_integrand(r, p)) / n_points)


def delta_n(n: int) -> float:
    """``n^2 int J0^2(j0 r) r^(2n-1) dr / int J0^2(j0 r) r dr``."""
    if not 1 <= n <= DELTA_MAX_N:
        raise ValueError(f"n must lie in [1, {DELTA_MAX_N}]")
    if n == 1:
        return 1.0
    return n * n * _moment(2 * n - 1) / _moment(1)


def delta_midpoint(n: int, n_points: int = 1_000_000) -> float:
    """delta_n with both moments from the midpoint rule."""
    return n * n * moment_midpoint(2 * n - 1, n_points) / moment_midpoint(1, n_points)


def delta_table(n_max: int) -> np.ndarray:
    """``delta_1 .. delta_{n_max}``."""
    return np.array([delta_n(n) for n in range(1, n_max + 1)])
