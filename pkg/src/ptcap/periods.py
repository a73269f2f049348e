"""Period conditions, Robin constants and edge lengths of exterior differentials.

For the exterior problem the Green function of the complement of the
extremal continuum ``E`` with pole at infinity is ``Re int omega`` with
``omega = sqrt(R(z)) dz`` and ``R = prod(z - b)/prod(z - a)``.  It vanishes
on ``E``, which gives one real condition ``Re int_p^q omega = 0`` for every
pair of points ``p, q`` joined inside ``E``; these are the period conditions
used to locate the branch points.  The imaginary parts measure harmonic
measure: each side of an edge of ``E`` carries ``|Im int omega|`` of the
total ``2 pi`` of the unit circle.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .quadratic import QuadraticDifferential, gauss_legendre01


def connection_residuals(qd: QuadraticDifferential, pairs: Iterable) -> np.ndarray:
    """``Re int_p^q omega`` along straight segments, one entry per pair."""
    return np.array([qd.segment_integral(p, q).real for p, q in pairs])


def edge_length(qd: QuadraticDifferential, p: complex, q: complex) -> float:
    """Harmonic length ``|Im int_p^q omega|`` of one side of an edge."""
    return abs(qd.segment_integral(p, q).imag)


def _tail_integral(qd, p, d, L, eps, nodes):
    """int_L^inf (eps sqrt(R(p + d r)) d - 1/r) dr, with r = L/u."""
    x, w = gauss_legendre01(nodes)
    tau = 1.0 / x
    vals = qd.sqrt_along(p, p + d * L, tau)
    f = (eps * vals * d - x / L) * L / (x * x)
    return complex(np.sum(w * f))


def robin_lead_along(qd: QuadraticDifferential, leaf: complex, direction: complex,
                     length: Optional[float] = None, tol: float = 1e-14):
    """``g'(infinity)`` from one path leaving ``leaf`` along ``direction``.

    ``g`` is the exterior map normalised by ``g(1) = leaf``.  Returns the
    value together with the asymptotic sign of the continued integrand; a
    sign of -1 means the path crossed the continuum an odd number of times.
    """
    d = direction / abs(direction)
    if length is None:
        spread = np.abs(qd.singular_points - leaf)
        length = float(max(spread.max(), 1e-3)) if spread.size else 1.0
    far = qd.sqrt_along(leaf, leaf + d * length, np.array([1e8]))[0] * (d * length * 1e8)
    eps = 1.0 if far.real > 0 else -1.0
    seg = qd.segment_integral(leaf, leaf + d * length, tol=tol)
    prev = None
    nodes = 32
    while nodes <= 2048:
        tail = _tail_integral(qd, leaf, d, length, eps, nodes)
        if prev is not None and abs(tail - prev) <= tol * max(1.0, abs(tail)):
            break
        prev = tail
        nodes *= 2
    log_lead = cmath.log(d) + math.log(length) - eps * seg - tail
    return cmath.exp(log_lead), eps


def robin_lead(qd: QuadraticDifferential, leaf: complex, direction: Optional[complex] = None,
               spread: Sequence[float] = (0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0)) -> complex:
    """``g'(infinity)`` of the exterior map with ``g(1) = leaf``.

    The modulus is the capacity.  Paths start at the leaf opposite to its
    critical trajectory; a few rotated paths guard against crossing the
    continuum, and the value shared by the majority of admissible paths wins.
    """
    if direction is None:
        c = qd.leading(leaf)
        direction = np.conj(c) / abs(c)
    values = []
    for psi in spread:
        val, eps = robin_lead_along(qd, leaf, direction * cmath.exp(1j * psi))
        if eps > 0:
            values.append(val)
        if len(values) >= 3:
            break
    if not values:
        raise ValueError("every path from the leaf crossed the continuum")
    best = max(values, key=lambda v: sum(abs(v - u) <= 1e-9 * abs(v) for u in values))
    return best


def log_capacity(qd: QuadraticDifferential, leaf: complex, direction: Optional[complex] = None) -> float:
    """Logarithm of the capacity of the continuum carrying ``qd``."""
    return math.log(abs(robin_lead(qd, leaf, direction)))
