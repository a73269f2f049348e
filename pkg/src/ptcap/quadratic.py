"""Rational quadratic differentials ``R(z) dz^2`` and their line integrals.

The extremal continua are unions of critical trajectories, the arcs along
which ``sqrt(R(z)) dz`` is purely imaginary.  For the exterior problem
``R(z) = prod(z - b_j) / prod(z - a_k)``; the interior problem, written in the
original coordinate, has ``R(z) = prod(z - b_j) / (C prod(z - a_k) z^2)``.
Both are represented by a constant, a list of zeros and a list of poles
(each repeated according to its multiplicity).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

_GL_CACHE: dict = {}


def gauss_legendre01(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = ((x + 1.0) / 2.0, w / 2.0)
    return _GL_CACHE[n]


def _key(z: complex, digits: int = 14):
    return (round(z.real, digits), round(z.imag, digits))


@dataclass(frozen=True)
class QuadraticDifferential:
    zeros: tuple
    poles: tuple
    constant: complex = 1.0 + 0j

    @classmethod
    def outer(cls, points: Sequence[complex], b_roots: Sequence[complex]) -> "QuadraticDifferential":
        return cls(tuple(complex(b) for b in b_roots), tuple(complex(a) for a in points), 1.0 + 0j)

    @classmethod
    def inner(cls, points, b_roots, C: complex) -> "QuadraticDifferential":
        poles = tuple(complex(a) for a in points) + (0j, 0j)
        return cls(tuple(complex(b) for b in b_roots), poles, 1.0 / complex(C))

    @cached_property
    def exponents(self) -> dict:
        """Distinct singular points mapped to their integer order (zeros > 0)."""
        ex: Counter = Counter()
        where: dict = {}
        for z in self.zeros:
            k = _key(z)
            ex[k] += 1
            where[k] = z
        for p in self.poles:
            k = _key(p)
            ex[k] -= 1
            where[k] = p
        return {where[k]: e for k, e in ex.items() if e != 0}

    @cached_property
    def singular_points(self) -> np.ndarray:
        return np.array(list(self.exponents), dtype=complex)

    def order_at(self, z: complex, tol: float = 1e-12) -> int:
        for c, e in self.exponents.items():
            if abs(c - z) <= tol * max(1.0, abs(c)):
                return e
        return 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.constant, dtype=complex)
        for c, e in self.exponents.items():
            out = out * (z - c) ** e
        return out

    def leading(self, p: complex) -> complex:
        """c in R(z) ~ c (z - p)^e near the singular point p."""
        out = complex(self.constant)
        for c, e in self.exponents.items():
            if abs(c - p) > 1e-12 * max(1.0, abs(p)):
                out *= (p - c) ** e
        return out

    def distance_to_singular(self, z: complex, exclude: Sequence[complex] = ()) -> float:
        pts = self.singular_points
        if exclude:
            mask = np.ones(pts.size, dtype=bool)
            for x in exclude:
                mask &= np.abs(pts - x) > 1e-12
            pts = pts[mask]
        if pts.size == 0:
            return np.inf
        return float(np.min(np.abs(pts - z)))

    def sqrt_along(self, p: complex, q: complex, tau: np.ndarray) -> np.ndarray:
        """sqrt(R) at z = p + (q - p) tau, continued along the segment from p.

        Factors sitting at an endpoint are expanded exactly, so ``tau`` may
        approach 0 or 1 without loss of accuracy.  Returns the values scaled by
        their endpoint powers; callers supply the matching weights.
        """
        tau = np.asarray(tau, dtype=float)
        z = p + (q - p) * tau
        out = np.full(tau.shape, np.sqrt(complex(self.constant)), dtype=complex)
        for c, e in self.exponents.items():
            h = 0.5 * e
            if abs(c - p) <= 1e-13 * max(1.0, abs(p)):
                out = out * complex(q - p) ** h * tau ** h
            elif abs(c - q) <= 1e-13 * max(1.0, abs(q)):
                out = out * complex(p - q) ** h * (1.0 - tau) ** h
            else:
                out = out * complex(p - c) ** h * ((z - c) / (p - c)) ** h
        return out

    def segment_integral(self, p: complex, q: complex, pieces: int = 2, nodes: int = 32,
                         tol: float = 1e-14, max_pieces: int = 256) -> complex:
        """Integral of sqrt(R) dz along the straight segment from p to q.

        Uses ``tau = sin^2(pi x / 2)``, which absorbs inverse square roots at
        both endpoints, with composite Gauss-Legendre in x; the number of
        pieces is doubled until two successive values agree.
        """
        prev = None
        while True:
            val = self._segment_rule(p, q, pieces, nodes)
            if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
                return val
            if pieces >= max_pieces:
                return val
            prev = val
            pieces *= 2

    def _segment_rule(self, p, q, pieces, nodes):
        x0, w0 = gauss_legendre01(nodes)
        x = (np.arange(pieces)[:, None] + x0[None, :]).ravel() / pieces
        w = np.tile(w0, pieces) / pieces
        s = np.sin(0.5 * np.pi * x)
        tau = s * s
        dtau = 0.5 * np.pi * np.sin(np.pi * x)
        vals = self.sqrt_along(p, q, tau)
        return complex(np.sum(w * vals * dtau) * (q - p))
