"""Truncated complex power series and the ray-equation jets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _jets
from .errors import BranchPointError, NearPoleError, SingularSeriesError

DEFAULT_ORDER = 40
POLE_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ComplexSeries:
    """A truncated series ``sum_k coeffs[k] * t**(k + lead_exponent)``."""

    coeffs: np.ndarray
    lead_exponent: int = 0
    radius_estimate: Optional[float] = None
    order: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        if self.radius_estimate is not None and not self.radius_estimate > 0:
            raise ValueError("radius estimate must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "order", int(c.size))

    @classmethod
    def constant(cls, value, order: int = 1) -> "ComplexSeries":
        c = np.zeros(order, dtype=np.complex128)
        c[0] = value
        return cls(c)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return self.order

    def __add__(self, other):
        return series_add(self, _as_series(other, self))

    def __radd__(self, other):
        return series_add(_as_series(other, self), self)

    def __sub__(self, other):
        return series_add(self, -_as_series(other, self))

    def __neg__(self):
        return replace(self, coeffs=-self.coeffs, radius_estimate=self.radius_estimate)

    def __mul__(self, other):
        if np.isscalar(other):
            return replace(self, coeffs=self.coeffs * other)
        return series_mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if np.isscalar(other):
            return replace(self, coeffs=self.coeffs / other)
        return series_div(self, other)

    def __call__(self, t):
        """Evaluate the truncated sum (power series only)."""
        v, _ = _jets.horner(self.coeffs, complex(t))
        return v * complex(t) ** self.lead_exponent if self.lead_exponent else v

    def derivative_at(self, t) -> complex:
        if self.lead_exponent:
            raise ValueError("derivative_at is defined for power series only")
        _, d = _jets.horner(self.coeffs, complex(t))
        return d

    def truncate(self, order: int) -> "ComplexSeries":
        return ComplexSeries(self.coeffs[:order], self.lead_exponent)

    def with_radius(self) -> "ComplexSeries":
        return replace(self, radius_estimate=estimate_radius(self))


def _as_series(x, like: ComplexSeries) -> ComplexSeries:
    if isinstance(x, ComplexSeries):
        return x
    return ComplexSeries.constant(x, like.order)


def _aligned(a: ComplexSeries, b: ComplexSeries):
    """Coefficient arrays of a and b on a common exponent grid."""
    lo = min(a.lead_exponent, b.lead_exponent)
    top = min(a.lead_exponent + a.order, b.lead_exponent + b.order)
    n = top - lo
    ca = np.zeros(n, dtype=np.complex128)
    cb = np.zeros(n, dtype=np.complex128)
    sa = a.lead_exponent - lo
    sb = b.lead_exponent - lo
    ca[sa:] = a.coeffs[: max(n - sa, 0)]
    cb[sb:] = b.coeffs[: max(n - sb, 0)]
    return ca, cb, lo


def series_add(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    ca, cb, lo = _aligned(a, b)
    return ComplexSeries(ca + cb, lo)


def series_mul(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    n = min(a.order, b.order)
    c = np.convolve(a.coeffs[:n], b.coeffs[:n])[:n]
    return ComplexSeries(c, a.lead_exponent + b.lead_exponent)


def _strip_leading_zeros(a: ComplexSeries):
    c = a.coeffs
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c, a.lead_exponent
    k = int(nz[0])
    return c[k:], a.lead_exponent + k


def series_div(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    """Quotient ``a / b``; leading zeros of b are absorbed in the exponent."""
    cb, eb = _strip_leading_zeros(b)
    if cb.size == 0 or cb[0] == 0:
        raise SingularSeriesError("division by a series with vanishing constant term")
    n = min(a.order, cb.size)
    num = a.coeffs[:n]
    out = np.zeros(n, dtype=np.complex128)
    inv0 = 1.0 / cb[0]
    for k in range(n):
        s = num[k]
        if k:
            s -= np.dot(out[k - 1 :: -1][:k], cb[1 : k + 1])
        out[k] = s * inv0
    return ComplexSeries(out, a.lead_exponent - eb)


def series_pow(a: ComplexSeries, p: float, const_root: Optional[complex] = None) -> ComplexSeries:
    """``a**p`` for a series with nonzero constant term (J. C. P. Miller's recurrence).

    ``const_root`` fixes the value of the constant term of the result.
    """
    c = a.coeffs
    if c[0] == 0:
        raise BranchPointError("power of a series with zero constant term")
    n = a.order
    out = np.zeros(n, dtype=np.complex128)
    out[0] = c[0] ** p if const_root is None else const_root
    j = np.arange(1, n)
    for k in range(1, n):
        jj = j[:k]
        s = np.dot((p * jj - (k - jj)) * c[1 : k + 1], out[k - 1 :: -1][:k])
        out[k] = s / (k * c[0])
    return ComplexSeries(out, 0)


def series_root(a: ComplexSeries, p: int, branch_hint: complex = 1.0) -> ComplexSeries:
    """The ``p``-th root whose constant term is the root nearest ``branch_hint``."""
    if p < 2:
        raise ValueError("root index must be at least 2")
    if a.lead_exponent:
        raise BranchPointError("root of a Laurent series with nonzero lead exponent")
    a0 = a.coeffs[0]
    if a0 == 0:
        raise BranchPointError("root of a series with zero constant term")
    base = complex(a0) ** (1.0 / p)
    roots = base * np.exp(2j * np.pi * np.arange(p) / p)
    r0 = roots[np.argmin(np.abs(roots - branch_hint))]
    return series_pow(a, 1.0 / p, const_root=r0)


def estimate_radius(a: ComplexSeries) -> float:
    """Least-squares root test on the last quarter of the coefficient window."""
    c = np.abs(np.asarray(a.coeffs if isinstance(a, ComplexSeries) else a))
    n = c.size
    scale = c.max() if n else 0.0
    if scale == 0.0:
        return math.inf
    start = n - max(n // 4, 2)
    idx = np.arange(start, n)
    mags = c[start:]
    keep = mags > scale * 1e-300
    if not np.any(keep):
        return math.inf
    idx, mags = idx[keep], mags[keep]
    if idx.size == 1:
        # a single surviving coefficient: fall back to the plain root test
        k = idx[0]
        if k == 0:
            return math.inf
        return float(mags[0] ** (-1.0 / k))
    slope, _ = np.polyfit(idx.astype(float), np.log(mags), 1)
    if slope >= 0.0:
        # non-decaying tail: use the root test on the last coefficient
        k = idx[-1]
        return float(max(mags[-1], 1e-300) ** (-1.0 / k)) if k else math.inf
    return float(math.exp(-slope))


def ode_step_series(
    rhs_params: dict,
    t0: float,
    z0: complex,
    dz_hint: complex,
    order: int = DEFAULT_ORDER,
    formulation: str = "inner",
    pole_tolerance: float = POLE_TOLERANCE,
) -> ComplexSeries:
    """Taylor jet of a ray solution about ``t0``.

    ``rhs_params`` holds ``a`` (finite points), ``b`` (branch points, repeated
    by multiplicity) and, for the inner equation, ``C``.  At ``t0 == 0`` the
    inner jet starts ``dz_hint * t + ...``; elsewhere ``dz_hint`` only picks the
    sign of ``z'(t0)``.
    """
    a = np.asarray(rhs_params["a"], dtype=np.complex128)
    b = np.asarray(rhs_params.get("b", ()), dtype=np.complex128)
    inner = formulation == "inner"
    C = complex(rhs_params.get("C", inner_constant(a, b))) if inner else 1.0 + 0j
    if inner and t0 == 0:
        if z0 != 0:
            raise ValueError("the inner jet at t = 0 starts from z = 0")
        c = _jets.jet_inner_origin(a, b, C, complex(dz_hint), order)
        return ComplexSeries(c).with_radius()
    if b.size and np.min(np.abs(b - z0)) < pole_tolerance:
        raise NearPoleError("jet requested within pole tolerance of a branch point", point=z0)
    c = _jets.jet_regular(a, b, C, inner, float(t0), complex(z0), complex(dz_hint), order)
    return ComplexSeries(c).with_radius()


def inner_constant(a: Sequence[complex], b: Sequence[complex]) -> complex:
    """C = prod(-b) / prod(-a) for the inner equation."""
    return complex(np.prod(-np.asarray(b, dtype=complex)) / np.prod(-np.asarray(a, dtype=complex)))


def outer_laurent(points, b_params, cap: complex, order: int) -> ComplexSeries:
    """Laurent coefficients of the exterior map: ``g(w) = sum_k c_k w^(1-k)``."""
    a = np.asarray(points, dtype=np.complex128)
    b = np.asarray(b_params, dtype=np.complex128)
    c = _jets.jet_outer_origin(a, b, complex(cap), order)
    return ComplexSeries(c, 0)
