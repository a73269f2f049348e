"""The three extremal constants computed from the slit-disk domains.

The map ``F`` from the unit disk onto ``D_{w1,w2,R}`` is assembled from the
exterior map ``g`` of the continuum ``E``:  with ``Z(s) = phi^{-1}(g(1/s))``
and ``K(s) = Z(-s)/s`` one has ``F(z) = z K(z^3)^{1/3}``.  ``phi`` is a
quadratic rational function, so ``phi^{-1}`` composed with a power series is
a quadratic equation in series arithmetic, solved by the small root.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from . import bessel
from .configurations import PTSolution, outer_value
from .domains import (DEFAULT_READING, DomainSpec, X_MIN, build_domain, inradius_check,
                      max_radius_for_x, phi_inv, psi, psi_scale, symmetrize_cube_root)
from .errors import (CoefficientExtractionError, EmptyScanError, PipelineError, PTError,
                     TailError)
from .series import ComplexSeries, outer_laurent, series_div, series_root

KINDS = ("bloch_landau", "lifetime", "frequency")
DEFAULT_MAX_DEGREE = 99
FOURIER_RADIUS = 0.95
FOURIER_SAMPLES = 512
FOURIER_CHECKED = 10
FOURIER_TOL = 1e-8
AREA_TOL = 1e-6

# lower values are better bounds for these kinds, higher for lifetime
_MINIMIZE = {"bloch_landau": True, "frequency": True, "lifetime": False}


@dataclass
class CoefficientMap:
    """Taylor coefficients ``a_1 .. a_N`` of a map from the unit disk.

    ``coeffs[n - 1]`` holds ``a_n``.  ``truncation_tail`` estimates the part
    of ``sum |a_n|^2`` beyond degree N.
    """

    coeffs: np.ndarray
    domain_area: float = float("nan")
    truncation_tail: float = 0.0
    fourier: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    @classmethod
    def from_coeffs(cls, coeffs, domain_area: float = float("nan")) -> "CoefficientMap":
        return cls(np.asarray(coeffs, dtype=complex), domain_area, 0.0)

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def energy(self) -> float:
        """``sum |a_n|^2``."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def area(self) -> float:
        """``pi sum n |a_n|^2``, the area of the image of the truncated map."""
        return float(math.pi * np.sum(self.degrees * np.abs(self.coeffs) ** 2))

    def area_deviation(self) -> float:
        """Relative gap between the truncated area sum and the domain area."""
        return abs(self.area() - self.domain_area) / self.domain_area

    def sparsity_defect(self) -> float:
        """Largest ``|a_n|`` off ``n = 1 (mod 3)``."""
        off = self.coeffs[self.degrees % 3 != 1]
        return float(np.max(np.abs(off))) if off.size else 0.0

    def tail_converged(self, rel: float = 1e-10) -> bool:
        return self.truncation_tail < rel * self.energy()


@dataclass
class BoundReport:
    kind: str
    x: float
    R: float
    value: float
    diagnostics: Dict[str, object] = field(default_factory=dict)
    valid: bool = True


# --------------------------------------------------------------------------
# coefficients


def _g_series(solution: PTSolution, R: float, n_terms: int) -> np.ndarray:
    """Coefficients of ``Z(-s)`` up to ``s^(n_terms - 1)``.

    ``psi(Z) = M v(s)/s + psi(1)`` with ``v(s) = s g_E(1/s)`` becomes
    ``s Z^2 + D Z + T^2 s = 0`` with ``D = T (M v + (psi(1) - 2) s)``.
    """
    T = R ** 3
    M = psi_scale(R)
    p1 = psi(1.0, R).real
    v = outer_laurent(solution.anchors, solution.b_roots, solution.capacity, n_terms).coeffs
    zeta = np.zeros(n_terms, dtype=complex)
    zeta[1] = 1.0
    D = T * (M * v + (p1 - 2.0) * zeta)
    disc = np.convolve(D, D)[:n_terms] - 4.0 * T * T * np.convolve(zeta, zeta)[:n_terms]
    root = series_root(ComplexSeries(disc), 2, D[0]).coeffs
    num = np.zeros(n_terms, dtype=complex)
    num[0] = -2.0 * T * T
    q = series_div(ComplexSeries(num), ComplexSeries(D + root)).coeffs
    Z = np.concatenate(([0.0], q[:-1]))
    return Z * (-1.0) ** np.arange(n_terms)


def _composition_coeffs(solution: PTSolution, R: float, max_degree: int) -> np.ndarray:
    n_terms = (max_degree - 1) // 3 + 2
    g = _g_series(solution, R, n_terms)
    f = symmetrize_cube_root(ComplexSeries(g)).coeffs
    out = np.zeros(max_degree, dtype=complex)
    m = min(max_degree, f.size - 1)
    out[:m] = f[1:m + 1]
    return out


def fourier_coefficients(solution: PTSolution, R: float, n_max: int, rho: float = FOURIER_RADIUS,
                         samples: int = FOURIER_SAMPLES) -> np.ndarray:
    """``a_1 .. a_{n_max}`` from samples of ``F`` on the circle ``|z| = rho``.

    ``F`` is evaluated by integrating the exterior equation of ``E`` out to
    ``g(e^{i gamma}/rho^3)``; the cube root branch is followed continuously.
    """
    theta = 2.0 * math.pi * np.arange(samples) / samples
    t = rho ** 3
    K = np.empty(samples, dtype=complex)
    for k, th in enumerate(theta):
        s = t * cmath.exp(3j * th)
        w = outer_value(solution, -(3.0 * th + math.pi), t)
        K[k] = phi_inv(w, R) / s
    arg = np.unwrap(np.angle(K))
    if abs(arg[0]) > math.pi:
        arg -= 2.0 * math.pi * round(arg[0] / (2.0 * math.pi))
    root = np.abs(K) ** (1.0 / 3.0) * np.exp(1j * arg / 3.0)
    F = rho * np.exp(1j * theta) * root
    c = np.fft.fft(F) / samples
    n = np.arange(1, n_max + 1)
    return c[n] / rho ** n


def coefficients_of_F(spec: DomainSpec, solution: Optional[PTSolution] = None,
                      N: int = DEFAULT_MAX_DEGREE, *, check: bool = True,
                      tail_factor: int = 4) -> CoefficientMap:
    """Taylor coefficients of ``F`` up to degree ``N``.

    The tail estimate is ``sum |a_n|^2`` over ``N < n <= tail_factor N``,
    taken from the same series.  With ``check`` the first nonzero
    coefficients are compared with a boundary Fourier analysis.
    """
    sol = solution if solution is not None else spec.solution
    long = _composition_coeffs(sol, spec.R, max(tail_factor, 1) * N)
    coeffs = long[:N].copy()
    tail = float(np.sum(np.abs(long[N:]) ** 2))
    cmap = CoefficientMap(coeffs, math.pi * spec.R ** 2, tail)
    if check:
        nz = np.arange(1, 3 * FOURIER_CHECKED + 1, 3)
        fourier = fourier_coefficients(sol, spec.R, int(nz[-1]))
        series = _composition_coeffs(sol, spec.R, int(nz[-1]))
        gap = np.abs(fourier[nz - 1] - series[nz - 1])
        cmap.fourier = fourier
        if not np.all(gap <= FOURIER_TOL):
            raise CoefficientExtractionError(
                f"series and Fourier coefficients differ by up to {gap.max():.3g}",
                composition=series, fourier=fourier)
    return cmap


# --------------------------------------------------------------------------
# bounds


def _check_tail(coeffs: CoefficientMap, tail_tol: Optional[float]):
    if not np.all(np.isfinite(coeffs.coeffs)) or not math.isfinite(coeffs.truncation_tail):
        raise TailError("the coefficient table contains non-finite values")
    if tail_tol is not None and not coeffs.tail_converged(tail_tol):
        raise TailError(f"tail estimate {coeffs.truncation_tail:.3g} exceeds "
                        f"{tail_tol:g} of the sum {coeffs.energy():.6g}")


def lifetime_bound(coeffs: CoefficientMap, tail_tol: Optional[float] = None) -> float:
    """Expected lifetime ``1/2 sum |a_n|^2`` of Brownian motion started at ``F(0)``.

    A truncated sum never exceeds the full one, so it remains a lower bound.
    """
    _check_tail(coeffs, tail_tol)
    return 0.5 * coeffs.energy()


def frequency_bound(coeffs: CoefficientMap, tail_tol: Optional[float] = None) -> float:
    """``j0^2 / sum |a_n|^2 delta_n``; truncation only raises this upper bound."""
    _check_tail(coeffs, tail_tol)
    c = coeffs.coeffs
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("all coefficients vanish")
    n_top = int(nz[-1]) + 1
    if n_top > bessel.DELTA_MAX_N:
        raise ValueError(f"delta_n is tabulated up to n = {bessel.DELTA_MAX_N}")
    deltas = bessel.delta_table(n_top)
    s = float(np.sum(np.abs(c[:n_top]) ** 2 * deltas))
    return bessel.j0_zero() ** 2 / s


def bloch_landau_value(R: float, capacity: float) -> float:
    """``R^{-1} (|psi(-8) - psi(1)| cap(E))^{1/3}``."""
    return (psi_scale(R) * capacity) ** (1.0 / 3.0) / R


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (PTError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise PipelineError(name, exc) from exc


def constant_report(kind: str, x: float, R: Optional[float] = None, *,
                    reading: str = DEFAULT_READING, max_degree: int = DEFAULT_MAX_DEGREE,
                    check: bool = True) -> BoundReport:
    """Run the pipeline for one ``x``: radius search, domain, capacity, bound."""
    if kind not in KINDS:
        raise ValueError(f"unknown constant {kind!r}; expected one of {KINDS}")
    if R is None:
        R = _stage("radius", max_radius_for_x, x, reading=reading)
    spec = _stage("domain", build_domain, x, R, reading=reading)
    margin = _stage("inradius", inradius_check, spec)
    sol = spec.solution
    diag: Dict[str, object] = {
        "capacity": sol.capacity,
        "capacity_residual": sol.residual_norm,
        "tangency_residual": max(spec.tangency_residuals()),
        "inradius_margin": margin.margin,
    }
    if kind == "bloch_landau":
        value = bloch_landau_value(R, sol.capacity)
        return BoundReport(kind, x, R, value, diag)
    cmap = _stage("coefficients", coefficients_of_F, spec, sol, max_degree, check=check)
    diag.update({
        "max_degree": cmap.N,
        "area_deviation": cmap.area_deviation(),
        "truncation_tail": cmap.truncation_tail,
        "sparsity_defect": cmap.sparsity_defect(),
    })
    if cmap.fourier is not None:
        nz = np.arange(1, 3 * FOURIER_CHECKED + 1, 3)
        diag["fourier_gap"] = float(np.max(np.abs(cmap.fourier[nz - 1] - cmap.coeffs[nz - 1])))
    if kind == "lifetime":
        value = _stage("bound", lifetime_bound, cmap)
    else:
        value = _stage("bound", frequency_bound, cmap)
        diag["delta_count"] = int(np.flatnonzero(cmap.coeffs)[-1]) + 1
    valid = cmap.area_deviation() <= AREA_TOL
    return BoundReport(kind, x, R, value, diag, valid)


def bloch_landau_bound(x: float, R: Optional[float] = None, **options) -> BoundReport:
    return constant_report("bloch_landau", x, R, **options)


# --------------------------------------------------------------------------
# scans

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def scan_optimize(kind: str, x_lo: float, x_hi: float, grid: int, *, xtol: float = 1e-6,
                  evaluate: Optional[Callable[[float], float]] = None, **options) -> BoundReport:
    """Best bound over ``x`` in ``[x_lo, x_hi]``: grid scan, then golden section.

    ``evaluate`` replaces the pipeline value (useful for testing the search).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown constant {kind!r}")
    if x_lo < X_MIN:
        raise ValueError(f"x_lo must be at least {X_MIN!r}")
    if grid < 2 or not x_hi > x_lo:
        raise ValueError("the scan needs grid >= 2 and x_hi > x_lo")
    sign = 1.0 if _MINIMIZE[kind] else -1.0
    reports: Dict[float, BoundReport] = {}

    def cost(x):
        if evaluate is not None:
            try:
                return sign * evaluate(x)
            except (PTError, ValueError):
                return math.inf
        if x not in reports:
            try:
                reports[x] = constant_report(kind, x, **options)
            except PTError:
                return math.inf
        return sign * reports[x].value

    xs = np.linspace(x_lo, x_hi, grid)
    costs = [cost(float(x)) for x in xs]
    if not any(math.isfinite(c) for c in costs):
        raise EmptyScanError(f"no feasible point on the {grid}-point grid over [{x_lo}, {x_hi}]")
    k = int(np.argmin(costs))
    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, grid - 1)])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = cost(c), cost(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = cost(d)
    candidates = [(fc, c), (fd, d), (costs[k], float(xs[k]))]
    best_cost, best_x = min(candidates)
    if evaluate is not None:
        rep = BoundReport(kind, best_x, float("nan"), sign * best_cost)
    else:
        rep = reports[best_x]
    rep.diagnostics = dict(rep.diagnostics)
    rep.diagnostics.update({"grid": xs.tolist(), "grid_values": [sign * v for v in costs],
                            "bracket": (a, b)})
    return rep
