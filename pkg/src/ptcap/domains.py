"""The slit disks ``D_{w1,w2,R}`` and their normalisation to a capacity problem.

The domain is the disk ``|w| < R`` with three radial slits from the cube roots
of unity, three from ``2 e^{i pi/3}`` and its rotations, and six analytic arcs
ending at the tips ``w1``, ``w2`` (and their images under the symmetry group
generated by conjugation and rotation by ``2 pi/3``).  Cubing gives a domain
in ``z = w^3`` whose complement, after the Mobius-like normalisation ``phi``,
is a continuum ``E`` through ``0, 1, phi(z1), phi(z2)`` and conjugates.

Only the fundamental sector ``0 <= arg w <= pi/3`` is handled explicitly;
everything else follows by symmetry.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree

from .configurations import PTProblem, PTSolution, solve_pt
from .errors import (BisectionFailureError, DegenerateMapError, InfeasibleGeometryError,
                     NoIntersectionError, PTError)
from .series import ComplexSeries, series_root
from .tracer import Stop, Trajectory, trace_trajectory

log = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
X_MIN = 1.0 + math.sqrt(2.0 * SQRT3 - 3.0)
P1 = complex(X_MIN, 1.0)
E3 = cmath.exp(1j * math.pi / 3)
READINGS = ("c2c3", "c1c2")
DEFAULT_READING = "c2c3"


# --------------------------------------------------------------------------
# normalising maps


def koebe(z: complex) -> complex:
    """The Koebe function ``z / (1 - z)^2``."""
    if z == 1:
        raise ZeroDivisionError("the Koebe function has a pole at 1")
    return z / (1.0 - z) ** 2


def psi(z: complex, R: float) -> complex:
    """``-1 / k(z / R^3) = -(R^3 - z)^2 / (R^3 z)``."""
    if z == 0:
        raise ZeroDivisionError("psi has a pole at 0")
    T = R ** 3
    return -((T - z) ** 2) / (T * z)


def psi_scale(R: float) -> float:
    """``|psi(-8) - psi(1)| = ((R^3 + 8)^2 + 8 (R^3 - 1)^2) / (8 R^3)``."""
    T = R ** 3
    return ((T + 8.0) ** 2 + 8.0 * (T - 1.0) ** 2) / (8.0 * T)


def phi(z: complex, R: float) -> complex:
    """``(psi(z) - psi(1)) / |psi(-8) - psi(1)|``, so ``phi(1) = 0`` and ``phi(-8) = 1``."""
    return (psi(z, R) - psi(1.0, R)) / psi_scale(R)


def phi_inv(W: complex, R: float) -> complex:
    """Preimage of ``W`` under ``phi`` inside ``|z| < R^3``.

    ``psi(z) = Y`` is the quadratic ``z^2 + (T Y - 2T) z + T^2 = 0`` whose roots
    have product ``T^2``, so exactly one lies inside the disk.
    """
    T = R ** 3
    Y = psi_scale(R) * W + psi(1.0, R)
    b = T * Y - 2.0 * T
    r = cmath.sqrt(b * b - 4.0 * T * T)
    # avoid cancellation: compute the large root, then divide
    big = (-b - r) / 2.0 if abs(-b - r) >= abs(-b + r) else (-b + r) / 2.0
    return T * T / big


def dphi_dz(z: complex, R: float) -> complex:
    T = R ** 3
    return (T - z) * (T + z) / (T * z * z) / psi_scale(R)


# --------------------------------------------------------------------------
# geometry


def circle_intersections(c1: complex, c2: complex, r: float = 1.0) -> Tuple[complex, complex]:
    d = abs(c2 - c1)
    if d == 0 or d > 2 * r:
        raise InfeasibleGeometryError(f"circles of radius {r} about {c1} and {c2} do not intersect")
    m = 0.5 * (c1 + c2)
    h = math.sqrt(max(r * r - 0.25 * d * d, 0.0))
    u = (c2 - c1) / d
    return m + 1j * u * h, m - 1j * u * h


def _dist_to_sixty(p: complex) -> float:
    """Signed distance below the half-line of argument pi/3."""
    return 0.5 * (SQRT3 * p.real - p.imag)


def tips(x: float, R: float, reading: str = DEFAULT_READING):
    """Centres ``P2, P3`` and tips ``w1, w2`` for the parameters ``x, R``."""
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}")
    if x < X_MIN - 1e-15:
        raise InfeasibleGeometryError(f"x = {x} is below the smallest admissible value {X_MIN:.12g}")
    if not R > 4:
        raise InfeasibleGeometryError("R must exceed 4")
    P2 = complex(x, SQRT3 * x - 2.0)
    A, B = circle_intersections(P1, P2)
    w1 = A if A.real > B.real else B
    P3 = (R - 1.0) * cmath.exp(1j * (math.pi / 3 - math.asin(1.0 / (R - 1.0))))
    if reading == "c1c2":
        w2 = B if w1 is A else A
    else:
        A, B = circle_intersections(P2, P3)
        w2 = A if _dist_to_sixty(A) > _dist_to_sixty(B) else B
    return P2, P3, w1, w2


@dataclass
class DomainSpec:
    x: float
    R: float
    P1: complex
    P2: complex
    P3: complex
    w1: complex
    w2: complex
    z1: complex
    z2: complex
    anchors: Tuple[complex, ...]
    solution: Optional[PTSolution] = None
    trajectories: List[Trajectory] = field(default_factory=list, repr=False)
    arcs: List[np.ndarray] = field(default_factory=list, repr=False)
    reading: str = DEFAULT_READING
    q: Optional[complex] = None

    @property
    def capacity(self) -> float:
        return self.solution.capacity

    def tangency_residuals(self) -> List[float]:
        return [abs(abs(self.P3) - (self.R - 1.0)),
                abs(abs(_dist_to_sixty(self.P2)) - 1.0),
                abs(abs(self.w1 - self.P1) - 1.0),
                abs(abs(self.w1 - self.P2) - 1.0),
                abs(abs(self.w2 - self.P2) - 1.0)]

    def w_of(self, p: complex) -> complex:
        """Point of the fundamental sector over the E-plane point ``p``."""
        z = phi_inv(p, self.R)
        return _cube_root_sector(z)

    def w_and_tangent(self, traj: Trajectory, s: float) -> Tuple[complex, complex]:
        """Point and unit tangent of an arc in the w-plane at E-plane arc length ``s``."""
        p, tp = traj.point_at(s)
        z = phi_inv(p, self.R)
        w = _cube_root_sector(z)
        dw = tp / dphi_dz(z, self.R) / (3.0 * w * w)
        return w, dw / abs(dw)


def _cube_root_sector(z: complex) -> complex:
    """Cube root with argument in (-pi/3, pi/3]."""
    return abs(z) ** (1.0 / 3.0) * cmath.exp(1j * cmath.phase(z) / 3.0)


def e_anchors(x: float, R: float, reading: str = DEFAULT_READING):
    P2, P3, w1, w2 = tips(x, R, reading)
    a1, a2 = phi(w1 ** 3, R), phi(w2 ** 3, R)
    return (0j, 1 + 0j, a1, a2, a2.conjugate(), a1.conjugate()), (P2, P3, w1, w2)


def solve_capacity(x: float, R: float, reading: str = DEFAULT_READING, seed="auto",
                   tol: float = 1e-13) -> Tuple[PTSolution, tuple]:
    """Capacity solution of the continuum E for the parameters ``x, R``."""
    anchors, geo = e_anchors(x, R, reading)
    prob = PTProblem("outer_six_sym", anchors, topology=1)
    return solve_pt(prob, seed, mode="periods", tol=tol, fallback=False), geo


def trace_arcs(spec: DomainSpec, step: float = 1e-3) -> List[Trajectory]:
    """Critical trajectories of E from ``phi(z1)`` and ``phi(z2)`` to their branch points."""
    sol = spec.solution
    qd_points = list(sol.anchors)
    out = []
    b1, b2 = sol.b_points
    for a, b in ((spec.anchors[2], b1), (spec.anchors[3], b2)):
        tr = trace_trajectory(qd_points, sol.b_roots, a, Stop(meet=[b], meet_tol=1e-11), step=step)
        if tr.stop_reason != "met_point":
            raise PTError("arc of E did not reach its branch point")
        out.append(tr)
    return out


def build_domain(x: float, R: float, arcs_provider: Optional[Callable] = None, *,
                 reading: str = DEFAULT_READING, seed="auto", step: float = 1e-3) -> DomainSpec:
    """Geometry, capacity solution and traced arcs of ``D_{w1,w2,R}``.

    ``arcs_provider(spec)`` may replace the default tracer; it must return
    the E-plane trajectories from ``phi(z1)`` and ``phi(z2)``.
    """
    sol, (P2, P3, w1, w2) = solve_capacity(x, R, reading, seed)
    anchors = sol.anchors
    spec = DomainSpec(x, R, P1, P2, P3, w1, w2, w1 ** 3, w2 ** 3, anchors, sol, reading=reading)
    trajs = (arcs_provider or (lambda s: trace_arcs(s, step)))(spec)
    spec.trajectories = list(trajs)
    spec.arcs = [np.array([spec.w_of(p) for p in t.points]) for t in spec.trajectories]
    return spec


# --------------------------------------------------------------------------
# inradius test


@dataclass
class InradiusResult:
    ok: bool
    margin: float
    q: Optional[complex]

    def __bool__(self):
        return self.ok


def _side(spec, traj, sign):
    """Offset direction (+1 or -1 times i*tangent) pointing to increasing (sign>0) argument."""
    s = 0.5 * traj.length
    w, t = spec.w_and_tangent(traj, s)
    n = 1j * t
    radial_turn = (n * np.conj(1j * w / abs(w))).real
    return 1.0 if radial_turn * sign > 0 else -1.0


def _offset_polyline(spec, traj, side, samples=400):
    ss = np.linspace(traj.s[0], traj.s[-1], samples)
    pts = []
    for s in ss:
        w, t = spec.w_and_tangent(traj, s)
        pts.append(w + side * 1j * t)
    return ss, np.array(pts)


def _polyline_intersection(P, Q):
    for i in range(len(P) - 1):
        p, r = P[i], P[i + 1] - P[i]
        qs = Q[:-1]
        ss = Q[1:] - Q[:-1]
        den = (np.conj(r) * ss).imag
        ok = den != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (np.conj(qs - p) * ss).imag / den
            u = (np.conj(qs - p) * r).imag / den
        hit = np.flatnonzero(ok & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1))
        if hit.size:
            j = int(hit[0])
            return i, j, float(t[j]), float(u[j])
    return None


def parallel_intersection(spec: DomainSpec, samples: int = 400) -> complex:
    """Intersection ``q`` of the unit parallels of the two arcs facing each other."""
    t1, t2 = spec.trajectories
    side1 = _side(spec, t1, +1)
    side2 = _side(spec, t2, -1)
    s1, G1 = _offset_polyline(spec, t1, side1, samples)
    s2, G2 = _offset_polyline(spec, t2, side2, samples)
    hit = _polyline_intersection(G1, G2)
    if hit is None:
        raise NoIntersectionError("the parallel curves do not meet inside the sector")
    i, j, ta, tb = hit
    u = np.array([s1[i] + ta * (s1[i + 1] - s1[i]), s2[j] + tb * (s2[j + 1] - s2[j])])

    def gamma(traj, side, s):
        w, t = spec.w_and_tangent(traj, min(max(s, traj.s[0]), traj.s[-1]))
        return w + side * 1j * t

    def F(v):
        d = gamma(t1, side1, v[0]) - gamma(t2, side2, v[1])
        return np.array([d.real, d.imag])

    for _ in range(30):
        f = F(u)
        h = 1e-7 * max(1.0, float(np.max(np.abs(u))))
        J = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            J[:, k] = (F(u + e) - f) / h
        try:
            du = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NoIntersectionError("parallel curves meet tangentially") from exc
        u = u + du
        if np.max(np.abs(du)) < 1e-14 * max(1.0, float(np.max(np.abs(u)))):
            break
    return gamma(t1, side1, u[0])


def inradius_check(spec: DomainSpec) -> InradiusResult:
    """The sufficient inradius-one condition ``|q| >= R - 1`` and its margin."""
    if len(spec.trajectories) != 2:
        raise ValueError("the domain spec carries no traced arcs")
    try:
        q = parallel_intersection(spec)
    except NoIntersectionError:
        return InradiusResult(False, -math.inf, None)
    spec.q = q
    margin = abs(q) - (spec.R - 1.0)
    return InradiusResult(margin >= 0.0, margin, q)


# --------------------------------------------------------------------------
# brute-force inradius


def boundary_samples(spec: DomainSpec, spacing: float = 5e-4) -> np.ndarray:
    """Dense samples of every boundary piece except the outer circle."""
    pieces = []
    for start in (1.0, 2.0 * E3):
        n = int(math.ceil((spec.R - abs(start)) / spacing)) + 1
        r = np.linspace(abs(start), spec.R, n)
        pieces.append(r * (start / abs(start)))
    for arc in spec.arcs:
        seg = [arc[:1]]
        for a, b in zip(arc[:-1], arc[1:]):
            n = max(int(math.ceil(abs(b - a) / spacing)), 1)
            seg.append(a + (b - a) * np.arange(1, n + 1) / n)
        pieces.append(np.concatenate(seg))
    base = np.concatenate(pieces)
    rot = np.exp(2j * math.pi * np.arange(3) / 3)
    full = np.concatenate([base * r for r in rot] + [np.conj(base) * r for r in rot])
    return full


def grid_inradius(spec: DomainSpec, resolution: float = 2e-3, spacing: float = 5e-4,
                  block: int = 16) -> Tuple[float, complex]:
    """Largest distance to the boundary over the lattice ``resolution * (i + j i)``
    restricted to the fundamental sector ``0 <= arg <= pi/3``.

    The distance is 1-Lipschitz, so blocks of ``block x block`` lattice
    points are visited in order of an upper bound (centre value plus half
    diagonal) and skipped once the bound cannot beat the best value.  The
    result equals the plain maximum over the whole lattice.
    """
    pts = boundary_samples(spec, spacing)
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    R = spec.R

    def dist(c):
        d, _ = tree.query(np.column_stack([c.real, c.imag]))
        return np.minimum(d, R - np.abs(c))

    def in_sector(c):
        return (c.imag <= SQRT3 * c.real + 1e-15) & (np.abs(c) < R)

    width = block * resolution
    nb = int(math.ceil(R / width))
    bi, bj = np.meshgrid(np.arange(nb), np.arange(nb), indexing="ij")
    ii, jj = bi.ravel(), bj.ravel()
    centres = (ii + 0.5) * width + 1j * (jj + 0.5) * width
    half = width / math.sqrt(2.0)
    ang = np.angle(centres)
    beyond = np.where(ang > math.pi / 3, np.abs(centres) * np.sin(ang - math.pi / 3), 0.0)
    keep = (beyond <= half) & (np.abs(centres) <= R + half)
    centres, ii, jj = centres[keep], ii[keep], jj[keep]
    bound = dist(centres) + half
    best, where = 0.0, 0j
    offs = np.arange(block)
    for k in np.argsort(-bound):
        if bound[k] <= best:
            break
        xs = (ii[k] * block + offs) * resolution
        ys = (jj[k] * block + offs) * resolution
        c = (xs[:, None] + 1j * ys[None, :]).ravel()
        c = c[in_sector(c)]
        if c.size == 0:
            continue
        d = dist(c)
        m = int(np.argmax(d))
        if d[m] > best:
            best, where = float(d[m]), complex(c[m])
    return best, where


# --------------------------------------------------------------------------
# the radius search


def margin_for(x: float, R: float, reading: str = DEFAULT_READING, seed="auto"):
    spec = build_domain(x, R, reading=reading, seed=seed)
    return inradius_check(spec), spec


def max_radius_for_x(x: float, bracket: Optional[Tuple[float, float]] = None, *, xtol: float = 1e-11,
                     reading: str = DEFAULT_READING, guess: float = 5.1, step: float = 0.1) -> float:
    """Largest ``R`` whose domain passes :func:`inradius_check`.

    The margin is a smooth decreasing function of ``R``; its root is located
    with Brent's method to ``xtol``.  Without a bracket, one is found by
    stepping from ``guess`` in steps of ``step``.
    """
    cache = {}
    seed = ["auto"]

    def margin(R):
        if R not in cache:
            try:
                res, spec = margin_for(x, R, reading, seed[0])
            except PTError as exc:
                raise BisectionFailureError(f"pipeline failed at R = {R!r}: {exc}",
                                            {"x": x, "R": R, "cause": repr(exc)}) from exc
            seed[0] = spec.solution
            cache[R] = res.margin
        return cache[R]

    if bracket is None:
        bracket = _find_bracket(margin, guess, step)
    lo, hi = bracket
    m_lo, m_hi = margin(lo), margin(hi)
    if not (m_lo > 0 > m_hi):
        raise BisectionFailureError(
            f"margin does not change sign on [{lo}, {hi}]: {m_lo!r}, {m_hi!r}",
            {"x": x, "bracket": bracket, "margins": (m_lo, m_hi)})
    R = optimize.brentq(margin, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(R)


def _find_bracket(margin, guess, step, max_steps=12):
    m0 = margin(guess)
    direction = 1.0 if m0 > 0 else -1.0
    prev, m_prev = guess, m0
    for k in range(1, max_steps + 1):
        R = guess + direction * k * step
        m = margin(R)
        if (m > 0) != (m_prev > 0):
            return (prev, R) if direction > 0 else (R, prev)
        prev, m_prev = R, m
    raise BisectionFailureError("no sign change of the inradius margin near the guess",
                                {"guess": guess, "step": step})


# --------------------------------------------------------------------------
# symmetrisation


def symmetrize_cube_root(g_series: ComplexSeries, branch_hint: complex = 1.0) -> ComplexSeries:
    """Series of ``f(z) = z (g(z^3)/z^3)^{1/3}`` from the series of ``g``."""
    c = np.asarray(g_series.coeffs)
    if g_series.lead_exponent != 0 or abs(c[0]) != 0:
        raise ValueError("g must vanish at the origin")
    if c.size < 2 or c[1] == 0:
        raise DegenerateMapError("g has zero derivative at the origin")
    h = ComplexSeries(c[1:])
    r = series_root(h, 3, branch_hint).coeffs
    out = np.zeros(3 * (r.size - 1) + 2, dtype=complex)
    out[1::3] = r
    return ComplexSeries(out)
