"""Rays of the extremal maps and critical trajectories of their differentials.

Rays are integrated with Taylor jets (see :mod:`ptcap.series`): each step
expands the solution about the current point, estimates the radius of
convergence from the coefficients and advances a fixed fraction of it.

Trajectories are integrated in the arc length of the metric ``|R|^{1/2}|dz|``
with the classical fourth order Runge-Kutta rule.  After every step the
point is projected back onto the level set ``Re int sqrt(R) dz = 0``; the
integral is accumulated by Gauss-Legendre quadrature along each chord, so
the polyline stays on the exact trajectory up to quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _jets
from .errors import AmbiguousStartError, NearPoleError, NoConvergenceError, TracingError
from .quadratic import QuadraticDifferential, gauss_legendre01
from .series import DEFAULT_ORDER, POLE_TOLERANCE, estimate_radius, inner_constant

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RaySpec:
    gamma: float
    t_end: float = 1.0
    formulation: str = "inner"

    def __post_init__(self):
        if not 0.0 < self.t_end <= 1.0:
            raise ValueError("t_end must lie in (0, 1]")
        if self.formulation not in ("inner", "outer"):
            raise ValueError("formulation is 'inner' or 'outer'")


@dataclass
class RayResult:
    value: complex
    derivative: complex
    steps: int
    derivatives: list = field(default_factory=list)


def _ray(a, b, lead, gamma, t_end, inner, order, safety, pole_tol, max_steps, C=None):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    rot = complex(math.cos(gamma), math.sin(gamma))
    if inner:
        C = inner_constant(a, b) if C is None else complex(C)
        c = _jets.jet_inner_origin(a, b, C, complex(lead) * rot, order)
    else:
        C = 1.0 + 0j
        c = _jets.jet_outer_origin(a, b, complex(lead) * rot, order)
    h = min(safety * estimate_radius(c), t_end)
    v, dv = _jets.horner(c, h)
    if inner:
        z, dz = v, dv
    else:
        z, dz = v / h, (h * dv - v) / (h * h)
    t = h
    steps = 1
    history = [dz]
    while t < t_end:
        if b.size and np.min(np.abs(b - z)) < pole_tol:
            raise NearPoleError(
                f"ray at angle {gamma:.15g} passed within {pole_tol:g} of a branch point",
                point=z, ray=gamma)
        c = _jets.jet_regular(a, b, C, inner, t, z, dz, order)
        rho = estimate_radius(c)
        h = safety * rho
        last = t + h >= t_end
        if last:
            h = t_end - t
        if not h > 1e-14:
            raise NoConvergenceError(f"step size collapsed on ray at angle {gamma:.15g}")
        z, dz = _jets.horner(c, h)
        t = t_end if last else t + h
        steps += 1
        history.append(dz)
        if steps > max_steps:
            raise NoConvergenceError(f"step budget exhausted on ray at angle {gamma:.15g}")
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise NoConvergenceError(f"non-finite value on ray at angle {gamma:.15g}")
    return RayResult(complex(z), complex(dz), steps, history)


def ray_inner(points, b_roots, lead, gamma, t_end=1.0, *, order=DEFAULT_ORDER, safety=0.25,
              pole_tol=POLE_TOLERANCE, max_steps=2000, C=None) -> RayResult:
    """``f(t_end e^{i gamma})`` for the interior map with ``f'(0) = lead``."""
    return _ray(points, b_roots, lead, gamma, t_end, True, order, safety, pole_tol, max_steps, C)


def ray_outer(points, b_roots, cap, gamma, t_end=1.0, *, order=DEFAULT_ORDER, safety=0.25,
              pole_tol=POLE_TOLERANCE, max_steps=2000) -> RayResult:
    """``g(e^{i gamma} / t_end)`` for the exterior map with ``g(w) ~ cap w``."""
    return _ray(points, b_roots, cap, gamma, t_end, False, order, safety, pole_tol, max_steps)


def integrate_ray_inner(problem, params, ray: RaySpec, **options) -> complex:
    """Evaluate the interior map of ``problem`` along ``ray``.

    ``params`` supplies ``lead`` (f'(0)) and ``b_roots`` (branch points with
    multiplicity); a :class:`~ptcap.configurations.PTSolution` qualifies.
    """
    points = getattr(problem, "inner_points", None)
    if points is None:
        points = problem.anchors if hasattr(problem, "anchors") else problem
    return ray_inner(points, params.b_roots, params.lead, ray.gamma, ray.t_end, **options).value


def integrate_ray_outer(points, b_params, cap: float, ray: RaySpec, **options) -> complex:
    """``g(e^{i gamma}/t_end)`` for the exterior map of Goluzin's equation."""
    if not cap > 0:
        raise ValueError("capacity must be positive")
    return ray_outer(points, b_params, cap, ray.gamma, ray.t_end, **options).value


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Stop:
    """Stop conditions for :func:`trace_trajectory`; the first one met wins.

    ``meet`` lists the points whose arrival ends the trace; ``None`` means
    every singular point of the differential other than the start.  A
    target also counts as met when the trace passes its closest approach
    within ``approach_tol``: near a zero of order m the level set misses the
    zero by about ``err**(1/(m+2))`` for a period error ``err``.
    """

    im_level: Optional[float] = None
    arc_length: Optional[float] = None
    meet: Optional[Sequence[complex]] = None
    meet_tol: float = 1e-10
    approach_tol: float = 1e-6
    radius: Optional[float] = None


@dataclass
class Trajectory:
    points: np.ndarray
    s: np.ndarray
    start_anchor: complex
    stop_reason: str
    end_anchor: Optional[complex] = None
    qd: Optional[QuadraticDifferential] = field(default=None, repr=False)
    roots: Optional[np.ndarray] = field(default=None, repr=False)
    orientation: complex = 1j
    max_step: float = 0.0
    launch_order: int = -1

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def __len__(self):
        return len(self.points)

    def tangent(self, k: int) -> complex:
        """Unit tangent (direction of travel) at the stored point k."""
        d = self.orientation / self.roots[k]
        return d / abs(d)

    def point_at(self, s: float):
        """Point and unit tangent at arc length ``s`` on the exact trajectory."""
        if not self.s[0] <= s <= self.s[-1]:
            raise ValueError("arc length outside the traced range")
        k = int(np.searchsorted(self.s, s, side="right")) - 1
        k = min(max(k, 0), len(self.s) - 2)
        if k == 0:
            # launch segment: distance grows like s^(2/(e+2)) from the singular start
            frac = (s / self.s[1]) ** (2.0 / (self.launch_order + 2)) if self.s[1] > 0 else 0.0
            z = self.start_anchor + (self.points[1] - self.start_anchor) * frac
            return z, self.tangent(1)
        z0, r0 = self.points[k], self.roots[k]
        h = s - self.s[k]
        if h == 0.0:
            z, r = z0, r0
        else:
            z, r, _ = _rk4_projected(self.qd, self.orientation, z0, r0, h)
        d = self.orientation / r
        return z, d / abs(d)


def _sqrt_near(val, ref):
    r = np.sqrt(val)
    return np.where((r * np.conj(ref)).real < 0, -r, r)


def _field(qd, orient, z, ref):
    r = complex(_sqrt_near(qd(z), ref))
    return orient / r, r


def _rk4_projected(qd, orient, z, r, h):
    """One RK4 step of dz/ds = orient/sqrt(R) and a projection onto Re Phi = const."""
    k1, r1 = _field(qd, orient, z, r)
    k2, r2 = _field(qd, orient, z + 0.5 * h * k1, r1)
    k3, r3 = _field(qd, orient, z + 0.5 * h * k2, r2)
    k4, r4 = _field(qd, orient, z + h * k3, r3)
    zn = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    dphi = _chord_integral(qd, z, zn, r)
    # Newton correction normal to the trajectory
    rn = complex(_sqrt_near(qd(zn), r4))
    for _ in range(2):
        err = dphi.real
        if abs(err) < 1e-17:
            break
        dz = -err * np.conj(rn) / abs(rn) ** 2
        zc = zn + dz
        dphi = dphi + _chord_integral(qd, zn, zc, rn)
        zn = zc
        rn = complex(_sqrt_near(qd(zn), rn))
    return zn, rn, dphi


def _chord_integral(qd, z0, z1, ref, nodes=8):
    x, w = gauss_legendre01(nodes)
    zz = z0 + (z1 - z0) * x
    vals = qd(zz)
    out = np.empty(nodes, dtype=complex)
    prev = ref
    for i in range(nodes):
        r = np.sqrt(vals[i])
        if (r * np.conj(prev)).real < 0:
            r = -r
        out[i] = r
        prev = r
    return complex(np.sum(w * out) * (z1 - z0))


def _launch_directions(qd, p, e):
    c = qd.leading(p)
    m = e
    return [complex(np.exp(1j * (math.pi - np.angle(c) + TWO_PI * k) / (m + 2))) for k in range(m + 2)]


def trace_trajectory(points, b_params, start: complex, stop: Stop = Stop(), direction: Optional[int] = None,
                     *, toward: Optional[complex] = None, qd: Optional[QuadraticDifferential] = None,
                     step: float = 1e-3, max_points: int = 200000) -> Trajectory:
    """Trace the critical trajectory of ``Q dz^2 = -prod(z-b)/prod(z-a) dz^2`` from ``start``.

    ``start`` must be a pole (one emanating arc) or a zero (``m + 2`` arcs for
    a zero of order m, selected by ``direction`` or by the arc pointing most
    nearly at ``toward``).  A custom differential may be given as ``qd``.
    """
    if qd is None:
        qd = QuadraticDifferential.outer(points, b_params)
    e = qd.order_at(start, tol=1e-9)
    if e == 0:
        raise ValueError("trajectories are launched from a zero or a pole")
    p = next(c for c in qd.exponents if abs(c - start) <= 1e-9 * max(1.0, abs(c)))
    if e == -1:
        c = qd.leading(p)
        d0 = -np.conj(c) / abs(c)
    elif e > 0:
        dirs = _launch_directions(qd, p, e)
        if direction is not None:
            d0 = dirs[direction % len(dirs)]
        elif toward is not None:
            t = (toward - p) / abs(toward - p)
            d0 = max(dirs, key=lambda d: (d * np.conj(t)).real)
        else:
            raise AmbiguousStartError(f"a zero of order {e} has {e + 2} trajectories; give a direction")
    else:
        raise ValueError("trajectories can only start at simple poles or at zeros")

    others = [c for c in qd.exponents if abs(c - p) > 1e-12]
    targets = list(stop.meet) if stop.meet is not None else others
    near = min((abs(c - p) for c in others), default=1.0)
    eps = min(1e-6, 1e-4 * near)

    # launch: a short radial segment, then snap onto the level set
    z = p + eps * d0
    phi = qd.segment_integral(p, z, pieces=1)
    r = complex(qd.sqrt_along(p, z, np.array([1.0 - 1e-15]))[0])
    if abs(r) == 0 or not np.isfinite(r):
        r = complex(np.sqrt(qd(z)))
    # orientation: the step i*phi-direction that moves away from p
    orient = 1j if ((1j / r) * np.conj(d0)).real > 0 else -1j
    for _ in range(3):
        err = phi.real
        dz = -err * np.conj(r) / abs(r) ** 2
        z2 = z + dz
        phi = phi + _chord_integral(qd, z, z2, r)
        r = complex(_sqrt_near(qd(z2), r))
        z = z2

    pts = [complex(p), z]
    roots = [r, r]
    svals = [0.0, abs(phi.imag)]
    s = abs(phi.imag)
    reason = None
    end_anchor = None
    max_step = abs(z - p)
    last_d = None
    while True:
        dist = qd.distance_to_singular(z)
        h = min(step, 0.25 * dist * abs(r))
        if stop.arc_length is not None:
            h = min(h, stop.arc_length - s)
        zn, rn, dphi = _rk4_projected(qd, orient, z, r, h)
        sn = s + abs(dphi.imag)
        # crossing of the Im level
        if stop.im_level is not None and (z.imag - stop.im_level) * (zn.imag - stop.im_level) <= 0 \
                and zn.imag != z.imag:
            zc, rc, dc = _settle_on_level(qd, z, r, zn, stop.im_level)
            pts.append(zc)
            roots.append(rc)
            svals.append(s + abs(dc.imag))
            reason = "im_threshold"
            break
        pts.append(zn)
        roots.append(rn)
        svals.append(sn)
        max_step = max(max_step, abs(zn - z))
        z, r, s = zn, rn, sn
        dists = [abs(c - z) for c in targets]
        hit = [c for c, d in zip(targets, dists) if d <= max(stop.meet_tol, 1e-14 * abs(c))]
        if not hit and last_d is not None:
            hit = [c for c, d, d0 in zip(targets, dists, last_d)
                   if d0 <= stop.approach_tol * max(1.0, abs(c)) and d > d0]
            if hit:
                # the previous point was the closest approach
                pts.pop()
                roots.pop()
                svals.pop()
                z, r, s = pts[-1], roots[-1], svals[-1]
        last_d = dists
        if hit:
            end_anchor = hit[0]
            pts.append(complex(end_anchor))
            roots.append(r)
            svals.append(s + abs(qd.segment_integral(z, end_anchor, pieces=1).imag))
            reason = "met_point"
            break
        if stop.arc_length is not None and s >= stop.arc_length * (1 - 1e-15):
            reason = "arc_length"
            break
        if stop.radius is not None and abs(z) >= stop.radius:
            reason = "arc_length"
            break
        if len(pts) > max_points:
            raise TracingError("trajectory did not reach its stop condition within the point budget")
        if not np.isfinite(z.real + z.imag):
            raise TracingError("trajectory produced a non-finite point")
    return Trajectory(np.array(pts), np.array(svals), complex(p), reason, end_anchor, qd,
                      np.array(roots), orient, max_step, e)


def _settle_on_level(qd, z0, r0, z1, level):
    """Point on the trajectory with Im z = level, between z0 and z1."""
    t = (level - z0.imag) / (z1.imag - z0.imag)
    x = z0.real + t * (z1.real - z0.real)
    for _ in range(30):
        zc = complex(x, level)
        dphi = _chord_integral(qd, z0, zc, r0, nodes=16)
        rc = complex(_sqrt_near(qd(zc), r0))
        dx = -dphi.real / rc.real if rc.real != 0 else 0.0
        x += dx
        if abs(dx) < 1e-16 * max(1.0, abs(x)):
            break
    zc = complex(x, level)
    dphi = _chord_integral(qd, z0, zc, r0, nodes=16)
    return zc, complex(_sqrt_near(qd(zc), r0)), dphi
