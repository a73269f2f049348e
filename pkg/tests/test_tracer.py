import math

import numpy as np
import pytest

from ptcap.errors import AmbiguousStartError
from ptcap.quadratic import QuadraticDifferential
from ptcap.tracer import (RaySpec, Stop, integrate_ray_inner, integrate_ray_outer, ray_inner,
                          ray_outer, trace_trajectory)

W = np.exp(2j * np.pi / 3)
CUBE = [1, W, W.conjugate()]


def test_joukowski_rays():
    gammas = 2 * np.pi * np.arange(64) / 64
    err = max(abs(integrate_ray_outer([-1, 1], [], 0.5, RaySpec(g, formulation="outer")) - math.cos(g))
              for g in gammas)
    assert err < 1e-10


def test_joukowski_inside_the_exterior():
    g = 0.9
    t = 0.6
    w = np.exp(1j * g) / t
    assert abs(ray_outer([-1, 1], [], 0.5, g, t).value - 0.5 * (w + 1 / w)) < 1e-12


def test_cube_roots_vertex():
    v = integrate_ray_outer(CUBE, [0], 4 ** (-1 / 3), RaySpec(0.0, formulation="outer"))
    assert abs(v - 1) < 1e-8


def test_outer_conjugation():
    a = [0, 2, 1 + 1j, 1 - 1j]
    b = [1.2 + 0.3j, 1.2 - 0.3j]
    for g in (0.4, 1.3, 2.9):
        v1 = ray_outer(a, b, 0.8, g, 0.7).value
        v2 = ray_outer(a, b, 0.8, -g % (2 * np.pi), 0.7).value
        assert abs(v1 - v2.conjugate()) < 1e-12


def test_capacity_must_be_positive():
    with pytest.raises(ValueError):
        integrate_ray_outer([-1, 1], [], -1.0, RaySpec(0.0, formulation="outer"))


def test_rayspec_validation():
    with pytest.raises(ValueError):
        RaySpec(0.1, t_end=0.0)
    with pytest.raises(ValueError):
        RaySpec(0.1, formulation="sideways")


def test_solution_rays_hit_anchors(three_point):
    prob, sol = three_point
    hit = sorted(sol.alpha_anchor.values())
    assert hit == [0, 1]
    for name, k in sol.alpha_anchor.items():
        assert abs(integrate_ray_inner(prob, sol, RaySpec(sol.angles[name])) - prob.anchors[k]) < 1e-10


def test_solution_mirror_rays(three_point):
    prob, sol = three_point
    b1 = sol.angles["beta1"]
    v1 = integrate_ray_inner(prob, sol, RaySpec(b1 / 2))
    v2 = integrate_ray_inner(prob, sol, RaySpec(2 * np.pi - b1 / 2))
    assert abs(v1 - v2) < 1e-10


def test_step_refinement(three_point):
    prob, sol = three_point
    for g in (0.3, 2.0, 4.4):
        v1 = ray_inner(prob.anchors, sol.b_roots, sol.lead, g, safety=0.25).value
        v2 = ray_inner(prob.anchors, sol.b_roots, sol.lead, g, safety=0.125).value
        assert abs(v1 - v2) < 1e-12


def test_branch_continuity(three_point):
    prob, sol = three_point
    res = ray_inner(prob.anchors, sol.b_roots, sol.lead, 1.7)
    d = np.array(res.derivatives)
    assert np.all((d[1:] * np.conj(d[:-1])).real > 0)


def test_segment_trajectory():
    tr = trace_trajectory([-1, 1], [], 1.0)
    assert tr.stop_reason == "met_point"
    assert abs(tr.end_anchor + 1) < 1e-12
    assert np.max(np.abs(tr.points.imag)) < 1e-9
    assert abs(tr.length - math.pi) < 1e-6


def test_cube_roots_radial_trajectory():
    tr = trace_trajectory(CUBE, [0], 1.0)
    assert abs(tr.end_anchor) < 1e-12
    assert np.max(np.abs(tr.points.imag)) < 1e-9
    assert np.all(np.diff(tr.points.real) <= 1e-15)


def test_trajectory_conjugation():
    a = [0, 2, 1 + 1j, 1 - 1j]
    b = [1.0 + 0.4j, 1.0 - 0.4j]
    t1 = trace_trajectory(a, b, 1 + 1j, Stop(arc_length=0.5))
    t2 = trace_trajectory(a, b, 1 - 1j, Stop(arc_length=0.5))
    n = min(len(t1), len(t2))
    assert np.max(np.abs(t1.points[:n] - t2.points[:n].conj())) < 1e-12


def test_trajectory_keeps_quadratic_differential_positive():
    a = [0, 2, 1 + 1j, 1 - 1j]
    b = [1.0 + 0.4j, 1.0 - 0.4j]
    tr = trace_trajectory(a, b, 1 + 1j, Stop(arc_length=0.5))
    qd = QuadraticDifferential.outer(a, b)
    for k in range(5, len(tr) - 1, 50):
        dz = tr.points[k + 1] - tr.points[k]
        val = qd(tr.points[k]) * dz * dz
        # Q dz^2 = -R dz^2 is real and positive along trajectories
        assert abs(val.imag) <= 1e-3 * abs(val)
        assert -val.real > 0


def test_zero_start_needs_direction():
    with pytest.raises(AmbiguousStartError):
        trace_trajectory(CUBE, [0], 0.0)


def test_zero_start_with_direction():
    tr = trace_trajectory(CUBE, [0], 0.0, toward=1.0)
    assert abs(tr.end_anchor - 1) < 1e-9


def test_point_at_matches_polyline():
    tr = trace_trajectory([-1, 1], [], 1.0)
    z, t = tr.point_at(0.5 * tr.length)
    assert abs(z.imag) < 1e-9
    assert abs(abs(t) - 1) < 1e-12
    with pytest.raises(ValueError):
        tr.point_at(2 * tr.length)
