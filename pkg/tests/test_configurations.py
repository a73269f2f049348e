import cmath
import math

import numpy as np
import pytest

from ptcap.configurations import (PTProblem, harmonic_residuals, residuals_3pt,
                                  residuals_6pt_sym, residuals_critical_orbit, solution_residuals,
                                  solve_pt, verify_topology)
from ptcap.errors import ModeGuardError, TopologyMismatchError

W = np.exp(2j * np.pi / 3)
TWO_PI = 2 * math.pi


def x3(sol):
    return np.array([sol.lead.real, sol.lead.imag, sol.b_points[0].real, sol.b_points[0].imag,
                     sol.angles["beta1"], sol.angles["beta2"]])


def conj_x3(x):
    return np.array([x[0], -x[1], x[2], -x[3], x[4], TWO_PI - x[5]])


# --------------------------------------------------------------------------
# problems


def test_anchor_count_is_checked():
    with pytest.raises(ValueError):
        PTProblem("three_point", (1, 2, 3))


def test_anchors_must_be_distinct():
    with pytest.raises(ValueError):
        PTProblem("outer_two", (1, 1))


def test_symmetric_layout_is_checked():
    with pytest.raises(ValueError):
        PTProblem("outer_three_sym", (1, W, W))
    with pytest.raises(ValueError):
        PTProblem("six_sym_1", (1 + 1j, 2 + 1j, 3, 2 - 1j, 1 - 2j))


def test_unknown_configuration():
    with pytest.raises(ValueError):
        PTProblem("four_point", (1, 2))


# --------------------------------------------------------------------------
# exterior oracles


def test_segment_capacity():
    sol = solve_pt(PTProblem("outer_two", (-1, 1)))
    assert abs(sol.capacity - 0.5) < 1e-10


def test_three_radii_capacity():
    sol = solve_pt(PTProblem("outer_three_sym", (1, W, W.conjugate())))
    assert abs(sol.capacity - 4 ** (-1 / 3)) < 1e-8
    assert abs(sol.b_points[0]) < 1e-8


@pytest.mark.parametrize("s,c", [(2.0, 0), (0.5 + 1.5j, 1 - 2j), (-3.0, 0.25j)])
def test_affine_covariance_of_exterior_solution(s, c):
    base = PTProblem("outer_two", (-1, 1 + 0.5j))
    ref = solve_pt(base)
    moved = solve_pt(base.scaled(s, c))
    assert abs(moved.capacity - abs(s) * ref.capacity) < 1e-10 * max(1, abs(s))
    assert len(moved.b_points) == len(ref.b_points) == 0


def test_affine_covariance_of_three_radii():
    s, c = 1.7 * cmath.exp(0.4j), 0.3 - 0.2j
    base = PTProblem("outer_three_sym", (1, W, W.conjugate()))
    moved = solve_pt(PTProblem("outer_three_sym", (1, W, W.conjugate()), symmetric=True).scaled(abs(s), 0.3))
    assert abs(moved.capacity - abs(s) * 4 ** (-1 / 3)) < 1e-10
    assert abs(moved.b_points[0] - 0.3) < 1e-10
    del base, c


# --------------------------------------------------------------------------
# three points


def test_three_point_converges(three_point):
    prob, sol = three_point
    assert sol.residual_norm <= 1e-12
    assert np.max(np.abs(residuals_3pt(prob, x3(sol)))) <= 1e-12


def test_three_point_dimension(three_point):
    prob, sol = three_point
    assert residuals_3pt(prob, x3(sol) + 0.01).shape == (6,)


def test_three_point_angles_are_ordered(three_point):
    _, sol = three_point
    word = ["beta1", "alpha1", "beta2", "alpha2", "beta3"]
    vals = [sol.angles[w] for w in word]
    assert all(0 < a < b < TWO_PI for a, b in zip(vals, vals[1:]))
    assert abs(sol.angles["beta3"] - (TWO_PI - sol.angles["beta1"])) < 1e-14


def test_three_point_residuals_conjugate(three_point):
    prob, sol = three_point
    x = x3(sol) + np.array([0.01, 0.02, -0.01, 0.015, 0.005, -0.007])
    r = residuals_3pt(prob, x)
    rc = residuals_3pt(prob.conjugate(), conj_x3(x))
    z = r[0::2] + 1j * r[1::2]
    zc = rc[0::2] + 1j * rc[1::2]
    assert np.max(np.abs(zc - (-np.conj(z[[0, 2, 1]])))) < 1e-12


def test_three_point_conjugation_equivariance(three_point):
    prob, sol = three_point
    conj = solve_pt(prob.conjugate())
    assert abs(conj.lead - sol.lead.conjugate()) < 1e-10
    assert abs(conj.b_points[0] - sol.b_points[0].conjugate()) < 1e-10


def test_three_point_scaling(three_point):
    prob, sol = three_point
    s = 1.5 * cmath.exp(0.7j)
    scaled = solve_pt(prob.scaled(s))
    assert abs(scaled.lead - s * sol.lead) < 1e-10 * abs(s * sol.lead)
    assert abs(scaled.b_points[0] - s * sol.b_points[0]) < 1e-10
    assert abs(scaled.capacity - sol.capacity / abs(s)) < 1e-10


def test_three_point_relabelling(three_point):
    prob, sol = three_point
    swapped = solve_pt(PTProblem("three_point", prob.anchors[::-1]))
    assert abs(swapped.lead - sol.lead) < 1e-10
    assert abs(swapped.b_points[0] - sol.b_points[0]) < 1e-10


def test_stored_solution_residuals(three_point):
    _, sol = three_point
    assert np.max(np.abs(solution_residuals(sol))) <= 1e-12


def test_three_point_topology(three_point):
    _, sol = three_point
    assert verify_topology(sol)


# --------------------------------------------------------------------------
# six points


def test_six_point_config_one(six_sym_1):
    prob, sol = six_sym_1
    assert sol.topology == 1
    inner = sol.companion
    shape_x = np.array([inner.lead.real, inner.b_points[0].real, inner.b_points[1].real,
                        inner.angles["beta1_1"], inner.angles["beta1_2"],
                        inner.angles["beta2_1"], inner.angles["beta2_2"]])
    iprob, _ = prob.inverted()
    r = residuals_6pt_sym(iprob, 1, shape_x)
    assert r.shape == (7,)
    assert np.max(np.abs(r)) <= 1e-12


def test_six_point_config_one_invariants(six_sym_1):
    _, sol = six_sym_1
    inner = sol.companion
    assert abs(inner.lead.imag) < 1e-14
    assert inner.angles["alpha3"] == math.pi
    assert all(abs(b.imag) < 1e-14 for b in inner.b_points)
    assert all(abs(b.imag) < 1e-12 for b in sol.b_points)


def test_six_point_modes_agree(six_sym_1):
    prob, harmonic = six_sym_1
    periods = solve_pt(prob, mode="periods")
    assert abs(harmonic.capacity - periods.capacity) < 1e-8
    for b1, b2 in zip(harmonic.b_points, periods.b_points):
        assert abs(b1 - b2) < 1e-8


def test_critical_orbit_residuals_vanish(six_sym_1):
    prob, sol = six_sym_1
    inner = sol.companion
    iprob, _ = prob.inverted()
    x = np.array([inner.lead.real, inner.b_points[0].real, inner.b_points[1].real])
    r = residuals_critical_orbit(iprob, x)
    assert r.shape == (3,)
    assert np.max(np.abs(r)) <= 1e-8


def test_critical_orbit_mode_agrees(six_sym_1):
    prob, sol = six_sym_1
    orbit = solve_pt(prob, mode="critical_orbit")
    assert abs(orbit.capacity - sol.capacity) < 1e-8


def test_critical_orbit_guard():
    # a1 close to the leaf: the leaf arc is about 0.145, below the 0.2 guard
    prob = PTProblem("outer_six_sym", (0, 3, 0.05 + 0.1j, 2 + 0.8j, 2 - 0.8j, 0.05 - 0.1j), topology=1)
    assert solve_pt(prob, mode="harmonic").companion.angles["beta1_1"] < 0.2
    with pytest.raises(ModeGuardError):
        solve_pt(prob, mode="critical_orbit")


def test_config_two_instance():
    prob = PTProblem("outer_six_sym", (0, 3, 1 + 2j, 1.4 + 2.1j, 1.4 - 2.1j, 1 - 2j))
    sol = solve_pt(prob)
    assert sol.topology == 2
    assert sol.residual_norm <= 1e-12
    assert verify_topology(sol)
    assert len(sol.b_points) == 3


def test_config_two_dimension():
    prob = PTProblem("outer_six_sym", (0, 3, 1 + 2j, 1.4 + 2.1j, 1.4 - 2.1j, 1 - 2j), topology=2)
    sol = solve_pt(prob, mode="harmonic", fallback=False)
    inner = sol.companion
    iprob, _ = prob.inverted()
    b1, b2 = inner.b_points[0], inner.b_points[1]
    x = np.array([inner.lead.real, b1.real, b2.real, b2.imag, inner.angles["beta1_1"],
                  inner.angles["beta2_1"], inner.angles["beta2_2"], inner.angles["beta2_3"]])
    r = residuals_6pt_sym(iprob, 2, x)
    assert r.shape == (8,)
    assert np.max(np.abs(r)) <= 1e-11


def test_wrong_topology_is_reported():
    prob = PTProblem("outer_six_sym", (0, 3, 1 + 2j, 1.4 + 2.1j, 1.4 - 2.1j, 1 - 2j), topology=1)
    with pytest.raises(TopologyMismatchError):
        solve_pt(prob, fallback=False)


def test_inner_six_point_falls_back_to_topology_two():
    prob = PTProblem("six_sym_1", (1 + 1j, 0.8 + 0.5j, 0.5, 0.8 - 0.5j, 1 - 1j))
    sol = solve_pt(prob)
    assert sol.config_id == "six_sym_2"
    assert sol.residual_norm <= 1e-12


def test_harmonic_residuals_check_dimension(three_point):
    prob, _ = three_point
    with pytest.raises(ValueError):
        harmonic_residuals(prob, np.zeros(5))
