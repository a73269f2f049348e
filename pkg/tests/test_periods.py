import math

import numpy as np
import pytest

from ptcap.periods import connection_residuals, edge_length, log_capacity, robin_lead
from ptcap.quadratic import QuadraticDifferential, gauss_legendre01

W = np.exp(2j * np.pi / 3)


def test_gauss_legendre_integrates_polynomials():
    x, w = gauss_legendre01(8)
    assert abs(np.sum(w * x ** 5) - 1 / 6) < 1e-15


def test_orders_of_singular_points():
    qd = QuadraticDifferential.outer([1, W, W.conjugate()], [0])
    assert qd.order_at(1.0, 1e-12) == -1
    assert qd.order_at(0.0, 1e-12) == 1
    assert qd.order_at(0.5, 1e-12) == 0


def test_segment_capacity():
    qd = QuadraticDifferential.outer([-1, 1], [])
    assert abs(abs(robin_lead(qd, 1.0)) - 0.5) < 1e-12
    assert abs(log_capacity(qd, -1.0) - math.log(0.5)) < 1e-12


def test_segment_sides_share_the_circle():
    qd = QuadraticDifferential.outer([-1, 1], [])
    assert abs(edge_length(qd, -1, 1) - math.pi) < 1e-10
    assert abs(connection_residuals(qd, [(-1, 1)])[0]) < 1e-12


def test_three_radii_capacity():
    qd = QuadraticDifferential.outer([1, W, W.conjugate()], [0])
    assert abs(abs(robin_lead(qd, 1.0)) - 4 ** (-1 / 3)) < 1e-12
    lengths = [edge_length(qd, p, 0) for p in (1, W, W.conjugate())]
    assert np.allclose(lengths, 2 * math.pi / 6, atol=1e-12)


def test_wrong_branch_point_breaks_periods():
    qd = QuadraticDifferential.outer([1, W, W.conjugate()], [0.1j])
    assert abs(connection_residuals(qd, [(1, 0.1j)])[0]) > 1e-3


@pytest.mark.parametrize("s", [0.5, 2.0 + 1j])
def test_capacity_scales(s):
    pts = [s * p for p in (1, W, W.conjugate())]
    qd = QuadraticDifferential.outer(pts, [0])
    assert abs(abs(robin_lead(qd, pts[0])) - abs(s) * 4 ** (-1 / 3)) < 1e-12
