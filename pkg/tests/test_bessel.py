import math

import numpy as np
import pytest
from scipy import special

from ptcap.bessel import (DELTA_MAX_N, delta_midpoint, delta_n, delta_table, j0_series, j0_zero,
                          j1_series)

J0_ZERO = 2.404825557695773
DELTA_2 = 0.8722264825849465


def test_series_values():
    assert j0_series(0.0) == 1.0
    # the range that matters for the moments
    x = np.linspace(0, J0_ZERO, 97)
    assert np.max(np.abs(j0_series(x) - special.j0(x))) < 1e-15
    assert np.max(np.abs(j1_series(x) - special.j1(x))) < 1e-15
    # cancellation between large terms costs a few digits further out
    x = np.linspace(0, 12, 97)
    assert np.max(np.abs(j0_series(x) - special.j0(x))) < 1e-10


def test_series_range():
    with pytest.raises(ValueError):
        j0_series(13.0)


def test_first_zero():
    j = j0_zero()
    assert abs(j - J0_ZERO) <= 1e-12
    assert abs(float(j0_series(j))) < 1e-14
    assert j0_series(j - 1e-9) > 0 > j0_series(j + 1e-9)


def test_delta_one():
    assert delta_n(1) == 1.0
    assert abs(delta_midpoint(1) - 1) < 1e-12


def test_delta_two_regression():
    assert delta_n(2) == pytest.approx(DELTA_2, abs=1e-12)


def test_dual_quadrature():
    for n in range(2, 51):
        assert abs(delta_n(n) - delta_midpoint(n)) <= 1e-10, n


def test_deltas_positive_and_decreasing_tail():
    d = delta_table(DELTA_MAX_N)
    assert np.all(d > 0)
    # r^(2n-1) concentrates at r = 1 where J0(j0 r) vanishes quadratically
    assert np.all(np.diff(d[5:]) < 0)


def test_delta_range():
    with pytest.raises(ValueError):
        delta_n(0)
    with pytest.raises(ValueError):
        delta_n(DELTA_MAX_N + 1)


def test_closed_form_normaliser():
    # int_0^1 J0(j0 r)^2 r dr = J1(j0)^2 / 2
    from ptcap.bessel import _moment
    assert _moment(1) == pytest.approx(0.5 * special.j1(J0_ZERO) ** 2, rel=1e-13)
