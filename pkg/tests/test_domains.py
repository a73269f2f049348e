import cmath
import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptcap.domains import (P1, X_MIN, build_domain, dphi_dz, grid_inradius, inradius_check, koebe,
                           max_radius_for_x, phi, phi_inv, psi, psi_scale, symmetrize_cube_root, tips)
from ptcap.errors import DegenerateMapError, InfeasibleGeometryError
from ptcap.series import ComplexSeries, series_root

from conftest import BLOCH, FREQUENCY, LIFETIME


def test_koebe():
    assert koebe(-1) == -0.25
    with pytest.raises(ZeroDivisionError):
        koebe(1)


@pytest.mark.parametrize("R", [4.5, 5.0, 5.2, 7.0])
def test_psi_closed_forms(R):
    T = R ** 3
    direct = lambda z: -1.0 / koebe(z / T)
    assert psi(1.0, R) == pytest.approx(-(T - 1) ** 2 / T, rel=1e-14)
    assert psi(1.0, R) == pytest.approx(direct(1.0), rel=1e-14)
    assert psi(-8.0, R) == pytest.approx((T + 8) ** 2 / (8 * T), rel=1e-14)
    assert psi(-8.0, R) == pytest.approx(direct(-8.0), rel=1e-14)
    assert psi_scale(R) == pytest.approx(abs(psi(-8.0, R) - psi(1.0, R)), rel=1e-14)


def test_psi_pole():
    with pytest.raises(ZeroDivisionError):
        psi(0, 5.0)


def test_phi_normalisation():
    for R in (4.5, 5.1836816989):
        assert phi(1.0, R) == 0
        assert abs(phi(-8.0, R) - 1) < 1e-15
        assert abs(phi(1e-12, R)) > 1e6


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-math.pi, math.pi), st.floats(4.2, 6.0))
def test_phi_inverse(rho, theta, R):
    z = rho * R ** 3 * cmath.exp(1j * theta)
    back = phi_inv(phi(z, R), R)
    assert abs(back - z) <= 1e-9 * abs(z)


def test_phi_derivative():
    R, z, h = 5.0, 3 + 7j, 1e-5
    fd = (phi(z + h, R) - phi(z - h, R)) / (2 * h)
    assert abs(fd - dphi_dz(z, R)) < 1e-9


def test_first_centre():
    assert P1.real == 1 + math.sqrt(2 * math.sqrt(3) - 3)
    assert P1.real == pytest.approx(1.6812500386, abs=1e-10)
    assert P1.imag == 1.0


@pytest.mark.parametrize("x, R", [(X_MIN, 4.5), (2.0, 4.8), BLOCH, FREQUENCY, LIFETIME, (2.4, 5.5)])
def test_tangency(x, R):
    P2, P3, w1, w2 = tips(x, R)
    assert abs(abs(P3) - (R - 1)) <= 1e-12
    assert abs(0.5 * (math.sqrt(3) * P2.real - P2.imag) - 1) <= 1e-12
    assert abs(abs(w1 - P1) - 1) <= 1e-12
    assert abs(abs(w1 - P2) - 1) <= 1e-12
    assert abs(abs(w2 - P2) - 1) <= 1e-12


def test_infeasible_x():
    with pytest.raises(InfeasibleGeometryError):
        tips(1.0, 5.0)
    with pytest.raises(InfeasibleGeometryError):
        tips(2.1, 3.5)
    # the third circle is out of reach of the second when R is too large for x
    with pytest.raises(InfeasibleGeometryError):
        tips(2.174447128952, 6.0)


def test_domain_invariants(lifetime_domain):
    spec = lifetime_domain
    assert max(spec.tangency_residuals()) <= 1e-12
    assert spec.z1 == spec.w1 ** 3 and spec.z2 == spec.w2 ** 3
    # the arcs end at the tips in the w-plane
    assert abs(spec.arcs[0][0] - spec.w1) < 1e-9
    assert abs(spec.arcs[1][0] - spec.w2) < 1e-9
    # the anchors are conjugation symmetric
    a = spec.anchors
    assert abs(a[5] - a[2].conjugate()) < 1e-15 and abs(a[4] - a[3].conjugate()) < 1e-15


def test_inradius_passes_at_lifetime_parameters(lifetime_domain):
    res = inradius_check(lifetime_domain)
    assert res.ok and res.margin >= 0
    assert abs(abs(res.q) - (lifetime_domain.R - 1)) < 1e-6


def _shortened(spec, keep):
    trajs = []
    for t in spec.trajectories:
        k = max(int(len(t) * keep), 3)
        trajs.append(dataclasses.replace(t, points=t.points[:k], s=t.s[:k], roots=t.roots[:k]))
    out = dataclasses.replace(spec, trajectories=trajs)
    out.arcs = [np.array([out.w_of(p) for p in t.points]) for t in trajs]
    return out


def test_shortened_arcs_fail(lifetime_domain):
    res = inradius_check(_shortened(lifetime_domain, 0.3))
    assert not res.ok and res.margin < 0


def test_grid_oracle_agrees(lifetime_domain):
    r, _ = grid_inradius(lifetime_domain)
    assert r <= 1 + 1e-3
    bigger = build_domain(LIFETIME[0], LIFETIME[1] + 0.1)
    assert not inradius_check(bigger).ok
    r, where = grid_inradius(bigger)
    assert r > 1 + 1e-3
    assert 0 <= cmath.phase(where) <= math.pi / 3 + 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("x, R", [BLOCH, FREQUENCY, LIFETIME])
def test_max_radius_reproduces_published_values(x, R):
    assert max_radius_for_x(x, (R - 0.05, R + 0.05)) == pytest.approx(R, abs=1e-6)


def test_c1c2_reading_does_not_reproduce():
    x, R = BLOCH
    res = inradius_check(build_domain(x, R, reading="c1c2"))
    # under the other reading the published pair is far from the acceptance boundary
    assert not res.ok or abs(res.margin) > 1e-3


# --------------------------------------------------------------------------
# symmetrisation


def test_identity_symmetrisation():
    f = symmetrize_cube_root(ComplexSeries([0, 1, 0, 0]))
    assert np.allclose(f.coeffs[:2], [0, 1]) and not np.any(f.coeffs[2:])


def test_scaled_symmetrisation():
    f = symmetrize_cube_root(ComplexSeries([0, 8, 0]))
    assert abs(f.coeffs[1] - 2) < 1e-15


def test_binomial_symmetrisation():
    eps = 0.3
    f = symmetrize_cube_root(ComplexSeries([0, 1, eps, 0, 0]))
    assert abs(f.coeffs[4] - eps / 3) < 1e-15
    # the whole tail agrees with the cube root of 1 + eps u, spread out by z^3
    r = series_root(ComplexSeries([1, eps, 0, 0]), 3).coeffs
    assert np.allclose(f.coeffs[1::3], r, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=2, max_size=8))
def test_symmetrisation_is_sparse(tail):
    f = symmetrize_cube_root(ComplexSeries([0, 1 + 0.5j] + tail))
    c = f.coeffs
    for n in range(len(c)):
        if n % 3 != 1:
            assert c[n] == 0
    assert abs(abs(c[1]) ** 3 - abs(1 + 0.5j)) < 1e-14


def test_degenerate_symmetrisation():
    with pytest.raises(DegenerateMapError):
        symmetrize_cube_root(ComplexSeries([0, 0, 1]))
    with pytest.raises(ValueError):
        symmetrize_cube_root(ComplexSeries([1, 1]))
