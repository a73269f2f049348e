"""Compiled coefficient recurrences for the ray equations.

All kernels work with the polynomial (denominator-free) form of the
equations, so every unknown coefficient is obtained from a single linear
equation at each order.

Inner rays, ``z(t) = f(t e^{i gamma})``::

    (t z')^2 * prod(z - b_j) = C * prod(z - a_i) * z^2

Outer rays, ``z(t) = g(e^{i gamma} / t)``::

    (t z')^2 * prod(z - b_j) = prod(z - a_i)

Near ``t = 0`` the outer solution has a simple pole, so the kernel works with
``u = t z`` instead, which satisfies ``(u - t u')^2 prod(u - b t) = prod(u - a t)``.
Repeated roots in the ``b`` array encode multiplicities.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _coef_of_products(roots, z, k, table):
    """Fill ``table[i, k]`` = coefficient k of prod_{l<=i} (z - roots[l])."""
    n = roots.shape[0]
    for i in range(n):
        if i == 0:
            if k == 0:
                table[0, 0] = z[0] - roots[0]
            else:
                table[0, k] = z[k]
        else:
            s = table[i - 1, k] * (z[0] - roots[i])
            for j in range(k):
                s += table[i - 1, j] * z[k - j]
            table[i, k] = s


@njit(cache=True)
def jet_regular(proots, qroots, C, with_z2, t0, z0, zd, order):
    """Taylor coefficients of a ray solution about a regular point ``t0 > 0``.

    ``zd`` is the expected value of z'(t0); it selects the sign branch.
    """
    n = proots.shape[0]
    m = qroots.shape[0]
    z = np.zeros(order, dtype=np.complex128)
    w = np.zeros(order, dtype=np.complex128)
    w2 = np.zeros(order, dtype=np.complex128)
    x2 = np.zeros(order, dtype=np.complex128)
    px = np.zeros(order, dtype=np.complex128)
    ptab = np.zeros((max(n, 1), order), dtype=np.complex128)
    qtab = np.zeros((max(m, 1), order), dtype=np.complex128)
    z[0] = z0

    # order 0: the quadratic for z'(t0)
    _coef_of_products(proots, z, 0, ptab)
    _coef_of_products(qroots, z, 0, qtab)
    P0 = ptab[n - 1, 0] if n > 0 else 1.0 + 0j
    Q0 = qtab[m - 1, 0] if m > 0 else 1.0 + 0j
    X0 = z0 * z0 if with_z2 else 1.0 + 0j
    z1 = np.sqrt(C * P0 * X0 / Q0) / t0
    if (z1 * np.conj(zd)).real < 0.0:
        z1 = -z1
    if order > 1:
        z[1] = z1
    w[0] = t0 * z1
    w2[0] = w[0] * w[0]
    x2[0] = X0
    px[0] = P0 * X0

    for k in range(1, order - 1):
        if n > 0:
            _coef_of_products(proots, z, k, ptab)
        if m > 0:
            _coef_of_products(qroots, z, k, qtab)
        if with_z2:
            s = 0j
            for j in range(k + 1):
                s += z[j] * z[k - j]
            x2[k] = s
            s = 0j
            for j in range(k + 1):
                pj = ptab[n - 1, j] if n > 0 else (1.0 + 0j if j == 0 else 0j)
                s += pj * x2[k - j]
            px[k] = s
        else:
            px[k] = ptab[n - 1, k] if n > 0 else 0j
        rest = 0j
        for j in range(1, k):
            rest += w[j] * w[k - j]
        acc = rest * Q0
        for j in range(k):
            qk = qtab[m - 1, k - j] if m > 0 else 0j
            acc += w2[j] * qk
        wk = (C * px[k] - acc) / (2.0 * w[0] * Q0)
        w[k] = wk
        w2[k] = 2.0 * w[0] * wk + rest
        z[k + 1] = (wk - k * z[k]) / (t0 * (k + 1))
    return z


@njit(cache=True)
def jet_inner_origin(proots, qroots, C, z1, order):
    """Taylor coefficients of the inner ray solution at ``t = 0``.

    Works with ``y = z / t`` (analytic, ``y(0) = z1``); returns the
    coefficients of ``z`` itself.
    """
    n = proots.shape[0]
    m = qroots.shape[0]
    ny = order - 1
    y = np.zeros(max(ny, 1), dtype=np.complex128)
    u = np.zeros(order, dtype=np.complex128)   # u = t y = z
    v2 = np.zeros(max(ny, 1), dtype=np.complex128)
    y2 = np.zeros(max(ny, 1), dtype=np.complex128)
    ptab = np.zeros((max(n, 1), order), dtype=np.complex128)
    qtab = np.zeros((max(m, 1), order), dtype=np.complex128)
    y[0] = z1
    u[1] = z1
    _coef_of_products(proots, u, 0, ptab)
    _coef_of_products(qroots, u, 0, qtab)
    P0 = ptab[n - 1, 0] if n > 0 else 1.0 + 0j
    Q0 = qtab[m - 1, 0] if m > 0 else 1.0 + 0j
    v2[0] = z1 * z1
    y2[0] = z1 * z1
    for k in range(1, ny):
        # u_k = y_{k-1} is known, so order-k coefficients of P and Q are final
        if n > 0:
            _coef_of_products(proots, u, k, ptab)
        if m > 0:
            _coef_of_products(qroots, u, k, qtab)
        rest_v = 0j
        rest_y = 0j
        for j in range(1, k):
            rest_v += (j + 1) * y[j] * (k - j + 1) * y[k - j]
            rest_y += y[j] * y[k - j]
        s1 = 0j
        for j in range(k):
            qk = qtab[m - 1, k - j] if m > 0 else 0j
            s1 += v2[j] * qk
        s2 = 0j
        for j in range(1, k + 1):
            pj = ptab[n - 1, j] if n > 0 else 0j
            s2 += pj * y2[k - j]
        coef = 2.0 * y[0] * ((k + 1) * Q0 - C * P0)
        yk = (C * (P0 * rest_y + s2) - rest_v * Q0 - s1) / coef
        y[k] = yk
        v2[k] = 2.0 * y[0] * (k + 1) * yk + rest_v
        y2[k] = 2.0 * y[0] * yk + rest_y
        u[k + 1] = yk
    return u


@njit(cache=True)
def _linear_factor_products(roots, u, k, table):
    """Coefficient k of prod (u - c t), the factor series being u_k - c [k==1]."""
    n = roots.shape[0]
    for i in range(n):
        fi0 = u[0]
        if i == 0:
            if k == 1:
                table[0, 1] = u[1] - roots[0]
            else:
                table[0, k] = u[k]
        else:
            s = table[i - 1, k] * fi0
            for j in range(k):
                d = k - j
                if d == 1:
                    f = u[1] - roots[i]
                else:
                    f = u[d]
                s += table[i - 1, j] * f
            table[i, k] = s


@njit(cache=True)
def jet_outer_origin(proots, qroots, u0, order):
    """Coefficients of ``u(t) = t g(e^{i gamma}/t)`` at ``t = 0``.

    ``u0 = cap e^{i gamma}``.  The same kernel, with ``gamma = 0``, yields
    the Laurent coefficients of the exterior map: ``g(w) = sum u_k w^{1-k}``.
    """
    n = proots.shape[0]
    m = qroots.shape[0]
    u = np.zeros(order, dtype=np.complex128)
    w = np.zeros(order, dtype=np.complex128)   # w = u - t u'
    w2 = np.zeros(order, dtype=np.complex128)
    ptab = np.zeros((max(n, 1), order), dtype=np.complex128)
    qtab = np.zeros((max(m, 1), order), dtype=np.complex128)
    u[0] = u0
    for i in range(n):
        ptab[i, 0] = u0 ** (i + 1)
    for i in range(m):
        qtab[i, 0] = u0 ** (i + 1)
    w[0] = u0
    w2[0] = u0 * u0
    Q0 = u0 ** m
    # d/du_k of the order-k residual: 2 u0 (1 - k) u0^m + m u0^(m+1) - n u0^(n-1)
    for k in range(1, order):
        u[k] = 0j
        if n > 0:
            _linear_factor_products(proots, u, k, ptab)
        if m > 0:
            _linear_factor_products(qroots, u, k, qtab)
        rest = 0j
        for j in range(1, k):
            rest += w[j] * w[k - j]
        acc = rest * Q0
        for j in range(k):
            qk = qtab[m - 1, k - j] if m > 0 else 0j
            acc += w2[j] * qk
        pk = ptab[n - 1, k] if n > 0 else 0j
        r0 = acc - pk
        alpha = 2.0 * (1 - k) * u0 ** (m + 1) + m * u0 ** (m + 1) - n * u0 ** (n - 1)
        uk = -r0 / alpha
        u[k] = uk
        for i in range(n):
            ptab[i, k] += uk * (i + 1) * u0 ** i
        for i in range(m):
            qtab[i, k] += uk * (i + 1) * u0 ** i
        w[k] = (1 - k) * uk
        w2[k] = 2.0 * w[0] * w[k] + rest
    return u


@njit(cache=True)
def horner(c, h):
    """Value and derivative of sum c_k h^k."""
    v = 0j
    d = 0j
    for k in range(c.shape[0] - 1, -1, -1):
        d = d * h + v
        v = v * h + c[k]
    return v, d
