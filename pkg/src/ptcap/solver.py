"""Powell's hybrid method and natural-parameter continuation.

The solver is the usual dogleg trust-region iteration on a forward-difference
Jacobian.  Accepted steps update the Jacobian with Broyden's rank-one formula;
a rejected step triggers a fresh finite-difference Jacobian (unless the current
one is already fresh) and a smaller trust region.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import EvaluationError, PathFailureError, PTError, StagnationError

log = logging.getLogger(__name__)

FD_STEP = 1e-7


@dataclass
class SolveReport:
    root: np.ndarray
    residual_norm: float
    iterations: int
    jacobian_evals: int
    converged: bool
    param: Optional[float] = None
    history: List[float] = field(default_factory=list, repr=False)


def _evaluate(fun, x):
    r = np.asarray(fun(x), dtype=float).ravel()
    if not np.all(np.isfinite(r)):
        raise EvaluationError(f"residual is not finite at x = {x!r}", point=np.array(x, copy=True))
    return r


def fd_jacobian(fun, x, r0=None, h=FD_STEP):
    """Forward-difference Jacobian with step ``h * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    if r0 is None:
        r0 = _evaluate(fun, x)
    J = np.empty((r0.size, x.size))
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += step
        step = xp[i] - x[i]   # representable increment
        J[:, i] = (_evaluate(fun, xp) - r0) / step
    return J


def dogleg_step(J, r, delta):
    """Minimiser of ||r + J p|| on the dogleg path inside ||p|| <= delta."""
    try:
        p_gn = -np.linalg.solve(J, r)
    except np.linalg.LinAlgError:
        p_gn = -np.linalg.lstsq(J, r, rcond=None)[0]
    if not np.all(np.isfinite(p_gn)):
        p_gn = -np.linalg.lstsq(J, r, rcond=None)[0]
    n_gn = np.linalg.norm(p_gn)
    if n_gn <= delta:
        return p_gn
    g = J.T @ r
    Jg = J @ g
    gg = g @ g
    if gg == 0.0 or Jg @ Jg == 0.0:
        return p_gn * (delta / n_gn)
    p_sd = -(gg / (Jg @ Jg)) * g
    n_sd = np.linalg.norm(p_sd)
    if n_sd >= delta:
        return p_sd * (delta / n_sd)
    d = p_gn - p_sd
    a = d @ d
    b = 2.0 * (p_sd @ d)
    c = p_sd @ p_sd - delta * delta
    tau = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)
    return p_sd + tau * d


def solve_system(residual: Callable, x0, tol: float = 1e-12, *, max_iter: int = 200,
                 delta0: Optional[float] = None, fd_step: float = FD_STEP,
                 raise_on_failure: bool = True, callback=None) -> SolveReport:
    """Find a zero of ``residual`` starting from ``x0``.

    Convergence means ``max|residual| <= tol``.  Stagnation (trust region
    below 1e-14) raises :class:`StagnationError` carrying the best report,
    unless ``raise_on_failure`` is false.
    """
    x = np.array(x0, dtype=float)
    r = _evaluate(residual, x)
    fnorm = float(np.linalg.norm(r))
    J = fd_jacobian(residual, x, r, fd_step)
    jevals = 1
    fresh = True
    delta = delta0 if delta0 is not None else 100.0 * max(np.linalg.norm(x), 1.0)
    it = 0
    history = [float(np.max(np.abs(r)))]

    def report(ok):
        return SolveReport(x.copy(), float(np.max(np.abs(r))), it, jevals, ok, history=history)

    while np.max(np.abs(r)) > tol:
        if it >= max_iter:
            rep = report(False)
            if raise_on_failure:
                raise StagnationError("iteration budget exhausted", rep)
            return rep
        it += 1
        p = dogleg_step(J, r, delta)
        pnorm = float(np.linalg.norm(p))
        xn = x + p
        try:
            rn = _evaluate(residual, xn)
        except EvaluationError:
            raise
        except PTError as exc:
            # an integrator failure at a trial point counts as a rejected step
            log.debug("trial point rejected: %s", exc)
            rn = None
        if rn is None:
            rho = -1.0
        else:
            fn = float(np.linalg.norm(rn))
            pred = r + J @ p
            predicted = fnorm ** 2 - float(pred @ pred)
            actual = fnorm ** 2 - fn ** 2
            rho = actual / predicted if predicted > 0 else -1.0
        if rho > 1e-4:
            # accepted; Broyden update with the observed change
            y = rn - r - J @ p
            J = J + np.outer(y, p) / (p @ p)
            fresh = False
            x, r, fnorm = xn, rn, fn
            if rho > 0.75:
                delta = max(delta, 2.0 * pnorm)
            elif rho < 0.25:
                delta = 0.5 * pnorm
            history.append(float(np.max(np.abs(r))))
            if callback is not None:
                callback(x, r)
        else:
            delta = 0.5 * min(delta, pnorm)
            if not fresh:
                J = fd_jacobian(residual, x, r, fd_step)
                jevals += 1
                fresh = True
        if delta < 1e-14 * max(1.0, float(np.linalg.norm(x))):
            rep = report(False)
            if raise_on_failure:
                raise StagnationError(
                    f"trust region collapsed with residual {rep.residual_norm:.3e}", rep)
            return rep
    return report(True)


def continuation(family: Callable, x_start, steps: int = 10, *, tol: float = 1e-12,
                 min_dt: float = 1e-4, t_start: float = 0.0, t_end: float = 1.0,
                 predictor: str = "none", **solver_options) -> List[SolveReport]:
    """Follow the zeros of ``family(x, t)`` from ``t_start`` to ``t_end``.

    Each member is solved from the previous solution (``predictor="secant"``
    extrapolates linearly from the last two instead).  Failed steps are
    halved down to ``min_dt``; below that a :class:`PathFailureError` carries
    the partial path.
    """
    x = np.array(x_start, dtype=float)
    t = t_start
    r0 = _evaluate(lambda v: family(v, t), x)
    path = [SolveReport(x.copy(), float(np.max(np.abs(r0))), 0, 0,
                        bool(np.max(np.abs(r0)) <= tol), t)]
    span = t_end - t_start
    dt = span / steps
    while (t_end - t) * np.sign(span) > 1e-15:
        dt_try = dt if abs(dt) <= abs(t_end - t) else t_end - t
        t_new = t + dt_try
        if predictor == "secant" and len(path) > 1 and path[-1].param != path[-2].param:
            slope = (path[-1].root - path[-2].root) / (path[-1].param - path[-2].param)
            guess = x + slope * dt_try
        else:
            guess = x
        try:
            rep = solve_system(lambda v: family(v, t_new), guess, tol, **solver_options)
        except PTError as exc:
            log.debug("continuation step to t=%g failed: %s", t_new, exc)
            dt = dt / 2.0
            if abs(dt) < min_dt * abs(span):
                raise PathFailureError(f"continuation stalled at t = {t:.6g}", path) from exc
            continue
        rep.param = t_new
        path.append(rep)
        x, t = rep.root, t_new
        dt = min(abs(2.0 * dt), abs(span / steps)) * np.sign(span)
    return path
