import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptcap.errors import EvaluationError, PathFailureError, StagnationError
from ptcap.solver import continuation, dogleg_step, fd_jacobian, solve_system


def test_square_root_of_four():
    rep = solve_system(lambda x: x ** 2 - 4, [1.0])
    assert rep.converged
    assert abs(rep.root[0] - 2) < 1e-12


def test_linear_system_is_solved_quickly():
    A = np.array([[4.0, 1, 0], [1, 3, 1], [0, 1, 2]])
    b = np.array([1.0, 2, 3])
    rep = solve_system(lambda x: A @ x - b, np.zeros(3))
    assert np.max(np.abs(rep.root - np.linalg.solve(A, b))) < 1e-12
    assert rep.iterations <= 3


def test_residual_norm_respects_tolerance():
    rep = solve_system(lambda x: np.array([x[0] ** 3 - 2, x[1] - x[0]]), [1.0, 0.0], tol=1e-13)
    assert rep.converged and rep.residual_norm <= 1e-13


def rosen(x):
    return np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])


def test_accepted_steps_never_increase_residual():
    norms = []
    solve_system(rosen, [-1.2, 1.0], callback=lambda x, r: norms.append(np.linalg.norm(r)))
    start = np.linalg.norm(rosen(np.array([-1.2, 1.0])))
    seq = [start] + norms
    assert all(b <= a for a, b in zip(seq, seq[1:]))


def test_fd_jacobian_of_quadratic():
    def f(x):
        return np.array([x[0] ** 2 + x[0] * x[1], 3 * x[1] ** 2 - x[0]])

    x = np.array([1.3, -0.7])
    J = np.array([[2 * x[0] + x[1], x[0]], [-1, 6 * x[1]]])
    assert np.max(np.abs(fd_jacobian(f, x) - J)) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
def test_scale_covariance(a, b):
    def f(x):
        return np.array([x[0] ** 3 + x[0] + x[1] - a, x[1] - b])

    r1 = solve_system(f, [1.0, 0.0]).root
    r2 = solve_system(lambda x: 10 * f(x), [1.0, 0.0]).root
    assert np.max(np.abs(r1 - r2)) < 1e-12


def test_dogleg_step_inside_region():
    J = np.eye(2)
    r = np.array([3.0, 4.0])
    p = dogleg_step(J, r, 1.0)
    assert abs(np.linalg.norm(p) - 1.0) < 1e-12
    assert np.allclose(dogleg_step(J, r, 10.0), -r)


def test_stagnation_without_root():
    with pytest.raises(StagnationError) as info:
        solve_system(lambda x: x ** 2 + 1, [0.3])
    assert info.value.report is not None
    assert not info.value.report.converged


def test_non_finite_residual():
    with pytest.raises(EvaluationError) as info:
        solve_system(lambda x: np.array([np.nan]), [1.0])
    assert info.value.point is not None


def test_path_follows_parameter():
    path = continuation(lambda x, t: x - t, [0.0], steps=5)
    assert [round(p.param, 12) for p in path] == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    for p in path:
        assert abs(p.root[0] - p.param) < 1e-12


def test_path_is_reversible():
    fam = lambda x, t: np.array([x[0] ** 3 + x[0] - 2 - t])
    fwd = continuation(fam, [1.0], steps=8)
    back = continuation(fam, fwd[-1].root, steps=8, t_start=1.0, t_end=0.0)
    assert abs(back[-1].root[0] - 1.0) < 1e-10


def test_path_failure_keeps_partial_path():
    # the root x = sqrt(1 - 2t) disappears at t = 1/2
    fam = lambda x, t: np.array([x[0] ** 2 - 1 + 2 * t])
    with pytest.raises(PathFailureError) as info:
        continuation(fam, [1.0], steps=4)
    assert len(info.value.path) >= 2
