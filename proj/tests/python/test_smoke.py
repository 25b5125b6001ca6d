import math

import numpy as np
import pytest

import dualprox as dp


def test_prox_examples():
    ball = dp.indicator(dp.ConvexSet.ball([0.0, 0.0], 1.0))
    assert np.allclose(ball.prox(1.0, [3.0, 4.0]), [0.6, 0.8])
    assert math.isinf(ball.eval([2.0, 0.0]))
    assert np.allclose(dp.norm1().prox(1.0, [2.0, -0.5]), [1.0, 0.0])
    assert np.allclose(dp.norm2().prox_conjugate(2.0, [3.0, 4.0]), [0.6, 0.8])


def test_solve_soft_threshold():
    terms = [dp.Term(0.5, dp.norm1(), dp.identity_operator(1)) for _ in range(2)]
    res = dp.solve(dp.Problem([3.0], terms))
    assert res.solution.converged
    assert res.solution.x[0] == pytest.approx(2.0, abs=1e-7)
    assert res.trace_csv().startswith("n,primal,dual,step_norm,gamma,lambda\n")


def test_operator_and_shift():
    L = dp.matrix_operator(np.array([[2.0], [-1.0]]))
    p = dp.Problem([2.0], [dp.Term(1.0, dp.norm1(), L, [1.0, 0.5])])
    x = dp.solve(p, tol=1e-10).solution.x
    assert x[0] == pytest.approx(0.5, abs=1e-7)


def test_bad_step_rejected():
    p = dp.Problem([1.0], [dp.Term(1.0, dp.norm1(), dp.identity_operator(1))])
    with pytest.raises(ValueError):
        dp.solve(p, gamma=5.0)


def test_projection():
    cs = [dp.Constraint(dp.ConvexSet.ball([0.0, 0.0], 1.0)), dp.Constraint(dp.ConvexSet.halfspace([1.0, 0.0], 0.0))]
    r = dp.project_intersection([1.0, 1.0], cs, slater_point=[-0.5, 0.0])
    assert r.status == "converged"
    assert np.allclose(r.x, [0.0, 1.0], atol=1e-6)
    with pytest.raises(ValueError):
        dp.project_intersection([1.0, 1.0], cs)


def test_gradient_adjoint():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, 7))
    h, v = rng.normal(size=(5, 7)), rng.normal(size=(5, 7))
    gh, gv = dp.forward_gradient(x)
    lhs = np.sum(gh * h) + np.sum(gv * v)
    rhs = -np.sum(x * dp.backward_divergence(h, v))
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert dp.tv(np.array([[0.0, 1.0], [0.0, 1.0]])) == pytest.approx(2.0)


def test_denoise_pixel():
    img, converged, _ = dp.denoise(np.array([[2.0]]), weights=[0.5, 0.25, 0.25], tol=1e-10)
    assert converged
    assert img[0, 0] == pytest.approx(0.25, abs=1e-8)


def test_grid_oracle():
    p = dp.Problem([3.0], [dp.Term(1.0, dp.norm1(), dp.identity_operator(1))])
    x, radius = dp.grid_oracle(p)
    assert abs(x[0] - 2.0) <= radius
