import numpy as np
import pytest

from dynlab.errors import OddDimension, PointOutsideDomain, StepTooLarge
from dynlab.maps import (
    SmoothMap,
    affine_map,
    check_symplectic,
    compose,
    identity_map,
    jacobian,
)
from dynlab.spaces import Circle, Interval, StateSpace, annulus, unit_interval_space
from dynlab.twist import conjugating_shear, twist_map


def make_twist():
    return twist_map(lambda I: I, lambda I: np.ones_like(I))


def test_twist_wraps_angle():
    tw = make_twist()
    out = tw(np.array([0.5, 0.9]))
    assert out == pytest.approx([0.5, 0.4])


def test_identity_returns_input():
    sp = unit_interval_space(2)
    ident = identity_map(sp)
    x = np.array([0.3, 0.7])
    assert np.array_equal(ident(x), x)


def test_affine_evaluation():
    line = unit_interval_space(1)
    g = affine_map(line, [[0.5]], [0.0])
    assert g(np.array([0.8]))[0] == pytest.approx(0.4)


def test_outside_domain_raises():
    line = unit_interval_space(1)
    g = affine_map(line, [[0.5]], [0.0])
    with pytest.raises(PointOutsideDomain):
        g(np.array([1.5]))


def test_jacobian_linear_map_exact():
    sp = StateSpace((Interval(-5, 5), Interval(-5, 5)))
    m = SmoothMap(sp, sp, fn=lambda x: x * np.array([2.0, 0.5]), name="diag")
    J = jacobian(m, np.array([0.3, -0.2]), h=1e-5)
    assert np.allclose(J, np.diag([2.0, 0.5]), atol=1e-9)


def test_jacobian_shear_constant():
    tw = make_twist()
    J = jacobian(tw.with_meta(jac=None), np.array([0.5, 0.3]))
    assert np.allclose(J, [[1.0, 0.0], [1.0, 1.0]], atol=1e-8)


def test_jacobian_action_shear_analytic_vs_fd():
    # phi(I, theta) = (I + eps cos(2 pi theta), theta): the angle derivative
    # of the action is -2 pi eps sin(2 pi theta)
    eps = 0.1
    sp = StateSpace((Interval(-1, 2), Circle(1.0)))
    sh = conjugating_shear(eps, space=sp)
    x = np.array([0.3, 0.25])
    expected = np.array([[1.0, -eps * np.sin(2 * np.pi * 0.25) * 2 * np.pi], [0.0, 1.0]])
    assert np.allclose(sh.jacobian(x), expected, atol=1e-12)
    fd = jacobian(sh.with_meta(jac=None), x)
    assert np.allclose(fd, expected, atol=1e-6)


def test_jacobian_step_too_large():
    line = unit_interval_space(1)
    g = affine_map(line, [[0.5]], [0.0]).with_meta(jac=None, affine=None)
    with pytest.raises(StepTooLarge):
        jacobian(g, np.array([0.0]), h=0.1)


def test_check_symplectic_twist_passes():
    tw = make_twist()
    rng = np.random.default_rng(0)
    pts = np.stack([rng.uniform(0, 1, 100), rng.random(100)], axis=-1)
    rep = check_symplectic(tw, pts, tol=1e-10)
    assert rep["pass"] and rep["max_residual"] < 1e-10


def test_check_symplectic_dilation_fails():
    sp = annulus()
    m = SmoothMap(sp, sp, fn=lambda x: np.stack([2 * x[..., 0], x[..., 1]], -1), name="dilate")
    rep = check_symplectic(m, np.array([[0.4, 0.3]]), tol=1e-8)
    assert not rep["pass"]
    assert rep["max_residual"] == pytest.approx(1.0, abs=1e-6)


def test_check_symplectic_action_shear():
    sh = conjugating_shear(0.1, space=StateSpace((Interval(-1, 2), Circle(1.0))))
    rng = np.random.default_rng(1)
    pts = np.stack([rng.uniform(0, 1, 50), rng.random(50)], axis=-1)
    assert check_symplectic(sh, pts, tol=1e-8)["pass"]


def test_check_symplectic_odd_dimension():
    line = unit_interval_space(1)
    with pytest.raises(OddDimension):
        check_symplectic(affine_map(line, [[0.5]], [0.0]), np.array([[0.2]]))


def test_compose_jacobian_is_product():
    sp = StateSpace((Interval(-2, 2), Circle(1.0)))
    f = twist_map(lambda I: I**2, lambda I: 2 * I, space=sp)
    g = conjugating_shear(0.05, space=sp)
    h = compose(f, g)
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = np.array([rng.uniform(0, 1), rng.random()])
        J_prod = f.jacobian(g(x)) @ g.jacobian(x)
        J_fd = jacobian(h.with_meta(jac=None), x)
        assert np.allclose(J_fd, J_prod, atol=1e-6)


def test_symplectic_catalog_passes_at_1e8():
    # every declared-symplectic analytic map in the library
    sp = StateSpace((Interval(-1, 2), Circle(1.0)))
    catalog = [
        twist_map(lambda I: I, lambda I: np.ones_like(I), space=sp),
        twist_map(lambda I: 0.3 + 0.5 * I, lambda I: 0.5 * np.ones_like(I), space=sp),
        conjugating_shear(0.1, space=sp),
        conjugating_shear(0.05, space=sp, phase=0.37),
        identity_map(sp),
    ]
    rng = np.random.default_rng(3)
    pts = np.stack([rng.uniform(0, 1, 100), rng.random(100)], axis=-1)
    for m in catalog:
        assert m.symplectic
        rep = check_symplectic(m, pts, tol=1e-10)  # closed-form maps
        assert rep["pass"], (m.name, rep)


def test_inverse_consistency():
    sh = conjugating_shear(0.1, space=StateSpace((Interval(-1, 2), Circle(1.0))))
    rng = np.random.default_rng(4)
    pts = np.stack([rng.uniform(0, 1, 40), rng.random(40)], axis=-1)
    back = sh.inverse(sh(pts))
    assert np.max(np.abs(sh.domain.diff(back, pts))) < 1e-14
