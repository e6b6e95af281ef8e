import numpy as np
import pytest
from scipy.integrate import quad

from dmk.body import ball, ellipsoid, random_symmetric_body, wulff_shape
from dmk.dual import (
    dual_curvature_density,
    dual_curvature_mass,
    dual_quermassintegral,
    variational_derivative,
    volume,
)
from dmk.sphere import ScalarField


def test_ball_quermassintegrals(circle, sphere32):
    for grid, n in ((circle, 2), (sphere32, 3)):
        B = ball(1.5, grid=grid, n=n)
        area = 2 * np.pi if n == 2 else 4 * np.pi
        for q in (0.5, 1.0, float(n)):
            assert dual_quermassintegral(B, q) == pytest.approx(
                area / n * 1.5 ** q, rel=1e-12)


def test_volumes(circle, sphere32):
    assert volume(ellipsoid((2.0, 1.0), grid=circle)) == pytest.approx(2 * np.pi, rel=1e-10)
    assert volume(ellipsoid((1.5, 1.0, 0.75), grid=sphere32)) == pytest.approx(
        4 * np.pi / 3 * 1.5 * 0.75, rel=1e-9)
    # square via the polytope branch: exact area 4
    sq = wulff_shape(ScalarField(circle, np.abs(np.cos(circle.theta))
                                 + np.abs(np.sin(circle.theta))))
    assert volume(sq) == pytest.approx(4.0, rel=1e-12)


def test_ellipse_vq_against_dense_quadrature(circle):
    E = ellipsoid((2.0, 1.0), grid=circle)
    for q in (0.7, 1.3, 2.0):
        exact, _ = quad(lambda t: (np.cos(t) ** 2 / 4 + np.sin(t) ** 2) ** (-q / 2),
                        0, 2 * np.pi, limit=200)
        assert dual_quermassintegral(E, q) == pytest.approx(exact / 2, rel=1e-9)


def test_ball_density_closed_form(circle, sphere32):
    for grid, n in ((circle, 2), (sphere32, 3)):
        B = ball(1.5, grid=grid, n=n)
        for p, q in ((0.5, 1.8), (1.5, float(n))):
            dens = dual_curvature_density(B, p, q).values
            assert np.max(np.abs(dens - 1.5 ** (q - p))) < 1e-8 * 1.5 ** (q - p)


def test_change_of_variables(circle, sphere32):
    for grid, n in ((circle, 2), (sphere32, 3)):
        K = random_symmetric_body(11, 0.2 if n == 2 else 0.08, 6 if n == 2 else 4,
                                  grid=grid, min_margin=0.3, n=n)
        rhs = grid.integrate(K.radial.values ** 1.7)
        lhs = dual_curvature_mass(K, 0.6, 1.7)
        assert lhs == pytest.approx(rhs, rel=1e-7)


def test_variational_derivative(circle):
    K = random_symmetric_body(4, 0.25, 8, grid=circle, min_margin=0.3)
    g = ScalarField(circle, 0.3 * np.cos(4 * circle.theta))
    fd, analytic = variational_derivative(K, g, 1.8)
    assert fd == pytest.approx(analytic, rel=1e-5)


def test_density_requires_certified(circle):
    import dmk.body as body
    from dmk.body import ConvexBody, BodyError
    bad = ScalarField(circle, 1 + 0.8 * np.cos(2 * circle.theta))
    assert body.convexity_certificate(bad) < 0
    with pytest.raises(BodyError):
        dual_curvature_density(ConvexBody(bad), 0.5, 1.8)
