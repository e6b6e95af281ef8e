import numpy as np
import pytest
from scipy.optimize import linprog

from dmk.body import (
    BodyError,
    ConvexBody,
    ParameterError,
    ProblemParams,
    ball,
    body_from_radial,
    ellipsoid,
    lp_combination,
    lp_mean_support,
    radial_from_support,
    random_symmetric_body,
    read_body,
    support_from_radial,
    wulff_shape,
    write_body,
)
from dmk.sphere import ScalarField, build_grid


def square_field(circle):
    return ScalarField(circle, np.abs(np.cos(circle.theta)) + np.abs(np.sin(circle.theta)))


def halfplane_support_oracle(f_vals, dirs, targets):
    """h(v) = max v.x subject to u_i . x <= f_i, solved as an LP per target."""
    out = []
    for v in targets:
        res = linprog(-v, A_ub=dirs, b_ub=f_vals, bounds=[(None, None)] * 2,
                      method="highs")
        out.append(-res.fun)
    return np.array(out)


def test_problem_params_validation():
    ProblemParams(2, 0.5, 1.8)
    with pytest.raises(ParameterError):
        ProblemParams(2, 0.5, 2.5)          # q > n
    with pytest.raises(ParameterError):
        ProblemParams(4, 0.5, 1.0)          # unsupported dimension
    with pytest.raises(ParameterError):
        ProblemParams(2, 2.5, 2.0).require_solver_range()   # p >= q
    with pytest.raises(ParameterError):
        ProblemParams(2, 0.5, 0.9).require_solver_range()   # q <= 1


def test_wulff_ball_and_square(circle):
    B = wulff_shape(ScalarField(circle, np.ones(circle.num_nodes)))
    assert np.max(np.abs(B.support.values - 1)) < 1e-12
    sq = square_field(circle)
    W = wulff_shape(sq)
    assert np.max(np.abs(W.support.values - sq.values)) < 1e-10


def test_wulff_minorant_and_oracle(circle):
    f = ScalarField(circle, 1 + 0.5 * np.cos(2 * circle.theta) ** 2)
    W = wulff_shape(f)
    h = W.support.values
    assert np.all(h <= f.values + 1e-12)
    assert np.min(f.values - h) < 0.05 * np.max(f.values - h) or np.max(f.values - h) > 1e-4
    # independent halfplane-intersection oracle at a spread of directions
    idx = np.arange(0, circle.num_nodes, 31)
    oracle = halfplane_support_oracle(f.values, circle.nodes, circle.nodes[idx])
    assert np.max(np.abs(h[idx] - oracle)) < 1e-9
    # idempotence
    W2 = wulff_shape(W.support)
    assert np.max(np.abs(W2.support.values - h)) < 1e-10


def test_radial_closed_forms(circle):
    E = ellipsoid((2.0, 1.0), grid=circle)
    th = circle.theta
    rho_exact = 1.0 / np.sqrt(np.cos(th) ** 2 / 4 + np.sin(th) ** 2)
    assert np.max(np.abs(E.radial.values - rho_exact)) < 1e-8
    assert E.radial.values[0] == pytest.approx(2.0, abs=1e-10)

    sq = wulff_shape(square_field(circle))
    i45 = np.argmin(np.abs(circle.theta - np.pi / 4))
    assert sq.radial.values[i45] == pytest.approx(np.sqrt(2), abs=1e-8)


def test_support_from_radial_square(circle):
    sq = wulff_shape(square_field(circle))
    h = support_from_radial(sq.radial)
    assert np.max(np.abs(h.values - square_field(circle).values)) < 1e-7


def test_round_trip_random_bodies(circle):
    worst = 0.0
    for seed in range(5):
        K = random_symmetric_body(seed, 0.3, 8, grid=circle, min_margin=0.3)
        h2 = support_from_radial(radial_from_support(K))
        worst = max(worst, float(np.max(np.abs(h2.values - K.support.values))))
    assert worst < 1e-7


def test_round_trip_3d(sphere48):
    K = random_symmetric_body(0, 0.08, 4, grid=sphere48, min_margin=0.5, n=3)
    h2 = support_from_radial(radial_from_support(K))
    assert np.max(np.abs(h2.values - K.support.values)) < 1e-7


def test_ellipsoid_3d_radial(sphere32):
    E = ellipsoid((1.5, 1.0, 0.75), grid=sphere32)
    x, y, z = sphere32.nodes.T
    rho = 1.0 / np.sqrt(x ** 2 / 1.5 ** 2 + y ** 2 + z ** 2 / 0.75 ** 2)
    assert np.max(np.abs(E.radial.values - rho)) < 1e-9


def test_rho_le_h_and_ball_equality(circle):
    K = random_symmetric_body(7, 0.3, 8, grid=circle, min_margin=0.2)
    assert np.all(K.radial.values <= K.support.values + 1e-10)
    B = ball(1.3, grid=circle)
    assert np.max(np.abs(B.radial.values - B.support.values)) < 1e-12


def test_lp_combination_endpoints_and_means(circle):
    K = random_symmetric_body(1, 0.3, 8, grid=circle, min_margin=0.2)
    L = random_symmetric_body(2, 0.3, 8, grid=circle, min_margin=0.2)
    assert np.array_equal(lp_combination(K, L, 0.0, 1.5).support.values, K.support.values)
    M = lp_combination(K, L, 0.4, 2.0)
    expect = ((0.6) * K.support.values ** 2 + 0.4 * L.support.values ** 2) ** 0.5
    assert np.max(np.abs(M.support.values - expect)) < 1e-12
    geo = lp_mean_support(K, L, 0.5, 0.0)
    assert np.max(np.abs(geo.values - np.sqrt(K.support.values * L.support.values))) < 1e-12
    with pytest.raises(ParameterError):
        lp_combination(K, L, 0.5, -1.0)
    with pytest.raises(ParameterError):
        lp_combination(K, L, 1.5, 2.0)


def test_dilate_and_symmetry(circle):
    K = random_symmetric_body(3, 0.3, 8, grid=circle, min_margin=0.2)
    assert K.symmetric
    t = 1.7
    D = K.dilate(t)
    assert np.max(np.abs(D.support.values - t * K.support.values)) < 1e-14
    assert np.max(np.abs(D.radial.values - t * K.radial.values)) < 1e-12


def test_body_io_roundtrip(tmp_path, circle, sphere32):
    for grid, n in ((circle, 2), (sphere32, 3)):
        K = random_symmetric_body(5, 0.2, 6, grid=grid, min_margin=0.3, n=n)
        path = tmp_path / f"body{n}.txt"
        write_body(K, path)
        K2 = read_body(path)
        assert np.array_equal(K2.support.values, K.support.values)


def test_body_from_radial_ball(sphere32):
    B = body_from_radial(ScalarField(sphere32, np.full(sphere32.num_nodes, 2.0)))
    assert np.max(np.abs(B.support.values - 2.0)) < 1e-10


def test_positive_support_required(circle):
    with pytest.raises(BodyError):
        ConvexBody(ScalarField(circle, np.cos(circle.theta)))
