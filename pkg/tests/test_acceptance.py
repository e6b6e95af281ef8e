"""Acceptance gate: one test per criterion, each recording a single
pass/fail line (printed in the terminal summary)."""

import numpy as np
import pytest

from conftest import criterion
from dmk.body import (
    ProblemParams,
    lp_combination,
    radial_from_support,
    random_even_field,
    random_symmetric_body,
    support_from_radial,
    wulff_shape,
)
from dmk.dual import dual_curvature_density, dual_curvature_mass, variational_derivative
from dmk.harness import (
    c0_audit,
    check_bm,
    check_minkowski,
    equivalence_probe,
    jensen_containment,
    uniqueness_probe,
)
from dmk.solver import SolverConfig, linearized_operator, solve_lp_dual_minkowski
from dmk.sphere import ScalarField, build_grid

S2_CFG = SolverConfig(residual_tol=1e-8)   # S^2 spectral-noise floor


def _harmonic(grid, k):
    if grid.dimension == 2:
        return ScalarField(grid, np.cos(k * grid.theta))
    c = np.zeros((grid.band + 1, grid.band + 1), dtype=complex)
    c[min(k, 2), k] = 1.0
    v = grid.synthesize(c)
    return ScalarField(grid, v / np.max(np.abs(v)))


def test_criterion_01_spectrum(circle, sphere48):
    worst = {2: 0.0, 3: 0.0}
    for grid, params in ((circle, ProblemParams(2, 0.5, 1.8)),
                         (sphere48, ProblemParams(3, 0.5, 3.0))):
        op = linearized_operator(params)
        for k in range(7):
            psi = _harmonic(grid, k)
            err = np.max(np.abs(op(psi).values - op.eigenvalue(k) * psi.values))
            worst[grid.dimension] = max(worst[grid.dimension], float(err))
    ok = worst[2] <= 1e-8 and worst[3] <= 1e-6
    criterion(1, "linearized spectrum k<=6", ok,
              f"max eigen-residual n=2 {worst[2]:.2e} (tol 1e-8), "
              f"n=3 {worst[3]:.2e} (tol 1e-6)")


def test_criterion_02_exact_ball_solves(circle, sphere48):
    worst_unit = worst_const = 0.0
    cases = [(circle, (0.5, 1.8)), (circle, (1.5, 2.0)),
             (sphere48, (0.5, 3.0)), (sphere48, (2.0, 3.0))]
    for grid, (p, q) in cases:
        params = ProblemParams(grid.dimension, p, q)
        cfg = SolverConfig() if grid.dimension == 2 else S2_CFG
        for c in (1.0, 1.7):
            f = ScalarField(grid, np.full(grid.num_nodes, c))
            body, rep = solve_lp_dual_minkowski(f, params, cfg)
            assert rep.converged
            err = float(np.max(np.abs(body.support.values - c ** (1 / (q - p)))))
            if c == 1.0:
                worst_unit = max(worst_unit, err)
            else:
                worst_const = max(worst_const, err)
    ok = worst_unit <= 1e-10 and worst_const <= 1e-8
    criterion(2, "exact constant-data solves", ok,
              f"f=1: worst |h-1| {worst_unit:.2e} (tol 1e-10); f=c: worst error "
              f"{worst_const:.2e} (tol 1e-8) over 4 (p,q) cases")


def test_criterion_03_change_of_variables(circle, sphere32):
    worst = 0.0
    pairs = [(0.5, 1.5), (1.5, 2.0), (0.3, 0.8), (2.0, 1.2)]
    for grid, n, amp, band, mm in ((circle, 2, 0.25, 8, 0.3),
                                   (sphere32, 3, 0.08, 4, 0.4)):
        pq = pairs[:3] + [(2.0, float(n))]
        for seed in range(20):
            K = random_symmetric_body(seed, amp, band, grid=grid, min_margin=mm, n=n)
            for p, q in pq:
                lhs = dual_curvature_mass(K, p, q)
                rhs = grid.integrate(K.radial.values ** q)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    ok = worst <= 1e-6
    criterion(3, "change-of-variables mass identity", ok,
              f"worst relative gap {worst:.2e} over 2x20x4 cases (tol 1e-6)")


def test_criterion_04_self_consistency(circle, sphere48):
    worst = 0.0
    runs = [(circle, ProblemParams(2, 0.5, 1.8), range(7)),
            (sphere48, ProblemParams(3, 0.5, 3.0), range(3))]
    for grid, params, seeds in runs:
        cfg = SolverConfig() if grid.dimension == 2 else S2_CFG
        for seed in seeds:
            f = random_even_field(grid, 100 + seed, 0.1, 4)
            body, rep = solve_lp_dual_minkowski(f, params, cfg)
            assert rep.converged, (grid.dimension, seed)
            dens = dual_curvature_density(body, params.p, params.q).values
            worst = max(worst, float(np.max(np.abs(dens / f.values - 1))))
    ok = worst <= 1e-8
    criterion(4, "solve then recompute density", ok,
              f"worst sup-norm relative mismatch {worst:.2e} over 10 data fields (tol 1e-8)")


def test_criterion_05_bm_proven_regime(circle, sphere32):
    worst = np.inf
    eq_worst = 0.0
    count = 0
    for grid, n, npairs, amp, band, mm in ((circle, 2, 112, 0.3, 8, 0.2),
                                           (sphere32, 3, 6, 0.08, 4, 0.4)):
        bodies = [random_symmetric_body(s, amp, band, grid=grid, min_margin=mm, n=n)
                  for s in range(2 * npairs)]
        for i in range(npairs):
            K, L = bodies[2 * i], bodies[2 * i + 1]
            for p in (1.0, 1.5, 2.0):
                for q in (0.5, 1.5, float(n)):
                    worst = min(worst, check_bm(K, L, p, q).min_margin)
                    count += 1
        D = bodies[0].dilate(1.6)
        for p in (1.0, 1.5, 2.0):
            rep = check_bm(bodies[0], D, p, float(n))
            eq_worst = max(eq_worst, max(abs(m) for m in rep.margins))
    ok = worst >= -1e-9 and eq_worst <= 1e-9
    criterion(5, "dual Brunn-Minkowski, p>=1", ok,
              f"min margin {worst:.2e} over {count} pair/(p,q) instances "
              f"(tol -1e-9); dilate equality |margin| <= {eq_worst:.2e}")


def test_criterion_06_minkowski_near_ball(circle, sphere32):
    worst = np.inf
    count = 0
    for grid, n, npairs in ((circle, 2, 40), (sphere32, 3, 10)):
        amp = 0.3 if n == 2 else 0.08
        for s in range(npairs):
            K = random_symmetric_body(1000 + s, 0.05, 4, grid=grid, n=n)
            assert np.max(np.abs(K.support.values - 1)) <= 0.05 + 1e-12
            L = random_symmetric_body(2000 + s, amp, 8 if n == 2 else 4,
                                      grid=grid, min_margin=0.3, n=n)
            for p in (0.3, 0.7):
                for q in (1.5, float(n)):
                    worst = min(worst, check_minkowski(K, L, p, q).min_margin)
                    count += 1
    ok = worst >= -1e-9
    criterion(6, "Minkowski inequality near the ball", ok,
              f"min margin {worst:.2e} over {count} pairs (tol -1e-9)")


def test_criterion_07_equivalence(circle, sphere32):
    conc_worst = np.inf
    chord_worst = np.inf
    fd_worst = 0.0
    count = 0
    for grid, n, npairs in ((circle, 2, 26), (sphere32, 3, 8)):
        amp, band, mm = (0.25, 8, 0.3) if n == 2 else (0.08, 4, 0.4)
        for s in range(npairs):
            K = random_symmetric_body(3000 + 2 * s, amp, band, grid=grid, min_margin=mm, n=n)
            L = random_symmetric_body(3001 + 2 * s, amp, band, grid=grid, min_margin=mm, n=n)
            for p in (0.5, 1.0, 2.0):
                q = 1.5 if s % 2 == 0 else float(n)
                rep = equivalence_probe(K, L, p, q)
                d = rep.details
                conc_worst = min(conc_worst, min(rep.margins[:-1]))
                chord_worst = min(chord_worst, d["fprime_analytic"] - d["chord"])
                fd_worst = max(fd_worst, abs(d["fprime_analytic"] - d["fprime_fd"])
                               / abs(d["fprime_analytic"]))
                count += 1
    ok = conc_worst >= -1e-8 and chord_worst >= -1e-8 and fd_worst <= 1e-5
    criterion(7, "equivalence probe", ok,
              f"{count} probes: worst concavity slack {conc_worst:.2e}, worst "
              f"chord slack {chord_worst:.2e} (tol -1e-8), worst analytic-vs-FD "
              f"f'(0) {fd_worst:.2e} (tol 1e-5)")


def test_criterion_08_uniqueness(circle, sphere32):
    worst = 0.0
    count = 0
    runs = [(circle, ProblemParams(2, 1.5, 2.0), range(4)),
            (sphere32, ProblemParams(3, 0.5, 3.0), range(3)),
            (sphere32, ProblemParams(3, 1.5, 3.0), range(3))]
    for grid, params, seeds in runs:
        for s in seeds:
            f = random_even_field(grid, 500 + s, 0.05, 4)
            rep = uniqueness_probe(f, params, n_inits=5, seed=s)
            assert not rep.inconclusive
            worst = max(worst, rep.max_distance)
            count += 1
    ok = worst <= 1e-7
    criterion(8, "multi-start uniqueness", ok,
              f"max pairwise solution distance {worst:.2e} over {count} data fields "
              f"x 5 initializations (tol 1e-7)")


def test_criterion_09_c0_audit():
    params = ProblemParams(2, 0.5, 1.8)
    bound_tol = 1e-6
    cs = []
    minh_ok = True
    for lam in (1.1, 1.2, 1.5):
        rep = c0_audit(lam, params, n_instances=50, seed=700)
        assert rep.failures == 0, f"lam={lam}: {rep.failures} solves failed"
        cs.append(rep.c_emp)
        bound = lam ** (1 / (1.8 - 0.5)) + bound_tol
        minh_ok = minh_ok and all(r["min_h"] <= bound for r in rep.instances)
    ok = all(np.isfinite(cs)) and cs[0] <= cs[1] <= cs[2] and minh_ok
    criterion(9, "C0 growth audit", ok,
              f"C_emp {cs[0]:.4f} <= {cs[1]:.4f} <= {cs[2]:.4f} over lam 1.1/1.2/1.5, "
              f"150 solves converged, min-h bound respected")


def test_criterion_10_variational_derivative(circle, sphere32):
    worst = 0.0
    for grid, n, nb in ((circle, 2, 15), (sphere32, 3, 5)):
        amp, band, mm = (0.25, 8, 0.3) if n == 2 else (0.08, 4, 0.4)
        for s in range(nb):
            K = random_symmetric_body(4000 + s, amp, band, grid=grid, min_margin=mm, n=n)
            for j in range(3):
                g = random_even_field(grid, 4100 + 10 * s + j, 1.0, 4)
                gf = ScalarField(grid, 0.3 * (g.values - 1.0))
                fd, analytic = variational_derivative(K, gf, 1.5 if s % 2 else float(n))
                worst = max(worst, abs(fd - analytic) / max(abs(analytic), 1e-12))
    ok = worst <= 1e-5
    criterion(10, "variational derivative of Vq", ok,
              f"worst relative FD-vs-analytic gap {worst:.2e} over 20 bodies x 3 "
              f"perturbations (tol 1e-5)")


def test_criterion_11_body_layer(circle, sphere48):
    rt_worst = 0.0
    minor_ok = idem_worst = 0.0
    rho_ok = jensen_ok = True
    cases = 0
    prev = None
    for s in range(100):
        K = random_symmetric_body(s, 0.3, 8, grid=circle, min_margin=0.3)
        # wulff minorant on a (generally non-convex) field
        f = random_even_field(circle, 9000 + s, 0.3, 8)
        W = wulff_shape(f)
        minor_ok = max(minor_ok, float(np.max(W.support.values - f.values)))
        W2 = wulff_shape(W.support)
        idem_worst = max(idem_worst, float(np.max(np.abs(W2.support.values
                                                         - W.support.values))))
        h2 = support_from_radial(radial_from_support(K))
        rt_worst = max(rt_worst, float(np.max(np.abs(h2.values - K.support.values))))
        rho_ok = rho_ok and bool(np.all(K.radial.values <= K.support.values + 1e-10))
        if prev is not None:
            jensen_ok = jensen_ok and jensen_containment(prev, K, 1.0 + (s % 3), 0.4)
        prev = K
        cases += 5
    for s in range(2):
        K = random_symmetric_body(s, 0.08, 4, grid=sphere48, min_margin=0.5, n=3)
        h2 = support_from_radial(radial_from_support(K))
        rt_worst = max(rt_worst, float(np.max(np.abs(h2.values - K.support.values))))
        rho_ok = rho_ok and bool(np.all(K.radial.values <= K.support.values + 1e-10))
        cases += 2
    ok = (rt_worst <= 1e-7 and minor_ok <= 1e-12 and idem_worst <= 1e-10
          and rho_ok and jensen_ok)
    criterion(11, "body-layer properties", ok,
              f"{cases} property cases: round trip {rt_worst:.2e} (tol 1e-7), wulff "
              f"minorant excess {minor_ok:.2e}, idempotence {idem_worst:.2e}, "
              f"rho<=h {rho_ok}, Jensen containment {jensen_ok}")
