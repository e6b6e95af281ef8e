"""Damped-Newton continuity solver for the dual Minkowski equation, and a
projected-gradient minimizer for its variational functional.

The equation, in log-residual form on the sphere grid:

    F(h) = log det(hess h + h I) - (p-1) log h
           - ((n-q)/2) log(h^2 + |grad h|^2) - log f  =  0

h == 1 solves F = 0 for f == 1, and the linearization there is exactly
psi -> lap psi + (q-p) psi, whose harmonic eigenvalues q - p - k(k+n-2)
drive both the continuity strategy and the iterative preconditioner.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .body import BodyError, ConvexBody, ProblemParams, convexity_certificate, wulff_shape
from .dual import dual_curvature_density, dual_quermassintegral
from .sphere import CircleGrid, ScalarField, SphereGrid


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    max_newton_iters: int = 50
    continuity_steps: int = 10
    backtrack_factor: float = 0.5
    min_step: float = 1e-6
    initialization: ScalarField | None = None   # None -> constant-f exact ball
    gmres_tol: float = 1e-10  # below ~1e-11 the preconditioned matvec noise stalls GMRES
    verbose: bool = False

    def __post_init__(self):
        if self.residual_tol <= 0 or self.min_step <= 0:
            raise ValueError("tolerances must be positive")
        if self.continuity_steps < 1 or self.max_newton_iters < 1:
            raise ValueError("step counts must be >= 1")


@dataclass
class SolveReport:
    converged: bool = False
    final_residual: float = np.inf
    iterations: list = field(default_factory=list)   # Newton count per continuity step
    margin_trace: list = field(default_factory=list)
    wall_time: float = 0.0
    ill_conditioned: bool = False
    message: str = ""


# ---------------------------------------------------------------------------
# residual and linearization
# ---------------------------------------------------------------------------

def _jet_parts(grid, hvals):
    f, gr, he = grid.jet_arrays(hvals)
    if grid.dimension == 2:
        W = he[:, 0, 0] + f
        det = W
        s = f * f + gr[:, 0] ** 2
    else:
        W = np.empty((f.size, 2, 2))
        W[:, 0, 0] = he[:, 0, 0] + f
        W[:, 0, 1] = W[:, 1, 0] = he[:, 0, 1]
        W[:, 1, 1] = he[:, 1, 1] + f
        det = W[:, 0, 0] * W[:, 1, 1] - W[:, 0, 1] ** 2
        s = f * f + gr[:, 0] ** 2 + gr[:, 1] ** 2
    return f, gr, W, det, s


def residual(h: ScalarField, f: ScalarField, params: ProblemParams) -> ScalarField:
    """Node-wise F(h); zero exactly on solutions of the dual Minkowski
    equation with data f."""
    if h.grid is not f.grid:
        raise SolverError("h and f live on different grids")
    if h.min() <= 0 or f.min() <= 0:
        raise SolverError("h and f must be strictly positive")
    n, p, q = params.n, params.p, params.q
    hv, _, _, det, s = _jet_parts(h.grid, h.values)
    if det.min() <= 0:
        raise SolverError("det(hess h + h I) must be positive (convexity lost)")
    vals = (np.log(det) - (p - 1.0) * np.log(hv)
            - 0.5 * (n - q) * np.log(s) - np.log(f.values))
    return ScalarField(h.grid, vals)


def linearized_operator(params: ProblemParams):
    """The near-ball linearization psi -> lap psi + (q-p) psi; eigenvalue
    q - p - k(k+n-2) on degree-k harmonics."""
    shift = params.q - params.p

    def apply(psi: ScalarField) -> ScalarField:
        return ScalarField(psi.grid, psi.grid.laplacian(psi.values) + shift * psi.values)

    apply.eigenvalue = lambda k: shift - k * (k + params.n - 2)
    return apply


def _near_kernel(params: ProblemParams, band: int) -> bool:
    k = np.arange(band + 1)
    return bool(np.any(np.abs(params.q - params.p - k * (k + params.n - 2)) < 1e-8))


_DIFF_CACHE: dict = {}


def _diff_matrices(grid: CircleGrid):
    if grid not in _DIFF_CACHE:
        F = np.fft.fft(np.eye(grid.num_nodes), axis=0)
        D1 = np.fft.ifft(grid._ik_odd[:, None] * F, axis=0).real
        D2 = np.fft.ifft((grid._ik ** 2)[:, None] * F, axis=0).real
        _DIFF_CACHE[grid] = (D1, D2)
    return _DIFF_CACHE[grid]


def _newton_direction(grid, hvals, Fvals, params, cfg, report):
    """Solve (dF/dh) delta = -F with coefficients frozen at the current jet."""
    n, p, q = params.n, params.p, params.q
    hv, gr, W, det, s = _jet_parts(grid, hvals)
    if grid.dimension == 2:
        D1, D2 = _diff_matrices(grid)
        N = grid.num_nodes
        A = (D2 + np.eye(N)) / W[:, None]
        A -= np.diag((p - 1.0) / hv)
        A -= (n - q) * (np.diag(hv / s) + (gr[:, 0] / s)[:, None] * D1)
        return np.linalg.solve(A, -Fvals)

    iW = np.empty_like(W)
    iW[:, 0, 0] = W[:, 1, 1] / det
    iW[:, 1, 1] = W[:, 0, 0] / det
    iW[:, 0, 1] = iW[:, 1, 0] = -W[:, 0, 1] / det

    def matvec(psi):
        pv, pg, ph = grid.jet_arrays(psi)
        tr = (iW[:, 0, 0] * (ph[:, 0, 0] + pv) + iW[:, 1, 1] * (ph[:, 1, 1] + pv)
              + 2.0 * iW[:, 0, 1] * ph[:, 0, 1])
        return (tr - (p - 1.0) * pv / hv
                - (n - q) * (hv * pv + gr[:, 0] * pg[:, 0] + gr[:, 1] * pg[:, 1]) / s)

    shift = q - p
    ll = np.arange(grid.band + 1)
    eig = shift - ll * (ll + 1.0)
    if np.any(np.abs(eig) < 1e-8):
        report.ill_conditioned = True

    def precond(v):
        return grid.spectral_solve(v, lambda l: shift - l * (l + 1.0))

    N = grid.num_nodes
    op = LinearOperator((N, N), matvec=matvec, dtype=float)
    M = LinearOperator((N, N), matvec=precond, dtype=float)
    # inexact Newton: solve the linear system only as accurately as the
    # outer residual warrants
    rtol = float(np.clip(0.01 * np.max(np.abs(Fvals)), cfg.gmres_tol, 1e-3))
    sol, _ = gmres(op, -Fvals, M=M, rtol=rtol, atol=0.0,
                   restart=60, maxiter=5)
    # an inexact direction is fine: the damped line search and the final
    # residual certificate decide acceptance
    return grid.project(sol)


def _newton_stage(grid, hvals, fvals, params, cfg, report, even):
    """Damped Newton for fixed data; returns iterate and iteration count."""
    f_field = ScalarField(grid, fvals)
    h = hvals
    F = residual(ScalarField(grid, h), f_field, params).values
    norm = float(np.max(np.abs(F)))
    for it in range(cfg.max_newton_iters):
        if norm <= cfg.residual_tol:
            return h, it
        delta = _newton_direction(grid, h, F, params, cfg, report)
        step = 1.0
        while True:
            cand = grid.project(h + step * delta)
            if even:
                cand = grid.evenize(cand)
            ok = cand.min() > 0
            if ok:
                margin = convexity_certificate(ScalarField(grid, cand))
                ok = margin > 0
            if ok:
                Fc = residual(ScalarField(grid, cand), f_field, params).values
                cnorm = float(np.max(np.abs(Fc)))
                if cnorm <= (1.0 - 1e-4 * step) * norm or cnorm <= cfg.residual_tol:
                    h, F, norm = cand, Fc, cnorm
                    report.margin_trace.append(margin)
                    break
            step *= cfg.backtrack_factor
            if step < cfg.min_step:
                raise SolverError(
                    f"line search failed at residual {norm:.3e} (damping exhausted)")
        if cfg.verbose:
            print(f"    newton {it + 1}: residual {norm:.3e}")
    if norm <= cfg.residual_tol:
        return h, cfg.max_newton_iters
    raise SolverError(f"Newton did not converge: residual {norm:.3e}")


def solve_lp_dual_minkowski(f: ScalarField, params: ProblemParams,
                            cfg: SolverConfig | None = None) -> tuple[ConvexBody, SolveReport]:
    """Continuity-path solution of the dual Minkowski equation with data f.

    Follows f_t = exp(t log f) from the exact constant solution at t=0.
    For p in (0,1) with f far from constant the equation may have several
    solutions; this returns the continuity-path branch rooted at the ball.
    """
    cfg = cfg or SolverConfig()
    params.require_solver_range()
    if f.min() <= 0:
        raise SolverError("data f must be strictly positive")
    grid = f.grid
    report = SolveReport()
    t0 = time.perf_counter()

    logf = np.log(grid.project(f.values))
    mean_logf = grid.integrate(logf) / grid.integrate(np.ones(grid.num_nodes))
    even = grid.is_even(f.values, tol=1e-13)

    steps = cfg.continuity_steps
    if cfg.initialization is not None:
        # direct Newton from the caller's guess -- no homotopy, so distinct
        # initializations probe the basin of attraction independently
        h = cfg.initialization.values.copy()
        even = even and grid.is_even(h, tol=1e-13)
        steps = 1
    else:
        # exact solution for the geometric-mean constant data
        h = np.full(grid.num_nodes, np.exp(mean_logf / (params.q - params.p)))
    if float(np.max(np.abs(logf - mean_logf))) < 1e-13:
        steps = 1
    best = h
    try:
        for i in range(1, steps + 1):
            t = i / steps
            ft = np.exp(t * logf + (1.0 - t) * mean_logf)
            h, its = _newton_stage(grid, h, ft, params, cfg, report, even)
            best = h
            report.iterations.append(its)
            if cfg.verbose:
                print(f"  continuity t={t:.3f}: {its} Newton steps")
        report.converged = True
        report.message = "converged"
    except SolverError as exc:
        report.message = str(exc)
    body = ConvexBody(ScalarField(grid, best))
    report.final_residual = float(np.max(np.abs(
        residual(body.support, f, params).values)))
    report.wall_time = time.perf_counter() - t0
    report.converged = report.converged and report.final_residual <= cfg.residual_tol
    return body, report


# ---------------------------------------------------------------------------
# variational route: minimize Phi over Wulff shapes
# ---------------------------------------------------------------------------

def _phi_value(K: ConvexBody, body_phi: ConvexBody, omega, p, q):
    """(Phi, Vq, measure mass, p=0 density) — Vq via the change-of-variables
    identity Vq = (1/n) integral of the p=0 dual curvature density, avoiding
    any radial-function work on the hot path."""
    n = K.grid.dimension
    dens = dual_curvature_density(body_phi, 0.0, q).values
    vq = float(K.grid.integrate(dens)) / n
    ratio = body_phi.support.values / K.support.values
    mass = float(np.sum(omega * ratio ** p))
    return vq ** (-p / q) * mass, vq, mass, dens


def minimize_phi(K: ConvexBody, params: ProblemParams,
                 cfg: SolverConfig | None = None, max_iters: int = 300,
                 grad_tol: float = 1e-9,
                 start: ScalarField | None = None) -> tuple[ConvexBody, float]:
    """Minimize Phi(phi) = Vq([phi])^(-p/q) * integral (phi/h_K)^p dCq(K)
    over positive even fields by projected gradient descent on log phi.

    Wulff projection after every step never increases Phi; the returned body
    is normalized to Vq = 1.  Requires 0 < p < 1 <= q <= n and a certified K.
    """
    cfg = cfg or SolverConfig()
    n, p, q = params.n, params.p, params.q
    if not (0.0 < p < 1.0 <= q <= n):
        raise BodyError(f"phi minimization needs 0 < p < 1 <= q <= n, got p={p}, q={q}")
    K.require_certified("phi minimization")
    grid = K.grid
    even = K.symmetric

    dens_K = dual_curvature_density(K, 0.0, q).values
    omega = grid.weights * dens_K / n          # node masses of the K measure

    def normalize(phi):
        vq = dual_quermassintegral(wulff_shape(ScalarField(grid, phi)), q)
        return phi * vq ** (-1.0 / q)

    # the Hessian of log Phi at a ball is (p/n)(k(k+n-2) - (q-p)) on
    # degree-k harmonics; inverting it spectrally turns the descent into a
    # Newton-like iteration with mode-independent convergence
    def precondition(gradfield):
        return grid.spectral_solve(
            gradfield, lambda k: (p / n) * (k * (k + n - 2.0) - (q - p)), guard=1e-6)

    phi = normalize((K.support if start is None else start).values.copy())
    body = wulff_shape(ScalarField(grid, phi))
    # the descent needs a strictly convex, band-limited starting body: the
    # Wulff shape of an arbitrary start can be a polytope whose spectral
    # curvature is meaningless, so mollify toward the mean ball
    if body.polytope is not None or body.convexity_margin < 1e-6 * body.support.max():
        h = grid.project(body.support.values)
        rbar = grid.integrate(h) / grid.integrate(np.ones(grid.num_nodes))
        lam = 0.1
        while True:
            cand = ScalarField(grid, (1.0 - lam) * h + lam * rbar)
            if convexity_certificate(cand) >= 1e-3 * cand.max() or lam >= 1.0:
                break
            lam = min(1.0, 1.5 * lam)
        body = wulff_shape(ScalarField(grid, normalize(cand.values)))
    val, vq, mass, dens_phi = _phi_value(K, body, omega, p, q)
    step = 1.0
    for _ in range(max_iters):
        ratio_p = (body.support.values / K.support.values) ** p
        grad = p * ((omega / grid.weights) * ratio_p / mass - dens_phi / (n * vq))
        gnorm2 = float(np.sum(grid.weights * grad ** 2))
        if np.sqrt(gnorm2) <= grad_tol:
            break
        direction = precondition(grad)
        slope = float(np.sum(grid.weights * grad * direction))
        if slope <= 0:  # indefinite preconditioner mode won; fall back
            direction, slope = grad, gnorm2
        accepted = False
        while step >= 1e-12:
            cand = body.support.values * np.exp(-step * direction)
            if even:
                cand = grid.evenize(np.log(cand))
                cand = np.exp(cand)
            cand_body = wulff_shape(ScalarField(grid, cand))
            if cand_body.polytope is None:
                cval, cvq, cmass, cdens = _phi_value(K, cand_body, omega, p, q)
                if cval <= val - 1e-4 * step * slope * val:
                    body, val, vq, mass, dens_phi = cand_body, cval, cvq, cmass, cdens
                    accepted = True
                    step = min(step * 2.0, 1.0)
                    break
            step *= 0.5
        if not accepted:
            break
    scale = dual_quermassintegral(body, q) ** (-1.0 / q)
    body = body.dilate(scale)
    return body, val
