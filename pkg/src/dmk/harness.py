"""Batch verification of the dual Brunn-Minkowski inequality family, the
Minkowski-type inequality, their equivalence, uniqueness near the ball, and
sup-norm growth audits, over reproducible random body corpora.

Sign convention throughout: margin = LHS - RHS >= 0 means the inequality
holds.  A negative margin is only ever *confirmed* after surviving a
re-evaluation at doubled resolution 10x above the estimated discretization
error; everything else is a discretization artifact by policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .body import (
    ConvexBody,
    ProblemParams,
    lp_combination,
    lp_mean_support,
    random_symmetric_body,
    random_even_field,
    wulff_shape,
)
from .dual import dual_curvature_density, dual_quermassintegral
from .solver import SolverConfig, solve_lp_dual_minkowski
from .sphere import ScalarField, build_grid

EQUALITY_TOL = 1e-9


@dataclass
class InequalityReport:
    inequality: str                       # BM | MINK | EQUIV | JENSEN
    params: dict
    margins: list = field(default_factory=list)
    instances: list = field(default_factory=list)
    equality_flags: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def min_margin(self) -> float:
        return float(min(self.margins)) if self.margins else np.inf


@dataclass
class AuditReport:
    params: dict
    instances: list = field(default_factory=list)   # dicts per solved instance
    failures: int = 0

    @property
    def c_emp(self) -> float:
        if not self.instances:
            return np.nan
        return float(max(max(r["max_h"], 1.0 / r["volume"]) for r in self.instances))


@dataclass
class UniquenessReport:
    params: dict
    distances: list = field(default_factory=list)   # pairwise sup distances
    inconclusive: bool = False

    @property
    def max_distance(self) -> float:
        return float(max(self.distances)) if self.distances else 0.0

    @property
    def unique(self) -> bool:
        return not self.inconclusive and self.max_distance <= 1e-7


# ---------------------------------------------------------------------------
# quermassintegral route selection
# ---------------------------------------------------------------------------

def _vq(K: ConvexBody, q: float) -> float:
    """Vq via the change-of-variables identity for smooth certified bodies
    (integration only, no radial refinement); radial route otherwise."""
    if K.polytope is None and K.certified:
        dens = dual_curvature_density(K, 0.0, q)
        return float(K.grid.integrate(dens.values)) / K.grid.dimension
    return dual_quermassintegral(K, q)


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------

def check_bm(K: ConvexBody, L: ConvexBody, p: float, q: float,
             lam_set=(0.25, 0.5, 0.75)) -> InequalityReport:
    """Dual Brunn-Minkowski margins: Vq((1-l)K +_p lL)^(p/q) - (1-l)Vq(K)^(p/q)
    - l Vq(L)^(p/q) for each lambda."""
    if p <= 0:
        raise ValueError("check_bm needs p > 0")
    rep = InequalityReport("BM", {"p": p, "q": q, "n": K.grid.dimension})
    a = _vq(K, q) ** (p / q)
    b = _vq(L, q) ** (p / q)
    for lam in lam_set:
        Q = lp_combination(K, L, lam, p)
        m = _vq(Q, q) ** (p / q) - (1.0 - lam) * a - lam * b
        rep.margins.append(float(m))
        rep.instances.append(lam)
        rep.equality_flags.append(abs(m) <= EQUALITY_TOL * max(a, b))
    return rep


def normalized_measure_weights(K: ConvexBody, q: float) -> np.ndarray:
    """Node masses of the q-th dual curvature measure of K, normalized to
    total mass 1."""
    dens = dual_curvature_density(K, 0.0, q).values
    w = K.grid.weights * dens
    return w / w.sum()


def check_minkowski(K: ConvexBody, L: ConvexBody, p: float, q: float) -> InequalityReport:
    """Minkowski-type margin: (integral (h_L/h_K)^p dС̄_q(K))^(1/p)
    - (Vq(L)/Vq(K))^(1/q), with the mass-1 normalized measure of K."""
    if p <= 0:
        raise ValueError("check_minkowski needs p > 0")
    rep = InequalityReport("MINK", {"p": p, "q": q, "n": K.grid.dimension})
    w = normalized_measure_weights(K, q)
    lhs = float(np.sum(w * (L.support.values / K.support.values) ** p)) ** (1.0 / p)
    rhs = (_vq(L, q) / _vq(K, q)) ** (1.0 / q)
    m = lhs - rhs
    rep.margins.append(float(m))
    rep.instances.append(0)
    rep.equality_flags.append(abs(m) <= EQUALITY_TOL * max(1.0, rhs))
    return rep


def equivalence_probe(K: ConvexBody, L: ConvexBody, p: float, q: float,
                      n_lambda: int = 13) -> InequalityReport:
    """Concavity of f(l) = Vq(Q_l)^(p/q) on a lambda grid, plus the chord
    inequality f'(0) >= f(1) - f(0) with the derivative computed two ways.

    details carry fprime_analytic, fprime_fd, chord; margins are the midpoint
    concavity slacks f((a+b)/2) - (f(a)+f(b))/2 followed by
    fprime_analytic - chord.
    """
    rep = InequalityReport("EQUIV", {"p": p, "q": q, "n": K.grid.dimension})
    lams = np.linspace(0.0, 1.0, n_lambda)

    def f(lam):
        if lam == 0.0:
            return _vq(K, q) ** (p / q)
        if lam == 1.0:
            return _vq(L, q) ** (p / q)
        return _vq(lp_combination(K, L, float(lam), p), q) ** (p / q)

    fv = np.array([f(l) for l in lams])
    for i in range(n_lambda):
        for j in range(i + 2, n_lambda, 2):
            mid = (i + j) // 2
            rep.margins.append(float(fv[mid] - 0.5 * (fv[i] + fv[j])))
            rep.instances.append((float(lams[i]), float(lams[j])))
            rep.equality_flags.append(abs(rep.margins[-1]) <= EQUALITY_TOL)

    # analytic f'(0) via the first variation of Vq along the p-mean path
    vqk = _vq(K, q)
    w = normalized_measure_weights(K, q)
    ratio = float(np.sum(w * (L.support.values / K.support.values) ** p))
    fprime = vqk ** (p / q - 1.0) * (ratio * vqk - vqk)

    # second-order one-sided finite difference (lambda >= 0 only)
    d = 1e-4
    fprime_fd = (-3.0 * fv[0] + 4.0 * f(d) - f(2.0 * d)) / (2.0 * d)
    chord = float(fv[-1] - fv[0])
    rep.details.update(fprime_analytic=float(fprime), fprime_fd=float(fprime_fd),
                       chord=chord)
    rep.margins.append(float(fprime - chord))
    rep.instances.append("chord")
    rep.equality_flags.append(abs(fprime - chord) <= EQUALITY_TOL)
    return rep


def jensen_containment(K: ConvexBody, L: ConvexBody, p: float, lam: float) -> bool:
    """(1-l)K + lL is contained in (1-l)K +_p lL for p >= 1."""
    if p < 1:
        raise ValueError("Jensen containment needs p >= 1")
    h_lin = lp_mean_support(K, L, lam, 1.0).values
    h_p = lp_mean_support(K, L, lam, p).values
    return bool(np.all(h_lin <= h_p + 1e-12))


# ---------------------------------------------------------------------------
# solver-backed probes
# ---------------------------------------------------------------------------

def _solver_config(grid, **over) -> SolverConfig:
    # the S^2 spectral Hessian noise floor (~1e-9 at band 48) makes sup-norm
    # residuals below ~1e-8 unreachable there
    tol = 1e-10 if grid.dimension == 2 else 1e-8
    over.setdefault("residual_tol", tol)
    return SolverConfig(**over)


def uniqueness_probe(f: ScalarField, params: ProblemParams, n_inits: int = 5,
                     seed: int = 0) -> UniquenessReport:
    """Multi-start solve agreement: unit ball, dilates 0.8 / 1.25, and random
    convex perturbations (amplitude 0.1)."""
    if float(np.max(np.abs(f.values - 1.0))) > 0.1 + 1e-12:
        raise ValueError("uniqueness probe expects data within 0.1 of 1")
    grid = f.grid
    inits = [None, grid.constant(0.8), grid.constant(1.25)]
    k = 0
    while len(inits) < n_inits:
        K = random_symmetric_body(seed + k, 0.1, 6, grid=grid, min_margin=0.2)
        inits.append(K.support)
        k += 1
    rep = UniquenessReport({"p": params.p, "q": params.q, "n": params.n,
                            "n_inits": n_inits, "seed": seed})
    sols = []
    for init in inits[:n_inits]:
        body, sr = solve_lp_dual_minkowski(f, params, _solver_config(grid, initialization=init))
        if not sr.converged:
            rep.inconclusive = True
            continue
        sols.append(body.support.values)
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            rep.distances.append(float(np.max(np.abs(sols[i] - sols[j]))))
    return rep


def bounded_data_field(grid, lam: float, seed: int, band: int = 6) -> ScalarField:
    """Smooth positive f with 1/lam <= f <= lam: f = lam^g for band-limited
    even g normalized into [-1, 1]."""
    if lam < 1.0:
        raise ValueError("data bound needs lam >= 1")
    pert = random_even_field(grid, seed, 1.0, band).values - 1.0  # in [-1, 1]
    return ScalarField(grid, np.exp(np.log(lam) * pert))


def c0_audit(lam: float, params: ProblemParams, n_instances: int = 20,
             seed: int = 0) -> AuditReport:
    """Solve for data pinched between 1/lam and lam; record sup-norm and
    volume statistics behind the empirical constant C_emp."""
    if lam < 1.0:
        raise ValueError("c0 audit needs lam >= 1")
    rep = AuditReport({"lam": lam, "p": params.p, "q": params.q, "n": params.n,
                       "seed": seed})
    grid = build_grid(params.n, 512 if params.n == 2 else 32)
    for i in range(n_instances):
        f = bounded_data_field(grid, lam, seed + i)
        body, sr = solve_lp_dual_minkowski(f, params, _solver_config(grid))
        if not sr.converged:
            rep.failures += 1
            continue
        h = body.support.values
        rep.instances.append({
            "seed": seed + i,
            "max_h": float(h.max()),
            "min_h": float(h.min()),
            "volume": _vq(body, float(params.n)),
            "residual": sr.final_residual,
        })
    return rep


def counterexample_search(p: float, q: float, n: int, budget: int = 200,
                          seed: int = 0, lam: float = 0.5) -> InequalityReport:
    """Random + local search for negative dual Brunn-Minkowski margins.

    Reports the most negative margin found; a violation is confirmed only if
    it survives re-evaluation at doubled resolution with margin below 10x the
    estimated discretization error.
    """
    grid = build_grid(n, 512 if n == 2 else 32)
    rng = np.random.default_rng(seed)
    rep = InequalityReport("BM", {"p": p, "q": q, "n": n, "budget": budget,
                                  "lam": lam, "seed": seed})
    best = (np.inf, None)
    trials = 0
    while trials < budget:
        s1, s2 = rng.integers(0, 2 ** 31, size=2)
        amp1, amp2 = rng.uniform(0.05, 0.45, size=2)
        K = random_symmetric_body(int(s1), float(amp1), 8, grid=grid, min_margin=0.05)
        L = random_symmetric_body(int(s2), float(amp2), 8, grid=grid, min_margin=0.05)
        m = check_bm(K, L, p, q, (lam,)).min_margin
        trials += 1
        rep.margins.append(m)
        rep.instances.append((int(s1), int(s2)))
        rep.equality_flags.append(abs(m) <= EQUALITY_TOL)
        if m < best[0]:
            best = (m, (int(s1), int(s2), float(amp1), float(amp2)))
    rep.details["best_margin"] = best[0]
    rep.details["witness"] = best[1]
    rep.details["confirmed"] = False
    if best[0] < -EQUALITY_TOL and best[1] is not None:
        s1, s2, amp1, amp2 = best[1]
        fine = build_grid(n, 1024 if n == 2 else 64)
        Kf = random_symmetric_body(s1, amp1, 8, grid=fine, min_margin=0.05)
        Lf = random_symmetric_body(s2, amp2, 8, grid=fine, min_margin=0.05)
        m_fine = check_bm(Kf, Lf, p, q, (lam,)).min_margin
        disc_err = abs(m_fine - best[0])
        rep.details["refined_margin"] = m_fine
        rep.details["discretization_error"] = disc_err
        rep.details["confirmed"] = bool(m_fine < -10.0 * max(disc_err, EQUALITY_TOL))
    return rep


# ---------------------------------------------------------------------------
# structured record emission
# ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, float) or isinstance(v, np.floating):
        return "%.17g" % v
    if isinstance(v, (tuple, list)):
        return ",".join(format_value(x) for x in v)
    return str(v)


def format_record(fields: dict) -> str:
    """One structured record: space-separated key=value pairs."""
    return " ".join(f"{k}={format_value(v)}" for k, v in fields.items())


def report_records(rep) -> list[str]:
    """Line records for any report type, one instance per line."""
    lines = []
    if isinstance(rep, InequalityReport):
        base = {"inequality": rep.inequality, **rep.params}
        for inst, m, eq in zip(rep.instances, rep.margins, rep.equality_flags):
            lines.append(format_record({**base, "instance": inst, "margin": m,
                                        "equality": eq}))
        lines.append(format_record({**base, "min_margin": rep.min_margin,
                                    **rep.details}))
    elif isinstance(rep, AuditReport):
        for inst in rep.instances:
            lines.append(format_record({**rep.params, **inst}))
        lines.append(format_record({**rep.params, "c_emp": rep.c_emp,
                                    "failures": rep.failures}))
    elif isinstance(rep, UniquenessReport):
        lines.append(format_record({**rep.params,
                                    "max_distance": rep.max_distance,
                                    "unique": rep.unique,
                                    "inconclusive": rep.inconclusive}))
    else:
        raise TypeError(f"unknown report type {type(rep)!r}")
    return lines
