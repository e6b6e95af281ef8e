"""Convex bodies on discretized spheres.

A body is represented by its support function sampled at the grid nodes.
Support/radial duality, Wulff shapes (via the polar convex hull), p-mean
Minkowski combinations, and a deterministic random-body generator live here.

Smooth (band-limited) fields get spectrally refined radial/support
conversions; kinked fields (polytopes) keep the exact node-wise discrete
extrema, which are exact whenever the binding normals are grid nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .sphere import (
    ScalarField,
    SphereGrid,
    build_grid,
    default_grid,
    jet,
)


class BodyError(ValueError):
    pass


class ParameterError(ValueError):
    pass


_DOT_EPS = 1e-9       # directions are "visible" when the inner product exceeds this
_EVEN_TOL = 1e-13


@dataclass(frozen=True)
class ProblemParams:
    """Exponent triple of the dual Minkowski equation."""

    n: int
    p: float
    q: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ParameterError(f"unsupported dimension n={self.n}")
        if not (0.0 < self.q <= self.n):
            raise ParameterError(f"q={self.q} outside (0, n] with n={self.n}")

    def require_solver_range(self):
        """The solvable regime: q in (1, n], p in (0, q)."""
        if not (1.0 < self.q <= self.n):
            raise ParameterError(f"solver needs q in (1, n], got q={self.q}")
        if not (0.0 < self.p < self.q):
            raise ParameterError(f"solver needs p in (0, q), got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class Polytope:
    """Facet/vertex backing for hull-constructed bodies.

    Facets are {x : a_j . x <= b_j} with b_j > 0 (origin interior).
    """

    normals: np.ndarray   # (F, n), not necessarily unit
    offsets: np.ndarray   # (F,)
    vertices: np.ndarray  # (V, n)

    def support(self, dirs: np.ndarray) -> np.ndarray:
        return np.max(dirs @ self.vertices.T, axis=1)

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        t = dirs @ self.normals.T
        with np.errstate(divide="ignore"):
            r = np.where(t > _DOT_EPS, self.offsets[None, :] / t, np.inf)
        return r.min(axis=1)

    @property
    def volume(self) -> float:
        return float(ConvexHull(self.vertices).volume)


class ConvexBody:
    """Convex body carried by its support function on a sphere grid.

    The convexity certificate (min eigenvalue of the shape matrix
    hess h + h I over nodes) is computed lazily: polytope-like bodies have
    meaningless spectral Hessians and are still legitimate for radial and
    quermassintegral work; operations that need uniform ellipticity check
    `certified` and refuse otherwise.
    """

    def __init__(self, support: ScalarField, *, polytope: Polytope | None = None,
                 radial: ScalarField | None = None):
        if support.min() <= 0.0:
            raise BodyError("support function must be strictly positive")
        self.grid: SphereGrid = support.grid
        self.support = support
        self.polytope = polytope
        self._radial = radial
        self._jet = None
        self._margin = None
        h = support.values
        self.symmetric = bool(
            np.max(np.abs(h - h[self.grid.antipode])) <= _EVEN_TOL * h.max()
        )

    # lazy pieces ------------------------------------------------------------
    @property
    def jet(self):
        if self._jet is None:
            self._jet = jet(self.support)
        return self._jet

    @property
    def convexity_margin(self) -> float:
        if self._margin is None:
            self._margin = convexity_certificate(self.support)
        return self._margin

    @property
    def convexity_tolerance(self) -> float:
        return 1e-8 * self.support.max()

    @property
    def certified(self) -> bool:
        return self.convexity_margin >= -self.convexity_tolerance

    def require_certified(self, what: str = "operation"):
        if not self.certified:
            raise BodyError(
                f"{what} needs a certified convex body "
                f"(margin {self.convexity_margin:.3e} < -{self.convexity_tolerance:.3e})"
            )

    @property
    def radial(self) -> ScalarField:
        if self._radial is None:
            self._radial = radial_from_support(self)
        return self._radial

    def dilate(self, t: float) -> "ConvexBody":
        if t <= 0:
            raise BodyError("dilation factor must be positive")
        poly = None
        if self.polytope is not None:
            poly = Polytope(self.polytope.normals, t * self.polytope.offsets,
                            t * self.polytope.vertices)
        rad = None if self._radial is None else ScalarField(self.grid, t * self._radial.values)
        return ConvexBody(ScalarField(self.grid, t * self.support.values),
                          polytope=poly, radial=rad)


def convexity_certificate(h: ScalarField) -> float:
    """Min node-wise smallest eigenvalue of hess h + h I."""
    W = jet(h).shape_matrix
    if W.shape[1] == 1:
        return float(W[:, 0, 0].min())
    tr = W[:, 0, 0] + W[:, 1, 1]
    disc = np.sqrt(np.maximum((W[:, 0, 0] - W[:, 1, 1]) ** 2 + 4 * W[:, 0, 1] ** 2, 0.0))
    return float((0.5 * (tr - disc)).min())


# ---------------------------------------------------------------------------
# Wulff shapes via the polar hull
# ---------------------------------------------------------------------------

def _polar_hull(f: ScalarField) -> Polytope:
    grid = f.grid
    pts = grid.nodes / f.values[:, None]
    hull = ConvexHull(pts)
    # hull equations: a . x + d <= 0, so offsets b = -d > 0 for interior origin
    a = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    if np.any(b <= 0):
        raise BodyError("polar hull does not contain the origin")
    # Wulff body = polar of the hull: facet (a, b) -> vertex a/b, and
    # the hull's vertices u_i/f_i -> Wulff facets {x . u_i <= f_i}.
    verts = a / b[:, None]
    vid = hull.vertices
    normals = grid.nodes[vid]
    offsets = f.values[vid]
    return Polytope(normals, offsets, verts)


def wulff_shape(f: ScalarField) -> ConvexBody:
    """Largest convex body whose support function is dominated by f."""
    if f.min() <= 0.0:
        raise BodyError("Wulff shape needs a strictly positive function")
    # a function that already certifies as a support function is its own
    # Wulff shape; skipping the hull keeps smooth bodies spectrally clean
    if convexity_certificate(f) >= -1e-8 * f.max():
        return ConvexBody(f)
    poly = _polar_hull(f)
    grid = f.grid
    h = np.max(grid.nodes @ poly.vertices.T, axis=1)
    rho = poly.radial(grid.nodes)
    return ConvexBody(ScalarField(grid, h), polytope=poly,
                      radial=ScalarField(grid, rho))


# ---------------------------------------------------------------------------
# support <-> radial duality
# ---------------------------------------------------------------------------

def _discrete_radial(grid, hvals, targets):
    """rho(u) = min over nodes x with <x,u> > 0 of h(x)/<x,u>."""
    out = np.empty(len(targets))
    arg = np.empty(len(targets), dtype=int)
    chunk = 1 << 19
    step = max(1, chunk // grid.num_nodes)
    for s in range(0, len(targets), step):
        t = targets[s:s + step] @ grid.nodes.T
        with np.errstate(divide="ignore"):
            r = np.where(t > _DOT_EPS, hvals[None, :] / t, np.inf)
        arg[s:s + step] = np.argmin(r, axis=1)
        out[s:s + step] = r[np.arange(r.shape[0]), arg[s:s + step]]
    return out, arg

def _discrete_support(grid, rvals, targets):
    """h(x) = max over nodes u of rho(u) <u,x>."""
    out = np.empty(len(targets))
    arg = np.empty(len(targets), dtype=int)
    chunk = 1 << 19
    step = max(1, chunk // grid.num_nodes)
    for s in range(0, len(targets), step):
        t = targets[s:s + step] @ grid.nodes.T
        r = rvals[None, :] * t
        arg[s:s + step] = np.argmax(r, axis=1)
        out[s:s + step] = r[np.arange(r.shape[0]), arg[s:s + step]]
    return out, arg


def _refine_ratio_circle(grid, fvals, targets_theta, theta0, sigma, iters=30):
    """Newton on phi(t) = sigma log f(t) - log <dir(t), target>, vectorized.

    sigma=+1 minimizes f/<.,u> (radial), sigma=-1 minimizes 1/(f <.,u>)
    (support).  Returns exp(-sigma * phi) ... see callers.
    """
    ck = grid.effective_coeffs(fvals)
    th = theta0.copy()
    dmax = np.pi / grid.num_nodes
    live = np.arange(th.size)
    for _ in range(iters):
        fv, f1, f2 = grid.eval_scattered(ck, th[live], derivs=2)
        delta = th[live] - targets_theta[live]
        c = np.cos(delta)
        tn = np.tan(delta)
        g = sigma * f1 / fv + tn
        H = sigma * (f2 / fv - (f1 / fv) ** 2) + 1.0 / c ** 2
        H = np.where(H > 1e-8, H, 1e-8)
        step = np.clip(-g / H, -2 * dmax, 2 * dmax)
        th[live] = th[live] + step
        live = live[np.abs(step) >= 1e-14]
        if live.size == 0:
            break
    fv = grid.eval_scattered(ck, th)
    return fv, np.cos(th - targets_theta)


def _refine_ratio_sphere(grid, fvals, targets, x0_theta, x0_phi, sigma, iters=30):
    ck = grid.effective_coeffs(fvals)
    th, ph = x0_theta.copy(), x0_phi.copy()
    dmax = np.pi / grid.n_lat
    live = np.arange(th.size)
    for _ in range(iters):
        st, ct = np.sin(th[live]), np.cos(th[live])
        sp, cp = np.sin(ph[live]), np.cos(ph[live])
        x = np.column_stack([st * cp, st * sp, ct])
        e1 = np.column_stack([ct * cp, ct * sp, -st])
        e2 = np.column_stack([-sp, cp, np.zeros_like(sp)])
        tg = targets[live]
        d = np.einsum("ni,ni->n", x, tg)
        v1 = np.einsum("ni,ni->n", e1, tg) / d
        v2 = np.einsum("ni,ni->n", e2, tg) / d
        fv, f_t, f_p, f_tt, f_tp, f_pp = grid.eval_scattered(ck, th[live], ph[live], derivs=2)
        _, gr, he = grid._jet_from_partials(fv, f_t, f_p, f_tt, f_tp, f_pp=f_pp,
                                            sin=st, cot=ct / st)
        g1 = sigma * gr[:, 0] / fv - v1
        g2 = sigma * gr[:, 1] / fv - v2
        H11 = sigma * (he[:, 0, 0] / fv - (gr[:, 0] / fv) ** 2) + 1.0 + v1 * v1
        H12 = sigma * (he[:, 0, 1] / fv - gr[:, 0] * gr[:, 1] / fv ** 2) + v1 * v2
        H22 = sigma * (he[:, 1, 1] / fv - (gr[:, 1] / fv) ** 2) + 1.0 + v2 * v2
        det = H11 * H22 - H12 * H12
        bad = (det <= 1e-12) | (H11 <= 0)
        det = np.where(bad, 1.0, det)
        s1 = -(H22 * g1 - H12 * g2) / det
        s2 = -(H11 * g2 - H12 * g1) / det
        gn = np.hypot(g1, g2)
        scale = np.where(gn > 0, np.minimum(1.0, dmax / np.maximum(gn, 1e-300)), 0.0)
        s1 = np.where(bad, -g1 * scale, s1)
        s2 = np.where(bad, -g2 * scale, s2)
        norm = np.hypot(s1, s2)
        lim = np.where(norm > 2 * dmax, 2 * dmax / np.maximum(norm, 1e-300), 1.0)
        s1, s2 = s1 * lim, s2 * lim
        xn = x + s1[:, None] * e1 + s2[:, None] * e2
        xn /= np.linalg.norm(xn, axis=1, keepdims=True)
        th[live] = np.arccos(np.clip(xn[:, 2], -1.0, 1.0))
        ph[live] = np.arctan2(xn[:, 1], xn[:, 0])
        live = live[norm >= 1e-14]
        if live.size == 0:
            break
    st = np.sin(th)
    x = np.column_stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)])
    fv = grid.eval_scattered(ck, th, ph)
    return fv, np.einsum("ni,ni->n", x, targets)


def _ratio_extremum(grid, fvals, sigma, refine):
    """Node-wise extremum of f(x)/<x,u> (sigma=+1, min) or f(u)<u,x>
    (sigma=-1, max), over all grid target directions."""
    if sigma > 0:
        disc, arg = _discrete_radial(grid, fvals, grid.nodes)
    else:
        disc, arg = _discrete_support(grid, fvals, grid.nodes)
    if not refine:
        return disc
    if grid.dimension == 2:
        fv, d = _refine_ratio_circle(grid, fvals, grid.theta, grid.theta[arg], sigma)
    else:
        fv, d = _refine_ratio_sphere(grid, fvals, grid.nodes,
                                     grid.node_theta[arg], grid.node_phi[arg], sigma)
    refined = fv / d if sigma > 0 else fv * d
    # the continuous extremum can only improve on the node extremum
    return np.minimum(disc, refined) if sigma > 0 else np.maximum(disc, refined)


def radial_from_support(K: ConvexBody) -> ScalarField:
    if K.polytope is not None:
        return ScalarField(K.grid, K.polytope.radial(K.grid.nodes))
    h = K.support.values
    rho = _ratio_extremum(K.grid, h, +1, refine=K.grid.is_refinable(h))
    return ScalarField(K.grid, rho)


def support_from_radial(rho: ScalarField) -> ScalarField:
    if rho.min() <= 0:
        raise BodyError("radial function must be strictly positive")
    grid = rho.grid
    h = _ratio_extremum(grid, rho.values, -1, refine=grid.is_refinable(rho.values))
    return ScalarField(grid, h)


def body_from_radial(rho: ScalarField) -> ConvexBody:
    return ConvexBody(support_from_radial(rho), radial=rho)


# ---------------------------------------------------------------------------
# combinations and standard bodies
# ---------------------------------------------------------------------------

def lp_mean_support(K: ConvexBody, L: ConvexBody, lam: float, p: float) -> ScalarField:
    """The p-mean ((1-lam) h_K^p + lam h_L^p)^(1/p); geometric mean at p=0.

    Not necessarily a support function for p < 1.  lam may leave [0, 1]
    as long as the mean stays positive.
    """
    if K.grid is not L.grid:
        raise BodyError("bodies live on different grids")
    hk, hl = K.support.values, L.support.values
    if p == 0.0:
        vals = np.exp((1.0 - lam) * np.log(hk) + lam * np.log(hl))
    else:
        m = (1.0 - lam) * hk ** p + lam * hl ** p
        if np.any(m <= 0.0):
            raise BodyError("p-mean is not positive for this lambda")
        vals = m ** (1.0 / p)
    return ScalarField(K.grid, vals)


def lp_combination(K: ConvexBody, L: ConvexBody, lam: float, p: float) -> ConvexBody:
    """(1-lam) K +_p lam L; direct support for p >= 1, Wulff shape below."""
    if p < 0:
        raise ParameterError("p-combinations need p >= 0")
    if not (0.0 <= lam <= 1.0):
        raise ParameterError("lambda must lie in [0, 1]")
    phi = lp_mean_support(K, L, lam, p)
    if p >= 1.0:
        return ConvexBody(phi)
    return wulff_shape(phi)


def ball(r: float, grid: SphereGrid | None = None, n: int = 2) -> ConvexBody:
    grid = grid or default_grid(n)
    if r <= 0:
        raise BodyError("ball radius must be positive")
    return ConvexBody(grid.constant(r), radial=grid.constant(r))


def ellipsoid(semiaxes, grid: SphereGrid | None = None) -> ConvexBody:
    a = np.asarray(semiaxes, dtype=float)
    grid = grid or default_grid(len(a))
    if len(a) != grid.dimension:
        raise BodyError("semiaxis count must match the grid dimension")
    if np.any(a <= 0):
        raise BodyError("semiaxes must be positive")
    h = np.sqrt((a ** 2 * grid.nodes ** 2).sum(axis=1))
    rho = 1.0 / np.sqrt((grid.nodes ** 2 / a ** 2).sum(axis=1))
    return ConvexBody(ScalarField(grid, h), radial=ScalarField(grid, rho))


def random_even_field(grid: SphereGrid, seed, amplitude: float, band: int) -> ScalarField:
    """1 + amplitude * (sup-normalized even band-limited noise), coefficients
    decaying like k^-2.  Deterministic per seed; not convexified."""
    rng = np.random.default_rng(seed)
    if grid.dimension == 2:
        pert = np.zeros(grid.num_nodes)
        for k in range(2, band + 1, 2):
            a, b = rng.standard_normal(2)
            pert += (a * np.cos(k * grid.theta) + b * np.sin(k * grid.theta)) / k ** 2
    else:
        L = grid.band
        c = np.zeros((L + 1, L + 1), dtype=complex)
        for l in range(2, min(band, L) + 1, 2):
            z = rng.standard_normal(l + 1) + 1j * rng.standard_normal(l + 1)
            c[: l + 1, l] = z / l ** 2
        c[0, :] = c[0, :].real
        pert = grid.synthesize(c)
        pert = grid.evenize(pert)
    sup = np.max(np.abs(pert))
    if sup > 0:
        pert = pert / sup
    return ScalarField(grid, 1.0 + amplitude * pert)


def random_symmetric_body(seed, amplitude: float = 0.2, band: int = 8,
                          grid: SphereGrid | None = None, n: int = 2,
                          min_margin: float = 0.0) -> ConvexBody:
    """Deterministic random origin-symmetric body, projected to convexity by
    shrinking the perturbation amplitude.

    min_margin asks for a strictly curved body: shrinking continues until the
    convexity certificate reaches min_margin * max(h).  A floor around 0.3
    keeps the radial function well resolved at the default grids; bodies with
    near-flat boundary patches have radial spectra that decay too slowly for
    tight support/radial round trips.
    """
    if not (0.0 <= amplitude < 1.0):
        raise BodyError("amplitude must lie in [0, 1)")
    grid = grid or default_grid(n)
    amp = amplitude
    while True:
        f = random_even_field(grid, seed, amp, band)
        K = ConvexBody(f)
        floor = max(K.convexity_tolerance, min_margin * K.support.max())
        if K.convexity_margin >= floor or amp == 0.0:
            return K
        amp = 0.0 if amp < 1e-4 else 0.8 * amp


# ---------------------------------------------------------------------------
# body files
# ---------------------------------------------------------------------------

def write_body(K: ConvexBody, path):
    grid = K.grid
    with open(path, "w") as fh:
        fh.write(f"dmk-body n={grid.dimension} res={grid.resolution}\n")
        for v in K.support.values:
            fh.write("%.17g\n" % v)


def read_body(path, grid: SphereGrid | None = None) -> ConvexBody:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "dmk-body":
            raise BodyError(f"{path}: not a dmk body file")
        meta = dict(kv.split("=", 1) for kv in header[1:])
        n, res = int(meta["n"]), int(meta["res"])
        if grid is None:
            grid = build_grid(n, res)
        elif grid.dimension != n or grid.resolution != res:
            raise BodyError(f"{path}: grid mismatch")
        vals = np.array([float(line) for line in fh if line.strip()])
    return ConvexBody(ScalarField(grid, vals))
