"""Spectral discretization of S^1 and S^2.

Grids carry quadrature nodes/weights, per-node orthonormal tangent frames,
and spectral transforms (FFT on the circle, spherical harmonics on the
sphere).  Differential operators (covariant gradient/Hessian, Laplace-
Beltrami) are exact on band-limited fields up to roundoff.

Node sets are closed under the antipodal map, so even (origin-symmetric)
fields can be symmetrized exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarField:
    """Real values sampled at the nodes of a grid."""

    grid: "SphereGrid"
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.num_nodes,):
            raise GridError(
                f"field has {v.shape} values, grid has {self.grid.num_nodes} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("field contains non-finite values")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__

    def min(self):
        return float(self.values.min())

    def max(self):
        return float(self.values.max())


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


@dataclass(frozen=True)
class JetField:
    """Value, tangent gradient, and covariant Hessian in the node frames."""

    grid: "SphereGrid"
    value: np.ndarray       # (N,)
    grad: np.ndarray        # (N, n-1)
    hess: np.ndarray        # (N, n-1, n-1), symmetric

    @property
    def grad_sq(self):
        return np.einsum("ni,ni->n", self.grad, self.grad)

    @property
    def shape_matrix(self):
        """W = hess + value*I, the matrix whose positivity certifies convexity."""
        n1 = self.grad.shape[1]
        return self.hess + self.value[:, None, None] * np.eye(n1)


class SphereGrid:
    """Common interface of the S^1 and S^2 grids."""

    dimension: int
    num_nodes: int
    resolution: int
    nodes: np.ndarray      # (N, n) unit vectors
    weights: np.ndarray    # (N,)
    frame: np.ndarray      # (N, n-1, n) orthonormal tangent frame
    antipode: np.ndarray   # (N,) index of -u for each node u

    def field(self, values) -> ScalarField:
        values = np.broadcast_to(np.asarray(values, dtype=float), (self.num_nodes,))
        return ScalarField(self, np.array(values))

    def constant(self, c: float) -> ScalarField:
        return self.field(np.full(self.num_nodes, float(c)))

    def from_function(self, fn) -> ScalarField:
        """Sample a callable of the ambient coordinates at the nodes."""
        return self.field(np.apply_along_axis(lambda u: fn(*u), 1, self.nodes))

    def integrate(self, f) -> float:
        return float(self.weights @ _vals(f))

    def evenize(self, values: np.ndarray) -> np.ndarray:
        """Exact projection onto even (antipodally symmetric) fields."""
        return 0.5 * (values + values[self.antipode])

    def is_even(self, values: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(values - values[self.antipode])) <= tol)

    # spectral interface, implemented by subclasses -------------------------
    def analyze(self, values: np.ndarray):
        raise NotImplementedError

    def synthesize(self, coeffs) -> np.ndarray:
        raise NotImplementedError

    def project(self, values: np.ndarray) -> np.ndarray:
        return self.synthesize(self.analyze(values))

    def jet_arrays(self, values: np.ndarray):
        raise NotImplementedError

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def band_tail(self, values: np.ndarray) -> float:
        """Relative spectral-tail energy; ~0 for band-limited smooth fields."""
        raise NotImplementedError

    def is_band_clean(self, values: np.ndarray, tol: float = 1e-7) -> bool:
        return self.band_tail(values) < tol

    def is_refinable(self, values: np.ndarray) -> bool:
        """True when the field is smooth enough for local extremum refinement
        on its interpolant to beat the node-wise discrete extremum.  Kinked
        fields (polytope support/radial functions) fail this test."""
        return self.band_tail(values) < self._REFINE_TAIL


# ---------------------------------------------------------------------------
# S^1
# ---------------------------------------------------------------------------

class CircleGrid(SphereGrid):
    """Uniform periodic grid on S^1 with FFT spectral differentiation."""

    dimension = 2
    _REFINE_TAIL = 1e-9  # energy fraction; a kinked field sits near 1e-7

    def __init__(self, resolution: int):
        if resolution < 16:
            raise GridError("circle grid needs at least 16 nodes")
        if resolution % 2:
            raise GridError("circle grid needs an even node count for antipodal closure")
        N = int(resolution)
        self.resolution = N
        self.num_nodes = N
        self.theta = 2.0 * np.pi * np.arange(N) / N
        c, s = np.cos(self.theta), np.sin(self.theta)
        self.nodes = np.column_stack([c, s])
        self.weights = np.full(N, 2.0 * np.pi / N)
        self.frame = np.stack([-s, c], axis=1)[:, None, :]
        self.antipode = (np.arange(N) + N // 2) % N
        k = np.fft.fftfreq(N, d=1.0 / N)
        self._k = k
        self._ik = 1j * k
        ik1 = self._ik.copy()
        ik1[N // 2] = 0.0  # Nyquist mode has no consistent odd derivative
        self._ik_odd = ik1

    def analyze(self, values):
        return np.fft.fft(values)

    def synthesize(self, coeffs):
        return np.fft.ifft(coeffs).real

    def band_tail(self, values):
        c = np.abs(self.analyze(values)) ** 2
        total = c.sum()
        if total == 0.0:
            return 0.0
        return float(c[np.abs(self._k) > self.num_nodes / 3].sum() / total)

    def derivative(self, values, order=1):
        c = self.analyze(values)
        mult = self._ik_odd if order % 2 else self._ik
        return np.fft.ifft(c * mult ** order).real

    def laplacian(self, values):
        return self.derivative(values, 2)

    def spectral_solve(self, values, eig_fn, guard=1e-10):
        """Apply diag(1/eig(|k|)) in Fourier space, guarded near zeros."""
        c = self.analyze(values)
        e = np.asarray(eig_fn(np.abs(self._k)), dtype=float)
        e = np.where(np.abs(e) < guard, np.where(e >= 0, guard, -guard), e)
        return np.fft.ifft(c / e).real

    def jet_arrays(self, values):
        d1 = self.derivative(values, 1)
        d2 = self.derivative(values, 2)
        return values, d1[:, None], d2[:, None, None]

    # off-grid evaluation ---------------------------------------------------
    def effective_coeffs(self, values, tol=1e-28):
        """Trigonometric interpolation coefficients, truncated past the
        smallest band whose tail energy is negligible."""
        c = self.analyze(values)
        p = np.abs(c) ** 2
        total = p.sum()
        if total == 0.0:
            return c[:1], self._k[:1]
        order = np.argsort(np.abs(self._k), kind="stable")
        ps = p[order]
        tail = np.cumsum(ps[::-1])[::-1] - ps  # exact small-tail sums
        ok = np.flatnonzero(tail <= tol * total)
        keep = int(ok[0]) + 1 if ok.size else len(order)
        idx = order[:keep]
        return c[idx], self._k[idx]

    def interp_scattered(self, values, theta, derivs=0):
        """Trigonometric interpolation through all node values (exact)."""
        return self.eval_scattered(self.effective_coeffs(values), theta, derivs)

    def eval_scattered(self, coeffs_k, theta, derivs=0):
        """Evaluate a trig series (and θ-derivatives) at arbitrary angles."""
        c, k = coeffs_k
        E = np.exp(1j * np.outer(theta, k))
        N = self.num_nodes
        out = [(E @ c).real / N]
        if derivs >= 1:
            out.append((E @ (1j * k * c)).real / N)
        if derivs >= 2:
            out.append((E @ (-(k ** 2) * c)).real / N)
        return out if derivs else out[0]


# ---------------------------------------------------------------------------
# S^2
# ---------------------------------------------------------------------------

def _legendre_tables(L, x, derivs=2):
    """Normalized associated Legendre P̄_l^m(x) (orthonormal on [-1,1]) and
    θ-derivative tables, shape (L+1, L+1, len(x)) indexed [m, l]."""
    x = np.asarray(x, dtype=float)
    nx = x.size
    sin = np.sqrt(np.maximum(1.0 - x * x, 0.0))
    P = np.zeros((L + 1, L + 1, nx))
    P[0, 0] = 1.0 / np.sqrt(2.0)
    for m in range(1, L + 1):
        P[m, m] = -np.sqrt((2 * m + 1.0) / (2 * m)) * sin * P[m - 1, m - 1]
    for m in range(L + 1):
        if m + 1 <= L:
            P[m, m + 1] = np.sqrt(2 * m + 3.0) * x * P[m, m]
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[m, l] = a * (x * P[m, l - 1] - b * P[m, l - 2])
    if derivs == 0:
        return (P,)
    dP = np.zeros_like(P)
    for m in range(L + 1):
        for l in range(m, L + 1):
            acc = l * x * P[m, l]
            if l > m:
                d = np.sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (l - m) * (l + m))
                acc = acc - d * P[m, l - 1]
            dP[m, l] = acc / sin
    if derivs == 1:
        return P, dP
    d2P = np.zeros_like(P)
    cot = x / sin
    for m in range(L + 1):
        for l in range(m, L + 1):
            d2P[m, l] = -cot * dP[m, l] + (m * m / (sin * sin) - l * (l + 1.0)) * P[m, l]
    return P, dP, d2P


class SphereGrid3(SphereGrid):
    """Band-limited spherical-harmonic grid: Gauss-Legendre latitudes x
    uniform longitudes.  Gauss nodes avoid the poles, so the (e_θ, e_φ)
    frame is smooth at every node."""

    dimension = 3
    _REFINE_TAIL = 1e-4  # relative residual; a kinked field sits near 1e-3

    def __init__(self, band: int):
        if band < 8:
            raise GridError("sphere grid needs band limit >= 8")
        L = int(band)
        self.band = L
        self.resolution = L
        self.n_lat = L + 1
        self.n_lon = 2 * L + 2
        xg, wg = np.polynomial.legendre.leggauss(self.n_lat)
        order = np.argsort(-xg)  # θ increasing from north
        self._x = xg[order]
        self._wx = wg[order]
        self._theta = np.arccos(self._x)
        self._sin = np.sqrt(1.0 - self._x ** 2)
        self._phi = 2.0 * np.pi * np.arange(self.n_lon) / self.n_lon
        self.num_nodes = self.n_lat * self.n_lon

        th = np.repeat(self._theta, self.n_lon)
        ph = np.tile(self._phi, self.n_lat)
        st, ct = np.sin(th), np.cos(th)
        sp, cp = np.sin(ph), np.cos(ph)
        self.nodes = np.column_stack([st * cp, st * sp, ct])
        self.weights = np.repeat(self._wx, self.n_lon) * (2.0 * np.pi / self.n_lon)
        e_th = np.column_stack([ct * cp, ct * sp, -st])
        e_ph = np.column_stack([-sp, cp, np.zeros_like(sp)])
        self.frame = np.stack([e_th, e_ph], axis=1)
        self.node_theta = th
        self.node_phi = ph

        i_lat = np.arange(self.num_nodes) // self.n_lon
        j_lon = np.arange(self.num_nodes) % self.n_lon
        self.antipode = (self.n_lat - 1 - i_lat) * self.n_lon + (j_lon + self.n_lon // 2) % self.n_lon

        self._P, self._dP, self._d2P = _legendre_tables(L, self._x)
        self._m = np.arange(L + 1)
        ll = np.arange(L + 1)
        self._l_eig = -ll * (ll + 1.0)
        # node-wise broadcast helpers
        self._sin_n = np.repeat(self._sin, self.n_lon)
        self._cot_n = np.repeat(self._x / self._sin, self.n_lon)

    # transforms ------------------------------------------------------------
    def _fourier(self, values):
        V = values.reshape(self.n_lat, self.n_lon)
        return np.fft.fft(V, axis=1) / self.n_lon

    def analyze(self, values):
        """Coefficients c[m, l] (m >= 0; negative m implied by realness)."""
        G = self._fourier(values)
        L = self.band
        c = np.zeros((L + 1, L + 1), dtype=complex)
        wG = self._wx[:, None] * G[:, : L + 1]
        for m in range(L + 1):
            c[m, m:] = self._P[m, m:, :] @ wG[:, m]
        return c

    def _synth_G(self, c, table):
        L = self.band
        G = np.zeros((self.n_lat, L + 1), dtype=complex)
        for m in range(L + 1):
            G[:, m] = table[m, m:, :].T @ c[m, m:]
        return G

    def _assemble(self, G):
        F = np.zeros((self.n_lat, self.n_lon), dtype=complex)
        L = self.band
        F[:, : L + 1] = G
        F[:, self.n_lon - L:] = np.conj(G[:, 1: L + 1])[:, ::-1]
        return np.fft.ifft(F, axis=1).real.reshape(-1) * self.n_lon

    def synthesize(self, c, table=None):
        return self._assemble(self._synth_G(c, self._P if table is None else table))

    def band_tail(self, values):
        proj = self.project(values)
        denom = float(np.sqrt(np.mean(values ** 2)))
        if denom == 0.0:
            return 0.0
        return float(np.sqrt(np.mean((values - proj) ** 2))) / denom

    def laplacian(self, values):
        c = self.analyze(values) * self._l_eig[None, :]
        return self.synthesize(c)

    def spectral_solve(self, values, eig_fn, guard=1e-10):
        """Apply diag(1/eig(l)) in harmonic space, Tikhonov-guarded near zeros."""
        c = self.analyze(values)
        ll = np.arange(self.band + 1)
        e = np.asarray(eig_fn(ll), dtype=float)
        e = np.where(np.abs(e) < guard, np.where(e >= 0, guard, -guard), e)
        return self.synthesize(c / e[None, :])

    def jet_arrays(self, values):
        c = self.analyze(values)
        im_c = c * (1j * self._m)[:, None]
        f = self.synthesize(c)
        f_t = self.synthesize(c, self._dP)
        f_p = self.synthesize(im_c)
        f_tt = self.synthesize(c, self._d2P)
        f_tp = self.synthesize(im_c, self._dP)
        lap = self.synthesize(c * self._l_eig[None, :])
        return self._jet_from_partials(f, f_t, f_p, f_tt, f_tp, lap=lap)

    def _jet_from_partials(self, f, f_t, f_p, f_tt, f_tp, f_pp=None, lap=None,
                           sin=None, cot=None):
        sin = self._sin_n if sin is None else sin
        cot = self._cot_n if cot is None else cot
        grad = np.stack([f_t, f_p / sin], axis=1)
        h11 = f_tt
        h12 = (f_tp - cot * f_p) / sin
        if lap is not None:
            # via the trace identity; avoids 1/sin^2 roundoff amplification
            h22 = lap - f_tt
        else:
            h22 = f_pp / sin ** 2 + cot * f_t
        hess = np.empty((f.size, 2, 2))
        hess[:, 0, 0] = h11
        hess[:, 0, 1] = hess[:, 1, 0] = h12
        hess[:, 1, 1] = h22
        return f, grad, hess

    # off-grid evaluation ---------------------------------------------------
    def effective_coeffs(self, values, tol=1e-28):
        c = self.analyze(values)
        p = np.abs(c) ** 2
        per_l = p.sum(axis=0)
        total = per_l.sum()
        if total == 0.0:
            return c[:1, :1]
        tail = np.cumsum(per_l[::-1])[::-1] - per_l
        ok = np.flatnonzero(tail <= tol * total)
        Leff = int(ok[0]) if ok.size else self.band
        Leff = min(max(Leff, 1), self.band)
        return c[: Leff + 1, : Leff + 1]

    def eval_scattered(self, c, theta, phi, derivs=0):
        """Evaluate coefficients (and θ/φ partials) at arbitrary points.

        Returns [f] or [f, f_t, f_p] or [f, f_t, f_p, f_tt, f_tp, f_pp].
        """
        Leff = c.shape[0] - 1
        x = np.cos(theta)
        tabs = _legendre_tables(Leff, x, derivs=min(derivs, 2))
        E = np.exp(1j * np.outer(phi, np.arange(Leff + 1)))  # (npts, m)
        scale = np.ones(Leff + 1)
        scale[1:] = 2.0  # fold negative m by realness

        def synth(table, cc):
            # g[pts, m] = sum_l table[m,l,pts] cc[m,l]
            acc = np.zeros(theta.size)
            for m in range(Leff + 1):
                gm = table[m, m:, :].T @ cc[m, m:]
                acc = acc + scale[m] * (E[:, m] * gm).real
            return acc

        im_c = c * (1j * np.arange(Leff + 1))[:, None]
        out = [synth(tabs[0], c)]
        if derivs >= 1:
            out.append(synth(tabs[1], c))
            out.append(synth(tabs[0], im_c))
        if derivs >= 2:
            out.append(synth(tabs[2], c))
            out.append(synth(tabs[1], im_c))
            out.append(synth(tabs[0], c * (-(np.arange(Leff + 1) ** 2))[:, None]))
        return out if derivs else out[0]


# ---------------------------------------------------------------------------
# public constructors / operations
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def build_grid(n: int, resolution: int) -> SphereGrid:
    """Grid on S^{n-1}.  resolution = node count (n=2) or band limit (n=3)."""
    if n == 2:
        return CircleGrid(resolution)
    if n == 3:
        return SphereGrid3(resolution)
    raise GridError(f"unsupported dimension n={n}")


DEFAULT_RESOLUTION = {2: 512, 3: 48}


def default_grid(n: int) -> SphereGrid:
    return build_grid(n, DEFAULT_RESOLUTION[n])


def jet(h: ScalarField) -> JetField:
    value, grad, hess = h.grid.jet_arrays(h.values)
    return JetField(h.grid, value, grad, hess)


def integrate(f: ScalarField) -> float:
    return f.grid.integrate(f)


def laplace_beltrami(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, f.grid.laplacian(f.values))
