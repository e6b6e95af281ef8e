"""Dual quermassintegrals, dual curvature densities, and their variational
structure.

For a convex body K with support function h and radial function rho on the
unit sphere of R^n:

    Vq(K)      = (1/n) * integral of rho^q            (dual quermassintegral)
    density    = h^(1-p) (h^2+|grad h|^2)^((q-n)/2) det(hess h + h I)
    jacobian   = h det(hess h + h I) / (h^2+|grad h|^2)^(n/2)

The density is the node-wise density of n * the (normalized) dual curvature
measure against the spherical measure; integrating h^p times it recovers
n * Vq(K) (change of variables between normal and radial parameterizations).
"""

from __future__ import annotations

import numpy as np

from .body import ConvexBody, ParameterError
from .sphere import ScalarField


def _det(W: np.ndarray) -> np.ndarray:
    if W.shape[1] == 1:
        return W[:, 0, 0]
    return W[:, 0, 0] * W[:, 1, 1] - W[:, 0, 1] * W[:, 1, 0]


def _check_q(n: int, q: float):
    if not (0.0 < q <= n):
        raise ParameterError(f"q={q} outside (0, n]")


def dual_quermassintegral(K: ConvexBody, q: float) -> float:
    """Vq(K) = (1/n) * integral of rho_K^q over the sphere."""
    n = K.grid.dimension
    _check_q(n, q)
    rho = K.radial.values
    return float(K.grid.integrate(np.exp(q * np.log(rho)))) / n


def volume(K: ConvexBody) -> float:
    """n-volume; exact for hull-backed polytopes, V_n(K) otherwise."""
    if K.polytope is not None:
        return K.polytope.volume
    return dual_quermassintegral(K, K.grid.dimension)


def dual_curvature_density(K: ConvexBody, p: float, q: float) -> ScalarField:
    """h^(1-p) (h^2+|grad h|^2)^((q-n)/2) det(hess h + h I) at the nodes.

    Needs a certified body: the Hessian is spectral and meaningless for
    kinked support functions.
    """
    n = K.grid.dimension
    _check_q(n, q)
    K.require_certified("dual curvature density")
    j = K.jet
    h = j.value
    s = h * h + j.grad_sq
    vals = np.exp((1.0 - p) * np.log(h) + 0.5 * (q - n) * np.log(s)) * _det(j.shape_matrix)
    return ScalarField(K.grid, vals)


def reverse_gauss_jacobian(K: ConvexBody) -> ScalarField:
    """Jacobian of the reverse radial Gauss map: h det(hess h + h I) /
    (h^2+|grad h|^2)^(n/2)."""
    n = K.grid.dimension
    K.require_certified("reverse Gauss map Jacobian")
    j = K.jet
    h = j.value
    s = h * h + j.grad_sq
    vals = h * _det(j.shape_matrix) * np.exp(-0.5 * n * np.log(s))
    return ScalarField(K.grid, vals)


def dual_curvature_mass(K: ConvexBody, p: float, q: float) -> float:
    """integral of h^p * density = n * Vq(K) for exact arithmetic."""
    dens = dual_curvature_density(K, p, q)
    h = K.support.values
    return float(K.grid.integrate(np.exp(p * np.log(h)) * dens.values))


def variational_derivative(K: ConvexBody, g: ScalarField, q: float,
                           step: float = 1e-4) -> tuple[float, float]:
    """d/dt Vq([h e^{t g}]) at t=0: (finite-difference, analytic).

    The analytic value is q * (1/n) * integral of g against the p=0 dual
    curvature density; the finite difference recomputes Vq of the Wulff
    shape of the perturbed field at t = +/- step.
    """
    from .body import wulff_shape

    h = K.support.values
    gv = g.values

    def vq(t):
        W = wulff_shape(ScalarField(K.grid, h * np.exp(t * gv)))
        return dual_quermassintegral(W, q)

    fd = (vq(step) - vq(-step)) / (2.0 * step)
    dens = dual_curvature_density(K, 0.0, q)
    analytic = q * float(K.grid.integrate(gv * dens.values)) / K.grid.dimension
    return fd, analytic
