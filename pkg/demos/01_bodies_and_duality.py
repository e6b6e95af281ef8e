"""Convex bodies on the discretized sphere: support/radial duality and
Wulff shapes.

Run:  python3 demos/01_bodies_and_duality.py
"""

import numpy as np

from dmk import (
    ScalarField,
    build_grid,
    ellipsoid,
    radial_from_support,
    random_symmetric_body,
    support_from_radial,
    wulff_shape,
)

grid = build_grid(2, 512)

# An ellipse has closed-form support and radial functions; the package's
# radial reconstruction matches the formula to refinement accuracy.
E = ellipsoid((2.0, 1.0), grid=grid)
rho_exact = 1.0 / np.sqrt(np.cos(grid.theta) ** 2 / 4 + np.sin(grid.theta) ** 2)
print("ellipse radial error:   %.2e" % np.max(np.abs(E.radial.values - rho_exact)))

# The Wulff shape of a non-convex field is the largest body whose support
# function sits below it; convex inputs are their own Wulff shape.
f = ScalarField(grid, 1 + 0.5 * np.cos(2 * grid.theta) ** 2)
W = wulff_shape(f)
print("wulff minorant excess:  %.2e" % np.max(W.support.values - f.values))
print("wulff idempotence:      %.2e"
      % np.max(np.abs(wulff_shape(W.support).support.values - W.support.values)))

# Support -> radial -> support round trip on a strictly curved random body.
K = random_symmetric_body(seed=7, amplitude=0.3, band=8, grid=grid, min_margin=0.3)
h2 = support_from_radial(radial_from_support(K))
print("round-trip error:       %.2e" % np.max(np.abs(h2.values - K.support.values)))
print("convexity margin:       %.3f (min eigenvalue of hess h + h I)"
      % K.convexity_margin)

# The same machinery in three dimensions.
g3 = build_grid(3, 32)
K3 = random_symmetric_body(seed=1, amplitude=0.08, band=4, grid=g3,
                           min_margin=0.5, n=3)
h2 = support_from_radial(radial_from_support(K3))
print("3d round-trip error:    %.2e" % np.max(np.abs(h2.values - K3.support.values)))
