"""Geometry of the unit reference tetrahedron K.

K = {xi : xi_0, xi_1, xi_2 >= 0, xi_0 + xi_1 + xi_2 <= 1} with vertices

    v0 = (0,0,0), v1 = (1,0,0), v2 = (0,1,0), v3 = (0,0,1).

Facet f is the face opposite vertex f, i.e. the zero set of the f-th
barycentric coordinate. All functions here are pure and operate on plain
length-3 coordinate arrays.
"""

import math

import numpy as np

VERTICES = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)

CENTROID = np.array([0.25, 0.25, 0.25])

# local vertex indices spanning facet f (the three vertices != f)
FACET_CORNERS = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))

# |direction| below this floor counts as degenerate (no exit computable)
DEGENERATE_DIR = 1e-300

# two facet crossings closer than this in traversal time tie-break to the
# lower facet id
EXIT_TIE_TOL = 1e-14


def barycentric(xi):
    """Barycentric coordinates (b0, b1, b2, b3) of a reference point.

    b0 = 1 - xi_0 - xi_1 - xi_2 and b_i = xi_{i-1}; the four components sum
    to 1 up to round-off.
    """
    x, y, z = xi
    return np.array([1.0 - x - y - z, x, y, z])


def inside(xi, tol=1e-9):
    """True iff every barycentric coordinate of ``xi`` is >= -tol."""
    x, y, z = xi
    if x < -tol or y < -tol or z < -tol:
        return False
    return x + y + z <= 1.0 + tol


def centroid():
    """Center of K, (0.25, 0.25, 0.25)."""
    return CENTROID.copy()


def clamp(xi):
    """Project a point with slightly negative barycentric coords onto K.

    Negative barycentric components are zeroed and the rest renormalized;
    points already in K are returned unchanged (up to the renormalization
    round-off).
    """
    b = barycentric(xi)
    if b.min() >= 0.0:
        return np.asarray(xi, dtype=float)
    b = np.maximum(b, 0.0)
    b /= b.sum()
    return b[1:4].copy()


def exit_time(xi, direction):
    """First exit of the ray xi + t*direction from K.

    Returns ``(t, facet)`` with the smallest t >= 0 at which the ray crosses
    a facet plane moving outward, or ``None`` when |direction| is below the
    degeneracy floor. Ties within EXIT_TIE_TOL go to the lower facet id.
    """
    dx, dy, dz = direction
    if math.sqrt(dx * dx + dy * dy + dz * dz) < DEGENERATE_DIR:
        return None
    x, y, z = xi
    b = (1.0 - x - y - z, x, y, z)
    db = (-(dx + dy + dz), dx, dy, dz)
    best_t = math.inf
    best_f = -1
    for f in range(4):
        rate = db[f]
        if rate < 0.0:
            t = b[f] / -rate
            if t < 0.0:
                t = 0.0
            if t < best_t - EXIT_TIE_TOL:
                best_t = t
                best_f = f
    if best_f < 0:
        return None
    return best_t, best_f
