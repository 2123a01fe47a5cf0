"""Deterministic construction of test meshes and analytic fields.

Shapes are structured block grids in their natural parameter coordinates
(cartesian, cylindrical, or spherical), with every hexahedral block split
into the six tetrahedra sharing its main diagonal. Because that split is
invariant under index translation, facets agree across block boundaries
and across periodic seams without any parity bookkeeping.

Geometry nodes are registered on the degree-refined integer lattice:
a node at barycentric weights (w0..w3)/g of tetrahedron corners B0..B3
sits at the integer lattice point sum(w_v * B_v), so shared nodes are
identified by exact integer keys and every node's world position is
computed once, from a single canonical formula. Curved shapes place all
nodes through the exact analytic surface map, so boundary facets lie on
the true cylinder/sphere surfaces.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .basis import make_basis
from .mesh import Mesh, MeshValidationError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [0, extent] split into divisions per axis."""

    extent: tuple = (1.0, 1.0, 1.0)
    divisions: tuple = (1, 1, 1)


@dataclass(frozen=True)
class CylinderShell:
    """Shell between two concentric cylinders along z in [0, height].

    divisions = (radial, angular, axial); angular >= 4.
    """

    r_in: float
    r_out: float
    height: float
    divisions: tuple = (2, 16, 4)


@dataclass(frozen=True)
class SolidCylinder:
    """Solid cylinder of the given radius, z in [-height/2, height/2].

    Built as a square core of half-width radius/2 surrounded by four
    blended annulus sectors, so no cell touches the axis degenerately.
    divisions = (core, rings, axial): the core is a (2*core)^2 block grid
    and each annulus sector is core-blocks wide with `rings` layers.
    """

    radius: float
    height: float
    divisions: tuple = (2, 2, 4)


@dataclass(frozen=True)
class SphereShell:
    """Shell between two concentric spheres, poles excluded.

    A structured (r, theta, phi) grid degenerates at the poles, so the
    polar angle runs over [polar_margin, pi - polar_margin].
    divisions = (radial, azimuthal, polar); azimuthal >= 4.
    """

    r_in: float
    r_out: float
    divisions: tuple = (2, 16, 10)
    polar_margin: float = 0.15


_KUHN = [
    (
        (0, 0, 0),
        tuple(np.eye(3, dtype=int)[p[0]]),
        tuple(np.eye(3, dtype=int)[p[0]] + np.eye(3, dtype=int)[p[1]]),
        (1, 1, 1),
    )
    for p in itertools.permutations(range(3))
]


class _Builder:
    """Accumulates tetrahedra over integer lattices with canonical keys."""

    def __init__(self, geom_degree):
        self.g = geom_degree
        basis = make_basis(geom_degree)
        exps = basis.exponents
        # barycentric integer weights of every geometry node, rows sum to g
        self.bary = np.column_stack([geom_degree - exps.sum(axis=1), exps])
        self.nodes = {}
        self.node_coords = []
        self.verts = {}
        self.vert_coords = []
        self.cells = []
        self.cell_vertices = []

    def _node_id(self, key, world):
        nid = self.nodes.get(key)
        if nid is None:
            nid = len(self.node_coords)
            self.nodes[key] = nid
            self.node_coords.append(world(key))
        return nid

    def _vert_id(self, key, world):
        vid = self.verts.get(key)
        if vid is None:
            vid = len(self.vert_coords)
            self.verts[key] = vid
            self.vert_coords.append(world(key))
        return vid

    def add_hex(self, base, canon, world):
        """Split the unit block at integer triple ``base`` into 6 tets.

        ``canon`` maps a fine-lattice integer triple to a canonical
        hashable key (applying periodic wrapping or patch aliasing);
        ``world`` maps a canonical key to coordinates.
        """
        base = np.asarray(base, dtype=int)
        for offsets in _KUHN:
            corners = [base + np.asarray(o, dtype=int) for o in offsets]
            fine = [self.g * c for c in corners]
            pts = [np.asarray(world(canon(f)), dtype=float) for f in fine]
            d = np.column_stack([pts[1] - pts[0], pts[2] - pts[0], pts[3] - pts[0]])
            if np.linalg.det(d) < 0.0:
                corners[2], corners[3] = corners[3], corners[2]
                fine[2], fine[3] = fine[3], fine[2]
            vids = [self._vert_id(canon(f), world) for f in fine]
            # node fine-lattice positions: integer barycentric combinations
            combos = self.bary @ np.array(corners)
            nids = [self._node_id(canon(f), world) for f in combos]
            self.cells.append(nids)
            self.cell_vertices.append(vids)

    def finish(self, validate=True):
        return Mesh(
            self.g,
            np.array(self.vert_coords, dtype=float),
            np.array(self.cell_vertices, dtype=np.intp),
            np.array(self.node_coords, dtype=float),
            np.array(self.cells, dtype=np.intp),
            validate=validate,
        )


def _build_box(shape, g):
    nx, ny, nz = shape.divisions
    ex, ey, ez = shape.extent
    b = _Builder(g)
    scale = np.array([ex / (nx * g), ey / (ny * g), ez / (nz * g)])

    def canon(fine):
        return (int(fine[0]), int(fine[1]), int(fine[2]))

    def world(key):
        return np.asarray(key, dtype=float) * scale

    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                b.add_hex((i, j, k), canon, world)
    return b.finish()


def _build_cylinder_shell(shape, g):
    nr, nt, nz = shape.divisions
    if nt < 4:
        raise ValueError("cylinder shell needs at least 4 angular divisions")
    b = _Builder(g)
    period = nt * g
    dr = shape.r_out - shape.r_in

    def canon(fine):
        return (int(fine[0]), int(fine[1]) % period, int(fine[2]))

    def world(key):
        r = shape.r_in + dr * key[0] / (nr * g)
        t = 2.0 * math.pi * key[1] / period
        z = shape.height * key[2] / (nz * g)
        return np.array([r * math.cos(t), r * math.sin(t), z])

    for i in range(nr):
        for j in range(nt):
            for k in range(nz):
                b.add_hex((i, j, k), canon, world)
    return b.finish()


def _build_sphere_shell(shape, g):
    nr, nt, np_ = shape.divisions
    if nt < 4:
        raise ValueError("sphere shell needs at least 4 azimuthal divisions")
    if not 0.0 < shape.polar_margin < math.pi / 2:
        raise ValueError("polar_margin must lie in (0, pi/2)")
    b = _Builder(g)
    period = nt * g
    dr = shape.r_out - shape.r_in
    phi_span = math.pi - 2.0 * shape.polar_margin

    def canon(fine):
        return (int(fine[0]), int(fine[1]) % period, int(fine[2]))

    def world(key):
        r = shape.r_in + dr * key[0] / (nr * g)
        t = 2.0 * math.pi * key[1] / period
        phi = shape.polar_margin + phi_span * key[2] / (np_ * g)
        sp = math.sin(phi)
        return np.array([r * sp * math.cos(t), r * sp * math.sin(t), r * math.cos(phi)])

    for i in range(nr):
        for j in range(nt):
            for k in range(np_):
                b.add_hex((i, j, k), canon, world)
    return b.finish()


def _build_solid_cylinder(shape, g):
    m, rings, nz = shape.divisions
    b = _Builder(g)
    a = 0.5 * shape.radius  # core half-width
    mg, lg = m * g, rings * g
    perim = 8 * m * g  # fine perimeter period

    def z_of(k):
        return shape.height * (k / (nz * g)) - 0.5 * shape.height

    def square_point(pf):
        # walk the core boundary counterclockwise from (a, -a)
        edge, s = divmod(pf, 2 * mg)
        frac = a * s / mg
        if edge == 0:
            return a, -a + frac
        if edge == 1:
            return a - frac, a
        if edge == 2:
            return -a, a - frac
        return -a + frac, -a

    def core_alias(pf):
        edge, s = divmod(pf, 2 * mg)
        if edge == 0:
            return mg, -mg + s
        if edge == 1:
            return mg - s, mg
        if edge == 2:
            return -mg, mg - s
        return -mg + s, -mg

    def world(key):
        if key[0] == "C":
            _, i, j, k = key
            return np.array([a * i / mg, a * j / mg, z_of(k)])
        _, l, pf, k = key
        w = l / lg
        sx, sy = square_point(pf)
        phi = -0.25 * math.pi + 2.0 * math.pi * pf / perim
        cx = shape.radius * math.cos(phi)
        cy = shape.radius * math.sin(phi)
        return np.array([(1 - w) * sx + w * cx, (1 - w) * sy + w * cy, z_of(k)])

    def core_canon(fine):
        return ("C", int(fine[0]), int(fine[1]), int(fine[2]))

    # per-sector affine map from sector-local perimeter coordinate to the
    # global one, oriented so that main-diagonal splits of core and ring
    # blocks draw the same diagonal on their shared faces
    sector_maps = (
        lambda pf: pf,  # east, along +y
        lambda pf: 4 * mg - pf,  # north, along +x
        lambda pf: 6 * mg - pf,  # west, along +y
        lambda pf: 6 * mg + pf,  # south, along +x
    )

    for i in range(-m, m):
        for j in range(-m, m):
            for k in range(nz):
                b.add_hex((i, j, k), core_canon, world)

    for to_global in sector_maps:
        def ring_canon(fine, conv=to_global):
            l, p, k = int(fine[0]), int(fine[1]), int(fine[2])
            pf = conv(p) % perim
            if l == 0:
                i, j = core_alias(pf)
                return ("C", i, j, k)
            return ("R", l, pf, k)

        for l in range(rings):
            for p in range(2 * m):
                for k in range(nz):
                    b.add_hex((l, p, k), ring_canon, world)

    return b.finish()


def make_mesh(shape, geom_degree=1):
    """Build the mesh for a synthetic shape at the given geometry degree.

    The result passes full mesh validation (positive Jacobians at all
    geometry nodes and the centroid, conforming interior facets); specs
    that would produce inverted cells raise MeshValidationError.
    """
    builders = {
        Box: _build_box,
        CylinderShell: _build_cylinder_shell,
        SolidCylinder: _build_solid_cylinder,
        SphereShell: _build_sphere_shell,
    }
    try:
        build = builders[type(shape)]
    except KeyError:
        raise TypeError(f"unknown shape {type(shape).__name__}") from None
    for d in shape.divisions:
        if d < 1:
            raise ValueError("divisions must all be >= 1")
    if isinstance(shape, (CylinderShell, SphereShell)) and shape.r_in >= shape.r_out:
        raise ValueError("need r_in < r_out")
    return build(shape, geom_degree)


class AnalyticFunction:
    """World-space function with analytic derivatives, for oracles."""

    def __init__(self, name, value_shape, fn, grad=None, hess=None):
        self.name = name
        self.value_shape = value_shape
        self._fn = fn
        self._grad = grad
        self._hess = hess

    def __call__(self, p):
        return self._fn(np.asarray(p, dtype=float))

    def grad(self, p):
        if self._grad is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        return self._grad(np.asarray(p, dtype=float))

    def hess(self, p):
        if self._hess is None:
            raise NotImplementedError(f"{self.name} has no analytic Hessian")
        return self._hess(np.asarray(p, dtype=float))


def _helix_fn(p):
    return np.array([p[1], -p[0], 0.1])


def _helix_jac(p):
    return np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def _superquadric_fn(p):
    return p[0] ** 6 + p[1] ** 6 + p[2] ** 6


def _superquadric_grad(p):
    return 6.0 * p**5


def _superquadric_hess(p):
    return np.diag(30.0 * p**4)


def _ridge_fn(p):
    x, y, z = p
    return z * z * math.sin(x * x + y * y + z * z)


def _ridge_grad(p):
    x, y, z = p
    u = x * x + y * y + z * z
    s, c = math.sin(u), math.cos(u)
    return np.array([2 * x * z * z * c, 2 * y * z * z * c, 2 * z * s + 2 * z**3 * c])


def _ridge_hess(p):
    x, y, z = p
    u = x * x + y * y + z * z
    s, c = math.sin(u), math.cos(u)
    h = np.empty((3, 3))
    h[0, 0] = 2 * z * z * c - 4 * x * x * z * z * s
    h[1, 1] = 2 * z * z * c - 4 * y * y * z * z * s
    h[2, 2] = 2 * s + 10 * z * z * c - 4 * z**4 * s
    h[0, 1] = h[1, 0] = -4 * x * y * z * z * s
    h[0, 2] = h[2, 0] = 4 * x * z * c - 4 * x * z**3 * s
    h[1, 2] = h[2, 1] = 4 * y * z * c - 4 * y * z**3 * s
    return h


_BUILTINS = {
    "helix": AnalyticFunction("helix", "vector3", _helix_fn, grad=_helix_jac),
    "superquadric": AnalyticFunction(
        "superquadric", "scalar", _superquadric_fn, _superquadric_grad, _superquadric_hess
    ),
    "ridgefn": AnalyticFunction("ridgefn", "scalar", _ridge_fn, _ridge_grad, _ridge_hess),
}


def builtin_function(name):
    """Named analytic test fields: helix, superquadric, ridgefn."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown function {name!r}; choose from {sorted(_BUILTINS)}"
        ) from None
