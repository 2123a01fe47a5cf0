"""Curved tetrahedral meshes.

A mesh stores corner vertices (for facet adjacency), a table of geometry
nodes, and per-cell geometry-node index lists of a Lagrange basis of degree
1..3. Cell i's geometric map is the interpolant

    T_i(xi) = sum_j X_j p_j(xi)

over that basis, so "curved" cells are exactly those with geom_degree >= 2.
The module provides the forward map and its derivatives, Newton inversion,
global point location, and reference-coordinate transfer across interior
facets via the corner-vertex correspondence of the two adjacent cells.
"""

import numpy as np

from . import refcell
from .basis import make_basis, node_count

MAX_GEOM_DEGREE = 3

INVALID_CELL = -1

#: |det J| below this counts as a singular geometric Jacobian
SINGULAR_DET = 1e-14

# Newton iterates this far from the centroid have left any plausible basin
_NEWTON_BLOWUP = 10.0

_CONFORMITY_TOL = 1e-9


class MeshValidationError(ValueError):
    """Mesh fails a structural invariant (orientation, conformity, shape)."""


def det3(j):
    a, b, c, d, e, f, g, h, i = j.ravel()
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def solve3(j, r):
    """Solve the 3x3 system j x = r; None when |det| < SINGULAR_DET."""
    a, b, c, d, e, f, g, h, i = j.ravel()
    co0 = e * i - f * h
    co1 = f * g - d * i
    co2 = d * h - e * g
    det = a * co0 + b * co1 + c * co2
    if abs(det) < SINGULAR_DET:
        return None
    r0, r1, r2 = r
    x = (co0 * r0 + (c * h - b * i) * r1 + (b * f - c * e) * r2) / det
    y = (co1 * r0 + (a * i - c * g) * r1 + (c * d - a * f) * r2) / det
    z = (co2 * r0 + (b * g - a * h) * r1 + (a * e - b * d) * r2) / det
    return np.array([x, y, z])


def inv3(j):
    """Inverse of a 3x3 matrix; None when |det| < SINGULAR_DET."""
    a, b, c, d, e, f, g, h, i = j.ravel()
    co0 = e * i - f * h
    co1 = f * g - d * i
    co2 = d * h - e * g
    det = a * co0 + b * co1 + c * co2
    if abs(det) < SINGULAR_DET:
        return None
    return (
        np.array(
            [
                [co0, c * h - b * i, b * f - c * e],
                [co1, a * i - c * g, c * d - a * f],
                [co2, b * g - a * h, a * e - b * d],
            ]
        )
        / det
    )


def build_adjacency(cell_vertices):
    """Pair up interior facets by their sorted corner-vertex triples.

    Returns ``(neighbors, neighbor_facets, corner_perms)``:

    - neighbors[c, f]: adjacent cell across facet f, or INVALID_CELL
    - neighbor_facets[c, f]: the matching facet id in the neighbor
    - corner_perms[c, f]: length-4 permutation mapping local vertex v of
      cell c to the local vertex of the neighbor with the same global id
      (the off-facet vertex f maps to the neighbor's off-facet vertex)

    Raises MeshValidationError when a facet triple is shared by three or
    more cells (non-manifold input).
    """
    cell_vertices = np.asarray(cell_vertices)
    n_cells = cell_vertices.shape[0]
    neighbors = np.full((n_cells, 4), INVALID_CELL, dtype=np.intp)
    neighbor_facets = np.full((n_cells, 4), -1, dtype=np.intp)
    corner_perms = np.full((n_cells, 4, 4), -1, dtype=np.intp)
    facet_table = {}
    for c in range(n_cells):
        verts = cell_vertices[c]
        for f in range(4):
            key = tuple(sorted(verts[v] for v in refcell.FACET_CORNERS[f]))
            owners = facet_table.setdefault(key, [])
            owners.append((c, f))
            if len(owners) > 2:
                raise MeshValidationError(
                    f"facet {key} is shared by more than two cells"
                )
    for owners in facet_table.values():
        if len(owners) != 2:
            continue
        (c1, f1), (c2, f2) = owners
        neighbors[c1, f1] = c2
        neighbors[c2, f2] = c1
        neighbor_facets[c1, f1] = f2
        neighbor_facets[c2, f2] = f1
        local2 = {g: v for v, g in enumerate(cell_vertices[c2])}
        for v in range(4):
            if v == f1:
                corner_perms[c1, f1, v] = f2
            else:
                corner_perms[c1, f1, v] = local2[cell_vertices[c1, v]]
        local1 = {g: v for v, g in enumerate(cell_vertices[c1])}
        for v in range(4):
            if v == f2:
                corner_perms[c2, f2, v] = f1
            else:
                corner_perms[c2, f2, v] = local1[cell_vertices[c2, v]]
    return neighbors, neighbor_facets, corner_perms


class Mesh:
    """Immutable curved tetrahedral mesh with facet adjacency.

    Parameters
    ----------
    geom_degree : int in 1..3
    vertex_coords : (V, 3) corner-vertex coordinates
    cell_vertices : (C, 4) global corner-vertex ids per cell
    geom_node_coords : (N, 3) geometry-node coordinates
    cells : (C, node_count(geom_degree)) geometry-node ids per cell, in the
        canonical basis node ordering
    validate : run orientation and conformity checks (default True)
    """

    def __init__(
        self,
        geom_degree,
        vertex_coords,
        cell_vertices,
        geom_node_coords,
        cells,
        validate=True,
    ):
        if not 1 <= geom_degree <= MAX_GEOM_DEGREE:
            raise MeshValidationError(
                f"geom_degree must be in 1..{MAX_GEOM_DEGREE}, got {geom_degree}"
            )
        self.geom_degree = int(geom_degree)
        self.basis = make_basis(self.geom_degree)
        self.vertex_coords = np.asarray(vertex_coords, dtype=float).reshape(-1, 3)
        self.cell_vertices = np.asarray(cell_vertices, dtype=np.intp).reshape(-1, 4)
        self.geom_node_coords = np.asarray(geom_node_coords, dtype=float).reshape(-1, 3)
        self.cells = np.asarray(cells, dtype=np.intp)
        n_per_cell = node_count(self.geom_degree)
        if self.cells.ndim != 2 or self.cells.shape[1] != n_per_cell:
            raise MeshValidationError(
                f"cells must have {n_per_cell} geometry nodes per cell for "
                f"geom_degree {self.geom_degree}"
            )
        if self.cells.shape[0] != self.cell_vertices.shape[0]:
            raise MeshValidationError("cells and cell_vertices disagree on cell count")
        if self.cells.size and self.cells.max() >= len(self.geom_node_coords):
            raise MeshValidationError("geometry-node index out of range")
        if self.cells.min(initial=0) < 0:
            raise MeshValidationError("negative geometry-node index")
        if self.cell_vertices.size and (
            self.cell_vertices.max() >= len(self.vertex_coords)
            or self.cell_vertices.min() < 0
        ):
            raise MeshValidationError("corner-vertex index out of range")

        self.n_cells = self.cells.shape[0]
        # gathered per-cell node coordinates, the hot-path working set
        self.cell_nodes = np.ascontiguousarray(self.geom_node_coords[self.cells])

        self.neighbors, self.neighbor_facets, self.corner_perms = build_adjacency(
            self.cell_vertices
        )

        lo = self.cell_nodes.min(axis=1)
        hi = self.cell_nodes.max(axis=1)
        half = 0.5 * (hi - lo)
        diam = np.linalg.norm(hi - lo, axis=1)
        # primary candidate boxes: node hull + 10% of cell diameter, covering
        # the bulge of curved facets beyond the node hull
        pad = (0.1 * diam)[:, None]
        self._bbox_lo = lo - pad
        self._bbox_hi = hi + pad
        # backstop boxes: node hull scaled by the basis Lebesgue bound, which
        # provably contains the full image of the cell
        center = 0.5 * (lo + hi)
        reach = self.basis.lebesgue_bound() * half + 1e-12 * (1.0 + diam)[:, None]
        self._far_lo = center - reach
        self._far_hi = center + reach

        if validate:
            self.validate()

    # -- local geometry -------------------------------------------------

    def geom_map(self, cell, xi):
        """World point T_cell(xi)."""
        return self.basis.eval(xi) @ self.cell_nodes[cell]

    def geom_jacobian(self, cell, xi):
        """3x3 Jacobian DT_cell(xi), column k = dT/dxi_k."""
        return self.cell_nodes[cell].T @ self.basis.eval_grad(xi)

    def map_and_jacobian(self, cell, xi):
        """(T(xi), DT(xi)) sharing one basis evaluation."""
        vals, grads = self.basis.eval_with_grad(xi)
        nodes = self.cell_nodes[cell]
        return vals @ nodes, nodes.T @ grads

    def geom_hessian(self, cell, xi):
        """Reference Hessians of the map components, shape (3, 3, 3).

        Entry [i, k, l] is d2 T_i / (d xi_k d xi_l); zero on affine cells.
        """
        return np.tensordot(self.cell_nodes[cell], self.basis.eval_hess(xi), axes=(0, 0))

    # -- inversion and location ----------------------------------------

    def newton_invert(self, cell, x, tol=None, max_iter=20):
        """Invert the geometric map: find xi with |T_cell(xi) - x| <= tol.

        Starts from the reference centroid. Returns None when the iteration
        does not converge within max_iter steps, hits a singular Jacobian,
        or leaves any plausible basin. The result is not required to lie
        inside K; callers check containment.
        """
        x = np.asarray(x, dtype=float)
        if tol is None:
            tol = 1e-10 * (1.0 + float(np.linalg.norm(x)))
        nodes = self.cell_nodes[cell]
        basis = self.basis
        xi = refcell.CENTROID
        for _ in range(max_iter):
            vals, grads = basis.eval_with_grad(xi)
            r = vals @ nodes - x
            if r @ r <= tol * tol:
                return xi.copy() if xi is refcell.CENTROID else xi
            step = solve3(nodes.T @ grads, r)
            if step is None:
                return None
            xi = xi - step
            if abs(xi[0]) + abs(xi[1]) + abs(xi[2]) > _NEWTON_BLOWUP:
                return None
        r = basis.eval(xi) @ nodes - x
        if r @ r <= tol * tol:
            return xi
        return None

    def locate(self, x, inside_tol=1e-9, newton_tol=None):
        """Find the cell containing world point x.

        Scans cells whose padded bounding box contains x in ascending index
        order, returning the first (cell, xi) where Newton inversion
        converges and xi lies inside K within inside_tol. A wider
        Lebesgue-bound box scan backstops the primary boxes before giving
        up. Returns None when no cell contains x.
        """
        x = np.asarray(x, dtype=float)
        cands = np.flatnonzero(
            ((x >= self._bbox_lo) & (x <= self._bbox_hi)).all(axis=1)
        )
        for c in cands:
            xi = self.newton_invert(c, x, tol=newton_tol)
            if xi is not None and refcell.inside(xi, inside_tol):
                return int(c), xi
        tried = set(cands.tolist())
        far = np.flatnonzero(((x >= self._far_lo) & (x <= self._far_hi)).all(axis=1))
        for c in far:
            if int(c) in tried:
                continue
            xi = self.newton_invert(c, x, tol=newton_tol)
            if xi is not None and refcell.inside(xi, inside_tol):
                return int(c), xi
        return None

    # -- facet transfer --------------------------------------------------

    def transfer(self, cell, facet, xi):
        """Re-express a facet point in the adjacent cell's coordinates.

        ``xi`` must lie on the given facet (barycentric coordinate of the
        facet within 1e-9). Returns (neighbor_cell, xi_neighbor) or None
        when the facet is on the mesh boundary. The transferred point maps
        to the same world location up to mesh conformity tolerance.
        """
        b = refcell.barycentric(xi)
        if abs(b[facet]) > 1e-9:
            raise ValueError(
                f"point {xi} is not on facet {facet} (barycentric {b[facet]:.3e})"
            )
        other = self.neighbors[cell, facet]
        if other == INVALID_CELL:
            return None
        perm = self.corner_perms[cell, facet]
        b2 = np.empty(4)
        b2[perm] = b
        b2[self.neighbor_facets[cell, facet]] = 0.0
        return int(other), b2[1:4].copy()

    # -- validation -------------------------------------------------------

    def validate(self):
        """Check positive orientation and interior-facet conformity."""
        self._check_orientation()
        self._check_conformity()

    def _check_orientation(self):
        probes = np.vstack([self.basis.nodes, refcell.CENTROID])
        grads = [self.basis.eval_grad(xi) for xi in probes]
        for c in range(self.n_cells):
            nodes_t = self.cell_nodes[c].T
            for g in grads:
                if det3(nodes_t @ g) <= 0.0:
                    raise MeshValidationError(
                        f"cell {c} has a non-positive Jacobian determinant"
                    )

    def _facet_slot_tables(self):
        """Per facet: geometry-node slots on it and their barycentric ints."""
        d = self.geom_degree
        exps = self.basis.exponents
        bary = np.column_stack([d - exps.sum(axis=1), exps])
        tables = []
        for f in range(4):
            slots = np.flatnonzero(bary[:, f] == 0)
            tables.append((slots, bary[slots]))
        index = {tuple(t): i for i, t in enumerate(exps.tolist())}
        return tables, index

    def _check_conformity(self):
        tables, index = self._facet_slot_tables()
        scale = 1.0 + float(np.abs(self.geom_node_coords).max(initial=0.0))
        tol = _CONFORMITY_TOL * scale
        for c in range(self.n_cells):
            for f in range(4):
                other = self.neighbors[c, f]
                if other == INVALID_CELL or other < c:
                    continue
                perm = self.corner_perms[c, f]
                slots, barys = tables[f]
                for slot, w in zip(slots, barys):
                    w2 = np.empty(4, dtype=np.intp)
                    w2[perm] = w
                    slot2 = index[(w2[1], w2[2], w2[3])]
                    gap = np.linalg.norm(
                        self.cell_nodes[c, slot] - self.cell_nodes[other, slot2]
                    )
                    if gap > tol:
                        raise MeshValidationError(
                            f"facet node mismatch of {gap:.3e} between cells "
                            f"{c} and {int(other)}"
                        )

    # -- misc -------------------------------------------------------------

    def bounding_box(self):
        """(lo, hi) of all geometry nodes."""
        return self.geom_node_coords.min(axis=0), self.geom_node_coords.max(axis=0)

    def __repr__(self):
        return (
            f"Mesh(geom_degree={self.geom_degree}, cells={self.n_cells}, "
            f"vertices={len(self.vertex_coords)}, nodes={len(self.geom_node_coords)})"
        )
