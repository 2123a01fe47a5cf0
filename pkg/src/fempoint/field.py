"""Finite-element fields over curved tetrahedral meshes.

A field stores per-cell coefficient arrays over a Lagrange basis of degree
1..6, scalar or 3-vector valued. Storage is per cell (interface nodes are
duplicated); continuity is a property of the data, not the container, and
is checked with a warning rather than enforced. Values can be evaluated in
reference coordinates (cheap) or at world points (locates the containing
cell first); world-space gradients and Hessians come from reference-space
derivatives pushed through the geometric map by the chain rule.
"""

import warnings

import numpy as np

from .basis import make_basis, node_count
from .mesh import inv3, solve3

VALUE_SHAPES = ("scalar", "vector3")


class DegenerateJacobianError(ArithmeticError):
    """Geometric Jacobian is numerically singular at the evaluation point."""


class FemField:
    """Per-cell coefficient expansion over a nodal Lagrange basis.

    Parameters
    ----------
    mesh : Mesh
    degree : int in 1..6
    value_shape : "scalar" or "vector3"
    coeffs : (C, node_count) for scalar or (C, node_count, 3) for vector3
    """

    def __init__(self, mesh, degree, value_shape, coeffs):
        if value_shape not in VALUE_SHAPES:
            raise ValueError(f"value_shape must be one of {VALUE_SHAPES}")
        self.mesh = mesh
        self.degree = int(degree)
        self.value_shape = value_shape
        self.basis = make_basis(self.degree)
        n = node_count(self.degree)
        want = (mesh.n_cells, n) if value_shape == "scalar" else (mesh.n_cells, n, 3)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != want:
            raise ValueError(f"coeffs shape {coeffs.shape} != expected {want}")
        self.coeffs = coeffs

    @property
    def components(self):
        return 1 if self.value_shape == "scalar" else 3

    # -- evaluation -------------------------------------------------------

    def eval_ref(self, cell, xi):
        """Field value at reference point xi of the given cell."""
        return self.basis.eval(xi) @ self.coeffs[cell]

    def eval_world(self, x, inside_tol=1e-9):
        """Field value at world point x, or None when x is outside the mesh."""
        hit = self.mesh.locate(x, inside_tol=inside_tol)
        if hit is None:
            return None
        return self.eval_ref(*hit)

    def grad_world(self, cell, xi):
        """World-space derivative at (cell, xi).

        Scalar fields: gradient as shape (3,). Vector fields: the 3x3
        Jacobian with entry [i, j] = d value_i / d x_j.
        """
        grads = self.basis.eval_grad(xi)
        jac = self.mesh.geom_jacobian(cell, xi)
        if self.value_shape == "scalar":
            g = solve3(jac.T, grads.T @ self.coeffs[cell])
            if g is None:
                raise DegenerateJacobianError(f"singular Jacobian in cell {cell}")
            return g
        jinv = inv3(jac)
        if jinv is None:
            raise DegenerateJacobianError(f"singular Jacobian in cell {cell}")
        ref_jac = self.coeffs[cell].T @ grads
        return ref_jac @ jinv

    def hess_world(self, cell, xi):
        """World-space Hessian of a scalar field at (cell, xi).

        Computed as Jinv^T (H_ref - sum_k g_k H_ref(T_k)) Jinv with g the
        world gradient, then symmetrized to remove round-off asymmetry.
        """
        if self.value_shape != "scalar":
            raise ValueError("hess_world is defined for scalar fields only")
        c = self.coeffs[cell]
        grads = self.basis.eval_grad(xi)
        jac = self.mesh.geom_jacobian(cell, xi)
        jinv = inv3(jac)
        if jinv is None:
            raise DegenerateJacobianError(f"singular Jacobian in cell {cell}")
        g_world = jinv.T @ (grads.T @ c)
        h_ref = np.tensordot(c, self.basis.eval_hess(xi), axes=(0, 0))
        h_geom = self.mesh.geom_hessian(cell, xi)
        core = h_ref - np.tensordot(g_world, h_geom, axes=(0, 0))
        h = jinv.T @ core @ jinv
        return 0.5 * (h + h.T)


def interpolate(mesh, degree, value_shape, fn):
    """Nodal interpolation of a world-space function onto a field.

    Coefficients are the function's values at the world images of the
    basis nodes; shared interface nodes see the same world point, so
    continuous input data yields a continuous field up to round-off.
    """
    if value_shape not in VALUE_SHAPES:
        raise ValueError(f"value_shape must be one of {VALUE_SHAPES}")
    fbasis = make_basis(degree)
    # geometry basis evaluated at the field nodes, mapping cell geometry
    # nodes to field-node world points in one matmul per cell
    geom_at = np.array([mesh.basis.eval(xi) for xi in fbasis.nodes])
    n = fbasis.node_count
    if value_shape == "scalar":
        coeffs = np.empty((mesh.n_cells, n))
    else:
        coeffs = np.empty((mesh.n_cells, n, 3))
    for cell in range(mesh.n_cells):
        pts = geom_at @ mesh.cell_nodes[cell]
        for j in range(n):
            coeffs[cell, j] = fn(pts[j])
    return FemField(mesh, degree, value_shape, coeffs)


def check_interface_continuity(field, tol=1e-9):
    """Warn when duplicated interface coefficients disagree beyond tol.

    Returns the worst mismatch found. Discontinuous data is accepted; a
    nodally interpolated continuous function agrees to round-off.
    """
    mesh = field.mesh
    exps = field.basis.exponents
    d = field.degree
    bary = np.column_stack([d - exps.sum(axis=1), exps])
    index = {tuple(t): i for i, t in enumerate(exps.tolist())}
    facet_slots = [np.flatnonzero(bary[:, f] == 0) for f in range(4)]
    worst = 0.0
    for cell in range(mesh.n_cells):
        for f in range(4):
            other = mesh.neighbors[cell, f]
            if other < cell:  # boundary (-1) or already visited pair
                continue
            perm = mesh.corner_perms[cell, f]
            for slot in facet_slots[f]:
                w2 = np.empty(4, dtype=np.intp)
                w2[perm] = bary[slot]
                slot2 = index[(w2[1], w2[2], w2[3])]
                gap = np.abs(field.coeffs[cell, slot] - field.coeffs[other, slot2]).max()
                if gap > worst:
                    worst = gap
    if worst > tol:
        warnings.warn(
            f"field coefficients disagree across interfaces by up to {worst:.3e}; "
            "treating the data as (at most) C0-discontinuous",
            stacklevel=2,
        )
    return worst
