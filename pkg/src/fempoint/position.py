"""Positions on a mesh and the schemes that move them.

A MeshPos pairs a cell id with reference coordinates and caches the world
point, making "where am I" a first-class value that survives cell hops.
Three update schemes move a position by a world vector:

- add_naive: relocate the target point from scratch (Newton inversion over
  candidate cells). Accurate and expensive; the reference behavior.
- add_guided: transform the vector into reference space with the inverse
  Jacobian at the current point (a first-order approximation), traverse
  the reference cell, and hop across facets until the traversal parameter
  reaches 1. No Newton solves; first-order error on curved cells.
- add_guided_checked: guided traversal plus a world-space error bound
  against the true target line; a violated bound triggers Newton in the
  current cell (interior finish) or an immediate naive fallback (facet
  crossing).

Invalid positions (outside the mesh) are absorbing: every scheme maps
invalid to invalid, and leaving the mesh yields an invalid position.
"""

from dataclasses import dataclass

import numpy as np

from . import refcell
from .mesh import INVALID_CELL, solve3

_ZERO3 = np.zeros(3)


@dataclass(frozen=True)
class MoveOptions:
    """Knobs of the guided schemes.

    max_cells bounds the facet hops of one update before falling back to
    the naive scheme; inside_tol is the barycentric containment band;
    facet_nudge pushes a transferred point off its facet so the same exit
    is not re-detected at zero traversal time; err_max is the world-space
    error bound of the error-checked scheme.
    """

    max_cells: int = 64
    inside_tol: float = 1e-9
    facet_nudge: float = 1e-12
    err_max: float | None = None

    def __post_init__(self):
        if self.max_cells < 1 or self.inside_tol <= 0 or self.facet_nudge <= 0:
            raise ValueError("MoveOptions fields must be positive")
        if self.err_max is not None and self.err_max < 0:
            raise ValueError("err_max must be nonnegative")


DEFAULT_OPTIONS = MoveOptions()


@dataclass(frozen=True)
class MeshPos:
    """A position on a mesh: (cell, reference point, cached world point).

    ``xi`` and ``world`` are meaningful only when ``valid``; invalid
    positions keep the mesh reference (when known) so movement stays
    absorbing without special cases.
    """

    mesh: object
    cell: int
    xi: np.ndarray
    world: np.ndarray
    valid: bool = True

    @staticmethod
    def invalid(mesh=None):
        return MeshPos(mesh, INVALID_CELL, _ZERO3, _ZERO3, False)


def pos_from_world(mesh, x):
    """Locate a world point; invalid when no cell contains it.

    The cached world point is the forward map of the located reference
    point, not the query itself.
    """
    hit = mesh.locate(np.asarray(x, dtype=float))
    if hit is None:
        return MeshPos.invalid(mesh)
    cell, xi = hit
    return MeshPos(mesh, cell, xi, mesh.geom_map(cell, xi))


def pos_from_ref(mesh, cell, xi, tol=1e-6):
    """Position at known (cell, xi); rejects xi outside the tolerance band."""
    xi = np.asarray(xi, dtype=float)
    if not refcell.inside(xi, tol):
        raise ValueError(f"reference point {xi} is outside the cell beyond tol={tol}")
    return MeshPos(mesh, int(cell), xi, mesh.geom_map(cell, xi))


def pos_sub(a, b):
    """World-space difference a - b; zero unless both positions are valid."""
    if not (a.valid and b.valid):
        return _ZERO3.copy()
    return a.world - b.world


def add_naive(pos, v):
    """Move by relocating the world target from scratch."""
    if not pos.valid:
        return pos
    return pos_from_world(pos.mesh, pos.world + v)


def _finish(mesh, cell, xi, inside_tol):
    """Position at a traversal end point, clamped onto the cell."""
    if not refcell.inside(xi, 0.0):
        xi = refcell.clamp(xi)
    return MeshPos(mesh, int(cell), xi, mesh.geom_map(cell, xi))


def add_guided(pos, v, opts=DEFAULT_OPTIONS):
    """Move by reference-space traversal with facet hops (no Newton)."""
    return _guided(pos, v, opts, checked=False)


def add_guided_checked(pos, v, opts):
    """Guided movement with a world-space error bound and fallbacks."""
    if opts.err_max is None:
        raise ValueError("add_guided_checked requires MoveOptions.err_max")
    return _guided(pos, v, opts, checked=True)


def _guided(pos, v, opts, checked):
    if not pos.valid:
        return pos
    mesh = pos.mesh
    v = np.asarray(v, dtype=float)
    cell = pos.cell
    xi = pos.xi
    target = pos.world + v
    err_max = opts.err_max
    t = 0.0
    for _ in range(opts.max_cells):
        jac = mesh.geom_jacobian(cell, xi)
        ref_vel = solve3(jac, v)
        if ref_vel is None:
            return add_naive(pos, v)
        candidate = xi + (1.0 - t) * ref_vel
        if refcell.inside(candidate, opts.inside_tol):
            return _finish_checked(mesh, cell, candidate, target, opts) if checked \
                else _finish(mesh, cell, candidate, opts.inside_tol)
        hit = refcell.exit_time(xi, ref_vel)
        if hit is None:
            # degenerate direction: nothing to traverse
            return pos
        dt, facet = hit
        if t + dt >= 1.0:
            # completion and exit coincide; stay in the pre-transfer cell
            candidate = xi + (1.0 - t) * ref_vel
            return _finish_checked(mesh, cell, candidate, target, opts) if checked \
                else _finish(mesh, cell, candidate, opts.inside_tol)
        exit_xi = xi + dt * ref_vel
        t += dt
        if checked:
            gap = mesh.geom_map(cell, exit_xi) - (pos.world + t * v)
            if gap @ gap > err_max * err_max:
                # mid-crossing error: inversion in either cell is unsafe here
                return add_naive(pos, v)
        hop = mesh.transfer(cell, facet, refcell.clamp(exit_xi))
        if hop is None:
            return MeshPos.invalid(mesh)
        cell, xi = hop
        xi += opts.facet_nudge * (refcell.CENTROID - xi)
    return add_naive(pos, v)


def _finish_checked(mesh, cell, candidate, target, opts):
    if not refcell.inside(candidate, 0.0):
        candidate = refcell.clamp(candidate)
    world = mesh.geom_map(cell, candidate)
    gap = world - target
    err = opts.err_max
    if gap @ gap <= err * err:
        return MeshPos(mesh, int(cell), candidate, world)
    # over budget at an interior finish: the current cell may still contain
    # the true target, so invert for it before paying for a full relocation
    xi = mesh.newton_invert(cell, target)
    if xi is not None and refcell.inside(xi, opts.inside_tol):
        return _finish(mesh, cell, xi, opts.inside_tol)
    hit = mesh.locate(target)
    if hit is None:
        return MeshPos.invalid(mesh)
    c, xi = hit
    return MeshPos(mesh, c, xi, mesh.geom_map(c, xi))


_SCHEMES = ("naive", "guided", "checked")


def make_stepper(scheme, opts=None):
    """Bind a movement scheme name to a (pos, v) -> pos callable."""
    if scheme not in _SCHEMES:
        raise ValueError(f"scheme must be one of {_SCHEMES}, got {scheme!r}")
    if scheme == "naive":
        return add_naive
    if opts is None:
        opts = DEFAULT_OPTIONS
    if scheme == "guided":
        return lambda pos, v: add_guided(pos, v, opts)
    if opts.err_max is None:
        raise ValueError("checked scheme requires MoveOptions.err_max")
    return lambda pos, v: add_guided_checked(pos, v, opts)
