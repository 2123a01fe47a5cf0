"""File formats: JSON mesh/field documents, CSV and legacy-VTK results.

Mesh document (format_version 1)::

    {
      "format_version": 1,
      "dim": 3,
      "geom_degree": g,
      "vertices": [x0, y0, z0, x1, ...],          # flat, length 3V
      "geom_nodes": [x0, y0, z0, ...],            # flat, length 3N
      "cells": [[n0, ..., n_{M-1}], ...],         # canonical node order
      "cell_vertices": [[v0, v1, v2, v3], ...]
    }

Field document::

    {
      "format_version": 1,
      "degree": d,
      "value_shape": "scalar" | "vector3",
      "coeffs": [...]   # flat, cell-major, node-major, component-minor
    }

Floats use Python's shortest round-tripping repr, so write/read round
trips are value-exact. VTK output is legacy ASCII POLYDATA (polylines for
traces, vertices plus a "strength" point scalar for particles), loadable
in ParaView.
"""

import json

import numpy as np

from .basis import node_count
from .field import FemField, check_interface_continuity
from .mesh import Mesh

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Document violates the schema (missing key, bad shape, bad version)."""


def _require(doc, key, path):
    try:
        return doc[key]
    except KeyError:
        raise FormatError(f"{path}: missing key {key!r}") from None


def write_mesh_json(mesh, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "dim": 3,
        "geom_degree": mesh.geom_degree,
        "vertices": mesh.vertex_coords.ravel().tolist(),
        "geom_nodes": mesh.geom_node_coords.ravel().tolist(),
        "cells": mesh.cells.tolist(),
        "cell_vertices": mesh.cell_vertices.tolist(),
    }
    with open(path, "w") as f:
        json.dump(doc, f)
        f.write("\n")


def read_mesh_json(path, validate=True):
    """Load and validate a mesh document.

    Raises FormatError on schema problems and MeshValidationError when the
    mesh itself is malformed (inverted cells, non-conforming facets).
    """
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from None
    version = _require(doc, "format_version", path)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version}")
    dim = _require(doc, "dim", path)
    if dim != 3:
        raise FormatError(f"{path}: only dim=3 is supported, got {dim}")
    g = _require(doc, "geom_degree", path)
    vertices = np.asarray(_require(doc, "vertices", path), dtype=float)
    nodes = np.asarray(_require(doc, "geom_nodes", path), dtype=float)
    cells = _require(doc, "cells", path)
    cell_vertices = _require(doc, "cell_vertices", path)
    if vertices.size % 3 or nodes.size % 3:
        raise FormatError(f"{path}: coordinate arrays must have length 3*n")
    n_per_cell = node_count(g) if 1 <= g <= 3 else -1
    for i, row in enumerate(cells):
        if len(row) != n_per_cell:
            raise FormatError(
                f"{path}: cell {i} has {len(row)} nodes, expected {n_per_cell} "
                f"for geom_degree {g}"
            )
    for i, row in enumerate(cell_vertices):
        if len(row) != 4:
            raise FormatError(f"{path}: cell_vertices {i} must have 4 entries")
    try:
        return Mesh(
            g,
            vertices.reshape(-1, 3),
            np.asarray(cell_vertices, dtype=np.intp),
            nodes.reshape(-1, 3),
            np.asarray(cells, dtype=np.intp),
            validate=validate,
        )
    except IndexError as exc:
        raise FormatError(f"{path}: index out of range ({exc})") from None


def write_field_json(fld, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "degree": fld.degree,
        "value_shape": fld.value_shape,
        "coeffs": fld.coeffs.ravel().tolist(),
    }
    with open(path, "w") as f:
        json.dump(doc, f)
        f.write("\n")


def read_field_json(path, mesh):
    """Load a field document against its mesh; checks coefficient length.

    Interface continuity is checked and non-agreeing data is accepted with
    a warning.
    """
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from None
    version = _require(doc, "format_version", path)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version}")
    degree = _require(doc, "degree", path)
    shape = _require(doc, "value_shape", path)
    if shape not in ("scalar", "vector3"):
        raise FormatError(f"{path}: unknown value_shape {shape!r}")
    coeffs = np.asarray(_require(doc, "coeffs", path), dtype=float)
    comps = 1 if shape == "scalar" else 3
    try:
        n = node_count(degree)
    except TypeError:
        raise FormatError(f"{path}: bad degree {degree!r}") from None
    want = mesh.n_cells * n * comps
    if coeffs.size != want:
        raise FormatError(
            f"{path}: coeffs length {coeffs.size} != {want} expected for "
            f"{mesh.n_cells} cells, degree {degree}, {shape}"
        )
    if shape == "scalar":
        coeffs = coeffs.reshape(mesh.n_cells, n)
    else:
        coeffs = coeffs.reshape(mesh.n_cells, n, 3)
    fld = FemField(mesh, degree, shape, coeffs)
    check_interface_continuity(fld)
    return fld


# -- result writers ---------------------------------------------------------


def write_trace_csv(result, path):
    with open(path, "w") as f:
        f.write("step,x,y,z\n")
        for i, (x, y, z) in enumerate(np.asarray(result.points).tolist()):
            f.write(f"{i},{x!r},{y!r},{z!r}\n")


def write_trace_vtk(result, path, title="streamline"):
    pts = np.asarray(result.points)
    n = len(pts)
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\nDATASET POLYDATA\n")
        f.write(f"POINTS {n} double\n")
        for x, y, z in pts.tolist():
            f.write(f"{x!r} {y!r} {z!r}\n")
        if n >= 2:
            f.write(f"LINES 1 {n + 1}\n")
            f.write(" ".join([str(n)] + [str(i) for i in range(n)]) + "\n")


def write_particles_csv(result, path):
    pts = result.world_points()
    strengths = result.strengths()
    with open(path, "w") as f:
        f.write("x,y,z,strength\n")
        for (x, y, z), s in zip(pts.tolist(), strengths.tolist()):
            f.write(f"{x!r},{y!r},{z!r},{s!r}\n")


def write_particles_vtk(result, path, title="particles"):
    pts = result.world_points()
    strengths = result.strengths()
    n = len(pts)
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\nDATASET POLYDATA\n")
        f.write(f"POINTS {n} double\n")
        for x, y, z in pts.tolist():
            f.write(f"{x!r} {y!r} {z!r}\n")
        f.write(f"VERTICES {n} {2 * n}\n")
        for i in range(n):
            f.write(f"1 {i}\n")
        f.write(f"POINT_DATA {n}\n")
        f.write("SCALARS strength double 1\nLOOKUP_TABLE default\n")
        for s in strengths.tolist():
            f.write(f"{s!r}\n")


def write_csv(result, path):
    """Dispatch on result type: trace polyline or particle cloud."""
    if hasattr(result, "points"):
        write_trace_csv(result, path)
    else:
        write_particles_csv(result, path)


def write_vtk(result, path):
    if hasattr(result, "points"):
        write_trace_vtk(result, path)
    else:
        write_particles_vtk(result, path)
