"""Direct evaluation and traversal of higher-order FEM fields.

Scalar and vector fields of polynomial degree up to 6 live on curved
tetrahedral meshes (geometry degree up to 3). The central abstraction is
the mesh position: a (cell, reference point) pair that can be moved by a
world vector through one of three schemes (naive relocation, guided
reference-space traversal, or guided traversal with a world-space error
check). Streamline tracing and feature-sampling particle systems are
built on top of it.
"""

from .basis import LagrangeBasis, make_basis, node_count
from .bench import BenchRecord, cmd_bench, write_bench_csv
from .field import DegenerateJacobianError, FemField, interpolate
from .formats import (
    FormatError,
    read_field_json,
    read_mesh_json,
    write_csv,
    write_field_json,
    write_mesh_json,
    write_vtk,
)
from .mesh import INVALID_CELL, Mesh, MeshValidationError, build_adjacency
from .particles import (
    AllDeadError,
    IsosurfaceFeature,
    Particle,
    PsysConfig,
    RidgeFeature,
    eig_sym3,
    feature_perp,
    feature_step,
    feature_strength,
    neighbor_query,
    psys_run,
    psys_step,
)
from .position import (
    MeshPos,
    MoveOptions,
    add_guided,
    add_guided_checked,
    add_naive,
    pos_from_ref,
    pos_from_world,
    pos_sub,
)
from .synth import (
    AnalyticFunction,
    Box,
    CylinderShell,
    SolidCylinder,
    SphereShell,
    builtin_function,
    make_mesh,
)
from .trace import TraceConfig, TraceResult, rk2_trace

__version__ = "0.1.0"

__all__ = [
    "AllDeadError",
    "AnalyticFunction",
    "BenchRecord",
    "Box",
    "CylinderShell",
    "DegenerateJacobianError",
    "FemField",
    "FormatError",
    "INVALID_CELL",
    "IsosurfaceFeature",
    "LagrangeBasis",
    "Mesh",
    "MeshPos",
    "MeshValidationError",
    "MoveOptions",
    "Particle",
    "PsysConfig",
    "RidgeFeature",
    "SolidCylinder",
    "SphereShell",
    "TraceConfig",
    "TraceResult",
    "add_guided",
    "add_guided_checked",
    "add_naive",
    "build_adjacency",
    "builtin_function",
    "cmd_bench",
    "eig_sym3",
    "feature_perp",
    "feature_step",
    "feature_strength",
    "interpolate",
    "make_basis",
    "make_mesh",
    "neighbor_query",
    "node_count",
    "pos_from_ref",
    "pos_from_world",
    "pos_sub",
    "psys_run",
    "psys_step",
    "read_field_json",
    "read_mesh_json",
    "rk2_trace",
    "write_csv",
    "write_field_json",
    "write_mesh_json",
    "write_vtk",
    "write_bench_csv",
]
