import numpy as np
import pytest

import fempoint as fp


@pytest.fixture(scope="session")
def box_mesh():
    """Affine unit-ish box, geometry degree 1."""
    return fp.make_mesh(fp.Box((2.0, 2.0, 2.0), (3, 3, 3)), geom_degree=1)


@pytest.fixture(scope="session")
def shell_mesh():
    """Curved cylinder shell, geometry degree 3 (the helix benchmark mesh)."""
    return fp.make_mesh(fp.CylinderShell(1.0, 2.0, 2.5, (3, 16, 4)), geom_degree=3)


@pytest.fixture(scope="session")
def helix_field(shell_mesh):
    return fp.interpolate(shell_mesh, 2, "vector3", fp.builtin_function("helix"))


@pytest.fixture(scope="session")
def solid_mesh():
    """Solid cylinder holding the superquadric isosurface, degree-3 geometry."""
    return fp.make_mesh(fp.SolidCylinder(1.5, 2.4, (2, 2, 4)), geom_degree=3)


@pytest.fixture(scope="session")
def superquadric_field(solid_mesh):
    return fp.interpolate(solid_mesh, 6, "scalar", fp.builtin_function("superquadric"))


@pytest.fixture(scope="session")
def sphere_mesh():
    """Sphere shell containing strong ridge regions of the ridge function."""
    return fp.make_mesh(fp.SphereShell(2.0, 3.2, (2, 14, 8)), geom_degree=3)


@pytest.fixture(scope="session")
def ridge_field(sphere_mesh):
    return fp.interpolate(sphere_mesh, 6, "scalar", fp.builtin_function("ridgefn"))


def random_inside_ref(rng):
    """Uniform point in the reference tetrahedron."""
    b = rng.dirichlet((1.0, 1.0, 1.0, 1.0))
    return b[1:4].copy()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
