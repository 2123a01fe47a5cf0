import numpy as np
import pytest

import fempoint as fp
from fempoint.trace import COMPLETED, LEFT_DOMAIN, TraceConfig


def closed_form_helix(seed, t):
    """Exact solution of (y, -x, 0.1): clockwise circle plus z drift."""
    r = np.hypot(seed[0], seed[1])
    phase = np.arctan2(seed[1], seed[0])
    return np.stack(
        [r * np.cos(phase - t), r * np.sin(phase - t), seed[2] + 0.1 * t], axis=-1
    )


def test_zero_field_stays_at_seed(box_mesh):
    fld = fp.interpolate(box_mesh, 1, "vector3", lambda p: np.zeros(3))
    seed = np.array([1.0, 1.0, 1.0])
    res = fp.rk2_trace(fld, seed, TraceConfig(h=0.1, n_steps=20))
    assert res.status == COMPLETED
    assert res.steps_inside == 20
    assert len(res.points) == 21
    assert np.abs(res.points - seed).max() <= 1e-12


def test_seed_outside_mesh(helix_field):
    res = fp.rk2_trace(helix_field, np.array([10.0, 0.0, 0.0]),
                       TraceConfig(h=0.1, n_steps=5))
    assert res.status == LEFT_DOMAIN
    assert res.exit_step == 0
    assert res.steps_inside == 0
    assert len(res.points) == 0


def test_left_domain_stops_recording(box_mesh):
    fld = fp.interpolate(box_mesh, 1, "vector3", lambda p: np.array([1.0, 0.0, 0.0]))
    res = fp.rk2_trace(fld, np.array([1.0, 1.0, 1.0]),
                       TraceConfig(h=0.25, n_steps=50))
    assert res.status == LEFT_DOMAIN
    assert res.steps_inside < 50
    assert res.exit_step == res.steps_inside
    assert len(res.points) == res.steps_inside + 1


def test_requires_vector_field(superquadric_field):
    with pytest.raises(ValueError):
        fp.rk2_trace(superquadric_field, np.zeros(3), TraceConfig(h=0.1, n_steps=1))


def test_config_validation():
    with pytest.raises(ValueError):
        TraceConfig(h=0.0, n_steps=5)
    with pytest.raises(ValueError):
        TraceConfig(h=0.1, n_steps=0)
    with pytest.raises(ValueError):
        TraceConfig(h=0.1, n_steps=1, scheme="warp").stepper()


def test_helix_radius_stays_constant(helix_field):
    seed = np.array([1.5, 0.0, 0.3])
    res = fp.rk2_trace(helix_field, seed,
                       TraceConfig(h=0.02, n_steps=320, scheme="checked",
                                   err_max=1e-5))
    assert res.status == COMPLETED
    radii = np.linalg.norm(res.points[:, :2], axis=1)
    assert np.abs(radii - 1.5).max() <= 0.01


def test_schemes_agree_on_affine_mesh(box_mesh):
    fld = fp.interpolate(
        box_mesh, 2, "vector3",
        lambda p: np.array([p[1] - 1.0, 1.0 - p[0], 0.05]),
    )
    seed = np.array([1.4, 1.0, 0.5])
    runs = {}
    for scheme, err in (("naive", None), ("guided", None), ("checked", 1e-5)):
        cfg = TraceConfig(h=0.05, n_steps=200, scheme=scheme, err_max=err)
        runs[scheme] = fp.rk2_trace(fld, seed, cfg)
    assert runs["naive"].status == COMPLETED
    for scheme in ("guided", "checked"):
        assert runs[scheme].steps_inside == runs["naive"].steps_inside
        dev = np.abs(runs[scheme].points - runs["naive"].points).max()
        assert dev <= 1e-8


def test_checked_follows_naive_closely(helix_field):
    seed = np.array([1.5, 0.0, 0.3])
    n = 320
    naive = fp.rk2_trace(helix_field, seed, TraceConfig(h=0.02, n_steps=n))
    checked = fp.rk2_trace(
        helix_field, seed, TraceConfig(h=0.02, n_steps=n, scheme="checked",
                                       err_max=1e-5)
    )
    assert naive.steps_inside == checked.steps_inside == n
    assert np.linalg.norm(checked.points - naive.points, axis=1).max() <= 1e-4


def test_second_order_convergence_against_closed_form(helix_field):
    # global error vs the exact helix drops ~4x per halving of h
    seed = np.array([1.5, 0.0, 0.3])
    errs = []
    for h in (0.2, 0.1, 0.05):
        n = int(round(2 * np.pi / h))
        res = fp.rk2_trace(helix_field, seed,
                           TraceConfig(h=h, n_steps=n, scheme="checked",
                                       err_max=1e-6))
        assert res.status == COMPLETED
        t = h * np.arange(len(res.points))
        exact = closed_form_helix(seed, t)
        errs.append(np.linalg.norm(res.points - exact, axis=1).max())
    for a, b in zip(errs, errs[1:]):
        assert 3.0 <= a / b <= 5.0


def test_steps_inside_equal_across_schemes(helix_field):
    seed = np.array([1.5, 0.0, 0.3])
    counts = set()
    for scheme, err in (("naive", None), ("guided", None), ("checked", 1e-5)):
        cfg = TraceConfig(h=0.05, n_steps=150, scheme=scheme, err_max=err)
        counts.add(fp.rk2_trace(helix_field, seed, cfg).steps_inside)
    assert len(counts) == 1
