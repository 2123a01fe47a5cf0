import math

import numpy as np
import pytest

import fempoint as fp
from fempoint import refcell
from fempoint.position import MeshPos, MoveOptions


def hull_clearance_box(x, extent=2.0):
    """Signed distance of x to the box hull (positive inside)."""
    return min(min(x), extent - max(x))


def test_pos_from_world_round_trip(box_mesh, rng):
    for _ in range(20):
        x = 0.1 + 1.8 * rng.random(3)
        pos = fp.pos_from_world(box_mesh, x)
        assert pos.valid
        assert np.linalg.norm(pos.world - x) <= 1e-8
        assert np.linalg.norm(box_mesh.geom_map(pos.cell, pos.xi) - pos.world) <= 1e-10


def test_pos_from_world_exterior(box_mesh):
    pos = fp.pos_from_world(box_mesh, np.array([9.0, 0.0, 0.0]))
    assert not pos.valid


def test_pos_from_world_facet_lowest_cell(box_mesh):
    # a vertex shared by many cells: locate returns the lowest index whose
    # inversion succeeds (ascending scan order)
    x = np.array([2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0])
    pos = fp.pos_from_world(box_mesh, x)
    assert pos.valid
    candidates = []
    for c in range(box_mesh.n_cells):
        hit = box_mesh.newton_invert(c, x)
        if hit is not None and refcell.inside(hit, 1e-9):
            candidates.append(c)
    assert pos.cell == min(candidates)


def test_pos_from_ref(box_mesh):
    pos = fp.pos_from_ref(box_mesh, 0, np.array([0.25, 0.25, 0.25]))
    assert pos.valid
    assert np.allclose(pos.world, box_mesh.geom_map(0, pos.xi))
    with pytest.raises(ValueError):
        fp.pos_from_ref(box_mesh, 0, np.array([2.0, 0.0, 0.0]))


def test_pos_sub(box_mesh):
    a = fp.pos_from_world(box_mesh, np.array([0.5, 0.5, 0.5]))
    b = fp.pos_from_world(box_mesh, np.array([1.0, 0.75, 0.5]))
    assert np.allclose(fp.pos_sub(a, a), 0.0)
    assert np.allclose(fp.pos_sub(a, b), -fp.pos_sub(b, a))
    assert np.allclose(fp.pos_sub(a, b), a.world - b.world)
    invalid = MeshPos.invalid(box_mesh)
    assert np.array_equal(fp.pos_sub(a, invalid), np.zeros(3))
    assert np.array_equal(fp.pos_sub(invalid, a), np.zeros(3))


def test_add_naive_contract(box_mesh, rng):
    pos = fp.pos_from_world(box_mesh, np.array([1.0, 1.0, 1.0]))
    same = fp.add_naive(pos, np.zeros(3))
    assert same.valid
    assert np.linalg.norm(same.world - pos.world) <= 1e-9
    out = fp.add_naive(pos, np.array([5.0, 0.0, 0.0]))
    assert not out.valid
    for _ in range(20):
        v = rng.normal(size=3) * 0.3
        moved = fp.add_naive(pos, v)
        if moved.valid:
            assert np.linalg.norm(moved.world - (pos.world + v)) <= 1e-8


def test_invalid_absorbing(box_mesh):
    invalid = MeshPos.invalid(box_mesh)
    opts = MoveOptions(err_max=1e-5)
    v = np.array([0.1, 0.0, 0.0])
    assert not fp.add_naive(invalid, v).valid
    assert not fp.add_guided(invalid, v, opts).valid
    assert not fp.add_guided_checked(invalid, v, opts).valid


def test_guided_equals_naive_on_affine(box_mesh, rng):
    worst = 0.0
    agree = checked = 0
    for _ in range(500):
        x = 0.05 + 1.9 * rng.random(3)
        pos = fp.pos_from_world(box_mesh, x)
        v = rng.normal(size=3) * rng.uniform(0, 0.9)
        a = fp.add_naive(pos, v)
        g = fp.add_guided(pos, v)
        if hull_clearance_box(x + v) > 1e-6 or hull_clearance_box(x + v) < -1e-6:
            assert a.valid == g.valid
            agree += 1
        if a.valid and g.valid:
            worst = max(worst, float(np.linalg.norm(a.world - g.world)))
            checked += 1
    assert worst <= 1e-9
    assert agree > 400 and checked > 250


def test_guided_zero_vector_identity(shell_mesh):
    pos = fp.pos_from_ref(shell_mesh, 40, np.array([0.3, 0.2, 0.2]))
    out = fp.add_guided(pos, np.zeros(3))
    assert out.valid
    assert np.linalg.norm(out.world - pos.world) <= 1e-12


def test_guided_first_order_convergence(shell_mesh, rng):
    # within one curved cell the update error shrinks ~4x when halving v
    pos = fp.pos_from_ref(shell_mesh, 100, np.array([0.25, 0.25, 0.25]))
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    errs = []
    for scale in (0.08, 0.04, 0.02):
        out = fp.add_guided(pos, scale * d)
        assert out.valid
        errs.append(np.linalg.norm(out.world - (pos.world + scale * d)))
    for a, b in zip(errs, errs[1:]):
        assert 2.5 <= a / b <= 6.0


def test_guided_leaves_domain_invalid(shell_mesh):
    pos = fp.pos_from_world(shell_mesh, np.array([1.5, 0.0, 1.0]))
    out = fp.add_guided(pos, np.array([5.0, 0.0, 0.0]))
    assert not out.valid


def test_guided_crosses_many_cells(shell_mesh):
    # a long tangential step hops multiple cells and still lands accurately
    pos = fp.pos_from_world(shell_mesh, np.array([1.5, 0.0, 1.0]))
    v = np.array([-0.2, 0.9, 0.1])
    target = pos.world + v
    out = fp.add_guided(pos, v)
    assert out.valid
    # first-order scheme: modest accuracy, but the right neighborhood
    assert np.linalg.norm(out.world - target) <= 0.15
    checked = fp.add_guided_checked(pos, v, MoveOptions(err_max=1e-6))
    assert np.linalg.norm(checked.world - target) <= 1e-6 + 1e-9


def test_checked_infinite_budget_equals_guided(shell_mesh, rng):
    opts = MoveOptions(err_max=math.inf)
    for _ in range(50):
        cell = int(rng.integers(shell_mesh.n_cells))
        pos = fp.pos_from_ref(shell_mesh, cell, rng.dirichlet((2, 2, 2, 2))[1:])
        v = rng.normal(size=3) * 0.1
        a = fp.add_guided(pos, v)
        b = fp.add_guided_checked(pos, v, opts)
        assert a.valid == b.valid
        if a.valid:
            assert np.linalg.norm(a.world - b.world) <= 1e-12


def test_checked_zero_budget_equals_naive(shell_mesh, rng):
    opts = MoveOptions(err_max=0.0)
    for _ in range(50):
        cell = int(rng.integers(shell_mesh.n_cells))
        pos = fp.pos_from_ref(shell_mesh, cell, rng.dirichlet((2, 2, 2, 2))[1:])
        v = rng.normal(size=3) * 0.1
        a = fp.add_naive(pos, v)
        b = fp.add_guided_checked(pos, v, opts)
        if a.valid:
            assert b.valid
            assert np.linalg.norm(a.world - b.world) <= 1e-9


def test_checked_error_bound_invariant(shell_mesh, rng):
    # every valid checked result is within err_max of the target, or equals
    # the naive result (fallback branch)
    for err in (1e-4, 1e-6):
        opts = MoveOptions(err_max=err)
        for _ in range(100):
            cell = int(rng.integers(shell_mesh.n_cells))
            pos = fp.pos_from_ref(shell_mesh, cell, rng.dirichlet((2, 2, 2, 2))[1:])
            v = rng.normal(size=3) * rng.uniform(0, 0.3)
            out = fp.add_guided_checked(pos, v, opts)
            if not out.valid:
                continue
            target = pos.world + v
            if np.linalg.norm(out.world - target) > err + 1e-9:
                naive = fp.add_naive(pos, v)
                assert naive.valid
                assert np.linalg.norm(out.world - naive.world) <= 1e-9


def test_checked_requires_err_max(shell_mesh):
    pos = fp.pos_from_ref(shell_mesh, 0, np.array([0.25, 0.25, 0.25]))
    with pytest.raises(ValueError):
        fp.add_guided_checked(pos, np.zeros(3), MoveOptions())


def test_move_options_validation():
    with pytest.raises(ValueError):
        MoveOptions(max_cells=0)
    with pytest.raises(ValueError):
        MoveOptions(inside_tol=-1.0)
    with pytest.raises(ValueError):
        MoveOptions(err_max=-1.0)


def test_stored_positions_satisfy_invariant(shell_mesh, rng):
    # valid positions keep xi inside the tolerance band and a consistent
    # world cache, even after long traversals
    opts = MoveOptions(err_max=1e-5)
    pos = fp.pos_from_world(shell_mesh, np.array([1.5, 0.0, 1.25]))
    for _ in range(200):
        v = rng.normal(size=3) * 0.15
        nxt = fp.add_guided_checked(pos, v, opts)
        if nxt.valid:
            assert refcell.inside(nxt.xi, 1e-6)
            scale = 1.0 + np.linalg.norm(nxt.world)
            gap = np.linalg.norm(shell_mesh.geom_map(nxt.cell, nxt.xi) - nxt.world)
            assert gap <= 1e-8 * scale
            pos = nxt
