"""Particle systems sampling implicit features of scalar fields.

A feature supplies three callbacks over mesh positions: a scalar strength,
a Newton-style step toward the feature set, and a projection onto the
feature's tangent plane. Two features are provided: isosurfaces (strength
|grad F|, step along the gradient) and ridge surfaces (strength -lambda_1
of the world Hessian, step along its minor eigenvector, following Eberly's
height-ridge criterion).

Particles move by a mesh-position update scheme, repel neighbors found
through a fixed-radius k-d-tree query, and die when they leave the mesh
(or, for ridges, stay below the strength threshold past a grace period).
Iterations are synchronous: all motions are computed against the previous
snapshot, then applied, which makes runs deterministic for a fixed RNG
seed.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .position import MoveOptions, make_stepper, pos_from_world

_TINY = 1e-12


class AllDeadError(RuntimeError):
    """Every particle died before the system converged."""


@dataclass(frozen=True)
class IsosurfaceFeature:
    """Level set F = iso of a scalar field."""

    field: object
    iso: float = 0.0


@dataclass(frozen=True)
class RidgeFeature:
    """Height-ridge surface of a scalar field.

    Points where the gradient is orthogonal to the Hessian eigenvector of
    the smallest (most negative) eigenvalue, kept only where the strength
    -lambda_1 reaches strength_threshold. The bias is an eigenvalue-gap
    guard: the ridge step is taken only where lambda_2 - lambda_1 >= bias,
    which keeps the minor eigenvector orientation stable.
    """

    field: object
    strength_threshold: float
    bias: float = 0.1

    def __post_init__(self):
        if self.strength_threshold <= 0:
            raise ValueError("strength_threshold must be positive")


def eig_sym3(h):
    """Ascending eigenvalues and orthonormal eigenvectors of symmetric h.

    Eigenvector signs are fixed so each vector's largest-magnitude
    component is positive, giving a deterministic orientation.
    """
    w, q = np.linalg.eigh(h)
    for k in range(3):
        col = q[:, k]
        if col[np.argmax(np.abs(col))] < 0.0:
            q[:, k] = -col
    return w, q


def feature_strength(feature, pos):
    """Scalar significance of the feature at a position (0 when invalid)."""
    if not pos.valid:
        return 0.0
    fld = feature.field
    g = fld.grad_world(pos.cell, pos.xi)
    if isinstance(feature, IsosurfaceFeature):
        return float(np.linalg.norm(g))
    w, _ = eig_sym3(fld.hess_world(pos.cell, pos.xi))
    return float(-w[0])


def feature_step(feature, pos, max_norm=None):
    """Newton-style world step from ``pos`` toward the feature set."""
    fld = feature.field
    if isinstance(feature, IsosurfaceFeature):
        g = fld.grad_world(pos.cell, pos.xi)
        g2 = float(g @ g)
        if g2 < _TINY * _TINY:
            return np.zeros(3)
        resid = float(fld.eval_ref(pos.cell, pos.xi)) - feature.iso
        step = (-resid / g2) * g
    else:
        w, q = eig_sym3(fld.hess_world(pos.cell, pos.xi))
        lam1 = float(w[0])
        if abs(lam1) < _TINY or w[1] - lam1 < feature.bias:
            return np.zeros(3)
        e1 = q[:, 0]
        g = fld.grad_world(pos.cell, pos.xi)
        step = (-float(g @ e1) / lam1) * e1
    if max_norm is not None:
        n = float(np.linalg.norm(step))
        if n > max_norm:
            step *= max_norm / n
    return step


def feature_perp(feature, pos, u):
    """Project u onto the feature's tangent plane at ``pos``."""
    fld = feature.field
    if isinstance(feature, IsosurfaceFeature):
        n = fld.grad_world(pos.cell, pos.xi)
        n2 = float(n @ n)
        if n2 < _TINY * _TINY:
            return np.asarray(u, dtype=float)
        n = n / math.sqrt(n2)
    else:
        _, q = eig_sym3(fld.hess_world(pos.cell, pos.xi))
        n = q[:, 0]
    u = np.asarray(u, dtype=float)
    return u - n * float(n @ u)


@dataclass(frozen=True)
class PsysConfig:
    """Particle-system controls.

    radius is the interaction radius of the repulsion kernel; the system
    has converged when no particle moved farther than eps * radius in one
    iteration and no particle was born. Isolated particles (energy at most
    spawn_energy) that sit on the feature spawn one offspring at a jittered
    tangent offset of radius/2, up to max_population. Movement uses the
    named position-update scheme.

    The repulsion displacement is gain * radius * sum of kernel gradients;
    gain must stay well below 2 / max|phi''| ~ 0.17 or close pairs
    oscillate at the motion clamp instead of settling.
    """

    radius: float = 0.5
    eps: float = 0.005
    max_iters: int = 200
    seed_count: int = 300
    scheme: str = "checked"
    err_max: float = 1e-5
    gain: float = 0.05
    spawn_energy: float = 0.0
    max_population: int = 20000
    grace_iters: int = 10
    rng_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.radius <= 0 or self.eps <= 0:
            raise ValueError("radius and eps must be positive")


@dataclass
class Particle:
    pos: object
    id: int
    energy: float = 0.0
    strength: float = 0.0
    age: int = 0
    alive: bool = True


@dataclass
class ParticleSystem:
    """Snapshot-stepped particle population over one feature."""

    feature: object
    cfg: PsysConfig
    particles: list = field(default_factory=list)
    iteration: int = 0
    births: int = 0
    deaths: int = 0
    rng: object = None
    _next_id: int = 0
    _tree: object = None
    _live: list = field(default_factory=list)

    def live_particles(self):
        return [p for p in self.particles if p.alive]

    def _spawn(self, pos):
        p = Particle(pos=pos, id=self._next_id)
        self._next_id += 1
        self.particles.append(p)
        return p

    def build_index(self):
        """Rebuild the k-d tree over live particles' world points."""
        self._live = self.live_particles()
        if self._live:
            self._tree = cKDTree(np.array([p.pos.world for p in self._live]))
        else:
            self._tree = None


def _repulsion_gradient(s):
    # phi(s) = (1 - s)^4 on [0, 1); phi'(s) = -4 (1 - s)^3
    return -4.0 * (1.0 - s) ** 3


def _kernel_energy(s):
    return (1.0 - s) ** 4


def _pseudo_direction(pid):
    # deterministic unit vector for separating exactly coincident particles
    x = math.sin(12.9898 * (pid + 1))
    y = math.cos(78.233 * (pid + 1))
    z = math.sin(37.719 * (pid + 1) + 1.0)
    v = np.array([x, y, z])
    return v / np.linalg.norm(v)


def neighbor_query(system, particle):
    """Live particles within the interaction radius, with world offsets.

    Offsets are position differences (other - particle); the particle
    itself is excluded.
    """
    if system._tree is None:
        return []
    r = system.cfg.radius
    out = []
    for idx in system._tree.query_ball_point(particle.pos.world, r):
        other = system._live[idx]
        if other.id == particle.id:
            continue
        out.append((other, other.pos.world - particle.pos.world))
    return out


def psys_step(system):
    """One synchronous iteration; returns the largest motion applied.

    Motions are gathered against the current snapshot, then applied
    through the configured movement scheme; deaths and births happen after
    all moves.
    """
    cfg = system.cfg
    feature = system.feature
    ridge = isinstance(feature, RidgeFeature)
    move = make_stepper(cfg.scheme, MoveOptions(err_max=cfg.err_max))
    system.build_index()
    live = system._live
    if not live:
        return 0.0
    radius = cfg.radius
    max_step = 0.5 * radius
    motion_floor = cfg.eps * radius

    def plan_motion(p):
        repel = np.zeros(3)
        energy = 0.0
        for other, offset in neighbor_query(system, p):
            dist = float(np.linalg.norm(offset))
            s = dist / radius
            if s >= 1.0:
                continue
            energy += _kernel_energy(s)
            direction = offset / dist if dist > _TINY else _pseudo_direction(p.id)
            repel += _repulsion_gradient(s) * direction
        fstep = feature_step(feature, p.pos, max_norm=max_step)
        motion = fstep + feature_perp(feature, p.pos, cfg.gain * radius * repel)
        norm = float(np.linalg.norm(motion))
        if norm > max_step:
            motion = motion * (max_step / norm)
        return motion, energy, float(np.linalg.norm(fstep)) <= motion_floor

    if cfg.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            planned = list(pool.map(plan_motion, live))
    else:
        planned = [plan_motion(p) for p in live]
    motions = []
    converged = []
    for p, (motion, energy, conv) in zip(live, planned):
        p.energy = energy
        motions.append(motion)
        converged.append(conv)

    max_motion = 0.0
    for p, motion in zip(live, motions):
        new_pos = move(p.pos, motion)
        if not new_pos.valid:
            p.alive = False
            system.deaths += 1
            continue
        max_motion = max(max_motion, float(np.linalg.norm(new_pos.world - p.pos.world)))
        p.pos = new_pos
        p.age += 1
        p.strength = feature_strength(feature, new_pos)
        if ridge and p.age >= cfg.grace_iters and p.strength < feature.strength_threshold:
            p.alive = False
            system.deaths += 1

    population = sum(1 for p in system.particles if p.alive)
    for p, was_converged in zip(live, converged):
        if not p.alive or population >= cfg.max_population:
            continue
        if p.energy <= cfg.spawn_energy and was_converged and p.age >= 1:
            jitter = system.rng.normal(size=3)
            offset = feature_perp(feature, p.pos, jitter)
            n = float(np.linalg.norm(offset))
            if n < _TINY:
                continue
            child_pos = move(p.pos, offset * (0.5 * radius / n))
            if not child_pos.valid:
                continue
            strength = feature_strength(feature, child_pos)
            if ridge and strength < feature.strength_threshold:
                # do not seed offspring outside the feature mask
                continue
            child = system._spawn(child_pos)
            child.strength = strength
            system.births += 1
            population += 1
            max_motion = math.inf  # newborns have not moved yet
    system.iteration += 1
    return max_motion


@dataclass
class PsysResult:
    particles: list
    iterations: int
    births: int
    deaths: int
    max_motion: float

    def world_points(self):
        return np.array([p.pos.world for p in self.particles])

    def strengths(self):
        return np.array([p.strength for p in self.particles])


def psys_run(feature, cfg, seeds):
    """Run a particle system from world-space seeds to convergence.

    Iterates psys_step until the largest per-particle motion falls to
    eps * radius (with no birth that iteration) or max_iters is reached.
    Raises AllDeadError when no seed lands in the mesh or every particle
    dies.
    """
    mesh = feature.field.mesh
    system = ParticleSystem(
        feature=feature, cfg=cfg, rng=np.random.default_rng(cfg.rng_seed)
    )
    for s in seeds:
        pos = pos_from_world(mesh, s)
        if pos.valid:
            p = system._spawn(pos)
            p.strength = feature_strength(feature, pos)
    if not system.particles:
        raise AllDeadError("no seed lies inside the mesh")
    max_motion = math.inf
    for _ in range(cfg.max_iters):
        max_motion = psys_step(system)
        survivors = system.live_particles()
        if not survivors:
            raise AllDeadError(f"population died out at iteration {system.iteration}")
        if max_motion <= cfg.eps * cfg.radius:
            break
    return PsysResult(
        particles=system.live_particles(),
        iterations=system.iteration,
        births=system.births,
        deaths=system.deaths,
        max_motion=max_motion,
    )
