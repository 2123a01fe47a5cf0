"""Streamline integration over vector fields with pluggable movement.

The integrator is the RK2 midpoint rule. Field samples are taken in
reference coordinates through the current position; the movement scheme
(naive, guided, or error-checked guided) is the only thing that changes
between runs, which is what the benchmark harness exploits.
"""

from dataclasses import dataclass, field

import numpy as np

from .position import MoveOptions, make_stepper, pos_from_world

COMPLETED = "completed"
LEFT_DOMAIN = "left_domain"


@dataclass(frozen=True)
class TraceConfig:
    """Step size, step budget, and movement scheme of one trace."""

    h: float
    n_steps: int
    scheme: str = "naive"
    err_max: float | None = None
    move_options: MoveOptions | None = None

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("step size h must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    def stepper(self):
        opts = self.move_options
        if opts is None:
            opts = MoveOptions(err_max=self.err_max)
        elif self.err_max is not None and opts.err_max != self.err_max:
            opts = MoveOptions(
                max_cells=opts.max_cells,
                inside_tol=opts.inside_tol,
                facet_nudge=opts.facet_nudge,
                err_max=self.err_max,
            )
        return make_stepper(self.scheme, opts)


@dataclass
class TraceResult:
    """World-space polyline of one streamline.

    ``points`` holds the seed plus one point per accepted step;
    ``steps_inside`` counts accepted steps; ``exit_step`` is the index of
    the step that left the mesh (equal to steps_inside) when status is
    LEFT_DOMAIN, else None.
    """

    points: np.ndarray
    status: str
    steps_inside: int
    exit_step: int | None = None
    seed: np.ndarray = field(default=None, repr=False)


def rk2_trace(fld, seed, cfg):
    """Trace a streamline of a vector3 field from a world-space seed.

    Records one world point per completed step. Stops early (status
    LEFT_DOMAIN) as soon as the midpoint or the full step lands outside
    the mesh; a seed outside the mesh yields an empty trace.
    """
    if fld.value_shape != "vector3":
        raise ValueError("rk2_trace needs a vector3 field")
    seed = np.asarray(seed, dtype=float)
    step = cfg.stepper()
    pos = pos_from_world(fld.mesh, seed)
    if not pos.valid:
        return TraceResult(np.empty((0, 3)), LEFT_DOMAIN, 0, exit_step=0, seed=seed)
    points = [pos.world]
    h = cfg.h
    for k in range(cfg.n_steps):
        k1 = fld.eval_ref(pos.cell, pos.xi)
        mid = step(pos, (0.5 * h) * k1)
        if not mid.valid:
            return TraceResult(np.array(points), LEFT_DOMAIN, k, exit_step=k, seed=seed)
        k2 = fld.eval_ref(mid.cell, mid.xi)
        nxt = step(pos, h * k2)
        if not nxt.valid:
            return TraceResult(np.array(points), LEFT_DOMAIN, k, exit_step=k, seed=seed)
        pos = nxt
        points.append(pos.world)
    return TraceResult(np.array(points), COMPLETED, cfg.n_steps, seed=seed)
