"""Command-line interface.

Subcommands: synth-mesh, interp, streamline, particles-iso,
particles-ridge, bench. Exit codes: 0 on success, 1 on domain errors
(bad files, failed runs), 2 on usage errors. Set FEMPOINT_LOG to a
logging level name (e.g. DEBUG) for progress output.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import formats, synth
from .bench import cmd_bench, write_bench_csv
from .field import interpolate
from .mesh import MeshValidationError
from .particles import (
    AllDeadError,
    IsosurfaceFeature,
    PsysConfig,
    RidgeFeature,
    feature_strength,
    psys_run,
)
from .position import pos_from_world
from .trace import TraceConfig, rk2_trace

log = logging.getLogger("fempoint")


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _ints(text):
    return tuple(int(x) for x in text.split(","))


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fempoint",
        description="Field evaluation, streamlines and feature-sampling "
        "particles on curved tetrahedral meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-mesh", help="build a synthetic mesh")
    p.add_argument("--shape", required=True,
                   choices=["box", "cylinder-shell", "solid-cylinder", "sphere-shell"])
    p.add_argument("--out", required=True)
    p.add_argument("--geom-degree", type=int, default=3)
    p.add_argument("--extent", type=_floats, default=(1.0, 1.0, 1.0),
                   help="box extent, comma separated")
    p.add_argument("--divisions", type=_ints, default=None,
                   help="per-shape divisions, comma separated")
    p.add_argument("--r-in", type=float, default=1.0)
    p.add_argument("--r-out", type=float, default=2.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--height", type=float, default=2.0)
    p.add_argument("--polar-margin", type=float, default=0.15)

    p = sub.add_parser("interp", help="interpolate a builtin function onto a field")
    p.add_argument("--mesh", required=True)
    p.add_argument("--function", required=True,
                   choices=["helix", "superquadric", "ridgefn"])
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("streamline", help="trace one RK2 streamline")
    p.add_argument("--mesh", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--seed", type=_floats, required=True, help="x,y,z")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n-steps", type=int, required=True)
    p.add_argument("--scheme", choices=["naive", "guided", "checked"],
                   default="checked")
    p.add_argument("--err-max", type=float, default=1e-5)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--vtk", default=None, help="optional VTK output path")

    for name, extra in (("particles-iso", "iso"), ("particles-ridge", "ridge")):
        p = sub.add_parser(name, help=f"sample a {extra} surface with particles")
        p.add_argument("--mesh", required=True)
        p.add_argument("--field", required=True)
        if extra == "iso":
            p.add_argument("--iso", type=float, default=0.0)
        else:
            p.add_argument("--strength-threshold", type=float, required=True)
            p.add_argument("--bias", type=float, default=0.1)
        p.add_argument("--rad", type=float, default=0.5)
        p.add_argument("--eps", type=float, default=0.005)
        p.add_argument("--seed-count", type=int, default=300)
        p.add_argument("--seed-rng", type=int, default=0)
        p.add_argument("--max-iters", type=int, default=200)
        p.add_argument("--scheme", choices=["naive", "guided", "checked"],
                       default="checked")
        p.add_argument("--err-max", type=float, default=1e-5)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--vtk", default=None)

    p = sub.add_parser("bench", help="time naive vs error-checked guided search")
    p.add_argument("--mesh", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--seed", type=_floats, required=True, help="x,y,z")
    p.add_argument("--h-list", type=_floats, default=(0.2, 0.02, 0.002))
    p.add_argument("--err-list", type=_floats, default=(1e-4, 1e-5, 1e-6))
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--total-time", type=float, default=18.0)
    p.add_argument("--out", required=True)

    return parser


def _make_shape(args):
    if args.shape == "box":
        return synth.Box(args.extent, args.divisions or (1, 1, 1))
    if args.shape == "cylinder-shell":
        return synth.CylinderShell(args.r_in, args.r_out, args.height,
                                   args.divisions or (2, 16, 4))
    if args.shape == "solid-cylinder":
        return synth.SolidCylinder(args.radius, args.height,
                                   args.divisions or (2, 2, 4))
    return synth.SphereShell(args.r_in, args.r_out,
                             args.divisions or (2, 16, 10), args.polar_margin)


def _sample_seeds(mesh, count, rng, accept=None, max_tries=200):
    """Uniform rejection sampling of world seeds inside the mesh."""
    lo, hi = mesh.bounding_box()
    seeds = []
    tries = 0
    while len(seeds) < count and tries < max_tries:
        tries += 1
        batch = lo + (hi - lo) * rng.random((max(64, count), 3))
        for x in batch:
            pos = pos_from_world(mesh, x)
            if pos.valid and (accept is None or accept(pos)):
                seeds.append(x)
                if len(seeds) >= count:
                    break
    return seeds


def _run_particles(args, ridge):
    mesh = formats.read_mesh_json(args.mesh)
    fld = formats.read_field_json(args.field, mesh)
    if fld.value_shape != "scalar":
        raise ValueError("particle sampling needs a scalar field")
    if ridge:
        feature = RidgeFeature(fld, args.strength_threshold, args.bias)
        accept = lambda pos: feature_strength(feature, pos) >= args.strength_threshold
    else:
        feature = IsosurfaceFeature(fld, args.iso)
        accept = None
    cfg = PsysConfig(
        radius=args.rad,
        eps=args.eps,
        max_iters=args.max_iters,
        seed_count=args.seed_count,
        scheme=args.scheme,
        err_max=args.err_max,
        rng_seed=args.seed_rng,
        threads=args.threads,
    )
    rng = np.random.default_rng(args.seed_rng)
    seeds = _sample_seeds(mesh, cfg.seed_count, rng, accept=accept)
    log.info("sampled %d seeds", len(seeds))
    result = psys_run(feature, cfg, seeds)
    log.info(
        "converged after %d iterations: %d survivors, %d births, %d deaths",
        result.iterations, len(result.particles), result.births, result.deaths,
    )
    formats.write_particles_csv(result, args.out)
    if args.vtk:
        formats.write_particles_vtk(result, args.vtk)
    print(
        f"{len(result.particles)} particles after {result.iterations} iterations "
        f"(max motion {result.max_motion:.2e}) -> {args.out}"
    )


def _dispatch(args):
    if args.command == "synth-mesh":
        mesh = synth.make_mesh(_make_shape(args), geom_degree=args.geom_degree)
        formats.write_mesh_json(mesh, args.out)
        print(f"{mesh!r} -> {args.out}")
    elif args.command == "interp":
        mesh = formats.read_mesh_json(args.mesh)
        fn = synth.builtin_function(args.function)
        fld = interpolate(mesh, args.degree, fn.value_shape, fn)
        formats.write_field_json(fld, args.out)
        print(f"degree-{args.degree} {fn.value_shape} field -> {args.out}")
    elif args.command == "streamline":
        mesh = formats.read_mesh_json(args.mesh)
        fld = formats.read_field_json(args.field, mesh)
        cfg = TraceConfig(h=args.h, n_steps=args.n_steps, scheme=args.scheme,
                          err_max=args.err_max)
        result = rk2_trace(fld, np.asarray(args.seed), cfg)
        formats.write_trace_csv(result, args.out)
        if args.vtk:
            formats.write_trace_vtk(result, args.vtk)
        print(
            f"{result.steps_inside} steps ({result.status}) -> {args.out}"
        )
    elif args.command == "particles-iso":
        _run_particles(args, ridge=False)
    elif args.command == "particles-ridge":
        _run_particles(args, ridge=True)
    elif args.command == "bench":
        mesh = formats.read_mesh_json(args.mesh)
        fld = formats.read_field_json(args.field, mesh)
        records = cmd_bench(fld, [np.asarray(args.seed)], args.h_list,
                            args.err_list, repetitions=args.repetitions,
                            total_time=args.total_time)
        write_bench_csv(records, args.out)
        for r in records:
            tag = f"err={r.err_max:g}" if r.err_max is not None else "naive"
            speed = "flagged" if r.flagged else (
                f"speedup {r.speedup:.2f}" if r.speedup else "")
            print(f"h={r.h:g} {r.scheme} {tag}: {r.seconds:.4f}s "
                  f"({r.steps_inside} steps) {speed}")


def main(argv=None):
    level = os.environ.get("FEMPOINT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except (OSError, ValueError, MeshValidationError, AllDeadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
