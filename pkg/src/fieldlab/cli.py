"""Command-line interface: ``fieldlab <verb> [options]``.

Verbs
-----
solve     relax the scene and write CSV / PGM / residual history
trace     solve, then draw field lines as SVG
contour   solve, then draw equipotentials as SVG
render    solve, then draw equipotentials, field lines and geometry
presets   list the bundled scenes
validate  parse and rasterize a scene without solving

Reports go to standard output as ``key=value`` lines.  Exit codes: 0 on
success, 1 for invalid scenes or solver inputs, 2 for bad command-line
usage, 3 when relaxation diverges (or fails to converge under
``--require-convergence``) and 4 for file I/O errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Sequence

from . import _accel
from .analysis import TraceConfig, default_levels, extract_equipotentials, trace_field_lines
from .cartesian import ITERATIONS, STENCILS, DivergenceError, Direction, SolverError, TWO_PASS
from .grid import CoordSystem, GridError
from .scene import Scene, SceneError, load_scene, preset, preset_names, rasterize, solve_scene
from .writers import OutputError, write_field_csv, write_field_pgm, write_lines_svg

EXIT_OK = 0
EXIT_SCENE = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3
EXIT_IO = 4

_SCHEDULE_ALIASES = {
    "four": tuple(Direction),
    "two-pass": TWO_PASS,
}


class _NotConverged(Exception):
    pass


def _schedule(text: str) -> tuple[Direction, ...]:
    if text in _SCHEDULE_ALIASES:
        return _SCHEDULE_ALIASES[text]
    try:
        return tuple(Direction(part.strip()) for part in text.split(",") if part.strip())
    except ValueError:
        names = ", ".join([d.value for d in Direction] + list(_SCHEDULE_ALIASES))
        raise argparse.ArgumentTypeError(f"invalid schedule {text!r}; use a comma list of: {names}")


def _levels(text: str):
    """An integer count of evenly spaced levels, or a comma list of volts."""
    if "," not in text:
        try:
            count = int(text)
        except ValueError:
            pass
        else:
            if count < 1:
                raise argparse.ArgumentTypeError("level count must be >= 1")
            return count
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid levels {text!r}")


def _pgm_range(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--pgm-range needs LO,HI, got {text!r}")
    return lo, hi


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _add_source(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", metavar="NAME", help="bundled scene name (see 'fieldlab presets')")
    src.add_argument("--scene", metavar="PATH", help="scene JSON file")


def _add_solver(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver overrides")
    g.add_argument("--tolerance", type=float, help="stop when the largest node change drops below this")
    g.add_argument("--max-iterations", type=_positive_int, help="iteration budget")
    g.add_argument("--schedule", type=_schedule,
                   help="sweep directions per iteration: comma list of forward12, reverse12, "
                        "forward21, reverse21, or 'four' / 'two-pass'")
    g.add_argument("--stencil", choices=STENCILS, help="Cartesian stencil")
    g.add_argument("--iteration", choices=ITERATIONS, help="in-place or double-buffered updates")
    g.add_argument("--require-convergence", action="store_true",
                   help="exit with status 3 if the tolerance is not reached")


def _add_trace(p: argparse.ArgumentParser):
    g = p.add_argument_group("field lines")
    g.add_argument("--seeds", type=_positive_int, metavar="N", help="number of seeds from the scene's seed set")
    g.add_argument("--dt", type=_positive_float, help="integration step factor")
    g.add_argument("--max-steps", type=_positive_int, help="step budget per line")
    g.add_argument("--normalized", action="store_true", help="fixed-length steps of size dt")


def _add_levels(p: argparse.ArgumentParser):
    p.add_argument("--levels", type=_levels, default=12,
                   help="number of evenly spaced levels, or a comma list of potentials "
                        "(a single value needs a trailing comma; write --levels=-50,0,50 when the "
                        "list starts with a minus sign); default 12")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fieldlab",
                                     description="Finite-difference electrostatics on structured grids.")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", required=True)

    p = sub.add_parser("solve", help="relax a scene and write the potential")
    _add_source(p)
    _add_solver(p)
    out = p.add_argument_group("outputs")
    out.add_argument("--out-csv", metavar="PATH", help="potential as CSV")
    out.add_argument("--out-pgm", metavar="PATH", help="potential as binary PGM")
    out.add_argument("--pgm-range", type=_pgm_range, metavar="LO,HI",
                     help="potential mapped to black..white (default: field range); "
                          "use --pgm-range=-100,100 for negative bounds")
    out.add_argument("--out-history", metavar="PATH", help="residual history as CSV")
    out.add_argument("--csv-digits", type=int, default=9, help="significant digits in CSV (default 9)")

    for verb, text in (("trace", "draw field lines"), ("contour", "draw equipotentials"),
                       ("render", "draw equipotentials, field lines and geometry")):
        p = sub.add_parser(verb, help=text)
        _add_source(p)
        _add_solver(p)
        if verb in ("trace", "render"):
            _add_trace(p)
        if verb in ("contour", "render"):
            _add_levels(p)
        p.add_argument("--out", metavar="PATH", required=True, help="SVG output file")

    sub.add_parser("presets", help="list bundled scenes")

    p = sub.add_parser("validate", help="parse and rasterize a scene")
    _add_source(p)
    return parser


def _load(args) -> Scene:
    return preset(args.preset) if args.preset else load_scene(args.scene)


def _config(args, scene: Scene):
    changes = {}
    for flag, key in (("tolerance", "tolerance"), ("max_iterations", "max_iterations"),
                      ("schedule", "sweep_schedule"), ("stencil", "stencil"), ("iteration", "iteration")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    return dataclasses.replace(scene.solver, **changes)


def _report(pairs, out):
    for key, value in pairs:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = f"{value:.6g}"
        print(f"{key}={value}", file=out)


def _solve(args, scene: Scene, out):
    config = _config(args, scene)
    raster = rasterize(scene)
    result = solve_scene(raster, config)
    v = result.potential.values
    _report([("scene", scene.name or "-"), ("system", scene.grid.system.value),
             ("grid", f"{scene.grid.n1}x{scene.grid.n2}"), ("backend", _accel.backend_name()),
             ("iterations", result.iterations_run), ("converged", result.converged),
             ("final_residual", float(result.final_residual)),
             ("potential_min", float(v.min())), ("potential_max", float(v.max()))], out)
    if args.require_convergence and not result.converged:
        raise _NotConverged(f"tolerance {config.tolerance:g} not reached after "
                            f"{result.iterations_run} iterations")
    return raster, result


def _trace(args, scene: Scene, raster, result):
    if scene.grid.system is CoordSystem.CARTESIAN_1D:
        raise GridError("field lines need a 2D grid")
    settings = scene.trace
    if settings is None or settings.seeds is None:
        raise SceneError(["scene has no trace seeds; add a 'trace' section"])
    cfg = settings.trace_config(args.dt)
    if args.max_steps is not None or args.normalized:
        cfg = TraceConfig(cfg.dt, args.max_steps or cfg.max_steps, cfg.stop_potential_band,
                          cfg.stagnation_eps, cfg.normalized or args.normalized)
    return trace_field_lines(result.potential, settings.seeds.points(args.seeds), cfg, raster.mask)


def _contours(args, result):
    if result.potential.spec.system is CoordSystem.CARTESIAN_1D:
        raise GridError("equipotential contours need a 2D grid")
    levels = args.levels
    if isinstance(levels, int):
        levels = default_levels(result.potential, levels)
    return extract_equipotentials(result.potential, levels)


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.verb == "presets":
            for name in preset_names():
                try:
                    desc = preset(name).description
                except SceneError as exc:
                    desc = f"(invalid: {exc.errors[0]})"
                print(f"{name}\t{desc}", file=out)
            return EXIT_OK
        scene = _load(args)
        if args.verb == "validate":
            raster = rasterize(scene)
            _report([("valid", True), ("scene", scene.name or "-"), ("system", scene.grid.system.value),
                     ("grid", f"{scene.grid.n1}x{scene.grid.n2}"), ("regions", len(scene.regions)),
                     ("pinned_nodes", len(raster.mask))], out)
            return EXIT_OK
        raster, result = _solve(args, scene, out)
        if args.verb == "solve":
            if args.out_csv:
                write_field_csv(result.potential, args.out_csv, args.csv_digits)
            if args.out_pgm:
                write_field_pgm(result.potential, args.out_pgm, args.pgm_range)
            if args.out_history:
                _write_history(result, args.out_history)
            return EXIT_OK
        lines = _trace(args, scene, raster, result) if args.verb in ("trace", "render") else []
        contours = _contours(args, result) if args.verb in ("contour", "render") else []
        write_lines_svg(lines, contours, scene, args.out, mask=raster.mask)
        _report([("lines", len(lines)), ("contours", len(contours))], out)
        return EXIT_OK
    except (DivergenceError, _NotConverged) as exc:
        print(f"fieldlab: {exc}", file=err)
        return EXIT_DIVERGED
    except SceneError as exc:
        for e in exc.errors:
            print(f"fieldlab: {e}", file=err)
        return EXIT_SCENE
    except (OutputError, OSError) as exc:
        print(f"fieldlab: {exc}", file=err)
        return EXIT_IO
    except (GridError, SolverError, ValueError) as exc:
        print(f"fieldlab: {exc}", file=err)
        return EXIT_SCENE


def _write_history(result, path):
    text = "iteration,max_change\n" + "".join(f"{it},{ch:.9g}\n" for it, ch in result.residual_history)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
