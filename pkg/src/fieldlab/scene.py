"""Declarative scenes: JSON documents, rasterization and the bundled presets.

A scene lists regions in order; each region selects nodes by shape and then
sets permittivity, sets charge density, or pins the potential.  Later regions
override earlier ones for the same property.  Shapes are evaluated on node
indices offset by ``index_base``, so a scene written with ``index_base: 1``
can use the same 1-based index inequalities as loop code that counts from 1.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Union

import numpy as np

from .cartesian import Direction, SolveConfig, SolveResult, SolverError, solve_1d, solve_2d
from .curvilinear import axisym_problem, polar_problem, solve_axisym, solve_polar
from .grid import (
    BoundarySpec,
    CoordSystem,
    Dirichlet,
    DirichletProfile,
    FixedMask,
    GridError,
    GridSpec,
    Neumann,
    RasterizedScene,
    ScalarField,
)

PRESET_NAMES = (
    "pr1",
    "pr2_tube",
    "pr2_brick_low",
    "pr2_brick_high",
    "pr2_cylinder",
    "pr2_tilted_plate",
    "pr2_metal_cylinder",
    "pr3_slab1d",
    "pr4_polar",
    "pr5_axisym",
)
PRESET_DIR_ENV = "FIELDLAB_PRESET_DIR"


class SceneError(ValueError):
    """A scene document failed to parse or validate.

    ``errors`` lists every problem found, each prefixed with its location.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# ------------------------------------------------------------------ shapes

@dataclass(frozen=True)
class Rect:
    """Inclusive index ranges; ``None`` leaves a side unbounded."""

    i_min: int | None = None
    i_max: int | None = None
    j_min: int | None = None
    j_max: int | None = None

    def contains(self, I, J):
        inside = np.ones(np.broadcast(I, J).shape, dtype=bool)
        if self.i_min is not None:
            inside &= I >= self.i_min
        if self.i_max is not None:
            inside &= I <= self.i_max
        if self.j_min is not None:
            inside &= J >= self.j_min
        if self.j_max is not None:
            inside &= J <= self.j_max
        return inside


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def contains(self, I, J):
        d2 = (I - self.center[0]) ** 2 + (J - self.center[1]) ** 2
        return d2 < self.radius ** 2


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    r_in: float
    r_out: float

    def contains(self, I, J):
        d2 = (I - self.center[0]) ** 2 + (J - self.center[1]) ** 2
        return (d2 < self.r_out ** 2) & (d2 > self.r_in ** 2)


@dataclass(frozen=True)
class TiltedPlate:
    """Band of given thickness through ``point`` at ``angle`` degrees from axis 1.

    ``length=None`` makes the band infinite; otherwise it is centred on ``point``.
    """

    point: tuple[float, float]
    angle: float
    thickness: float
    length: float | None = None

    def contains(self, I, J):
        a = math.radians(self.angle)
        d1, d2 = I - self.point[0], J - self.point[1]
        along = d1 * math.cos(a) + d2 * math.sin(a)
        across = -d1 * math.sin(a) + d2 * math.cos(a)
        inside = np.abs(across) < self.thickness / 2
        if self.length is not None:
            inside &= np.abs(along) <= self.length / 2
        return inside

    def corners(self):
        a = math.radians(self.angle)
        half_len = (self.length if self.length is not None else 1e6) / 2
        u = np.array([math.cos(a), math.sin(a)])
        n = np.array([-math.sin(a), math.cos(a)])
        p = np.asarray(self.point, dtype=float)
        t = self.thickness / 2
        return [p + su * half_len * u + sn * t * n for su, sn in ((-1, -1), (1, -1), (1, 1), (-1, 1))]


@dataclass(frozen=True)
class EpsFormula:
    """``eps = 1 + a*i*j`` at every node (indices offset by ``index_base``)."""

    a: float

    def contains(self, I, J):
        return np.ones(np.broadcast(I, J).shape, dtype=bool)

    def eps(self, I, J):
        return 1.0 + self.a * I * J


Shape = Union[Rect, Circle, Annulus, TiltedPlate, EpsFormula]


@dataclass(frozen=True)
class SetEps:
    # None only together with EpsFormula
    value: float | None = None


@dataclass(frozen=True)
class SetRho:
    value: float


@dataclass(frozen=True)
class Pin:
    volts: float = 0.0


Effect = Union[SetEps, SetRho, Pin]


@dataclass(frozen=True)
class Region:
    shape: Shape
    effect: Effect


# --------------------------------------------------------------- tracing

@dataclass(frozen=True)
class SeedLine:
    start: tuple[float, float]
    end: tuple[float, float]
    count: int = 16

    def points(self, count=None):
        n = self.count if count is None else count
        if n == 1:
            return [tuple(self.start)]
        t = np.linspace(0.0, 1.0, n)
        s, e = np.asarray(self.start), np.asarray(self.end)
        return [tuple(s + tk * (e - s)) for tk in t]


@dataclass(frozen=True)
class SeedArc:
    center: tuple[float, float]
    radius: float
    angles: tuple[float, float]
    count: int = 16

    def points(self, count=None):
        n = self.count if count is None else count
        a = np.linspace(self.angles[0], self.angles[1], n) if n > 1 else np.array([self.angles[0]])
        c = self.center
        return [(c[0] + self.radius * math.cos(t), c[1] + self.radius * math.sin(t)) for t in a]


@dataclass(frozen=True)
class SeedPoints:
    points_: tuple[tuple[float, float], ...]

    def points(self, count=None):
        pts = list(self.points_)
        return pts if count is None else pts[:count]


Seeds = Union[SeedLine, SeedArc, SeedPoints]


@dataclass(frozen=True)
class TraceSettings:
    """Default field-line setup stored with a scene (plane coordinates)."""

    dt: float = 0.1
    max_steps: int = 10_000
    seeds: Seeds | None = None
    stop_band: tuple[float, float] | None = None
    stagnation_eps: float = 1e-9
    normalized: bool = False

    def trace_config(self, dt=None):
        from .analysis import TraceConfig

        return TraceConfig(self.dt if dt is None else dt, self.max_steps, self.stop_band,
                           self.stagnation_eps, self.normalized)


# ----------------------------------------------------------------- scene

@dataclass(frozen=True)
class Scene:
    grid: GridSpec
    background_eps: float = 1.0
    background_rho: float = 0.0
    regions: tuple[Region, ...] = ()
    boundaries: BoundarySpec = field(default_factory=BoundarySpec)
    charge_scale: float = 1.0
    index_base: int = 0
    solver: SolveConfig = field(default_factory=SolveConfig)
    trace: TraceSettings | None = None
    name: str = ""
    description: str = ""

    def index_to_plane(self, i, j):
        """Plane coordinates of a scene index position (``index_base`` applied)."""
        g = self.grid
        return g.to_plane(g.origin1 + (np.asarray(i, dtype=float) - self.index_base) * g.h1,
                          (np.asarray(j, dtype=float) - self.index_base) * g.h2)


def rasterize(scene: Scene) -> RasterizedScene:
    g = scene.grid
    I, J = np.meshgrid(np.arange(g.n1) + scene.index_base, np.arange(g.n2) + scene.index_base,
                       indexing="ij")
    eps = np.full(g.shape, float(scene.background_eps))
    rho = np.full(g.shape, float(scene.background_rho))
    pins = np.full(g.shape, np.nan)
    for region in scene.regions:
        inside = region.shape.contains(I, J)
        effect = region.effect
        if isinstance(effect, SetEps):
            if effect.value is None:
                eps[inside] = region.shape.eps(I, J)[inside]
            else:
                eps[inside] = effect.value
        elif isinstance(effect, SetRho):
            rho[inside] = effect.value
        elif isinstance(effect, Pin):
            pins[inside] = effect.volts
    return RasterizedScene(g, ScalarField(g, eps), ScalarField(g, rho), FixedMask(pins),
                           scene.boundaries, float(scene.charge_scale))


def solve_scene(scene: Scene | RasterizedScene, config: SolveConfig | None = None) -> SolveResult:
    """Rasterize if needed and dispatch to the solver for the grid's system."""
    if isinstance(scene, Scene):
        config = scene.solver if config is None else config
        raster = rasterize(scene)
    else:
        raster = scene
        config = SolveConfig() if config is None else config
    system = raster.spec.system
    if system is CoordSystem.CARTESIAN_2D:
        return solve_2d(raster, config)
    if system is CoordSystem.CARTESIAN_1D:
        left, right = raster.bc.low2, raster.bc.high2
        if not (isinstance(left, Dirichlet) and isinstance(right, Dirichlet)):
            raise SolverError("1D problems need Dirichlet plates on low2 and high2")
        return solve_1d(raster.eps.values[0], raster.rho.values[0], left.value, right.value, config,
                        raster.spec.h2, raster.kappa, raster.mask)
    if system is CoordSystem.POLAR:
        return solve_polar(polar_problem(raster), config)
    return solve_axisym(axisym_problem(raster), config)


# ---------------------------------------------------------------- parsing

class _Parser:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path, msg):
        self.errors.append(f"{path}: {msg}")

    def obj(self, node, path, required=(), optional=()):
        if not isinstance(node, dict):
            self.fail(path, f"expected an object, got {type(node).__name__}")
            return None
        for key in required:
            if key not in node:
                self.fail(path, f"missing required key '{key}'")
        known = set(required) | set(optional)
        for key in node:
            if key not in known:
                self.fail(f"{path}.{key}", "unknown key")
        return node

    def number(self, node, path, positive=False, nonneg=False, default=None, allow_none=False):
        if node is None:
            if allow_none:
                return None
            if default is not None:
                return default
            self.fail(path, "missing number")
            return math.nan
        if isinstance(node, bool) or not isinstance(node, (int, float)) or not math.isfinite(node):
            self.fail(path, f"expected a finite number, got {node!r}")
            return math.nan
        if positive and not node > 0:
            self.fail(path, f"must be positive, got {node}")
        if nonneg and not node >= 0:
            self.fail(path, f"must not be negative, got {node}")
        return float(node)

    def integer(self, node, path, minimum=None, allow_none=False, default=None):
        if node is None:
            if allow_none:
                return None
            if default is not None:
                return default
            self.fail(path, "missing integer")
            return 0
        if isinstance(node, bool) or not isinstance(node, (int, float)) or int(node) != node:
            self.fail(path, f"expected an integer, got {node!r}")
            return 0
        if minimum is not None and node < minimum:
            self.fail(path, f"must be >= {minimum}, got {node}")
        return int(node)

    def pair(self, node, path):
        if not (isinstance(node, (list, tuple)) and len(node) == 2):
            self.fail(path, f"expected a pair of numbers, got {node!r}")
            return (math.nan, math.nan)
        return (self.number(node[0], f"{path}[0]"), self.number(node[1], f"{path}[1]"))

    def grid(self, node, path):
        node = self.obj(node, path, ("n1", "n2"), ("h1", "h2", "system", "r0"))
        if node is None:
            return None
        try:
            return GridSpec(
                self.integer(node.get("n1"), f"{path}.n1"),
                self.integer(node.get("n2"), f"{path}.n2"),
                self.number(node.get("h1", 1.0), f"{path}.h1"),
                self.number(node.get("h2", 1.0), f"{path}.h2"),
                node.get("system", "cartesian2d"),
                self.number(node.get("r0", 0.0), f"{path}.r0"),
            )
        except (GridError, ValueError) as exc:
            self.fail(path, str(exc))
            return None

    def shape(self, node, path):
        if not isinstance(node, dict) or "type" not in node:
            self.fail(path, "expected an object with a 'type'")
            return None
        kind = node["type"]
        if kind == "rect":
            node = self.obj(node, path, ("type",), ("i", "j"))
            bounds = []
            for ax in ("i", "j"):
                rng = node.get(ax, [None, None])
                if not (isinstance(rng, list) and len(rng) == 2):
                    self.fail(f"{path}.{ax}", f"expected [min, max] (null for unbounded), got {rng!r}")
                    rng = [None, None]
                lo = self.integer(rng[0], f"{path}.{ax}[0]", allow_none=True)
                hi = self.integer(rng[1], f"{path}.{ax}[1]", allow_none=True)
                if lo is not None and hi is not None and lo > hi:
                    self.fail(f"{path}.{ax}", f"min {lo} exceeds max {hi}")
                bounds += [lo, hi]
            return Rect(*bounds)
        if kind == "circle":
            node = self.obj(node, path, ("type", "center", "radius"))
            return Circle(self.pair(node.get("center"), f"{path}.center"),
                          self.number(node.get("radius"), f"{path}.radius", positive=True))
        if kind == "annulus":
            node = self.obj(node, path, ("type", "center", "r_in", "r_out"))
            r_in = self.number(node.get("r_in"), f"{path}.r_in", nonneg=True)
            r_out = self.number(node.get("r_out"), f"{path}.r_out", positive=True)
            if r_in >= r_out:
                self.fail(path, f"annulus needs r_in < r_out, got r_in={r_in}, r_out={r_out}")
            return Annulus(self.pair(node.get("center"), f"{path}.center"), r_in, r_out)
        if kind == "tilted_plate":
            node = self.obj(node, path, ("type", "point", "angle", "thickness"), ("length",))
            return TiltedPlate(self.pair(node.get("point"), f"{path}.point"),
                               self.number(node.get("angle"), f"{path}.angle"),
                               self.number(node.get("thickness"), f"{path}.thickness", positive=True),
                               self.number(node.get("length"), f"{path}.length", positive=True,
                                           allow_none=True))
        if kind == "eps_formula":
            node = self.obj(node, path, ("type", "a"))
            return EpsFormula(self.number(node.get("a"), f"{path}.a"))
        self.fail(f"{path}.type", f"unknown shape {kind!r}")
        return None

    def effect(self, node, path, shape):
        if node is None and isinstance(shape, EpsFormula):
            return SetEps(None)
        if not isinstance(node, dict) or "type" not in node:
            self.fail(path, "expected an object with a 'type'")
            return None
        kind = node["type"]
        if isinstance(shape, EpsFormula) and kind != "set_eps":
            self.fail(path, "an eps_formula region can only set permittivity")
            return None
        if kind == "set_eps":
            if isinstance(shape, EpsFormula):
                self.obj(node, path, ("type",))
                return SetEps(None)
            node = self.obj(node, path, ("type", "value"))
            return SetEps(self.number(node.get("value"), f"{path}.value", positive=True))
        if kind == "set_rho":
            node = self.obj(node, path, ("type", "value"))
            return SetRho(self.number(node.get("value"), f"{path}.value"))
        if kind == "pin":
            node = self.obj(node, path, ("type", "volts"))
            return Pin(self.number(node.get("volts"), f"{path}.volts"))
        self.fail(f"{path}.type", f"unknown effect {kind!r}")
        return None

    def edge(self, node, path):
        if node is None:
            return Neumann()
        if not isinstance(node, dict) or "type" not in node:
            self.fail(path, "expected an object with a 'type'")
            return Neumann()
        kind = node["type"]
        if kind == "neumann":
            self.obj(node, path, ("type",))
            return Neumann()
        if kind == "dirichlet":
            node = self.obj(node, path, ("type", "value"))
            return Dirichlet(self.number(node.get("value"), f"{path}.value"))
        if kind == "profile":
            node = self.obj(node, path, ("type", "values"))
            vals = node.get("values")
            if not isinstance(vals, list) or not vals:
                self.fail(f"{path}.values", "expected a non-empty list of volts")
                return Neumann()
            return DirichletProfile(tuple(self.number(v, f"{path}.values[{n}]") for n, v in enumerate(vals)))
        self.fail(f"{path}.type", f"unknown boundary condition {kind!r}")
        return Neumann()

    def solver(self, node, path):
        if node is None:
            return SolveConfig()
        node = self.obj(node, path, (), ("max_iterations", "tolerance", "sweep_schedule", "report_every",
                                         "iteration", "stencil", "r_guard", "init", "keep_snapshots"))
        if node is None:
            return SolveConfig()
        kwargs: dict[str, Any] = {}
        for key in ("max_iterations", "report_every"):
            if key in node:
                kwargs[key] = self.integer(node[key], f"{path}.{key}", minimum=1)
        for key in ("tolerance", "init"):
            if key in node:
                kwargs[key] = self.number(node[key], f"{path}.{key}")
        if "r_guard" in node:
            kwargs["r_guard"] = self.number(node["r_guard"], f"{path}.r_guard", nonneg=True, allow_none=True)
        for key in ("iteration", "stencil"):
            if key in node:
                kwargs[key] = node[key]
        if "keep_snapshots" in node:
            kwargs["keep_snapshots"] = bool(node["keep_snapshots"])
        if "sweep_schedule" in node:
            try:
                kwargs["sweep_schedule"] = tuple(Direction(d) for d in node["sweep_schedule"])
            except (ValueError, TypeError):
                self.fail(f"{path}.sweep_schedule",
                          f"directions must be among {[d.value for d in Direction]}")
        try:
            return SolveConfig(**kwargs)
        except (SolverError, ValueError, TypeError) as exc:
            self.fail(path, str(exc))
            return SolveConfig()

    def seeds(self, node, path):
        if node is None:
            return None
        if not isinstance(node, dict) or "type" not in node:
            self.fail(path, "expected an object with a 'type'")
            return None
        kind = node["type"]
        if kind == "line":
            node = self.obj(node, path, ("type", "start", "end"), ("count",))
            return SeedLine(self.pair(node.get("start"), f"{path}.start"), self.pair(node.get("end"), f"{path}.end"),
                            self.integer(node.get("count", 16), f"{path}.count", minimum=1))
        if kind == "arc":
            node = self.obj(node, path, ("type", "center", "radius", "angles"), ("count",))
            return SeedArc(self.pair(node.get("center"), f"{path}.center"),
                           self.number(node.get("radius"), f"{path}.radius", positive=True),
                           self.pair(node.get("angles"), f"{path}.angles"),
                           self.integer(node.get("count", 16), f"{path}.count", minimum=1))
        if kind == "points":
            node = self.obj(node, path, ("type", "points"))
            pts = node.get("points")
            if not isinstance(pts, list) or not pts:
                self.fail(f"{path}.points", "expected a non-empty list of [x, y]")
                return None
            return SeedPoints(tuple(self.pair(p, f"{path}.points[{n}]") for n, p in enumerate(pts)))
        self.fail(f"{path}.type", f"unknown seed layout {kind!r}")
        return None

    def trace(self, node, path):
        if node is None:
            return None
        node = self.obj(node, path, (), ("dt", "max_steps", "seeds", "stop_band", "stagnation_eps", "normalized"))
        if node is None:
            return None
        band = node.get("stop_band")
        return TraceSettings(
            self.number(node.get("dt", 0.1), f"{path}.dt", positive=True),
            self.integer(node.get("max_steps", 10_000), f"{path}.max_steps", minimum=1),
            self.seeds(node.get("seeds"), f"{path}.seeds"),
            None if band is None else self.pair(band, f"{path}.stop_band"),
            self.number(node.get("stagnation_eps", 1e-9), f"{path}.stagnation_eps", nonneg=True),
            bool(node.get("normalized", False)),
        )

    def scene(self, doc):
        doc = self.obj(doc, "$", ("grid",), ("name", "description", "index_base", "background", "regions",
                                            "boundaries", "charge_scale", "solver", "trace"))
        if doc is None:
            raise SceneError(self.errors)
        grid = self.grid(doc.get("grid"), "grid")
        bg = self.obj(doc.get("background", {}), "background", (), ("eps", "rho")) or {}
        background_eps = self.number(bg.get("eps", 1.0), "background.eps", positive=True)
        background_rho = self.number(bg.get("rho", 0.0), "background.rho")
        regions = []
        raw_regions = doc.get("regions", [])
        if not isinstance(raw_regions, list):
            self.fail("regions", "expected a list")
            raw_regions = []
        for n, item in enumerate(raw_regions):
            path = f"regions[{n}]"
            item = self.obj(item, path, ("shape",), ("effect",))
            if item is None:
                continue
            shape = self.shape(item.get("shape"), f"{path}.shape")
            effect = self.effect(item.get("effect"), f"{path}.effect", shape)
            if shape is not None and effect is not None:
                regions.append(Region(shape, effect))
        bnode = self.obj(doc.get("boundaries", {}), "boundaries", (), ("low1", "high1", "low2", "high2")) or {}
        boundaries = BoundarySpec(*(self.edge(bnode.get(e), f"boundaries.{e}") for e in ("low1", "high1", "low2", "high2")))
        scene_kwargs = dict(
            background_eps=background_eps,
            background_rho=background_rho,
            regions=tuple(regions),
            boundaries=boundaries,
            charge_scale=self.number(doc.get("charge_scale", 1.0), "charge_scale"),
            index_base=self.integer(doc.get("index_base", 0), "index_base"),
            solver=self.solver(doc.get("solver"), "solver"),
            trace=self.trace(doc.get("trace"), "trace"),
            name=str(doc.get("name", "")),
            description=str(doc.get("description", "")),
        )
        if grid is not None:
            self.validate(grid, scene_kwargs)
        if self.errors:
            raise SceneError(self.errors)
        return Scene(grid, **scene_kwargs)

    def validate(self, grid: GridSpec, kw):
        if grid.system.curvilinear:
            for n, region in enumerate(kw["regions"]):
                if isinstance(region.effect, SetEps):
                    self.fail(f"regions[{n}]", f"varying permittivity is not supported on {grid.system.value} "
                                               "grids; set background.eps instead")
        if grid.system is CoordSystem.CARTESIAN_1D:
            for edge in ("low2", "high2"):
                if not isinstance(getattr(kw["boundaries"], edge), Dirichlet):
                    self.fail(f"boundaries.{edge}", "1D scenes need Dirichlet plates on low2 and high2")
        for name, cond in kw["boundaries"].edges():
            if isinstance(cond, DirichletProfile):
                length = grid.n2 if name.endswith("1") else grid.n1
                if len(cond.values) != length:
                    self.fail(f"boundaries.{name}", f"profile has {len(cond.values)} values, edge has {length} nodes")


def parse_scene(text: str | bytes | dict) -> Scene:
    """Parse a JSON scene document (text or an already decoded dict)."""
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SceneError([f"line {exc.lineno} column {exc.colno}: {exc.msg}"]) from exc
    return _Parser().scene(doc)


def load_scene(path: str | os.PathLike) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError([f"{path}: {exc.strerror or exc}"]) from exc
    try:
        return parse_scene(text)
    except SceneError as exc:
        raise SceneError([f"{path}: {e}" for e in exc.errors]) from None


# ------------------------------------------------------------ serializing

def _shape_doc(shape):
    if isinstance(shape, Rect):
        return {"type": "rect", "i": [shape.i_min, shape.i_max], "j": [shape.j_min, shape.j_max]}
    if isinstance(shape, Circle):
        return {"type": "circle", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, Annulus):
        return {"type": "annulus", "center": list(shape.center), "r_in": shape.r_in, "r_out": shape.r_out}
    if isinstance(shape, TiltedPlate):
        doc = {"type": "tilted_plate", "point": list(shape.point), "angle": shape.angle,
               "thickness": shape.thickness}
        if shape.length is not None:
            doc["length"] = shape.length
        return doc
    return {"type": "eps_formula", "a": shape.a}


def _effect_doc(effect):
    if isinstance(effect, SetEps):
        return {"type": "set_eps"} if effect.value is None else {"type": "set_eps", "value": effect.value}
    if isinstance(effect, SetRho):
        return {"type": "set_rho", "value": effect.value}
    return {"type": "pin", "volts": effect.volts}


def _edge_doc(cond):
    if isinstance(cond, Dirichlet):
        return {"type": "dirichlet", "value": cond.value}
    if isinstance(cond, DirichletProfile):
        return {"type": "profile", "values": list(cond.values)}
    return {"type": "neumann"}


def _seeds_doc(seeds):
    if isinstance(seeds, SeedLine):
        return {"type": "line", "start": list(seeds.start), "end": list(seeds.end), "count": seeds.count}
    if isinstance(seeds, SeedArc):
        return {"type": "arc", "center": list(seeds.center), "radius": seeds.radius,
                "angles": list(seeds.angles), "count": seeds.count}
    return {"type": "points", "points": [list(p) for p in seeds.points_]}


def scene_to_dict(scene: Scene) -> dict:
    g = scene.grid
    default = SolveConfig()
    solver = {}
    for key in ("max_iterations", "tolerance", "report_every", "iteration", "stencil", "r_guard", "init",
                "keep_snapshots"):
        value = getattr(scene.solver, key)
        if value != getattr(default, key):
            solver[key] = value
    if scene.solver.sweep_schedule != default.sweep_schedule:
        solver["sweep_schedule"] = [d.value for d in scene.solver.sweep_schedule]
    doc = {
        "name": scene.name,
        "description": scene.description,
        "grid": {"n1": g.n1, "n2": g.n2, "h1": g.h1, "h2": g.h2, "system": g.system.value, "r0": g.r0},
        "index_base": scene.index_base,
        "background": {"eps": scene.background_eps, "rho": scene.background_rho},
        "charge_scale": scene.charge_scale,
        "regions": [{"shape": _shape_doc(r.shape), "effect": _effect_doc(r.effect)} for r in scene.regions],
        "boundaries": {name: _edge_doc(c) for name, c in scene.boundaries.edges()},
        "solver": solver,
    }
    if scene.trace is not None:
        t = scene.trace
        trace = {"dt": t.dt, "max_steps": t.max_steps, "stagnation_eps": t.stagnation_eps,
                 "normalized": t.normalized}
        if t.seeds is not None:
            trace["seeds"] = _seeds_doc(t.seeds)
        if t.stop_band is not None:
            trace["stop_band"] = list(t.stop_band)
        doc["trace"] = trace
    return doc


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


# ----------------------------------------------------------------- presets

def _preset_text(name: str) -> str:
    override = os.environ.get(PRESET_DIR_ENV)
    if override:
        candidate = Path(override) / f"{name}.json"
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    return resources.files("fieldlab").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")


def preset_names() -> list[str]:
    names = list(PRESET_NAMES)
    override = os.environ.get(PRESET_DIR_ENV)
    if override and Path(override).is_dir():
        names += sorted(p.stem for p in Path(override).glob("*.json") if p.stem not in PRESET_NAMES)
    return names


def preset(name: str) -> Scene:
    if name not in preset_names():
        raise SceneError([f"unknown preset {name!r}; valid names: {', '.join(preset_names())}"])
    try:
        return parse_scene(_preset_text(name))
    except SceneError as exc:
        raise SceneError([f"preset {name}: {e}" for e in exc.errors]) from None
