"""Electric field, field lines and equipotentials from a solved potential.

All positions are in the drawing plane of the grid: grid coordinates for
Cartesian and axisymmetric fields, ``(r cos a, r sin a)`` for polar fields.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .grid import CoordSystem, FixedMask, GridError, ScalarField


class Termination(str, enum.Enum):
    LEFT_DOMAIN = "left_domain"
    REACHED_ELECTRODE = "reached_electrode"
    MAX_STEPS = "max_steps"
    STAGNATED = "stagnated"


_TERMINATION_CODES = {
    kernels.TRACE_LEFT_DOMAIN: Termination.LEFT_DOMAIN,
    kernels.TRACE_REACHED_ELECTRODE: Termination.REACHED_ELECTRODE,
    kernels.TRACE_MAX_STEPS: Termination.MAX_STEPS,
    kernels.TRACE_STAGNATED: Termination.STAGNATED,
}


@dataclass(frozen=True)
class FieldVector:
    e1: float
    e2: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.e1, self.e2)


@dataclass
class Polyline:
    """Ordered points of a field line or an equipotential contour.

    Field lines carry their ``termination``; contours carry their ``level``.
    """

    points: np.ndarray
    termination: Termination | None = None
    level: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.points) == 0:
            raise ValueError("a polyline needs at least one point")

    def __len__(self):
        return len(self.points)

    @property
    def closed(self) -> bool:
        return len(self.points) > 2 and bool(np.all(self.points[0] == self.points[-1]))

    def length(self) -> float:
        return float(np.hypot(*np.diff(self.points, axis=0).T).sum())


@dataclass(frozen=True)
class TraceConfig:
    """Marker integration settings.

    By default a step is ``E * dt`` (so ``dt`` has units length**2/volt);
    with ``normalized=True`` every step has length ``dt`` instead.
    """

    dt: float = 0.1
    max_steps: int = 10_000
    stop_potential_band: tuple[float, float] | None = None
    stagnation_eps: float = 1e-9
    normalized: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError(f"max_steps must be a positive integer, got {self.max_steps!r}")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        if self.stop_potential_band is not None:
            lo, hi = (float(v) for v in self.stop_potential_band)
            if lo > hi:
                lo, hi = hi, lo
            object.__setattr__(self, "stop_potential_band", (lo, hi))
        if not self.stagnation_eps >= 0:
            raise ValueError("stagnation_eps must be >= 0")


def _require_2d(phi: ScalarField):
    if phi.spec.system is CoordSystem.CARTESIAN_1D:
        raise GridError("field analysis needs a 2D grid")
    if phi.centering != "node":
        raise GridError("field analysis needs a node-centred potential")


def _locate(phi: ScalarField, x: float, y: float):
    spec = phi.spec
    inside, f1, f2, r = kernels._locate(spec.n1, spec.n2, spec.origin1, spec.h1, spec.h2,
                                        spec.system is CoordSystem.POLAR, float(x), float(y))
    if not inside:
        raise GridError(f"point ({x}, {y}) lies outside the grid")
    return kernels._cell_index(f1, spec.n1), kernels._cell_index(f2, spec.n2), f1, f2, r


def field_at(phi: ScalarField, x: float, y: float) -> FieldVector:
    """E at a plane point, from the two-edge averaged differences of its cell.

    The value is constant over each cell.  For polar grids the radial and
    angular components are rotated into the ``(x, y)`` plane.
    """
    _require_2d(phi)
    i, k, _, _, r = _locate(phi, x, y)
    spec = phi.spec
    e1, e2 = kernels._cell_field(phi.values, i, k, spec.h1, spec.h2,
                                 spec.system is CoordSystem.POLAR, r, float(x), float(y))
    return FieldVector(float(e1), float(e2))


def potential_at(phi: ScalarField, x: float, y: float) -> float:
    """Bilinear interpolation of the potential at a plane point."""
    _require_2d(phi)
    i, k, f1, f2, _ = _locate(phi, x, y)
    return float(kernels._bilinear(phi.values, i, k, f1, f2))


def _cell_pins(phi: ScalarField, mask: FixedMask | None) -> np.ndarray:
    n1, n2 = phi.shape
    cells = np.zeros((n1 - 1, n2 - 1), dtype=np.uint8)
    if mask is None:
        return cells
    if mask.shape != phi.shape:
        raise GridError(f"mask dimensions {mask.shape} do not match field {phi.shape}")
    p = mask.pinned
    cells[...] = p[:-1, :-1] | p[1:, :-1] | p[:-1, 1:] | p[1:, 1:]
    return cells


def trace_field_line(phi: ScalarField, seed: Sequence[float], cfg: TraceConfig = TraceConfig(),
                     electrode_mask: FixedMask | None = None) -> Polyline:
    """March a marker from ``seed`` along E with explicit Euler steps.

    The marker stops when it leaves the grid, steps into a cell touching a
    pinned node of ``electrode_mask`` (a seed inside such a cell must first
    leave it), enters ``cfg.stop_potential_band``, takes a step shorter than
    ``cfg.stagnation_eps`` or runs out of steps.
    """
    _require_2d(phi)
    x0, y0 = (float(s) for s in seed)
    _locate(phi, x0, y0)
    return _trace(phi, _cell_pins(phi, electrode_mask), x0, y0, cfg)


def _trace(phi, cellpin, x0, y0, cfg):
    spec = phi.spec
    band = cfg.stop_potential_band
    pts, count, code = kernels.trace_line(
        phi.values, cellpin, spec.origin1, spec.h1, spec.h2, spec.system is CoordSystem.POLAR,
        x0, y0, cfg.dt, cfg.normalized, cfg.max_steps, cfg.stagnation_eps,
        band is not None, band[0] if band else 0.0, band[1] if band else 0.0)
    return Polyline(pts[:count].copy(), _TERMINATION_CODES[int(code)])


def trace_field_lines(phi: ScalarField, seeds: Iterable[Sequence[float]], cfg: TraceConfig = TraceConfig(),
                      electrode_mask: FixedMask | None = None) -> list[Polyline]:
    _require_2d(phi)
    cellpin = _cell_pins(phi, electrode_mask)
    lines = []
    for seed in seeds:
        x0, y0 = (float(s) for s in seed)
        _locate(phi, x0, y0)
        lines.append(_trace(phi, cellpin, x0, y0, cfg))
    return lines


def field_magnitude_grid(phi: ScalarField) -> ScalarField:
    """Cell-centred ``|E|`` using the same averaged differences as :func:`field_at`."""
    _require_2d(phi)
    spec = phi.spec
    v = phi.values
    d1 = ((v[1:, :-1] - v[:-1, :-1]) + (v[1:, 1:] - v[:-1, 1:])) / (2.0 * spec.h1)
    d2 = ((v[:-1, 1:] - v[:-1, :-1]) + (v[1:, 1:] - v[1:, :-1])) / (2.0 * spec.h2)
    if spec.system is CoordSystem.POLAR:
        r = spec.coords1()
        d2 = d2 / (0.5 * (r[:-1] + r[1:]))[:, None]
    return ScalarField(spec, np.hypot(d1, d2), centering="cell")


# ------------------------------------------------------------ contouring

def _edge_point(v, a, b, level):
    va, vb = v[a], v[b]
    t = 0.5 if vb == va else (level - va) / (vb - va)
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def contour_segments(values: np.ndarray, level: float):
    """Marching-squares segments for one level, in index coordinates.

    Returns a list of ``(key_a, key_b)`` edge identifiers and a dict mapping
    each key to its interpolated point.  Edge keys are ``(0, i, j)`` for the
    edge from node ``(i, j)`` to ``(i+1, j)`` and ``(1, i, j)`` for the edge
    from ``(i, j)`` to ``(i, j+1)``.
    """
    v = values
    above = v > level
    a00, a10, a01, a11 = above[:-1, :-1], above[1:, :-1], above[:-1, 1:], above[1:, 1:]
    mixed = ~((a00 == a10) & (a00 == a01) & (a00 == a11))
    segments = []
    points = {}

    def key_point(key):
        if key not in points:
            kind, i, j = key
            b = (i + 1, j) if kind == 0 else (i, j + 1)
            points[key] = _edge_point(v, (i, j), b, level)
        return key

    for i, j in zip(*np.nonzero(mixed)):
        i, j = int(i), int(j)
        s00, s10, s01, s11 = above[i, j], above[i + 1, j], above[i, j + 1], above[i + 1, j + 1]
        bottom, right, top, left = (0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)
        crossed = [e for e, hit in ((bottom, s00 != s10), (right, s10 != s11),
                                    (top, s01 != s11), (left, s00 != s01)) if hit]
        if len(crossed) == 2:
            segments.append((key_point(crossed[0]), key_point(crossed[1])))
            continue
        # saddle: resolve with the cell-centre average
        centre_above = (v[i, j] + v[i + 1, j] + v[i, j + 1] + v[i + 1, j + 1]) / 4.0 > level
        if centre_above == s00:
            pairs = ((bottom, right), (left, top))
        else:
            pairs = ((bottom, left), (right, top))
        for ka, kb in pairs:
            segments.append((key_point(ka), key_point(kb)))
    return segments, points


def _join(segments):
    incident: dict = {}
    for n, (ka, kb) in enumerate(segments):
        incident.setdefault(ka, []).append(n)
        incident.setdefault(kb, []).append(n)
    used = [False] * len(segments)

    def walk(start):
        chain = [start]
        key = start
        while True:
            nxt = next((n for n in incident[key] if not used[n]), None)
            if nxt is None:
                return chain
            used[nxt] = True
            ka, kb = segments[nxt]
            key = kb if ka == key else ka
            chain.append(key)

    chains = []
    for key, segs in incident.items():
        if len(segs) == 1 and not used[segs[0]]:
            chains.append(walk(key))
    for n, (ka, _) in enumerate(segments):
        if not used[n]:
            chains.append(walk(ka))
    return chains


def extract_equipotentials(phi: ScalarField, levels: Iterable[float]) -> list[Polyline]:
    """Iso-lines of ``phi`` by marching squares with linear edge interpolation.

    Segments sharing an edge crossing are joined into polylines; closed loops
    repeat their first point at the end.  Coordinates are in the drawing plane.
    """
    _require_2d(phi)
    spec = phi.spec
    out = []
    for level in levels:
        level = float(level)
        if not math.isfinite(level):
            raise ValueError(f"contour level must be finite, got {level!r}")
        segments, points = contour_segments(phi.values, level)
        for chain in _join(segments):
            idx = np.array([points[k] for k in chain])
            u1 = spec.origin1 + idx[:, 0] * spec.h1
            u2 = idx[:, 1] * spec.h2
            x, y = spec.to_plane(u1, u2)
            out.append(Polyline(np.column_stack([x, y]), level=level))
    return out


def default_levels(phi: ScalarField, count: int = 12) -> list[float]:
    """``count`` evenly spaced levels strictly inside the potential range."""
    lo, hi = float(phi.values.min()), float(phi.values.max())
    if hi == lo:
        return []
    step = (hi - lo) / (count + 1)
    return [lo + step * (n + 1) for n in range(count)]
