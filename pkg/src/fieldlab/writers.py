"""File output: CSV and PGM rasters of node fields, SVG drawings of lines.

All writers are deterministic: the same inputs give byte-identical files.
"""
from __future__ import annotations

import colorsys
import math
import os
import re
from typing import Iterable, Sequence

import numpy as np

from .analysis import Polyline, contour_segments, _join
from .grid import CoordSystem, GridError, GridSpec, ScalarField


class OutputError(OSError):
    """A file could not be written or read; the message names the path."""


CSV_HEADER = "n1,n2,h1,h2,system"


def _open(path, mode):
    try:
        return open(path, mode, **({} if "b" in mode else {"encoding": "utf-8", "newline": "\n"}))
    except OSError as exc:
        raise OutputError(f"cannot open {os.fspath(path)!s}: {exc.strerror or exc}") from exc


# ------------------------------------------------------------------- CSV

def write_field_csv(field: ScalarField, path, digits: int = 9) -> None:
    """Write ``field`` as CSV.

    The first line is the header ``n1,n2,h1,h2,system``, the second the grid
    description, then one row per axis-1 line with values in ``%.{digits}g``.
    Grid spacings are written exactly so the grid survives a round trip.
    """
    if not 1 <= digits <= 17:
        raise ValueError(f"digits must be in 1..17, got {digits}")
    spec = field.spec
    fmt = f"%.{int(digits)}g"
    lines = [CSV_HEADER,
             f"{spec.n1},{spec.n2},{spec.h1!r},{spec.h2!r},{spec.system.value}"]
    for row in field.values:
        lines.append(",".join(fmt % v for v in row))
    try:
        with _open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(f"cannot write {os.fspath(path)!s}: {exc}") from exc


def read_field_csv(path, r0: float = 0.0) -> ScalarField:
    """Read a file produced by :func:`write_field_csv`.

    The origin of axis 1 is not stored; pass ``r0`` for polar and shifted
    axisymmetric grids.  A file with one row and one column fewer than the
    grid is read back as a cell-centred field.
    """
    try:
        with _open(path, "r") as fh:
            text = fh.read()
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(f"cannot read {os.fspath(path)!s}: {exc}") from exc
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if len(rows) < 3 or rows[0].strip() != CSV_HEADER:
        raise GridError(f"{os.fspath(path)!s}: not a field CSV (expected header {CSV_HEADER!r})")
    meta = rows[1].split(",")
    if len(meta) != 5:
        raise GridError(f"{os.fspath(path)!s}: malformed grid line {rows[1]!r}")
    try:
        n1, n2 = int(meta[0]), int(meta[1])
        h1, h2 = float(meta[2]), float(meta[3])
        system = CoordSystem(meta[4].strip())
        values = np.array([[float(x) for x in ln.split(",")] for ln in rows[2:]])
    except ValueError as exc:
        raise GridError(f"{os.fspath(path)!s}: {exc}") from exc
    spec = GridSpec(n1, n2, h1, h2, system, r0)
    if values.shape == spec.shape:
        return ScalarField(spec, values)
    if values.shape == (n1 - 1, n2 - 1):
        return ScalarField(spec, values, centering="cell")
    raise GridError(f"{os.fspath(path)!s}: data is {values.shape}, grid is {spec.shape}")


# ------------------------------------------------------------------- PGM

def pgm_bytes(values: np.ndarray, value_range: Sequence[float] | None = None) -> bytes:
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ValueError("PGM output needs a 2D array")
    if value_range is None:
        finite = v[np.isfinite(v)]
        lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    else:
        lo, hi = (float(x) for x in value_range)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"value range must be finite, got {(lo, hi)}")
    if hi == lo:
        grey = np.zeros(v.shape)
    else:
        grey = (np.nan_to_num(v, nan=lo) - lo) * (255.0 / (hi - lo))
    pixels = np.clip(np.rint(grey), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def write_field_pgm(field: ScalarField | np.ndarray, path,
                    value_range: Sequence[float] | None = None) -> None:
    """Binary greyscale image of ``field``; image row ``r`` is grid line ``i == r``.

    Values map affinely from ``value_range`` (default: the field range) to
    0..255 and are clamped outside it.  A bare 2D array is accepted too.
    """
    values = field.values if isinstance(field, ScalarField) else field
    data = pgm_bytes(values, value_range)
    try:
        with _open(path, "wb") as fh:
            fh.write(data)
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(f"cannot write {os.fspath(path)!s}: {exc}") from exc


def read_pgm(path) -> np.ndarray:
    try:
        with _open(path, "rb") as fh:
            data = fh.read()
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(f"cannot read {os.fspath(path)!s}: {exc}") from exc
    # exactly one whitespace byte ends the header; pixel bytes may look like whitespace
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError(f"{os.fspath(path)!s}: not a binary PGM")
    width, height = int(m.group(1)), int(m.group(2))
    pixels = np.frombuffer(data[m.end(): m.end() + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError(f"{os.fspath(path)!s}: truncated PGM data")
    return pixels.reshape(height, width)


# ------------------------------------------------------------------- SVG

def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path_d(points: np.ndarray) -> str:
    out = []
    last = None
    for x, y in points:
        p = (_fmt(x), _fmt(y))
        if p != last:
            out.append(f"{p[0]},{p[1]}")
            last = p
    if len(out) == 1:
        out.append(out[0])
    return "M" + " L".join(out)


def _level_colour(level: float, lo: float, hi: float) -> str:
    t = 0.5 if hi == lo else (level - lo) / (hi - lo)
    # blue for low potentials through green to red for high ones
    r, g, b = colorsys.hsv_to_rgb((1.0 - min(max(t, 0.0), 1.0)) * 2.0 / 3.0, 0.85, 1.0)
    return "#%02x%02x%02x" % (round(r * 255), round(g * 255), round(b * 255))


def _grid_outline(spec: GridSpec) -> np.ndarray:
    lo1, hi1, lo2, hi2 = spec.extent
    k = 64 if spec.system is CoordSystem.POLAR else 1
    u1 = np.concatenate([np.linspace(lo1, hi1, k + 1), np.full(k, hi1),
                         np.linspace(hi1, lo1, k + 1), np.full(k, lo1)])
    u2 = np.concatenate([np.full(k + 1, lo2), np.linspace(lo2, hi2, k + 1)[1:],
                         np.full(k + 1, hi2), np.linspace(hi2, lo2, k + 1)[1:]])
    x, y = spec.to_plane(u1, u2)
    return np.column_stack([x, y])


def _view_box(spec: GridSpec):
    pts = _grid_outline(spec)
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    pad = 0.02 * max(x1 - x0, y1 - y0, 1e-12)
    return x0 - pad, y0 - pad, x1 + pad, y1 + pad


def _shape_outlines(scene, spec: GridSpec):
    """SVG elements outlining the geometric regions of ``scene``."""
    from .scene import Annulus, Circle, Pin, Rect, TiltedPlate

    base = scene.index_base
    lo_i, hi_i = base, base + spec.n1 - 1
    lo_j, hi_j = base, base + spec.n2 - 1
    round_ok = spec.system is not CoordSystem.POLAR and spec.h1 == spec.h2
    elements = []

    def polygon(ii, jj, cls):
        x, y = scene.index_to_plane(np.asarray(ii), np.asarray(jj))
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))
        elements.append(f'<polygon class="{cls}" points="{pts}"/>')

    def circle(center, radius, cls):
        if round_ok:
            x, y = scene.index_to_plane(center[0], center[1])
            elements.append(f'<circle class="{cls}" cx="{_fmt(float(x))}" cy="{_fmt(float(y))}" '
                            f'r="{_fmt(radius * spec.h1)}"/>')
        else:
            t = np.linspace(0, 2 * math.pi, 97)[:-1]
            polygon(center[0] + radius * np.cos(t), center[1] + radius * np.sin(t), cls)

    def edge_samples(a, b, n):
        return np.linspace(a, b, n + 1)[:-1]

    for region in scene.regions:
        shape = region.shape
        cls = "conductor" if isinstance(region.effect, Pin) else "region"
        if isinstance(shape, Circle):
            circle(shape.center, shape.radius, cls)
        elif isinstance(shape, Annulus):
            circle(shape.center, shape.r_out, cls)
            circle(shape.center, shape.r_in, cls)
        elif isinstance(shape, TiltedPlate):
            corners = shape.corners()
            polygon([c[0] for c in corners], [c[1] for c in corners], cls)
        elif isinstance(shape, Rect):
            i0 = lo_i if shape.i_min is None else max(shape.i_min, lo_i)
            i1 = hi_i if shape.i_max is None else min(shape.i_max, hi_i)
            j0 = lo_j if shape.j_min is None else max(shape.j_min, lo_j)
            j1 = hi_j if shape.j_max is None else min(shape.j_max, hi_j)
            if i0 > i1 or j0 > j1:
                continue
            n = 16 if spec.system is CoordSystem.POLAR else 1
            ii = np.concatenate([edge_samples(i0, i1, n), np.full(n, i1),
                                 edge_samples(i1, i0, n), np.full(n, i0)])
            jj = np.concatenate([np.full(n, j0), edge_samples(j0, j1, n),
                                 np.full(n, j1), edge_samples(j1, j0, n)])
            polygon(ii, jj, cls)
    return elements


def _pinned_outline(mask, spec: GridSpec):
    pinned = mask.pinned
    if not pinned.any():
        return []
    # pad so that regions touching the grid edge are closed
    ind = np.zeros((spec.n1 + 2, spec.n2 + 2))
    ind[1:-1, 1:-1] = pinned
    segments, points = contour_segments(ind, 0.5)
    out = []
    for chain in _join(segments):
        idx = np.array([points[k] for k in chain]) - 1.0
        idx[:, 0] = np.clip(idx[:, 0], 0, spec.n1 - 1)
        idx[:, 1] = np.clip(idx[:, 1], 0, spec.n2 - 1)
        x, y = spec.to_plane(spec.origin1 + idx[:, 0] * spec.h1, idx[:, 1] * spec.h2)
        out.append(f'<path class="pinned" d="{_path_d(np.column_stack([x, y]))}"/>')
    return out


def render_svg(lines: Iterable[Polyline], contours: Iterable[Polyline], scene=None,
               spec: GridSpec | None = None, mask=None, title: str | None = None) -> str:
    """SVG 1.1 document text; see :func:`write_lines_svg`."""
    if scene is not None:
        spec = scene.grid if spec is None else spec
        if mask is None:
            from .scene import rasterize
            mask = rasterize(scene).mask
        if title is None:
            title = scene.name or None
    if spec is None:
        raise ValueError("render_svg needs a scene or a grid spec")
    lines = list(lines)
    contours = list(contours)
    x0, y0, x1, y1 = _view_box(spec)
    w, h = x1 - x0, y1 - y0
    stroke = _fmt(max(w, h) / 400)
    scale = 800 / max(w, h)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_fmt(w * scale)}" height="{_fmt(h * scale)}" '
           f'viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(w)} {_fmt(h)}">']
    if title:
        out.append(f"<title>{_xml_escape(title)}</title>")
    out.append("<style>"
               f".field-line{{fill:none;stroke:#ffffff;stroke-width:{stroke}}}"
               f".equipotential{{fill:none;stroke-width:{stroke}}}"
               f".region{{fill:none;stroke:#b0b0b0;stroke-width:{stroke};stroke-dasharray:{_fmt(4 * float(stroke))}}}"
               f".conductor{{fill:none;stroke:#ffd24a;stroke-width:{stroke}}}"
               f".pinned{{fill:none;stroke:#ffd24a;stroke-width:{_fmt(2 * float(stroke))}}}"
               f".domain{{fill:#101018;stroke:#606060;stroke-width:{stroke}}}"
               "</style>")
    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(-y1)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="#000000"/>')
    # plane y grows upward; SVG y grows downward
    out.append('<g transform="scale(1,-1)">')
    out.append(f'<path class="domain" d="{_path_d(_grid_outline(spec))} Z"/>')
    if contours:
        levels = [c.level for c in contours if c.level is not None]
        lo, hi = (min(levels), max(levels)) if levels else (0.0, 0.0)
        out.append('<g id="equipotentials">')
        for c in contours:
            colour = _level_colour(c.level if c.level is not None else lo, lo, hi)
            lvl = "" if c.level is None else f' data-level="{c.level:.6g}"'
            out.append(f'<path class="equipotential" stroke="{colour}"{lvl} d="{_path_d(c.points)}"/>')
        out.append("</g>")
    out.append('<g id="geometry">')
    if scene is not None:
        out.extend(_shape_outlines(scene, spec))
    if mask is not None:
        out.extend(_pinned_outline(mask, spec))
    out.append("</g>")
    out.append('<g id="field-lines">')
    for line in lines:
        term = "" if line.termination is None else f' data-termination="{line.termination.value}"'
        out.append(f'<path class="field-line"{term} d="{_path_d(line.points)}"/>')
    out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_lines_svg(lines: Iterable[Polyline], contours: Iterable[Polyline], scene, path,
                    spec: GridSpec | None = None, mask=None) -> None:
    """Draw field lines and equipotentials over the scene geometry.

    Field lines are white paths of class ``field-line``; contours are
    coloured from blue (low) to red (high).  Region shapes and the outline of
    pinned nodes are drawn in between.  Coordinates are the physical drawing
    plane, with y pointing up.  ``scene`` may be ``None`` when ``spec`` is
    given.
    """
    text = render_svg(lines, contours, scene, spec, mask)
    try:
        with _open(path, "w") as fh:
            fh.write(text)
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(f"cannot write {os.fspath(path)!s}: {exc}") from exc
