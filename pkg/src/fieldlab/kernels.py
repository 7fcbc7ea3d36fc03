"""Relaxation kernels.

Every stencil in the package is a weighted five-point update

    phi[i,j] <- we*phi[i+1,j] + ww*phi[i-1,j] + wn*phi[i,j+1] + ws*phi[i,j-1] + src

with per-node weight arrays built by the solver modules.  Each kernel has a
numba path and a numpy path; ``_accel.USE_NUMBA`` decides which one the
public names point to.  Both return the largest absolute node change of the
pass, or ``inf`` if any updated value is non-finite.

Sweep orders (``order`` argument):

    0  axis 1 outer, both ascending
    1  axis 1 outer, both descending
    2  axis 2 outer, both ascending
    3  axis 2 outer, both descending
"""
import math

import numpy as np

from . import _accel


@_accel.njit
def _gs_sweep_loop(phi, we, ww, wn, ws, src, free, order):
    n1, n2 = phi.shape
    m = 0.0
    bad = False
    if order < 2:
        for a in range(1, n1 - 1):
            i = a if order == 0 else n1 - 1 - a
            for b in range(1, n2 - 1):
                j = b if order == 0 else n2 - 1 - b
                if free[i, j]:
                    new = (we[i, j] * phi[i + 1, j] + ww[i, j] * phi[i - 1, j]
                           + wn[i, j] * phi[i, j + 1] + ws[i, j] * phi[i, j - 1] + src[i, j])
                    if not math.isfinite(new):
                        bad = True
                    d = abs(new - phi[i, j])
                    if d > m:
                        m = d
                    phi[i, j] = new
    else:
        for b in range(1, n2 - 1):
            j = b if order == 2 else n2 - 1 - b
            for a in range(1, n1 - 1):
                i = a if order == 2 else n1 - 1 - a
                if free[i, j]:
                    new = (we[i, j] * phi[i + 1, j] + ww[i, j] * phi[i - 1, j]
                           + wn[i, j] * phi[i, j + 1] + ws[i, j] * phi[i, j - 1] + src[i, j])
                    if not math.isfinite(new):
                        bad = True
                    d = abs(new - phi[i, j])
                    if d > m:
                        m = d
                    phi[i, j] = new
    if bad:
        return math.inf
    return m


def _gs_sweep_wavefront(phi, we, ww, wn, ws, src, free, order):
    # For a five-point stencil, lexicographic Gauss-Seidel only depends on
    # the sign of the traversal, not on which axis is outer: node (i, j)
    # sees updated values from the diagonal i+j-1 (ascending) or i+j+1
    # (descending).  Processing anti-diagonals as vectors is therefore
    # exactly equivalent to the sequential loop.
    inner = np.zeros_like(free, dtype=bool)
    inner[1:-1, 1:-1] = free[1:-1, 1:-1]
    ii, jj = np.nonzero(inner)
    if ii.size == 0:
        return 0.0
    diag = ii + jj
    descending = order in (1, 3)
    idx = np.argsort(-diag if descending else diag, kind="stable")
    ii, jj, diag = ii[idx], jj[idx], diag[idx]
    cuts = np.flatnonzero(np.diff(diag)) + 1
    m = 0.0
    for I, J in zip(np.split(ii, cuts), np.split(jj, cuts)):
        new = (we[I, J] * phi[I + 1, J] + ww[I, J] * phi[I - 1, J]
               + wn[I, J] * phi[I, J + 1] + ws[I, J] * phi[I, J - 1] + src[I, J])
        if not np.isfinite(new).all():
            phi[I, J] = new
            return math.inf
        m = max(m, float(np.max(np.abs(new - phi[I, J]))))
        phi[I, J] = new
    return m


@_accel.njit
def _jacobi_sweep_loop(phi, out, we, ww, wn, ws, src, free):
    n1, n2 = phi.shape
    m = 0.0
    bad = False
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            if free[i, j]:
                new = (we[i, j] * phi[i + 1, j] + ww[i, j] * phi[i - 1, j]
                       + wn[i, j] * phi[i, j + 1] + ws[i, j] * phi[i, j - 1] + src[i, j])
                if not math.isfinite(new):
                    bad = True
                d = abs(new - phi[i, j])
                if d > m:
                    m = d
                out[i, j] = new
    if bad:
        return math.inf
    return m


def _jacobi_sweep_numpy(phi, out, we, ww, wn, ws, src, free):
    c = (slice(1, -1), slice(1, -1))
    new = (we[c] * phi[2:, 1:-1] + ww[c] * phi[:-2, 1:-1]
           + wn[c] * phi[1:-1, 2:] + ws[c] * phi[1:-1, :-2] + src[c])
    sel = free[c].astype(bool)
    if not np.isfinite(new[sel]).all():
        return math.inf
    target = out[c]
    target[sel] = new[sel]
    if not sel.any():
        return 0.0
    return float(np.max(np.abs(new[sel] - phi[c][sel])))


@_accel.njit
def _gs_line_loop(phi, we, ww, src, free, reverse):
    n = phi.shape[0]
    m = 0.0
    bad = False
    for a in range(1, n - 1):
        j = n - 1 - a if reverse else a
        if free[j]:
            new = we[j] * phi[j + 1] + ww[j] * phi[j - 1] + src[j]
            if not math.isfinite(new):
                bad = True
            d = abs(new - phi[j])
            if d > m:
                m = d
            phi[j] = new
    if bad:
        return math.inf
    return m


@_accel.njit
def _jacobi_line_loop(phi, out, we, ww, src, free):
    n = phi.shape[0]
    m = 0.0
    bad = False
    for j in range(1, n - 1):
        if free[j]:
            new = we[j] * phi[j + 1] + ww[j] * phi[j - 1] + src[j]
            if not math.isfinite(new):
                bad = True
            d = abs(new - phi[j])
            if d > m:
                m = d
            out[j] = new
    if bad:
        return math.inf
    return m


def _jacobi_line_numpy(phi, out, we, ww, src, free):
    new = we[1:-1] * phi[2:] + ww[1:-1] * phi[:-2] + src[1:-1]
    sel = free[1:-1].astype(bool)
    if not np.isfinite(new[sel]).all():
        return math.inf
    out[1:-1][sel] = new[sel]
    if not sel.any():
        return 0.0
    return float(np.max(np.abs(new[sel] - phi[1:-1][sel])))


if _accel.USE_NUMBA:
    gs_sweep = _gs_sweep_loop
    jacobi_sweep = _jacobi_sweep_loop
    jacobi_line = _jacobi_line_loop
else:
    gs_sweep = _gs_sweep_wavefront
    jacobi_sweep = _jacobi_sweep_numpy
    jacobi_line = _jacobi_line_numpy
# a 1D Gauss-Seidel pass is a first-order recurrence with no vector form
gs_line = _gs_line_loop


# ---------------------------------------------------------------- tracing

TRACE_LEFT_DOMAIN = 0
TRACE_REACHED_ELECTRODE = 1
TRACE_MAX_STEPS = 2
TRACE_STAGNATED = 3


@_accel.njit
def _locate(n1, n2, o1, h1, h2, polar, x, y):
    # plane point -> (inside, fractional index along axis 1, along axis 2, r)
    if polar:
        u1 = math.hypot(x, y)
        u2 = math.atan2(y, x)
    else:
        u1 = x
        u2 = y
    f1 = (u1 - o1) / h1
    f2 = u2 / h2
    slack = 1e-9
    inside = (-slack <= f1 <= n1 - 1 + slack) and (-slack <= f2 <= n2 - 1 + slack)
    return inside, f1, f2, u1


@_accel.njit
def _cell_index(f, n):
    c = int(math.floor(f))
    if c < 0:
        c = 0
    if c > n - 2:
        c = n - 2
    return c


@_accel.njit
def _cell_field(values, i, k, h1, h2, polar, r, x, y):
    # averaged edge differences across the cell, rotated into the plane
    d1 = ((values[i + 1, k] - values[i, k]) + (values[i + 1, k + 1] - values[i, k + 1])) / (2.0 * h1)
    d2 = ((values[i, k + 1] - values[i, k]) + (values[i + 1, k + 1] - values[i + 1, k])) / (2.0 * h2)
    if polar:
        er = -d1
        ea = -d2 / r
        c = x / r
        s = y / r
        return er * c - ea * s, er * s + ea * c
    return -d1, -d2


@_accel.njit
def _bilinear(values, i, k, f1, f2):
    t1 = f1 - i
    t2 = f2 - k
    return ((1 - t1) * (1 - t2) * values[i, k] + t1 * (1 - t2) * values[i + 1, k]
            + (1 - t1) * t2 * values[i, k + 1] + t1 * t2 * values[i + 1, k + 1])


@_accel.njit
def trace_line(values, cellpin, o1, h1, h2, polar, x0, y0, dt, normalized, max_steps,
               stag_eps, use_band, band_lo, band_hi):
    """Explicit Euler march along E from ``(x0, y0)``.

    Returns ``(points, count, code)``; ``points[:count]`` is the polyline.
    """
    n1, n2 = values.shape
    pts = np.empty((max_steps + 2, 2))
    pts[0, 0] = x0
    pts[0, 1] = y0
    count = 1
    x = x0
    y = y0
    inside, f1, f2, r = _locate(n1, n2, o1, h1, h2, polar, x, y)
    i = _cell_index(f1, n1)
    k = _cell_index(f2, n2)
    armed = cellpin[i, k] == 0
    for _ in range(max_steps):
        e1, e2 = _cell_field(values, i, k, h1, h2, polar, r, x, y)
        if normalized:
            mag = math.hypot(e1, e2)
            if mag == 0.0:
                dx = 0.0
                dy = 0.0
            else:
                dx = dt * e1 / mag
                dy = dt * e2 / mag
        else:
            dx = e1 * dt
            dy = e2 * dt
        if not (math.hypot(dx, dy) >= stag_eps):
            pts[count, 0] = x
            pts[count, 1] = y
            return pts, count + 1, TRACE_STAGNATED
        xn = x + dx
        yn = y + dy
        inside, f1, f2, r = _locate(n1, n2, o1, h1, h2, polar, xn, yn)
        if not inside:
            return pts, count, TRACE_LEFT_DOMAIN
        x = xn
        y = yn
        pts[count, 0] = x
        pts[count, 1] = y
        count += 1
        i = _cell_index(f1, n1)
        k = _cell_index(f2, n2)
        if cellpin[i, k] != 0:
            if armed:
                return pts, count, TRACE_REACHED_ELECTRODE
        else:
            armed = True
        if use_band:
            v = _bilinear(values, i, k, f1, f2)
            if band_lo <= v <= band_hi:
                return pts, count, TRACE_REACHED_ELECTRODE
    return pts, count, TRACE_MAX_STEPS
