"""Relaxation solvers in polar ``(r, angle)`` and axisymmetric ``(r, z)`` grids.

Both systems take a single uniform relative permittivity.  Angular and axis
symmetry conditions are ordinary Neumann edges of the grid: the ghost lines
``j == 0`` / ``j == n2-1`` (polar rays) and ``i == 0`` (symmetry axis) copy
their interior neighbours before every pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cartesian import SolveConfig, SolveResult, SolverError, Stencil, _values, relax
from .grid import (
    BoundarySpec,
    CoordSystem,
    FixedMask,
    GridError,
    GridSpec,
    RasterizedScene,
    ScalarField,
    new_field,
)


def _check_scalar_eps(eps) -> float:
    arr = np.asarray(_values(eps), dtype=float)
    if arr.ndim and arr.size and np.ptp(arr) != 0:
        raise SolverError("varying permittivity is not supported in polar or axisymmetric grids; "
                          "use a single uniform value")
    value = float(arr.flat[0]) if arr.ndim else float(arr)
    if not (value > 0 and math.isfinite(value)):
        raise SolverError(f"permittivity must be positive and finite, got {value}")
    return value


@dataclass
class PolarProblem:
    """Quarter-disc style problem on a polar grid.

    ``bc.low1`` is the inner arc, ``bc.high1`` the outer arc and
    ``bc.low2``/``bc.high2`` the two bounding rays.
    """

    spec: GridSpec
    eps: float = 1.0
    rho: ScalarField | None = None
    mask: FixedMask | None = None
    bc: BoundarySpec = field(default_factory=BoundarySpec)
    kappa: float = 1.0

    def __post_init__(self):
        if self.spec.system is not CoordSystem.POLAR:
            raise GridError(f"PolarProblem needs a polar grid, got {self.spec.system.value}")
        self.eps = _check_scalar_eps(self.eps)
        if self.rho is None:
            self.rho = new_field(self.spec, 0.0)
        if self.mask is None:
            self.mask = FixedMask.empty(self.spec)


@dataclass
class AxisymProblem:
    """Axially symmetric problem in the ``(r, z)`` half plane.

    Axis 1 is ``r`` with the symmetry axis at ``i == 0``; axis 2 is ``z``.
    """

    spec: GridSpec
    eps: float = 1.0
    rho: ScalarField | None = None
    mask: FixedMask | None = None
    bc: BoundarySpec = field(default_factory=BoundarySpec)
    kappa: float = 1.0

    def __post_init__(self):
        if self.spec.system is not CoordSystem.AXISYMMETRIC:
            raise GridError(f"AxisymProblem needs an axisymmetric grid, got {self.spec.system.value}")
        self.eps = _check_scalar_eps(self.eps)
        if self.rho is None:
            self.rho = new_field(self.spec, 0.0)
        if self.mask is None:
            self.mask = FixedMask.empty(self.spec)


def update_node_polar(phi, rho, i: int, j: int, r0: float, dr: float, dal: float,
                      eps: float = 1.0, kappa: float = 1.0) -> float:
    p, q = _values(phi), _values(rho)
    n1, n2 = p.shape
    if not (0 < i < n1 - 1 and 0 < j < n2 - 1):
        raise GridError(f"node ({i}, {j}) is not interior to a {n1}x{n2} grid")
    r = r0 + i * dr
    if r <= 0:
        raise SolverError(f"radius at node ({i}, {j}) is {r}; the polar stencil needs r > 0")
    ang = 1.0 / (r * r * dal * dal)
    rad = 1.0 / (dr * dr)
    rhs = ((p[i + 1, j] - p[i - 1, j]) / (2 * r * dr) + (p[i + 1, j] + p[i - 1, j]) * rad
           + (p[i, j + 1] + p[i, j - 1]) * ang + kappa * q[i, j] / eps)
    return float(rhs / (2 * (ang + rad)))


def default_r_guard(h: float) -> float:
    return 0.001 * h


def update_node_axisym(phi, rho, i: int, k: int, h: float = 1.0, eps: float = 1.0,
                       kappa: float = 1.0, r_guard: float | None = None, r0: float = 0.0) -> float:
    """Axisymmetric update on a square grid; ``r = r0 + h*i + r_guard``."""
    p, q = _values(phi), _values(rho)
    n1, n2 = p.shape
    if not (0 < i < n1 - 1 and 0 < k < n2 - 1):
        raise GridError(f"node ({i}, {k}) is not interior to a {n1}x{n2} grid")
    guard = default_r_guard(h) if r_guard is None else r_guard
    r = r0 + h * i + guard
    return float(h * (p[i + 1, k] - p[i - 1, k]) / (8 * r)
                 + (p[i - 1, k] + p[i + 1, k] + p[i, k - 1] + p[i, k + 1]) / 4
                 + kappa * q[i, k] * h * h / (4 * eps))


def polar_stencil(spec: GridSpec, rho, eps: float, kappa: float = 1.0) -> Stencil:
    q = _values(rho)
    st = Stencil.zeros(spec.shape)
    r = spec.coords1()[1:-1, None]
    rad = 1.0 / (spec.h1 * spec.h1)
    ang = 1.0 / (r * r * spec.h2 * spec.h2)
    skew = 1.0 / (2.0 * r * spec.h1)
    diag = 2.0 * (ang + rad)
    c = (slice(1, -1), slice(1, -1))
    st.we[c] = np.broadcast_to((rad + skew) / diag, st.we[c].shape)
    st.ww[c] = np.broadcast_to((rad - skew) / diag, st.ww[c].shape)
    st.wn[c] = np.broadcast_to(ang / diag, st.wn[c].shape)
    st.ws[c] = st.wn[c]
    st.src[c] = kappa * q[c] / (eps * diag)
    return st


def axisym_stencil(spec: GridSpec, rho, eps: float, kappa: float = 1.0,
                   r_guard: float | None = None) -> Stencil:
    q = _values(rho)
    guard = default_r_guard(spec.h1) if r_guard is None else r_guard
    st = Stencil.zeros(spec.shape)
    r = spec.coords1()[1:-1, None] + guard
    if (r <= 0).any():
        raise SolverError("axisymmetric radius must be positive at interior nodes")
    rad = 1.0 / (spec.h1 * spec.h1)
    ax = 1.0 / (spec.h2 * spec.h2)
    skew = 1.0 / (2.0 * r * spec.h1)
    diag = 2.0 * (rad + ax)
    c = (slice(1, -1), slice(1, -1))
    shape = st.we[c].shape
    st.we[c] = np.broadcast_to((rad + skew) / diag, shape)
    st.ww[c] = np.broadcast_to((rad - skew) / diag, shape)
    st.wn[c] = ax / diag
    st.ws[c] = ax / diag
    st.src[c] = kappa * q[c] / (eps * diag)
    return st


def solve_polar(p: PolarProblem, config: SolveConfig = SolveConfig()) -> SolveResult:
    st = polar_stencil(p.spec, p.rho, p.eps, p.kappa)
    phi = new_field(p.spec, config.init)
    return relax(phi, st, p.bc, p.mask, config)


def solve_axisym(p: AxisymProblem, config: SolveConfig = SolveConfig()) -> SolveResult:
    st = axisym_stencil(p.spec, p.rho, p.eps, p.kappa, config.r_guard)
    phi = new_field(p.spec, config.init)
    return relax(phi, st, p.bc, p.mask, config)


def polar_problem(scene: RasterizedScene) -> PolarProblem:
    return PolarProblem(scene.spec, _check_scalar_eps(scene.eps), scene.rho, scene.mask,
                        scene.bc, scene.kappa)


def axisym_problem(scene: RasterizedScene) -> AxisymProblem:
    return AxisymProblem(scene.spec, _check_scalar_eps(scene.eps), scene.rho, scene.mask,
                         scene.bc, scene.kappa)
