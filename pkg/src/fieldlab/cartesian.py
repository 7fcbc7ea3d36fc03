"""Relaxation solver for the Cartesian Poisson equation with varying permittivity.

The node update solves the central-difference form of

    d/dx(eps dphi/dx) + d/dy(eps dphi/dy) = -kappa * rho

for the centre value, with ``kappa`` standing in for ``1/eps0`` (1 by default,
the convention in which charge density is given directly in
volts per squared cell).

Two stencils are available.  ``"nodal"`` keeps permittivity at the nodes and
expands the divergence into ``eps*lap(phi) + grad(eps).grad(phi)``; this is
the default.  ``"conservative"`` uses harmonic means of neighbouring nodes as
face permittivities, which preserves the flux ``eps*dphi/dn`` across sharp
dielectric interfaces where the nodal form does not.  The nodal weights
stay positive only while ``|epsE - epsW| < 4*eps`` at every node, so a jump
of 1:5 or more between neighbours cuts the low side off from the high side.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .grid import (
    BoundarySpec,
    CoordSystem,
    Dirichlet,
    FixedMask,
    GridError,
    GridSpec,
    RasterizedScene,
    ScalarField,
    apply_boundaries,
    new_field,
)


class SolverError(ValueError):
    """Solver inputs that cannot be relaxed (bad permittivity, bad config)."""


class DivergenceError(RuntimeError):
    def __init__(self, iteration: int, detail: str = ""):
        self.iteration = iteration
        msg = f"relaxation diverged at iteration {iteration}: non-finite potential"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class Direction(str, enum.Enum):
    """Node traversal order of one Gauss-Seidel pass.

    The digits give the outer and inner loop axes; forward runs both loops
    upward, reverse runs both downward.  With a five-point stencil the two
    forward orders give identical results, as do the two reverse orders.
    """

    FORWARD_12 = "forward12"
    REVERSE_12 = "reverse12"
    FORWARD_21 = "forward21"
    REVERSE_21 = "reverse21"

    @property
    def code(self) -> int:
        return _ORDER_CODES[self]

    @property
    def reverse(self) -> bool:
        return self in (Direction.REVERSE_12, Direction.REVERSE_21)


_ORDER_CODES = {Direction.FORWARD_12: 0, Direction.REVERSE_12: 1,
                Direction.FORWARD_21: 2, Direction.REVERSE_21: 3}

FOUR_DIRECTIONS = (Direction.FORWARD_12, Direction.REVERSE_12,
                   Direction.FORWARD_21, Direction.REVERSE_21)
# forward then backward: two passes per iteration
TWO_PASS = (Direction.FORWARD_12, Direction.REVERSE_21)

STENCILS = ("nodal", "conservative")
ITERATIONS = ("gauss-seidel", "jacobi")


@dataclass(frozen=True)
class SolveConfig:
    """Iteration controls shared by all relaxation solvers.

    One iteration runs every direction in ``sweep_schedule`` once, each
    preceded by re-imposing the boundary conditions.  The solve stops when the
    largest node change of an iteration drops below ``tolerance``.
    """

    max_iterations: int = 50_000
    tolerance: float = 1e-6
    sweep_schedule: tuple[Direction, ...] = FOUR_DIRECTIONS
    report_every: int = 100
    iteration: str = "gauss-seidel"
    stencil: str = "nodal"
    # axisymmetric only; None means 0.001 * h1
    r_guard: float | None = None
    init: float = 0.0
    keep_snapshots: bool = False

    def __post_init__(self):
        schedule = tuple(Direction(d) for d in self.sweep_schedule)
        object.__setattr__(self, "sweep_schedule", schedule)
        if not schedule:
            raise SolverError("sweep_schedule must not be empty")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise SolverError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        if not (self.tolerance >= 0 and math.isfinite(self.tolerance)):
            raise SolverError(f"tolerance must be finite and >= 0, got {self.tolerance!r}")
        if int(self.report_every) != self.report_every or self.report_every < 1:
            raise SolverError(f"report_every must be a positive integer, got {self.report_every!r}")
        object.__setattr__(self, "report_every", int(self.report_every))
        if self.iteration not in ITERATIONS:
            raise SolverError(f"iteration must be one of {ITERATIONS}, got {self.iteration!r}")
        if self.stencil not in STENCILS:
            raise SolverError(f"stencil must be one of {STENCILS}, got {self.stencil!r}")
        if self.r_guard is not None and not self.r_guard >= 0:
            raise SolverError(f"r_guard must be >= 0, got {self.r_guard!r}")
        if not math.isfinite(self.init):
            raise SolverError("init must be finite")


@dataclass
class SolveResult:
    potential: ScalarField
    iterations_run: int
    converged: bool
    residual_history: list[tuple[int, float]] = field(default_factory=list)
    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1][1] if self.residual_history else math.nan


@dataclass
class Stencil:
    """Per-node weights of a five-point update (see :mod:`fieldlab.kernels`)."""

    we: np.ndarray
    ww: np.ndarray
    wn: np.ndarray
    ws: np.ndarray
    src: np.ndarray

    @classmethod
    def zeros(cls, shape):
        return cls(*(np.zeros(shape) for _ in range(5)))

    def apply(self, phi: np.ndarray, i: int, j: int) -> float:
        return float(self.we[i, j] * phi[i + 1, j] + self.ww[i, j] * phi[i - 1, j]
                     + self.wn[i, j] * phi[i, j + 1] + self.ws[i, j] * phi[i, j - 1] + self.src[i, j])


def _values(a) -> np.ndarray:
    return a.values if isinstance(a, ScalarField) else np.asarray(a, dtype=float)


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


def _check_eps(eps: np.ndarray):
    if not np.isfinite(eps).all():
        raise SolverError("permittivity must be finite")
    if (eps <= 0).any():
        bad = np.argwhere(eps <= 0)[0]
        raise SolverError(f"permittivity must be positive; eps{tuple(int(k) for k in bad)}={eps[tuple(bad)]}")


def update_node_2d(phi, eps, rho, i: int, j: int, h: float = 1.0, kappa: float = 1.0) -> float:
    """New potential at interior node ``(i, j)`` from the nodal stencil.

    Evaluates, with ``E/W`` the axis-1 and ``N/S`` the axis-2 neighbours,

        (phiE + phiW + phiN + phiS + kappa*rho*h**2/eps) / 4
          + ((epsE - epsW)*(phiE - phiW) + (epsN - epsS)*(phiN - phiS)) / (16*eps)
    """
    p, e, r = _values(phi), _values(eps), _values(rho)
    n1, n2 = p.shape
    if not (0 < i < n1 - 1 and 0 < j < n2 - 1):
        raise GridError(f"node ({i}, {j}) is not interior to a {n1}x{n2} grid")
    ec = e[i, j]
    if not ec > 0:
        raise SolverError(f"permittivity must be positive at ({i}, {j}), got {ec}")
    average = (p[i + 1, j] + p[i - 1, j] + p[i, j + 1] + p[i, j - 1] + kappa * r[i, j] * h * h / ec) / 4
    gradient = ((e[i + 1, j] - e[i - 1, j]) * (p[i + 1, j] - p[i - 1, j])
                + (e[i, j + 1] - e[i, j - 1]) * (p[i, j + 1] - p[i, j - 1])) / (16 * ec)
    return float(average + gradient)


def cartesian_stencil(eps, rho, h1: float, h2: float, kappa: float = 1.0,
                      stencil: str = "nodal") -> Stencil:
    e = _values(eps)
    r = _values(rho)
    _check_eps(e)
    st = Stencil.zeros(e.shape)
    c = (slice(1, -1), slice(1, -1))
    ec = e[c]
    eE, eW, eN, eS = e[2:, 1:-1], e[:-2, 1:-1], e[1:-1, 2:], e[1:-1, :-2]
    c1, c2 = 1.0 / (h1 * h1), 1.0 / (h2 * h2)
    if stencil == "nodal":
        diag = 2.0 * (c1 + c2)
        g1 = (eE - eW) / (4.0 * ec)
        g2 = (eN - eS) / (4.0 * ec)
        st.we[c] = c1 * (1.0 + g1) / diag
        st.ww[c] = c1 * (1.0 - g1) / diag
        st.wn[c] = c2 * (1.0 + g2) / diag
        st.ws[c] = c2 * (1.0 - g2) / diag
        st.src[c] = kappa * r[c] / (ec * diag)
    elif stencil == "conservative":
        fE, fW, fN, fS = (_harmonic(ec, x) for x in (eE, eW, eN, eS))
        diag = c1 * (fE + fW) + c2 * (fN + fS)
        st.we[c] = c1 * fE / diag
        st.ww[c] = c1 * fW / diag
        st.wn[c] = c2 * fN / diag
        st.ws[c] = c2 * fS / diag
        st.src[c] = kappa * r[c] / diag
    else:
        raise SolverError(f"unknown stencil {stencil!r}")
    return st


def line_stencil(eps, rho, h: float, kappa: float = 1.0, stencil: str = "nodal"):
    """Weights ``(we, ww, src)`` of the 1D update along a line of nodes."""
    e = np.asarray(eps, dtype=float)
    r = np.asarray(rho, dtype=float)
    _check_eps(e)
    we, ww, src = np.zeros_like(e), np.zeros_like(e), np.zeros_like(e)
    ec, eE, eW = e[1:-1], e[2:], e[:-2]
    if stencil == "nodal":
        g = (eE - eW) / (4.0 * ec)
        we[1:-1] = 0.5 * (1.0 + g)
        ww[1:-1] = 0.5 * (1.0 - g)
        src[1:-1] = kappa * r[1:-1] * h * h / (2.0 * ec)
    elif stencil == "conservative":
        fE, fW = _harmonic(ec, eE), _harmonic(ec, eW)
        we[1:-1] = fE / (fE + fW)
        ww[1:-1] = fW / (fE + fW)
        src[1:-1] = kappa * r[1:-1] * h * h / (fE + fW)
    else:
        raise SolverError(f"unknown stencil {stencil!r}")
    return we, ww, src


def _free_nodes(spec: GridSpec, mask: FixedMask | None) -> np.ndarray:
    free = np.ones(spec.shape, dtype=np.bool_)
    if mask is not None:
        free &= ~mask.pinned
    return free


def sweep(phi: ScalarField, eps, rho, mask: FixedMask | None, direction: Direction,
          h: float | None = None, kappa: float = 1.0, stencil: str = "nodal") -> ScalarField:
    """One in-place Gauss-Seidel pass over the free interior nodes of ``phi``."""
    e, r = _values(eps), _values(rho)
    for name, a in (("eps", e), ("rho", r)):
        if a.shape != phi.shape:
            raise GridError(f"{name} dimensions {a.shape} do not match field {phi.shape}")
    if mask is not None and mask.shape != phi.shape:
        raise GridError(f"mask dimensions {mask.shape} do not match field {phi.shape}")
    h1 = phi.spec.h1 if h is None else h
    h2 = phi.spec.h2 if h is None else h
    st = cartesian_stencil(e, r, h1, h2, kappa, stencil)
    free = _free_nodes(phi.spec, mask)
    kernels.gs_sweep(phi.values, st.we, st.ww, st.wn, st.ws, st.src, free, Direction(direction).code)
    return phi


def relax(phi: ScalarField, st: Stencil, bc: BoundarySpec, mask: FixedMask | None,
          config: SolveConfig,
          before_pass: Callable[[ScalarField], None] | None = None) -> SolveResult:
    """Iterate ``st`` on ``phi`` in place until converged or out of budget.

    ``before_pass`` runs after the boundary conditions are re-imposed and
    before each pass (curvilinear solvers use it for ghost lines).
    """
    one_d = phi.spec.system is CoordSystem.CARTESIAN_1D
    free = _free_nodes(phi.spec, mask)
    jacobi = config.iteration == "jacobi"
    v = phi.values
    if one_d:
        line, fline = v[0], free[0]
        we, ww, src = st.we[0], st.ww[0], st.src[0]

    def one_pass(direction: Direction) -> float:
        if one_d:
            if jacobi:
                out = line.copy()
                change = kernels.jacobi_line(line, out, we, ww, src, fline)
                line[:] = out
                return change
            return kernels.gs_line(line, we, ww, src, fline, direction.reverse)
        if jacobi:
            out = v.copy()
            change = kernels.jacobi_sweep(v, out, st.we, st.ww, st.wn, st.ws, st.src, free)
            v[...] = out
            return change
        return kernels.gs_sweep(v, st.we, st.ww, st.wn, st.ws, st.src, free, direction.code)

    history: list[tuple[int, float]] = []
    snapshots: list[tuple[int, np.ndarray]] = []
    if config.keep_snapshots:
        apply_boundaries(phi, bc, mask)
        snapshots.append((0, v.copy()))
    converged = False
    iteration = 0
    change = math.inf
    for iteration in range(1, config.max_iterations + 1):
        change = 0.0
        for direction in config.sweep_schedule:
            apply_boundaries(phi, bc, mask)
            if before_pass is not None:
                before_pass(phi)
            c = one_pass(direction)
            if not math.isfinite(c):
                raise DivergenceError(iteration, f"pass {direction.value}")
            change = max(change, c)
        if iteration == 1 or iteration % config.report_every == 0:
            history.append((iteration, change))
            if config.keep_snapshots:
                snapshots.append((iteration, v.copy()))
        if change < config.tolerance:
            converged = True
            break
    apply_boundaries(phi, bc, mask)
    if before_pass is not None:
        before_pass(phi)
    if not np.isfinite(v).all():
        raise DivergenceError(iteration, "after final boundary update")
    if not history or history[-1][0] != iteration:
        history.append((iteration, change))
        if config.keep_snapshots:
            snapshots.append((iteration, v.copy()))
    return SolveResult(phi, iteration, converged, history, snapshots)


def solve_2d(scene: RasterizedScene, config: SolveConfig = SolveConfig()) -> SolveResult:
    spec = scene.spec
    if spec.system is not CoordSystem.CARTESIAN_2D:
        raise SolverError(f"solve_2d needs a cartesian2d grid, got {spec.system.value}")
    st = cartesian_stencil(scene.eps, scene.rho, spec.h1, spec.h2, scene.kappa, config.stencil)
    phi = new_field(spec, config.init)
    return relax(phi, st, scene.bc, scene.mask, config)


def solve_1d(eps: Sequence[float], rho: Sequence[float], left: float, right: float,
             config: SolveConfig = SolveConfig(), h: float = 1.0, kappa: float = 1.0,
             mask: FixedMask | None = None) -> SolveResult:
    """Relax a line of nodes between two Dirichlet plates.

    The result field has shape ``(1, n)``.  With ``config.keep_snapshots``
    the intermediate profiles are kept every ``report_every`` iterations.
    """
    e = np.asarray(eps, dtype=float).ravel()
    r = np.asarray(rho, dtype=float).ravel()
    if e.shape != r.shape:
        raise GridError(f"eps has {e.size} nodes but rho has {r.size}")
    spec = GridSpec(1, e.size, h, h, CoordSystem.CARTESIAN_1D)
    we, ww, src = line_stencil(e, r, h, kappa, config.stencil)
    st = Stencil(we[None, :], ww[None, :], np.zeros((1, e.size)), np.zeros((1, e.size)), src[None, :])
    bc = BoundarySpec(low2=Dirichlet(left), high2=Dirichlet(right))
    phi = new_field(spec, config.init)
    return relax(phi, st, bc, mask, config)
