"""Grid containers and boundary handling shared by every solver.

Arrays are indexed ``values[i, j]`` with ``i`` running along the first axis
(x or r) and ``j`` along the second (y, angle or z).  Node ``(i, j)`` sits at
grid coordinates ``(origin1 + i*h1, j*h2)`` where ``origin1`` is ``r0`` for the
curvilinear systems and 0 otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


class GridError(ValueError):
    """Invalid grid description or mismatched grid dimensions."""


class CoordSystem(str, enum.Enum):
    CARTESIAN_2D = "cartesian2d"
    CARTESIAN_1D = "cartesian1d"
    POLAR = "polar"
    AXISYMMETRIC = "axisymmetric"

    @property
    def curvilinear(self) -> bool:
        return self in (CoordSystem.POLAR, CoordSystem.AXISYMMETRIC)


@dataclass(frozen=True)
class GridSpec:
    """Node counts, spacings and coordinate system of a structured grid.

    A 1D grid is stored as a single row, ``n1 == 1``, with the line running
    along the second axis.  For polar grids ``h2`` is the angular step in
    radians and ``r0`` the radius of the ``i == 0`` arc.
    """

    n1: int
    n2: int
    h1: float = 1.0
    h2: float = 1.0
    system: CoordSystem = CoordSystem.CARTESIAN_2D
    r0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "system", CoordSystem(self.system))
        for name in ("n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise GridError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.system is CoordSystem.CARTESIAN_1D:
            if self.n1 != 1:
                raise GridError(f"a 1D grid is a single row (n1 == 1), got n1={self.n1}")
        elif self.n1 < 3:
            raise GridError(f"n1 must be >= 3, got {self.n1}")
        if self.n2 < 3:
            raise GridError(f"n2 must be >= 3, got {self.n2}")
        for name in ("h1", "h2", "r0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise GridError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.h1 <= 0 or self.h2 <= 0:
            raise GridError(f"spacings must be positive, got h1={self.h1}, h2={self.h2}")
        if self.system is CoordSystem.POLAR:
            if self.r0 <= 0:
                raise GridError(f"polar grids need r0 > 0 (the stencil is singular at r=0), got {self.r0}")
            if self.h2 * self.n2 > 2 * math.pi + 1e-12:
                raise GridError(f"angular extent h2*n2={self.h2 * self.n2:.6g} exceeds 2*pi")
        elif self.system is CoordSystem.AXISYMMETRIC:
            if self.r0 < 0:
                raise GridError(f"axisymmetric grids need r0 >= 0, got {self.r0}")
        elif self.r0 != 0:
            raise GridError("r0 only applies to polar and axisymmetric grids")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def origin1(self) -> float:
        return self.r0

    def coords1(self) -> np.ndarray:
        return self.r0 + self.h1 * np.arange(self.n1)

    def coords2(self) -> np.ndarray:
        return self.h2 * np.arange(self.n2)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """``(lo1, hi1, lo2, hi2)`` in grid coordinates."""
        return (self.r0, self.r0 + (self.n1 - 1) * self.h1, 0.0, (self.n2 - 1) * self.h2)

    def to_plane(self, u1, u2):
        """Map grid coordinates to the drawing plane.

        Polar grids map ``(r, angle)`` to ``(r cos a, r sin a)``; every other
        system is drawn in its own grid plane.
        """
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if self.system is CoordSystem.POLAR:
            return u1 * np.cos(u2), u1 * np.sin(u2)
        return u1, u2

    def from_plane(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.system is CoordSystem.POLAR:
            return np.hypot(x, y), np.arctan2(y, x)
        return x, y


@dataclass
class ScalarField:
    """Dense 2D array of node values (potential, permittivity or charge).

    ``centering="cell"`` marks derived fields sampled at cell centres; those
    have one fewer entry along each axis than the node grid in ``spec``.
    """

    spec: GridSpec
    values: np.ndarray
    centering: str = "node"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.centering == "node":
            expected = self.spec.shape
        elif self.centering == "cell":
            expected = (max(self.spec.n1 - 1, 1), self.spec.n2 - 1)
        else:
            raise GridError(f"unknown centering {self.centering!r}")
        if self.values.shape != expected:
            raise GridError(f"values have shape {self.values.shape}, grid expects {expected}")
        if not np.isfinite(self.values).all():
            raise GridError("field values must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def copy(self) -> ScalarField:
        return ScalarField(self.spec, self.values.copy(), self.centering)


def new_field(spec: GridSpec, init: float = 0.0) -> ScalarField:
    if not math.isfinite(init):
        raise GridError(f"initial value must be finite, got {init!r}")
    return ScalarField(spec, np.full(spec.shape, float(init)))


@dataclass(frozen=True)
class Dirichlet:
    value: float


@dataclass(frozen=True)
class DirichletProfile:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class Neumann:
    """Zero normal derivative: the edge copies the adjacent interior line."""


EdgeCondition = Union[Dirichlet, DirichletProfile, Neumann]
EDGES = ("low1", "high1", "low2", "high2")


@dataclass(frozen=True)
class BoundarySpec:
    """Conditions on the four grid edges.

    ``low1``/``high1`` are the lines ``i == 0`` and ``i == n1-1``;
    ``low2``/``high2`` are ``j == 0`` and ``j == n2-1``.  Edges are applied in
    that order, so a corner shared by two Dirichlet edges takes the value of
    the axis-2 edge.  1D grids only use ``low2`` and ``high2``.
    """

    low1: EdgeCondition = field(default_factory=Neumann)
    high1: EdgeCondition = field(default_factory=Neumann)
    low2: EdgeCondition = field(default_factory=Neumann)
    high2: EdgeCondition = field(default_factory=Neumann)

    @classmethod
    def uniform(cls, cond: EdgeCondition) -> BoundarySpec:
        return cls(cond, cond, cond, cond)

    def edges(self):
        return [(name, getattr(self, name)) for name in EDGES]


class FixedMask:
    """Nodes whose potential is pinned (electrodes, conductors, fixed points).

    Stored as a float array where ``NaN`` marks a free node.
    """

    def __init__(self, values):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2:
            raise GridError("mask must be two dimensional")
        if np.isinf(values).any():
            raise GridError("pinned potentials must be finite")
        self.values = values

    @classmethod
    def empty(cls, spec: GridSpec) -> FixedMask:
        return cls(np.full(spec.shape, np.nan))

    @property
    def shape(self):
        return self.values.shape

    @property
    def pinned(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def pin(self, i: int, j: int, volts: float) -> FixedMask:
        self.values[i, j] = float(volts)
        return self

    def __len__(self):
        return int(self.pinned.sum())

    def __eq__(self, other):
        if not isinstance(other, FixedMask):
            return NotImplemented
        return self.values.shape == other.values.shape and np.array_equal(
            self.values, other.values, equal_nan=True)

    def __repr__(self):
        return f"FixedMask(shape={self.shape}, pinned={len(self)})"


def _check_shape(a_shape, b_shape, what):
    if tuple(a_shape) != tuple(b_shape):
        raise GridError(f"{what} dimensions {tuple(b_shape)} do not match field {tuple(a_shape)}")


def _apply_edge(v: np.ndarray, name: str, cond: EdgeCondition):
    axis = 0 if name.endswith("1") else 1
    low = name.startswith("low")
    n = v.shape[axis]
    edge = 0 if low else n - 1
    inner = 1 if low else n - 2
    sl_edge = (edge, slice(None)) if axis == 0 else (slice(None), edge)
    sl_inner = (inner, slice(None)) if axis == 0 else (slice(None), inner)
    if isinstance(cond, Neumann):
        v[sl_edge] = v[sl_inner]
    elif isinstance(cond, Dirichlet):
        v[sl_edge] = cond.value
    elif isinstance(cond, DirichletProfile):
        length = v.shape[1 - axis]
        if len(cond.values) != length:
            raise GridError(f"profile on {name} has {len(cond.values)} values, edge has {length} nodes")
        v[sl_edge] = cond.values
    else:
        raise GridError(f"unknown boundary condition {cond!r} on {name}")


def apply_boundaries(phi: ScalarField, bc: BoundarySpec, mask: FixedMask | None = None) -> ScalarField:
    """Impose edge conditions and pinned nodes on ``phi`` in place.

    Pins are written before the edges (so Neumann copies see conductor
    potentials) and again afterwards (so conductors win ties with edges).
    """
    v = phi.values
    pinned = None
    if mask is not None:
        _check_shape(v.shape, mask.shape, "mask")
        pinned = mask.pinned
        v[pinned] = mask.values[pinned]
    one_d = phi.spec.system is CoordSystem.CARTESIAN_1D
    for name, cond in bc.edges():
        if one_d and name.endswith("1"):
            continue
        _apply_edge(v, name, cond)
    if pinned is not None:
        v[pinned] = mask.values[pinned]
    return phi


def boundary_mask(spec: GridSpec) -> np.ndarray:
    """Boolean array marking the edge nodes that boundary conditions own."""
    owned = np.zeros(spec.shape, dtype=bool)
    owned[:, 0] = owned[:, -1] = True
    if spec.system is not CoordSystem.CARTESIAN_1D:
        owned[0, :] = owned[-1, :] = True
    return owned


@dataclass
class RasterizedScene:
    """Co-registered solver inputs produced from a scene description."""

    spec: GridSpec
    eps: ScalarField
    rho: ScalarField
    mask: FixedMask
    bc: BoundarySpec
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("eps", "rho"):
            _check_shape(self.spec.shape, getattr(self, name).shape, name)
        _check_shape(self.spec.shape, self.mask.shape, "mask")


def max_abs_diff(a: ScalarField, b: ScalarField) -> float:
    _check_shape(a.shape, b.shape, "second field")
    return float(np.max(np.abs(a.values - b.values)))
