"""Finite-difference electrostatics on structured grids.

Relaxation solvers for the Poisson equation with varying permittivity on
Cartesian (1D and 2D), polar and axisymmetric grids, plus field-line
tracing, equipotential extraction, a JSON scene format and file writers.
"""
from .analysis import (
    FieldVector,
    Polyline,
    Termination,
    TraceConfig,
    default_levels,
    extract_equipotentials,
    field_at,
    field_magnitude_grid,
    potential_at,
    trace_field_line,
    trace_field_lines,
)
from .cartesian import (
    FOUR_DIRECTIONS,
    TWO_PASS,
    Direction,
    DivergenceError,
    SolveConfig,
    SolveResult,
    SolverError,
    solve_1d,
    solve_2d,
    sweep,
    update_node_2d,
)
from .curvilinear import (
    AxisymProblem,
    PolarProblem,
    solve_axisym,
    solve_polar,
    update_node_axisym,
    update_node_polar,
)
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
    apply_boundaries,
    max_abs_diff,
    new_field,
)
from .scene import (
    Scene,
    SceneError,
    load_scene,
    parse_scene,
    preset,
    preset_names,
    rasterize,
    serialize_scene,
    solve_scene,
)
from .writers import OutputError, read_field_csv, write_field_csv, write_field_pgm, write_lines_svg

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
