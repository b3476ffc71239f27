"""Matrix-free cascadic-multigrid solver for the 3D biharmonic equation.

The solver discretizes ``biharmonic(u) = f`` on the unit cube with a
second-order 25-point stencil (Dirichlet data of first or second kind,
eliminated through ghost-node reflection), marches a one-way coarse-to-fine
cascade whose initial guesses come from Richardson extrapolation plus
quadratic interpolation of the two previous solutions, polishes each level
with preconditioned Bi-CG, and finally extrapolates the two finest solutions
into a higher-order approximation of the true solution.
"""

from .cascade import (
    ExcmgConfig,
    LevelReport,
    RunMode,
    RunReport,
    convergence_orders,
    excmg_run,
    tolerance_schedule,
    work_units,
)
from .extrapolate import (
    NaturalCoord,
    fd_midpoint_extrap,
    fd_node_extrap,
    fd_quarter_extrap,
    higher_order_solution,
    predict_fine_solution,
    richardson_midpoint,
    richardson_node,
    shape27,
    triquadratic_eval,
)
from .grid import (
    Field,
    GridSpec,
    Hierarchy,
    build_hierarchy,
    dump_field_csv,
    inner_product,
    node_position,
    norm,
    restrict_inject,
)
from .problems import (
    ManufacturedProblem,
    get_problem,
    oracle_biharmonic,
    sample_boundary,
    sample_exact,
    sample_forcing,
    validate_forcing,
)
from .report import emit_report, error_ratio, format_sci, render_csv, render_markdown
from .solvers import (
    BicgStats,
    PrecondKind,
    bicg_solve,
    dsolve,
    make_preconditioner,
)
from .stencil import (
    BcKind,
    BoundaryData,
    DiscreteSystem,
    apply_operator,
    apply_stencil_raw,
    apply_transpose,
    assemble_system,
    build_rhs,
    fill_ghosts,
    paint_boundary,
    residual,
    verify_ghosts,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
